import numpy as np
import pytest

from nbarrier.model import LV2Params, equilibrium_by_label, lv2_system
from nbarrier.solver import SolveConfig, solve_fixed_speed, solve_free_speed


def lv(a1=2.0, a2=2.0, **kw):
    spec, region, eqs = lv2_system(LV2Params(a1, a2, **kw))
    return spec, region, {e.label: e for e in eqs}


@pytest.fixture(scope="session")
def sym_system():
    return lv(2.0, 2.0)


@pytest.fixture(scope="session")
def sym_wave(sym_system):
    spec, _, eq = sym_system
    return solve_free_speed(spec, eq["e2"], eq["e3"], SolveConfig(L=30, h=0.05))


@pytest.fixture(scope="session")
def sym_wave_fixed(sym_system):
    spec, _, eq = sym_system
    return solve_fixed_speed(spec, eq["e2"], eq["e3"], SolveConfig(L=30, h=0.05))


@pytest.fixture(scope="session")
def asym_waves():
    """Free-speed e2->e3 waves for a1=2, a2=4 at h = 0.1 and 0.05."""
    spec, region, eq = lv(2.0, 4.0)
    out = {}
    for h in (0.1, 0.05):
        out[h] = solve_free_speed(spec, eq["e2"], eq["e3"], SolveConfig(L=30, h=h))
    return spec, region, out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report --------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one verdict per criterion; printed in the terminal summary."""

    def record(number: int, name: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE[number] = (name, bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} {detail}")
        assert passed, f"criterion {number} ({name}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
