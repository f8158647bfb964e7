"""Finite-difference Newton solver for traveling-wave profiles.

The wave equation ``d_i u_i'' + theta u_i' + u_i**l_i f_i(u) = 0`` is
truncated to ``[-L, L]`` with the end states imposed as Dirichlet data and
discretized with second-order central differences.  Unknowns are the
interior values ordered node-major (``u_1, ..., u_n`` at node 1, then at
node 2, ...), which makes the Jacobian banded with bandwidth ``n`` on both
sides.

Fixed speed solves the banded system directly.  Free speed appends
``theta`` as an unknown and closes the system with a phase condition at
``x = 0``; that bordered matrix is no longer banded and is factored with a
sparse LU.  Two phase conditions are available:

``"jump"`` (default)
    ``c . u(0) = c . (left + right) / 2`` with ``c = left - right``: the
    state sits halfway along the jump direction.  For the swap-symmetric
    Lotka-Volterra front this is ``u(0) = v(0)``, which the symmetric
    profile satisfies.
``"species"``
    ``u_p(0) = (left_p + right_p) / 2`` for ``p = phase_species``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .model import (
    Equilibrium,
    LV2Params,
    SystemSpec,
    equilibrium_by_label,
    is_equilibrium,
    lv2_system,
    source_terms,
)

log = logging.getLogger(__name__)

PIVOT_RTOL = 1e-13


@dataclass(frozen=True)
class SolveConfig:
    L: float = 30.0
    h: float = 0.05
    newton_tol: float = 1e-10
    max_iter: int = 50
    damping: float = 0.5
    min_step: float = 2.0**-20
    # max deviation from the end states allowed at distance boundary_offset
    # from each end; None disables the boundary-layer test
    boundary_tol: Optional[float] = 1e-3
    boundary_offset: float = 1.0
    phase: str = "jump"
    phase_species: int = 0

    def __post_init__(self):
        if self.phase not in ("jump", "species"):
            raise ValueError(f"phase must be 'jump' or 'species', got {self.phase!r}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not 0 < self.h <= self.L:
            raise ValueError("h must satisfy 0 < h <= L")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        n_cells = 2.0 * self.L / self.h
        if abs(n_cells - round(n_cells)) > 1e-9 * n_cells:
            raise ValueError(f"h={self.h} does not divide the domain length 2L={2 * self.L}")

    @property
    def n_cells(self) -> int:
        return int(round(2.0 * self.L / self.h))

    def grid(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n_cells + 1)


@dataclass(frozen=True)
class WaveProfile:
    grid: np.ndarray
    values: np.ndarray  # shape (n, N+1)
    theta: float
    left_state: str
    right_state: str
    residual_norm: float = float("nan")
    iterations: int = 0
    boundary_defect: float = float("nan")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def L(self) -> float:
        return float(self.grid[-1])


@dataclass
class SolveDiagnostic:
    reason: str
    iterations: int
    residual_norm: float
    theta: float
    values: Optional[np.ndarray] = field(default=None, repr=False)


class SolveError(RuntimeError):
    def __init__(self, message: str, diagnostic: SolveDiagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


class ConvergenceError(SolveError):
    pass


class SingularJacobianError(SolveError):
    pass


class BoundaryLayerError(SolveError):
    pass


class ContinuationError(RuntimeError):
    def __init__(self, message: str, step: int, value: float, profiles: list[WaveProfile]):
        super().__init__(message)
        self.step = step
        self.value = value
        self.profiles = profiles


# --- discrete operator -------------------------------------------------------


def _operator(spec: SystemSpec, values: np.ndarray, h: float, theta: float) -> np.ndarray:
    d = np.asarray(spec.d)[:, None]
    left, mid, right = values[:, :-2], values[:, 1:-1], values[:, 2:]
    diff2 = (right - 2.0 * mid + left) / h**2
    diff1 = (right - left) / (2.0 * h)
    return d * diff2 + theta * diff1 + source_terms(spec, mid)


def residual(spec: SystemSpec, profile: WaveProfile) -> np.ndarray:
    """Discrete operator at interior nodes, shape ``(n, N-1)``."""
    values = np.asarray(profile.values, dtype=float)
    if values.ndim != 2 or values.shape[0] != spec.n:
        raise ValueError(f"profile has {values.shape[0]} species, system has {spec.n}")
    if values.shape[1] != profile.grid.size or profile.grid.size < 3:
        raise ValueError("profile values do not match its grid")
    return _operator(spec, values, profile.h, profile.theta)


def _source_jacobian(spec: SystemSpec, mid: np.ndarray) -> np.ndarray:
    """``d(u_i**l_i f_i)/du_k`` at every column of ``mid``, shape ``(n, n, M)``."""
    if spec.reaction_jacobian is None:
        raise ValueError("the solver needs a system with an analytic reaction_jacobian")
    l = np.asarray(spec.l)
    if np.any(l < 1):
        raise ValueError("the solver supports reaction exponents l_i >= 1 only")
    n, m = mid.shape
    f = spec.reaction(mid)
    df = np.asarray(spec.reaction_jacobian(mid), dtype=float)
    if df.shape != (n, n, m):
        df = np.broadcast_to(df.reshape(n, n, -1), (n, n, m))
    lcol = l[:, None]
    ul = mid**lcol
    jac = ul[:, None, :] * df
    dul = np.where(lcol == 1.0, 1.0, lcol * mid ** (lcol - 1.0))
    idx = np.arange(n)
    jac[idx, idx, :] += dul * f
    return jac


def _assemble(spec: SystemSpec, values: np.ndarray, h: float, theta: float):
    """Triplets ``(rows, cols, vals)`` of the interior Jacobian plus the theta column."""
    n, npts = values.shape
    m = npts - 2
    size = n * m
    d = np.asarray(spec.d)
    node = np.repeat(np.arange(m), n)
    spc = np.tile(np.arange(n), m)
    row = node * n + spc

    rows, cols, vals = [], [], []
    lo = node > 0
    rows.append(row[lo])
    cols.append(row[lo] - n)
    vals.append((d[spc] / h**2 - theta / (2.0 * h))[lo])
    hi = node < m - 1
    rows.append(row[hi])
    cols.append(row[hi] + n)
    vals.append((d[spc] / h**2 + theta / (2.0 * h))[hi])

    sj = _source_jacobian(spec, values[:, 1:-1])  # (n, n, m)
    for k in range(n):
        rows.append(row)
        cols.append(node * n + k)
        v = sj[spc, k, node].copy()
        v[spc == k] -= 2.0 * d[k] / h**2
        vals.append(v)

    dtheta = ((values[:, 2:] - values[:, :-2]) / (2.0 * h)).T.reshape(-1)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), size, dtheta


def _to_banded(rows, cols, vals, size: int, bw: int) -> np.ndarray:
    ab = np.zeros((2 * bw + 1, size))
    np.add.at(ab, (bw + rows - cols, cols), vals)
    return ab


# --- helpers -----------------------------------------------------------------


def tanh_guess(x: np.ndarray, left: Sequence[float], right: Sequence[float], width: float = 1.0) -> np.ndarray:
    s = 0.5 * (1.0 + np.tanh(x / width))
    left = np.asarray(left, dtype=float)[:, None]
    right = np.asarray(right, dtype=float)[:, None]
    return left + (right - left) * s[None, :]


def _initial_values(cfg: SolveConfig, x: np.ndarray, left: Equilibrium, right: Equilibrium, initial) -> np.ndarray:
    if initial is None:
        values = tanh_guess(x, left.state, right.state)
    else:
        src_x = np.asarray(initial.grid)
        if src_x.shape == x.shape and np.allclose(src_x, x, rtol=0, atol=1e-12 * cfg.L):
            values = np.array(initial.values, dtype=float)
        else:
            values = np.array([np.interp(x, src_x, row) for row in initial.values])
    values[:, 0] = left.state
    values[:, -1] = right.state
    return np.maximum(values, 0.0)


def _pack(values: np.ndarray) -> np.ndarray:
    return values[:, 1:-1].T.reshape(-1).copy()


def _unpack(z: np.ndarray, template: np.ndarray) -> np.ndarray:
    out = template.copy()
    n = template.shape[0]
    out[:, 1:-1] = z.reshape(-1, n).T
    return out


def _phase_weights(x: np.ndarray) -> tuple[int, int, float]:
    """Interior nodes bracketing x=0 and the interpolation weight on the right one."""
    j = int(np.searchsorted(x, 0.0))
    if x[j] == 0.0:
        return j, j, 0.0
    w = (0.0 - x[j - 1]) / (x[j] - x[j - 1])
    return j - 1, j, w


def _check_ends(spec: SystemSpec, left: Equilibrium, right: Equilibrium) -> None:
    if spec.reaction_jacobian is None:
        raise ValueError("the solver needs a system with an analytic reaction_jacobian")
    if any(l < 1 for l in spec.l):
        raise ValueError("the solver supports reaction exponents l_i >= 1 only")
    for name, e in (("left", left), ("right", right)):
        if len(e.state) != spec.n:
            raise ValueError(f"{name} state has {len(e.state)} components, system has {spec.n}")
        if not is_equilibrium(spec, e.state, tol=1e-10):
            raise ValueError(f"{name} state {e.state} is not an equilibrium of the system")


def _boundary_defect(cfg: SolveConfig, x: np.ndarray, values: np.ndarray, left, right) -> float:
    jl = int(np.argmin(np.abs(x - (x[0] + cfg.boundary_offset))))
    jr = int(np.argmin(np.abs(x - (x[-1] - cfg.boundary_offset))))
    return float(
        max(
            np.max(np.abs(values[:, jl] - np.asarray(left.state))),
            np.max(np.abs(values[:, jr] - np.asarray(right.state))),
        )
    )


def _finish(spec, cfg, x, values, theta, left, right, rnorm, it) -> WaveProfile:
    defect = _boundary_defect(cfg, x, values, left, right)
    if cfg.boundary_tol is not None and defect > cfg.boundary_tol:
        diag = SolveDiagnostic("boundary_layer", it, rnorm, theta, values)
        raise BoundaryLayerError(
            f"converged profile deviates from the end states by {defect:.3g} at distance "
            f"{cfg.boundary_offset} from the boundary (front pushed into the boundary?)",
            diag,
        )
    return WaveProfile(x, values, float(theta), left.label, right.label, rnorm, it, defect)


# --- solvers -----------------------------------------------------------------


def solve_fixed_speed(
    spec: SystemSpec,
    left: Equilibrium,
    right: Equilibrium,
    cfg: SolveConfig = SolveConfig(),
    initial: Optional[WaveProfile] = None,
) -> WaveProfile:
    """Damped Newton at the speed stored in ``spec``.

    Raises :class:`ConvergenceError` when the residual does not reach
    ``cfg.newton_tol`` and :class:`BoundaryLayerError` when the converged
    profile is not close to the end states near the domain ends.
    """
    _check_ends(spec, left, right)
    x = cfg.grid()
    h = x[1] - x[0]
    theta = spec.theta
    values = _initial_values(cfg, x, left, right, initial)
    n = spec.n

    res = _operator(spec, values, h, theta)
    rnorm = float(np.max(np.abs(res)))
    it = 0
    while rnorm > cfg.newton_tol:
        if it >= cfg.max_iter:
            raise ConvergenceError(
                f"no convergence after {it} Newton iterations (residual {rnorm:.3e})",
                SolveDiagnostic("max_iter", it, rnorm, theta, values),
            )
        rows, cols, vals, size, _ = _assemble(spec, values, h, theta)
        ab = _to_banded(rows, cols, vals, size, n)
        with np.errstate(all="ignore"):
            try:
                step = solve_banded((n, n), ab, -res.T.reshape(-1))
            except np.linalg.LinAlgError as exc:
                raise SingularJacobianError(
                    f"singular Jacobian at iteration {it}: {exc}",
                    SolveDiagnostic("singular_jacobian", it, rnorm, theta, values),
                ) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobianError(
                f"non-finite Newton step at iteration {it}",
                SolveDiagnostic("singular_jacobian", it, rnorm, theta, values),
            )
        values, res, rnorm, _ = _line_search(spec, values, res, step, None, h, theta, cfg, it)
        it += 1
        log.debug("fixed-speed iter %d residual %.3e", it, rnorm)
    return _finish(spec, cfg, x, values, theta, left, right, rnorm, it)


def _line_search(spec, values, res, step, dtheta, h, theta, cfg, it, phase=None):
    """Backtracking on the 2-norm merit; trial states are projected onto u >= 0."""
    z = _pack(values)
    merit = float(np.sum(res**2)) + (phase[0] ** 2 if phase is not None else 0.0)
    t = 1.0
    while t >= cfg.min_step:
        trial = _unpack(np.maximum(z + t * step, 0.0), values)
        th = theta if dtheta is None else theta + t * dtheta
        with np.errstate(all="ignore"):
            r = _operator(spec, trial, h, th)
        extra = phase[1](trial) ** 2 if phase is not None else 0.0
        new_merit = float(np.sum(r**2)) + extra
        if np.isfinite(new_merit) and new_merit < merit:
            rnorm = float(np.max(np.abs(r)))
            if phase is not None:
                rnorm = max(rnorm, abs(phase[1](trial)))
            return trial, r, rnorm, th
        t *= cfg.damping
    rnorm = float(np.max(np.abs(res)))
    raise ConvergenceError(
        f"line search failed at iteration {it} (residual {rnorm:.3e})",
        SolveDiagnostic("line_search", it, rnorm, theta, values),
    )


def solve_free_speed(
    spec: SystemSpec,
    left: Equilibrium,
    right: Equilibrium,
    cfg: SolveConfig = SolveConfig(),
    initial: Optional[WaveProfile] = None,
    theta0: Optional[float] = None,
) -> WaveProfile:
    """Newton on profile and speed together, anchored by a phase condition at x = 0.

    The Jacobian is factored at least once, so a speed that the data cannot
    determine is reported as :class:`SingularJacobianError` even when the
    initial guess already has zero residual.
    """
    _check_ends(spec, left, right)
    x = cfg.grid()
    h = x[1] - x[0]
    n = spec.n
    left_s, right_s = np.asarray(left.state), np.asarray(right.state)
    if cfg.phase == "species":
        if not 0 <= cfg.phase_species < n:
            raise ValueError(f"phase_species {cfg.phase_species} out of range")
        c = np.zeros(n)
        c[cfg.phase_species] = 1.0
    else:
        c = left_s - right_s
        if np.any(c):
            c = c / np.max(np.abs(c))
    theta = spec.theta if theta0 is None else float(theta0)
    if initial is not None and theta0 is None:
        theta = initial.theta
    values = _initial_values(cfg, x, left, right, initial)
    target = 0.5 * float(c @ (left_s + right_s))
    ja, jb, w = _phase_weights(x)

    def phase_res(vals: np.ndarray) -> float:
        return float(c @ ((1.0 - w) * vals[:, ja] + w * vals[:, jb]) - target)

    size = n * (x.size - 2)
    prow_cols = np.concatenate([(ja - 1) * n + np.arange(n), (jb - 1) * n + np.arange(n)])
    prow_vals = np.concatenate([(1.0 - w) * c, w * c])

    res = _operator(spec, values, h, theta)
    rnorm = max(float(np.max(np.abs(res))), abs(phase_res(values)))
    it = 0
    while True:
        rows, cols, vals, _, dtheta = _assemble(spec, values, h, theta)
        rows = np.concatenate([rows, np.arange(size), np.full(2 * n, size)])
        cols = np.concatenate([cols, np.full(size, size), prow_cols])
        vals = np.concatenate([vals, dtheta, prow_vals])
        mat = sp.csc_matrix((vals, (rows, cols)), shape=(size + 1, size + 1))
        try:
            lu = splu(mat)
        except RuntimeError as exc:
            raise SingularJacobianError(
                f"singular augmented Jacobian at iteration {it}: {exc}",
                SolveDiagnostic("singular_jacobian", it, rnorm, theta, values),
            ) from exc
        piv = np.abs(lu.U.diagonal())
        if piv.min() <= PIVOT_RTOL * piv.max():
            raise SingularJacobianError(
                f"augmented Jacobian numerically singular at iteration {it} "
                f"(pivot ratio {piv.min() / piv.max():.1e}); is the phase condition degenerate?",
                SolveDiagnostic("singular_jacobian", it, rnorm, theta, values),
            )
        if rnorm <= cfg.newton_tol:
            break
        if it >= cfg.max_iter:
            raise ConvergenceError(
                f"no convergence after {it} Newton iterations (residual {rnorm:.3e})",
                SolveDiagnostic("max_iter", it, rnorm, theta, values),
            )
        rhs = -np.concatenate([res.T.reshape(-1), [phase_res(values)]])
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise SingularJacobianError(
                f"non-finite Newton step at iteration {it}",
                SolveDiagnostic("singular_jacobian", it, rnorm, theta, values),
            )
        values, res, rnorm, theta = _line_search(
            spec, values, res, sol[:-1], sol[-1], h, theta, cfg, it,
            phase=(phase_res(values), phase_res),
        )
        it += 1
        log.debug("free-speed iter %d residual %.3e theta %.8f", it, rnorm, theta)
    return _finish(spec, cfg, x, values, theta, left, right, rnorm, it)


# --- continuation ------------------------------------------------------------

_CONTINUABLE = ("a", "a1", "a2", "kappa", "d1", "d2", "theta")


def lv2_with(base: LV2Params, parameter: str, value: float) -> LV2Params:
    if parameter not in _CONTINUABLE:
        raise ValueError(f"cannot continue in {parameter!r}; choose one of {_CONTINUABLE}")
    if parameter == "a":
        return replace(base, a1=value, a2=value)
    return replace(base, **{parameter: value})


def continuation(
    base: LV2Params,
    parameter: str,
    schedule: Sequence[float],
    left: str = "e2",
    right: str = "e3",
    cfg: SolveConfig = SolveConfig(),
    free_speed: bool = True,
    initial: Optional[WaveProfile] = None,
) -> list[WaveProfile]:
    """Solve along a monotone schedule, warm-starting each step from the last.

    ``parameter="a"`` moves ``a1 = a2 = a`` together.  A degenerate step
    (``a1*a2 == 1``, where the coexistence state disappears into a line of
    equilibria) or a failed solve raises :class:`ContinuationError` carrying
    the profiles computed so far.
    """
    schedule = [float(v) for v in schedule]
    diffs = np.diff(schedule)
    if len(schedule) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("continuation schedule must be strictly monotone")
    profiles: list[WaveProfile] = []
    prev = initial
    for step, value in enumerate(schedule):
        params = lv2_with(base, parameter, value)
        if params.a1 * params.a2 == 1.0:
            raise ContinuationError(
                f"degenerate system at {parameter}={value}: a1*a2 = 1", step, value, profiles
            )
        spec, _, eqs = lv2_system(params)
        e_left, e_right = equilibrium_by_label(eqs, left), equilibrium_by_label(eqs, right)
        solve = solve_free_speed if free_speed else solve_fixed_speed
        try:
            prof = solve(spec, e_left, e_right, cfg, prev)
        except SolveError as exc:
            raise ContinuationError(
                f"step {step} ({parameter}={value}) failed: {exc}", step, value, profiles
            ) from exc
        profiles.append(prof)
        prev = prof
    return profiles


def swap_symmetry_defect(profile: WaveProfile) -> float:
    """``max_j |u(x_j) - v(-x_j)|`` for a two-species profile on a symmetric grid."""
    if profile.n != 2:
        raise ValueError("swap symmetry needs two species")
    if not np.allclose(profile.grid, -profile.grid[::-1], atol=1e-12 * profile.L):
        raise ValueError("grid is not symmetric about 0")
    return float(np.max(np.abs(profile.values[0] - profile.values[1][::-1])))


def constant_profile(
    state: Sequence[float], cfg: SolveConfig = SolveConfig(), theta: float = 0.0, label: str = "custom"
) -> WaveProfile:
    """Profile equal to ``state`` at every node (an exact solution when ``state`` is an equilibrium)."""
    x = cfg.grid()
    values = np.repeat(np.asarray(state, dtype=float)[:, None], x.size, axis=1)
    return WaveProfile(x, values, float(theta), label, label, boundary_defect=0.0)
