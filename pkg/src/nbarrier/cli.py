"""Command-line entry point.

Subcommands: ``bounds``, ``hypothesis``, ``solve``, ``check``, ``sweep``.
Every flag has a same-named key (dashes become underscores) in the optional
``--config`` JSON file; flags override file values.

Exit status: 0 on success, 2 when a bound check has a margin below
``-tol``, 1 on any operational error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import __version__
from .bounds import (
    BoundParams,
    linear_lv_bounds,
    lower_bound_equal_diffusion,
    lower_levels,
    upper_bound_product,
    upper_bound_sum,
    upper_levels,
)
from .hypotheses import check_h1, check_h2
from .io import build_summary, read_profile_csv, write_profile_csv, write_summary_json
from .model import LV2Params, equilibrium_by_label, lv2_system
from .solver import (
    ContinuationError,
    SolveConfig,
    SolveError,
    continuation,
    lv2_with,
    solve_fixed_speed,
    solve_free_speed,
)
from .verify import (
    check_linear_lv,
    check_lower_bound,
    check_upper_bounds,
    classify_profile,
    conformance_sweep,
)


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"invalid value for '{field}': {message}")
        self.field = field


def _floats(value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    return tuple(float(p) for p in parts)


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "1", "yes"):
        return True
    if isinstance(value, str) and value.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _opt_float(value: Any) -> Optional[float]:
    return None if value is None or value == "none" else float(value)


# key -> (coercion, default, help)
OPTIONS: dict[str, tuple[Callable[[Any], Any], Any, str]] = {
    "model": (str, "lv2", "named system (only 'lv2')"),
    "a1": (float, 2.0, "competition coefficient a1"),
    "a2": (float, 2.0, "competition coefficient a2"),
    "kappa": (float, 1.0, "growth-rate ratio"),
    "d": (_floats, (1.0, 1.0), "diffusion rates, comma separated"),
    "theta": (float, 0.0, "wave speed (fixed speed) or initial speed guess (free speed)"),
    "alpha": (_floats, None, "weights alpha_i (default all 1)"),
    "k": (_floats, None, "shifts k_i for the lower bound (default all 1)"),
    "m": (_floats, None, "exponents m_i >= 1 for the upper bound (default all 1)"),
    "wave": (str, "e2-e3", "end states as '<left>-<right>' equilibrium labels"),
    "free_speed": (_bool, False, "solve for the wave speed"),
    "L": (float, 30.0, "domain half-length"),
    "h": (float, 0.05, "grid spacing"),
    "newton_tol": (float, 1e-10, "Newton residual tolerance"),
    "max_iter": (int, 50, "Newton iteration cap"),
    "phase": (str, "jump", "free-speed phase condition: jump | species"),
    "boundary_tol": (_opt_float, 1e-3, "allowed end-state deviation one unit from each end ('none' disables)"),
    "out": (str, None, "output file (profile CSV for solve)"),
    "summary": (str, None, "summary JSON path"),
    "profile": (str, None, "profile CSV to check"),
    "seed": (int, 0, "random seed"),
    "budget": (int, 100_000, "sample budget for the hypothesis fallback"),
    "box_factor": (float, 4.0, "H2 sampling box in units of the thresholds"),
    "sampling": (_bool, False, "force the sampling path for hypotheses"),
    "tol": (float, 1e-8, "margin tolerance for exit status 2"),
    "classify_tol": (float, 1e-8, "tolerance for upper/lower solution classification"),
    "sweep_draws": (int, 0, "random (k, alpha, m) draws per profile in check/sweep"),
    "param": (str, "a", "continuation parameter: a | a1 | a2 | kappa | d1 | d2 | theta"),
    "schedule": (_floats, None, "continuation values, comma separated"),
    "out_dir": (str, None, "directory for per-step profile CSVs in sweep"),
}
BOOL_FLAGS = ("free_speed", "sampling")


def _coerce(key: str, value: Any) -> Any:
    if key not in OPTIONS:
        raise ConfigError(key, "unknown configuration key")
    if value is None:
        return None
    try:
        return OPTIONS[key][0](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def resolve_config(file_values: dict, flag_values: dict) -> dict:
    cfg = {key: spec[1] for key, spec in OPTIONS.items()}
    for source in (file_values, flag_values):
        for key, value in source.items():
            cfg[key] = _coerce(key, value)
    return cfg


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbarrier", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("bounds", "print every closed-form bound for the system"),
        ("hypothesis", "check the sign hypotheses H1 and H2"),
        ("solve", "compute a traveling-wave profile"),
        ("check", "check the bounds along a profile CSV"),
        ("sweep", "continuation in one parameter with checks at each step"),
    ):
        p = sub.add_parser(name, help=text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file with option values")
        for key, (_, default, help_text) in OPTIONS.items():
            flag = "--" + key.replace("_", "-")
            if key in BOOL_FLAGS:
                p.add_argument(flag, dest=key, action="store_const", const=True, help=help_text)
            else:
                p.add_argument(flag, dest=key, help=f"{help_text} (default: {default})")
    return parser


# --- shared construction -----------------------------------------------------


def _system(cfg: dict):
    if cfg["model"] != "lv2":
        raise ConfigError("model", f"unknown model {cfg['model']!r}; available: lv2")
    d = cfg["d"]
    if len(d) != 2:
        raise ConfigError("d", f"lv2 needs two diffusion rates, got {len(d)}")
    try:
        params = LV2Params(cfg["a1"], cfg["a2"], cfg["kappa"], d[0], d[1], cfg["theta"])
    except ValueError as exc:
        field = str(exc).split()[0]
        field = "d" if field in ("d1", "d2") else field
        raise ConfigError(field if field in OPTIONS else "model", str(exc)) from None
    spec, region, eqs = lv2_system(params)
    return params, spec, region, eqs


def _weights(cfg: dict, key: str, n: int) -> tuple[float, ...]:
    value = cfg[key] if cfg[key] is not None else (1.0,) * n
    if len(value) != n:
        raise ConfigError(key, f"expected {n} values, got {len(value)}")
    return value


def _solve_config(cfg: dict) -> SolveConfig:
    try:
        return SolveConfig(
            L=cfg["L"], h=cfg["h"], newton_tol=cfg["newton_tol"], max_iter=cfg["max_iter"],
            boundary_tol=cfg["boundary_tol"], phase=cfg["phase"],
        )
    except ValueError as exc:
        raise ConfigError("solve config", str(exc)) from None


def _wave_labels(cfg: dict) -> tuple[str, str]:
    parts = cfg["wave"].split("-")
    if len(parts) != 2:
        raise ConfigError("wave", f"expected '<left>-<right>', got {cfg['wave']!r}")
    return parts[0], parts[1]


def _system_doc(params: LV2Params, region, eqs) -> dict:
    return {
        "model": "lv2",
        "params": asdict(params),
        "thresholds": {"lower": region.lower, "upper": region.upper},
        "equilibria": [{"label": e.label, "state": e.state} for e in eqs],
    }


def _profile_checks(profile, spec, region, params, alpha, k, m) -> list:
    checks = [check_lower_bound(profile, spec, region, BoundParams(alpha=alpha, k=k))]
    checks.extend(check_upper_bounds(profile, spec, region, alpha, m))
    checks.append(check_linear_lv(profile, params.a1, params.a2, k[0], k[1]))
    return checks


def _sweep_checks(profile, spec, region, cfg) -> list:
    if cfg["sweep_draws"] <= 0:
        return []
    s = conformance_sweep(profile, spec, region, draws=cfg["sweep_draws"], seed=cfg["seed"], classify_tol=cfg["classify_tol"])
    return [r for r in (s.worst_lower, s.worst_upper_sum, s.worst_upper_product) if r is not None]


def _print_checks(checks, out) -> None:
    for c in checks:
        status = "ok" if c.margin >= 0 else "VIOLATED"
        print(
            f"{c.bound_kind:14s} bound={c.bound_value:.12g} extremal={c.extremal_value:.12g} "
            f"margin={c.margin:.3e} at x={c.location:.4g} [{status}]",
            file=out,
        )


def _emit(cfg: dict, doc: dict, default_path: Optional[Path] = None) -> None:
    path = cfg["summary"] or default_path
    if path is not None:
        write_summary_json(path, doc)


# --- commands ----------------------------------------------------------------


def cmd_bounds(cfg: dict, out) -> int:
    params, spec, region, eqs = _system(cfg)
    n = spec.n
    alpha, k, m = _weights(cfg, "alpha", n), _weights(cfg, "k", n), _weights(cfg, "m", n)
    bp = BoundParams(alpha=alpha, k=k, m=m)
    lo = lower_levels(spec.d, bp, region.lower)
    up = upper_levels(spec.d, alpha, m, region.upper)
    bounds = {
        "lower": {
            "lambda2": lo.lambda2, "eta": lo.eta, "lambda1": lo.lambda1,
            "product_bound": float(np.exp(lo.lambda1)),
            "exponents": [a * d for a, d in zip(alpha, spec.d)],
        },
        "upper": {
            "lambda2": up.lambda2, "eta": up.eta, "lambda1": up.lambda1,
            "sum_bound": upper_bound_sum(spec.d, alpha, m, region.upper),
            "product_bound": upper_bound_product(spec.d, alpha, m, region.upper),
        },
        "linear_lv": dict(zip(("lower", "upper"), linear_lv_bounds(k[0], k[1], params.a1, params.a2))),
        "params": {"alpha": alpha, "k": k, "m": m},
    }
    if len(set(spec.d)) == 1:
        bounds["lower"]["equal_diffusion_bound"] = lower_bound_equal_diffusion(bp, region.lower)
    b = bounds
    print(f"lower: prod (u_i+k_i)^(d_i*alpha_i) >= {b['lower']['product_bound']:.12g}"
          f"  (lambda2={lo.lambda2:.12g}, eta={lo.eta:.12g}, lambda1={lo.lambda1:.12g})", file=out)
    if "equal_diffusion_bound" in b["lower"]:
        print(f"lower (equal diffusion): prod (u_i+k_i)^alpha_i >= {b['lower']['equal_diffusion_bound']:.12g}", file=out)
    print(f"upper: sum alpha_i u_i^m_i <= {b['upper']['sum_bound']:.12g}", file=out)
    print(f"upper: prod u_i^(m_i/n) <= {b['upper']['product_bound']:.12g}", file=out)
    print(f"linear: {b['linear_lv']['lower']:.12g} <= k2*u + k1*v <= {b['linear_lv']['upper']:.12g}", file=out)
    _emit(cfg, build_summary(_system_doc(params, region, eqs), bounds=bounds))
    return 0


def cmd_hypothesis(cfg: dict, out) -> int:
    params, spec, region, eqs = _system(cfg)
    force = cfg["sampling"]
    reports = [
        check_h1(spec, region, budget=cfg["budget"], seed=cfg["seed"], force_sampling=force),
        check_h2(spec, region, box_factor=cfg["box_factor"], budget=cfg["budget"], seed=cfg["seed"], force_sampling=force),
    ]
    for r in reports:
        print(f"{r.hypothesis}: holds={r.holds} method={r.method} worst={r.worst_value:.6g} at {r.worst_point}", file=out)
    _emit(cfg, build_summary(_system_doc(params, region, eqs), hypotheses=reports, seed=cfg["seed"]))
    return 0


def cmd_solve(cfg: dict, out) -> int:
    params, spec, region, eqs = _system(cfg)
    left_label, right_label = _wave_labels(cfg)
    try:
        left, right = equilibrium_by_label(eqs, left_label), equilibrium_by_label(eqs, right_label)
    except KeyError as exc:
        raise ConfigError("wave", str(exc)) from None
    scfg = _solve_config(cfg)
    solve = solve_free_speed if cfg["free_speed"] else solve_fixed_speed
    profile = solve(spec, left, right, scfg)
    out_path = Path(cfg["out"] or "wave.csv")
    write_profile_csv(profile, out_path)
    solver_doc = {
        "free_speed": cfg["free_speed"], "theta": profile.theta, "residual_norm": profile.residual_norm,
        "iterations": profile.iterations, "boundary_defect": profile.boundary_defect,
        "L": scfg.L, "h": scfg.h, "phase": scfg.phase, "left": left_label, "right": right_label,
        "profile": str(out_path),
    }
    print(f"theta={profile.theta:.12g} residual={profile.residual_norm:.3e} iterations={profile.iterations} -> {out_path}", file=out)
    _emit(cfg, build_summary(_system_doc(params, region, eqs), solver=solver_doc), out_path.with_suffix(".json"))
    return 0


def cmd_check(cfg: dict, out) -> int:
    if not cfg["profile"]:
        raise ConfigError("profile", "check needs --profile")
    profile = read_profile_csv(cfg["profile"])
    cfg = dict(cfg, theta=profile.theta)
    params, spec, region, eqs = _system(cfg)
    n = spec.n
    if profile.n != n:
        raise ConfigError("profile", f"profile has {profile.n} species, model has {n}")
    alpha, k, m = _weights(cfg, "alpha", n), _weights(cfg, "k", n), _weights(cfg, "m", n)
    cls = classify_profile(profile, spec, cfg["classify_tol"])
    checks = _profile_checks(profile, spec, region, params, alpha, k, m)
    checks += _sweep_checks(profile, spec, region, cfg)
    _print_checks(checks, out)
    print(f"upper solution: {cls.is_upper_solution}, lower solution: {cls.is_lower_solution} (tol {cls.tol:g})", file=out)
    doc = build_summary(
        _system_doc(params, region, eqs), checks=checks,
        solver={"profile": cfg["profile"], "theta": profile.theta, "classification": cls},
        seed=cfg["seed"],
    )
    _emit(cfg, doc)
    return 2 if any(c.margin < -cfg["tol"] for c in checks) else 0


def cmd_sweep(cfg: dict, out) -> int:
    params, spec, region, eqs = _system(cfg)
    if not cfg["schedule"]:
        raise ConfigError("schedule", "sweep needs --schedule")
    left_label, right_label = _wave_labels(cfg)
    scfg = _solve_config(cfg)
    n = spec.n
    alpha, k, m = _weights(cfg, "alpha", n), _weights(cfg, "k", n), _weights(cfg, "m", n)
    error = None
    try:
        profiles = continuation(params, cfg["param"], cfg["schedule"], left_label, right_label, scfg, cfg["free_speed"])
    except ContinuationError as exc:
        profiles, error = exc.profiles, str(exc)
    except KeyError as exc:
        raise ConfigError("wave", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("param", str(exc)) from None

    steps, all_checks = [], []
    out_dir = Path(cfg["out_dir"]) if cfg["out_dir"] else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for i, (value, prof) in enumerate(zip(cfg["schedule"], profiles)):
        p_i = lv2_with(params, cfg["param"], value)
        spec_i, region_i, eqs_i = lv2_system(p_i)
        checks = _profile_checks(prof, spec_i, region_i, p_i, alpha, k, m)
        checks += _sweep_checks(prof, spec_i, region_i, cfg)
        all_checks.extend(checks)
        e4 = next((e.state for e in eqs_i if e.label == "e4"), None)
        step = {
            "value": value, "theta": prof.theta, "residual_norm": prof.residual_norm,
            "equilibrium_product": None if e4 is None else e4[0] * e4[1],
            "max_uv": float(np.max(prof.values[0] * prof.values[1])),
            "min_margin": min(c.margin for c in checks),
        }
        if out_dir is not None:
            path = out_dir / f"step{i:03d}.csv"
            write_profile_csv(prof, path)
            step["profile"] = str(path)
        steps.append(step)
        print(f"{cfg['param']}={value:.6g} theta={prof.theta:.3e} max uv={step['max_uv']:.6g} "
              f"u*v*={step['equilibrium_product']} min margin={step['min_margin']:.3e}", file=out)
    doc = build_summary(
        _system_doc(params, region, eqs), checks=all_checks,
        solver={"parameter": cfg["param"], "schedule": cfg["schedule"], "steps": steps, "error": error},
        seed=cfg["seed"],
    )
    _emit(cfg, doc)
    if error is not None:
        print(f"error: {error}", file=sys.stderr)
        return 1
    return 2 if any(c.margin < -cfg["tol"] for c in all_checks) else 0


COMMANDS = {
    "bounds": cmd_bounds,
    "hypothesis": cmd_hypothesis,
    "solve": cmd_solve,
    "check": cmd_check,
    "sweep": cmd_sweep,
}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = vars(_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        file_values = {}
        if config_path:
            try:
                file_values = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("config", str(exc)) from None
            if not isinstance(file_values, dict):
                raise ConfigError("config", "top level must be a JSON object")
            file_values.pop("command", None)
        cfg = resolve_config(file_values, args)
        return COMMANDS[command](cfg, out)
    except (ConfigError, SolveError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
