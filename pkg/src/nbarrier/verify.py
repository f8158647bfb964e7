"""Pointwise checks of the a priori bounds along computed wave profiles.

Every check reports a signed margin (nonnegative means the bound holds on
all grid nodes).  Nothing is clamped, so violated bounds show up as data.
Checks are nodal only; no interpolation between grid points.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bounds import (
    BoundParams,
    linear_lv_bounds,
    lower_levels,
    upper_bound_product,
    upper_bound_sum,
)
from .model import HypothesisRegion, SystemSpec
from .solver import WaveProfile, residual

DEFAULT_CLASSIFY_TOL = 1e-8


@dataclass
class BoundCheckReport:
    bound_kind: str  # lower_product | upper_sum | upper_product | linear_lv
    bound_value: float
    extremal_value: float
    margin: float
    location: float
    params: dict = field(default_factory=dict)
    # lower_product: q_min - lambda1, finite even when the bound overflows
    log_margin: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolutionClass:
    is_upper_solution: bool
    is_lower_solution: bool
    tol: float
    max_residual: tuple[float, ...]
    min_residual: tuple[float, ...]


def _values(profile: WaveProfile, n: int) -> np.ndarray:
    values = np.asarray(profile.values, dtype=float)
    if values.shape[0] != n:
        raise ValueError(f"profile has {values.shape[0]} species, expected {n}")
    return values


def check_lower_bound(
    profile: WaveProfile, spec: SystemSpec, region: HypothesisRegion, bp: BoundParams
) -> BoundCheckReport:
    """Minimum over nodes of ``prod (u_i + k_i) ** (d_i alpha_i)`` against ``exp(lambda1)``."""
    if region.lower is None:
        raise ValueError("lower-bound check needs the H1 thresholds")
    levels = lower_levels(spec.d, bp, region.lower)
    u = _values(profile, spec.n)
    w = (np.asarray(bp.alpha) * np.asarray(spec.d))[:, None]
    q = np.sum(w * np.log(u + np.asarray(bp.k)[:, None]), axis=0)
    j = int(np.argmin(q))
    gap = float(q[j] - levels.lambda1)
    with np.errstate(over="ignore"):
        bound = float(np.exp(levels.lambda1))
        extremal = float(np.exp(q[j]))
    if math.isfinite(bound):
        margin = bound * math.expm1(gap) if gap < 700 else math.inf
    else:
        margin = math.copysign(math.inf, gap) if gap != 0 else 0.0
    return BoundCheckReport(
        "lower_product", bound, extremal, margin, float(profile.grid[j]),
        params={"k": list(bp.k), "alpha": list(bp.alpha), "d": list(spec.d)},
        log_margin=gap,
        extra={"lambda2": levels.lambda2, "eta": levels.eta, "lambda1": levels.lambda1},
    )


def check_upper_bounds(
    profile: WaveProfile, spec: SystemSpec, region: HypothesisRegion, alpha, m
) -> tuple[BoundCheckReport, BoundCheckReport]:
    """Maxima of ``sum alpha_i u_i**m_i`` and ``prod u_i**(m_i/n)`` against their bounds."""
    if region.upper is None:
        raise ValueError("upper-bound check needs the H2 thresholds")
    bp = BoundParams(alpha=alpha, m=m)
    alpha_c = np.asarray(bp.alpha)[:, None]
    m_c = np.asarray(bp.m)[:, None]
    u = _values(profile, spec.n)
    n = spec.n
    params = {"alpha": list(bp.alpha), "m": list(bp.m), "d": list(spec.d)}

    s = np.sum(alpha_c * u**m_c, axis=0)
    js = int(np.argmax(s))
    s_bound = upper_bound_sum(spec.d, bp.alpha, bp.m, region.upper)
    sum_report = BoundCheckReport(
        "upper_sum", s_bound, float(s[js]), s_bound - float(s[js]), float(profile.grid[js]), params
    )

    prod = np.prod(u ** (m_c / n), axis=0)
    jp = int(np.argmax(prod))
    p_bound = upper_bound_product(spec.d, bp.alpha, bp.m, region.upper)
    prod_report = BoundCheckReport(
        "upper_product", p_bound, float(prod[jp]), p_bound - float(prod[jp]), float(profile.grid[jp]), dict(params)
    )
    return sum_report, prod_report


def check_linear_lv(profile: WaveProfile, a1: float, a2: float, k1: float = 1.0, k2: float = 1.0) -> BoundCheckReport:
    """Two-sided check of ``k2*u + k1*v``; the margin is the smaller one-sided margin."""
    if profile.n != 2:
        raise ValueError("the linear Lotka-Volterra bound needs a two-species profile")
    lo, hi = linear_lv_bounds(k1, k2, a1, a2)
    u, v = np.asarray(profile.values, dtype=float)
    w = k2 * u + k1 * v
    jmin, jmax = int(np.argmin(w)), int(np.argmax(w))
    lower_margin = float(w[jmin]) - lo
    upper_margin = hi - float(w[jmax])
    if lower_margin <= upper_margin:
        bound, extremal, margin, j = lo, float(w[jmin]), lower_margin, jmin
    else:
        bound, extremal, margin, j = hi, float(w[jmax]), upper_margin, jmax
    return BoundCheckReport(
        "linear_lv", bound, extremal, margin, float(profile.grid[j]),
        params={"k1": k1, "k2": k2, "a1": a1, "a2": a2},
        extra={
            "lower_bound": lo, "upper_bound": hi,
            "min_value": float(w[jmin]), "max_value": float(w[jmax]),
            "lower_margin": lower_margin, "upper_margin": upper_margin,
        },
    )


def classify_profile(profile: WaveProfile, spec: SystemSpec, tol: float = DEFAULT_CLASSIFY_TOL) -> SolutionClass:
    """Upper solution iff the discrete operator is <= tol everywhere; lower iff >= -tol."""
    r = residual(spec, profile)
    rmax = r.max(axis=1)
    rmin = r.min(axis=1)
    return SolutionClass(
        is_upper_solution=bool(np.all(rmax <= tol)),
        is_lower_solution=bool(np.all(rmin >= -tol)),
        tol=tol,
        max_residual=tuple(float(v) for v in rmax),
        min_residual=tuple(float(v) for v in rmin),
    )


@dataclass
class SweepSummary:
    draws: int
    seed: int
    worst_lower: Optional[BoundCheckReport]
    worst_upper_sum: Optional[BoundCheckReport]
    worst_upper_product: Optional[BoundCheckReport]

    def worst_margin(self) -> float:
        reports = [r for r in (self.worst_lower, self.worst_upper_sum, self.worst_upper_product) if r]
        return min((r.margin for r in reports), default=math.inf)


def conformance_sweep(
    profile: WaveProfile,
    spec: SystemSpec,
    region: HypothesisRegion,
    draws: int = 100,
    seed: int = 0,
    weight_range: tuple[float, float] = (1e-2, 1e2),
    m_range: tuple[float, float] = (1.0, 3.0),
    classify_tol: float = DEFAULT_CLASSIFY_TOL,
) -> SweepSummary:
    """Random weights against every bound whose premise the profile meets.

    ``k`` and ``alpha`` are log-uniform in ``weight_range``, ``m`` uniform in
    ``m_range``.  The lower bound is only swept for upper solutions and the
    upper bounds only for lower solutions; the worst report of each kind is
    kept.
    """
    cls = classify_profile(profile, spec, classify_tol)
    rng = np.random.default_rng(seed)
    lo, hi = np.log(weight_range[0]), np.log(weight_range[1])
    n = spec.n
    worst: dict[str, Optional[BoundCheckReport]] = {"lower": None, "sum": None, "prod": None}

    def keep(key, rep):
        if worst[key] is None or rep.margin < worst[key].margin:
            worst[key] = rep

    for _ in range(draws):
        k = np.exp(rng.uniform(lo, hi, n))
        alpha = np.exp(rng.uniform(lo, hi, n))
        alpha_u = np.exp(rng.uniform(lo, hi, n))
        m = rng.uniform(*m_range, n)
        if cls.is_upper_solution and region.lower is not None:
            keep("lower", check_lower_bound(profile, spec, region, BoundParams(alpha=alpha, k=k)))
        if cls.is_lower_solution and region.upper is not None:
            s_rep, p_rep = check_upper_bounds(profile, spec, region, alpha_u, m)
            keep("sum", s_rep)
            keep("prod", p_rep)
    return SweepSummary(draws, seed, worst["lower"], worst["sum"], worst["prod"])
