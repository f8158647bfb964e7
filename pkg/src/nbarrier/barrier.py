"""Barrier geometry behind the bounds.

After the change of variables ``U_i = ln(u_i + k_i)`` (lower mode) or
``U_i = u_i ** m_i`` (upper mode) the two functionals

    p = sum alpha_i U_i,      q = sum alpha_i d_i U_i

are linear in ``U``, and the barrier is the nested family of level sets
``Q1 = {q ~ lambda1}``, ``P = {p ~ eta}``, ``Q2 = {q ~ lambda2}`` inside the
hypothesis region ``R``.  Lower mode uses sublevel sets and the inner
simplex; upper mode uses superlevel sets and the outer region.  In both
modes the chain is ``Q1 ⊂ P ⊂ Q2 ⊂ R``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import BarrierLevels, BoundParams, Mode, lower_levels, upper_levels

TAGS = ("in_Q1", "in_P", "in_Q2", "in_R")

# Intercepts that coincide mathematically differ by rounding; this is the
# relative slack allowed (about 50 ulps of the largest contributing term).
ORDERING_RTOL = 1e-14


@dataclass(frozen=True)
class BarrierConstruction:
    mode: Mode
    d: tuple[float, ...]
    alpha: tuple[float, ...]
    shape: tuple[float, ...]  # k (lower) or m (upper)
    thresholds: tuple[float, ...]
    levels: BarrierLevels

    @classmethod
    def lower(cls, d, bp: BoundParams, ulow) -> "BarrierConstruction":
        levels = lower_levels(d, bp, ulow)
        return cls("lower", _tup(d), bp.alpha, bp.k, _tup(ulow), levels)

    @classmethod
    def upper(cls, d, alpha, m, uhigh) -> "BarrierConstruction":
        levels = upper_levels(d, alpha, m, uhigh)
        return cls("upper", _tup(d), _tup(alpha), _tup(m), _tup(uhigh), levels)

    @property
    def n(self) -> int:
        return len(self.d)

    def with_levels(self, lambda2=None, eta=None, lambda1=None) -> "BarrierConstruction":
        """Copy with some levels overridden (negative controls in tests)."""
        lv = self.levels
        new = BarrierLevels(
            lv.lambda2 if lambda2 is None else lambda2,
            lv.eta if eta is None else eta,
            lv.lambda1 if lambda1 is None else lambda1,
            lv.mode,
        )
        return replace(self, levels=new)

    def transform(self, u: np.ndarray) -> np.ndarray:
        shape = np.asarray(self.shape).reshape((-1,) + (1,) * (u.ndim - 1))
        if self.mode == "lower":
            return np.log(u + shape)
        return u**shape


@dataclass(frozen=True)
class Intercepts:
    u2: np.ndarray
    u0: np.ndarray
    u1: np.ndarray


@dataclass
class Violation:
    index: int
    point: tuple[float, ...]
    rule: str


@dataclass
class InclusionReport:
    mode: Mode
    seed: int
    samples: int
    intercept_ordering_ok: bool
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.intercept_ordering_ok and not self.violations


def _tup(x) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(x, dtype=float).reshape(-1))


def _states(bc: BarrierConstruction, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[:1] != (bc.n,):
        raise ValueError(f"state has leading dimension {u.shape[:1]}, expected ({bc.n},)")
    if np.any(u < 0):
        raise ValueError("barrier functionals are defined on the nonnegative orthant only")
    return u


def eval_pq(bc: BarrierConstruction, u) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(p, q)``; scalars for a single state, arrays for ``(n, M)`` input."""
    u = _states(bc, u)
    big_u = bc.transform(u)
    alpha = np.asarray(bc.alpha).reshape((-1,) + (1,) * (u.ndim - 1))
    d = np.asarray(bc.d).reshape(alpha.shape)
    p = np.sum(alpha * big_u, axis=0)
    q = np.sum(alpha * d * big_u, axis=0)
    return p, q


def _lower_exponents(bc: BarrierConstruction):
    """``ln(u + k)`` at the intercepts and at the thresholds, plus the rounding scale of each."""
    d = np.asarray(bc.d)
    alpha = np.asarray(bc.alpha)
    k = np.asarray(bc.shape)
    lam2, eta, lam1 = bc.levels.as_tuple()
    w_q = alpha * d * np.log(k)
    w_p = alpha * np.log(k)
    rest_q = w_q.sum() - w_q
    rest_p = w_p.sum() - w_p
    e2 = (lam2 - rest_q) / (alpha * d)
    e0 = (eta - rest_p) / alpha
    e1 = (lam1 - rest_q) / (alpha * d)
    thr = np.log(np.asarray(bc.thresholds) + k)
    # absolute size of the terms that were added before dividing
    mag = max(abs(lam2), abs(eta), abs(lam1)) + np.abs(w_q).sum() + np.abs(w_p).sum()
    scale = mag / np.minimum(alpha, alpha * d) + np.abs(thr)
    return e2, e0, e1, thr, scale


def intercepts(bc: BarrierConstruction) -> Intercepts:
    if bc.mode == "lower":
        k = np.asarray(bc.shape)
        e2, e0, e1, _, _ = _lower_exponents(bc)
        return Intercepts(u2=np.exp(e2) - k, u0=np.exp(e0) - k, u1=np.exp(e1) - k)
    d = np.asarray(bc.d)
    alpha = np.asarray(bc.alpha)
    lam2, eta, lam1 = bc.levels.as_tuple()
    inv_m = 1.0 / np.asarray(bc.shape)
    return Intercepts(
        u2=(lam2 / (alpha * d)) ** inv_m,
        u0=(eta / alpha) ** inv_m,
        u1=(lam1 / (alpha * d)) ** inv_m,
    )


def intercept_ordering_ok(bc: BarrierConstruction, rtol: float = ORDERING_RTOL) -> bool:
    """Lower: u1 <= u0 <= u2 <= ulow.  Upper: u1 >= u0 >= u2 >= ubar.

    Coinciding intercepts are common (the minimizing index in each level
    formula), so comparisons allow for rounding.  In lower mode they are made
    on ``ln(u + k)`` with a tolerance proportional to the magnitude of the
    terms that produced it.
    """
    if bc.mode == "lower":
        e2, e0, e1, thr, scale = _lower_exponents(bc)
        tol = rtol * scale
        chain = [e1, e0, e2, thr]
        return all(bool(np.all(a <= b + tol)) for a, b in zip(chain[:-1], chain[1:]))
    ic = intercepts(bc)
    chain = [np.asarray(bc.thresholds), ic.u2, ic.u0, ic.u1]
    return all(bool(np.all(a <= b * (1.0 + rtol))) for a, b in zip(chain[:-1], chain[1:]))


def membership(bc: BarrierConstruction, u) -> dict[str, np.ndarray]:
    """Closed-region membership tags for one state or a batch of shape ``(n, M)``."""
    u = _states(bc, u)
    p, q = eval_pq(bc, u)
    lam2, eta, lam1 = bc.levels.as_tuple()
    thr = np.asarray(bc.thresholds).reshape((-1,) + (1,) * (u.ndim - 1))
    simplex = np.sum(u / thr, axis=0)
    if bc.mode == "lower":
        return {"in_Q1": q <= lam1, "in_P": p <= eta, "in_Q2": q <= lam2, "in_R": simplex <= 1.0}
    return {"in_Q1": q >= lam1, "in_P": p >= eta, "in_Q2": q >= lam2, "in_R": simplex >= 1.0}


def verify_inclusion(
    bc: BarrierConstruction,
    samples: int = 100_000,
    seed: int = 0,
    box: Optional[float] = None,
    max_recorded: Optional[int] = None,
) -> InclusionReport:
    """Randomized falsification of ``Q1 ⊂ P ⊂ Q2 ⊂ R`` plus the exact intercept test.

    Points are uniform in ``[0, box]**n`` with ``box`` defaulting to twice the
    largest threshold.  Violations are listed by ascending sample index.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    box = 2.0 * max(bc.thresholds) if box is None else float(box)
    pts = rng.uniform(0.0, box, size=(samples, bc.n))
    tags = membership(bc, pts.T)

    bad_rules = []
    for inner, outer in zip(TAGS[:-1], TAGS[1:]):
        bad_rules.append((f"{inner} => {outer}", tags[inner] & ~tags[outer]))

    violations = []
    any_bad = np.zeros(samples, dtype=bool)
    for _, mask in bad_rules:
        any_bad |= mask
    for idx in np.flatnonzero(any_bad):
        if max_recorded is not None and len(violations) >= max_recorded:
            break
        rule = next(name for name, mask in bad_rules if mask[idx])
        violations.append(Violation(int(idx), tuple(pts[idx].tolist()), rule))

    return InclusionReport(
        mode=bc.mode,
        seed=seed,
        samples=samples,
        intercept_ordering_ok=intercept_ordering_ok(bc),
        violations=violations,
    )
