"""Closed-form a priori bounds.

Lower bound (upper solutions, inner simplex where f >= 0)::

    prod_i (u_i + k_i) ** (d_i * alpha_i) >= exp(lambda1)

Note the exponent is ``d_i * alpha_i``, not ``alpha_i``.  With equal
diffusion ``d`` the ``d`` can be pulled out and the bound raised to ``1/d``,
which is what :func:`lower_bound_equal_diffusion` returns.

Upper bounds (lower solutions, outer region where f <= 0)::

    sum_i alpha_i u_i ** m_i <= max_i(alpha_i ubar_i ** m_i) * max(d) / min(d)
    prod_i u_i ** (m_i / n)  <= that / (n * prod(alpha) ** (1/n))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

Mode = Literal["lower", "upper"]


def _vec(name: str, values, n: Optional[int] = None, positive: bool = True) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if positive and not np.all(arr > 0):
        raise ValueError(f"{name} must be strictly positive, got {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class BoundParams:
    """Weights entering the bounds.

    ``k`` is only used by the lower bound and ``m`` only by the upper one,
    so either may be omitted.
    """

    alpha: tuple[float, ...]
    k: Optional[tuple[float, ...]] = None
    m: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        alpha = _vec("alpha", self.alpha)
        object.__setattr__(self, "alpha", tuple(alpha.tolist()))
        n = alpha.size
        if self.k is not None:
            object.__setattr__(self, "k", tuple(_vec("k", self.k, n).tolist()))
        if self.m is not None:
            m = _vec("m", self.m, n)
            if np.any(m < 1):
                raise ValueError(f"m must be >= 1, got {m.tolist()}")
            object.__setattr__(self, "m", tuple(m.tolist()))

    @property
    def n(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class BarrierLevels:
    lambda2: float
    eta: float
    lambda1: float
    mode: Mode

    def as_tuple(self) -> tuple[float, float, float]:
        return self.lambda2, self.eta, self.lambda1


def _off_diagonal_sums(weights: np.ndarray) -> np.ndarray:
    """``out[j] = sum_{i != j} weights[i, j]`` for a square weight matrix."""
    return weights.sum(axis=0) - np.diag(weights)


def lower_levels(d, bp: BoundParams, ulow) -> BarrierLevels:
    """Levels (lambda2, eta, lambda1) of the lower-bound barrier, evaluated in that order."""
    if bp.k is None:
        raise ValueError("lower bound needs the shift vector k")
    alpha = np.asarray(bp.alpha)
    n = alpha.size
    d = _vec("d", d, n)
    k = np.asarray(bp.k)
    ulow = _vec("lower thresholds", ulow, n)
    logk = np.log(k)

    # cross[i, j] = alpha_i (d_i - d_j) ln k_i
    cross = _off_diagonal_sums((alpha * logk)[:, None] * (d[:, None] - d[None, :]))
    base = _off_diagonal_sums(np.repeat((alpha * d * logk)[:, None], n, axis=1))

    lambda2 = float(np.min(alpha * d * np.log(ulow + k) + base))
    eta = float(np.min((lambda2 - cross) / d))
    lambda1 = float(np.min(eta * d + cross))
    return BarrierLevels(lambda2, eta, lambda1, "lower")


def lower_bound_value(d, bp: BoundParams, ulow) -> float:
    """``exp(lambda1)``: lower bound for ``prod (u_i + k_i) ** (d_i alpha_i)``."""
    return math.exp(lower_levels(d, bp, ulow).lambda1)


def lower_bound_equal_diffusion(bp: BoundParams, ulow) -> float:
    if bp.k is None:
        raise ValueError("lower bound needs the shift vector k")
    alpha = np.asarray(bp.alpha)
    k = np.asarray(bp.k)
    ulow = _vec("lower thresholds", ulow, alpha.size)
    # log-space keeps large exponents finite until the final exp
    logs = alpha * np.log(k)
    candidates = alpha * np.log(ulow + k) + (logs.sum() - logs)
    return math.exp(float(np.min(candidates)))


def _upper_inputs(d, alpha, m, uhigh):
    alpha = _vec("alpha", alpha)
    n = alpha.size
    d = _vec("d", d, n)
    m = _vec("m", m, n)
    if np.any(m < 1):
        raise ValueError(f"m must be >= 1, got {m.tolist()}")
    uhigh = _vec("upper thresholds", uhigh, n)
    return d, alpha, m, uhigh


def upper_levels(d, alpha, m, uhigh) -> BarrierLevels:
    d, alpha, m, uhigh = _upper_inputs(d, alpha, m, uhigh)
    lambda2 = float(np.max(alpha * d * uhigh**m))
    eta = lambda2 / float(d.min())
    lambda1 = eta * float(d.max())
    return BarrierLevels(lambda2, eta, lambda1, "upper")


def upper_bound_sum(d, alpha, m, uhigh) -> float:
    """Bound for ``sum alpha_i u_i ** m_i``."""
    d, alpha, m, uhigh = _upper_inputs(d, alpha, m, uhigh)
    return float(np.max(alpha * uhigh**m)) * float(d.max()) / float(d.min())


def upper_bound_product(d, alpha, m, uhigh) -> float:
    """Bound for ``prod u_i ** (m_i / n)`` via AM-GM on the sum bound."""
    d, alpha, m, uhigh = _upper_inputs(d, alpha, m, uhigh)
    n = alpha.size
    geo = math.exp(float(np.mean(np.log(alpha))))
    return upper_bound_sum(d, alpha, m, uhigh) / (n * geo)


def linear_lv_bounds(k1: float, k2: float, a1: float, a2: float) -> tuple[float, float]:
    """Two-sided bound on ``k2*u + k1*v`` for Lotka-Volterra waves."""
    for name, v in (("k1", k1), ("k2", k2), ("a1", a1), ("a2", a2)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    return min(k2 / a2, k1 / a1), max(k1, k2)


def lv_product_lower_bound(k1: float, k2: float, a1: float, a2: float) -> float:
    """Lower bound for ``u*v`` from combining the product bound with the linear one.

    Equal diffusion, unit weights.  Under the bistable condition
    ``a1, a2 > 1`` with ``k1 == k2`` this degenerates to a nonpositive
    number, i.e. the trivial ``uv >= 0``.
    """
    ulow, vlow = min(1.0, 1.0 / a2), min(1.0, 1.0 / a1)
    _, upper = linear_lv_bounds(k1, k2, a1, a2)
    return min(k2 * ulow, k1 * vlow) - upper


def diversity_index(u, q: float) -> float:
    """Hill-type diversity ``(sum u_i**q) ** (1/(1-q))`` for ``q > 1``."""
    if not q > 1:
        raise ValueError(f"q must be > 1 (the exponent 1/(1-q) is singular at q=1), got {q}")
    u = _vec("u", u, positive=False)
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    total = float(np.sum(u**q))
    if total == 0.0:
        raise ValueError("u must not be identically zero")
    return total ** (1.0 / (1.0 - q))

