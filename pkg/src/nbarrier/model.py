"""Reaction-diffusion systems and the two-species Lotka-Volterra preset.

A system is ``d_i u_i'' + theta u_i' + u_i**l_i * f_i(u) = 0`` for
``i = 1..n``.  Only the factors ``f_i`` live in the reaction evaluator;
diffusion rates, exponents and the speed belong to :class:`SystemSpec`.

Evaluators take an array of shape ``(n,)`` or ``(n, M)`` (one column per
state) and return an array of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Reaction = Callable[[np.ndarray], np.ndarray]


def _positive_tuple(name: str, values: Sequence[float]) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise ValueError(f"{name} must be non-empty")
    if not all(np.isfinite(v) and v > 0 for v in out):
        raise ValueError(f"{name} must be strictly positive, got {out}")
    return out


@dataclass(frozen=True)
class SystemSpec:
    """Coefficients and reaction factors of an n-species system.

    ``reaction_jacobian``, when given, returns ``df_i/du_j`` with shape
    ``(n, n)`` or ``(n, n, M)``; the wave solver needs it.
    """

    d: tuple[float, ...]
    l: tuple[float, ...]
    theta: float
    reaction: Reaction = field(repr=False, compare=False)
    reaction_jacobian: Optional[Reaction] = field(default=None, repr=False, compare=False)
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "d", _positive_tuple("d", self.d))
        object.__setattr__(self, "l", _positive_tuple("l", self.l))
        if len(self.l) != len(self.d):
            raise ValueError(f"l has length {len(self.l)}, expected {len(self.d)}")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n(self) -> int:
        return len(self.d)


@dataclass(frozen=True)
class LV2Params:
    a1: float
    a2: float
    kappa: float = 1.0
    d1: float = 1.0
    d2: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("a1", "a2", "kappa", "d1", "d2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class HypothesisRegion:
    """Simplex thresholds: ``lower`` for f >= 0 (inner), ``upper`` for f <= 0 (outer)."""

    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.lower is not None:
            object.__setattr__(self, "lower", _positive_tuple("lower thresholds", self.lower))
        if self.upper is not None:
            object.__setattr__(self, "upper", _positive_tuple("upper thresholds", self.upper))
        if self.lower is not None and self.upper is not None and len(self.lower) != len(self.upper):
            raise ValueError("lower and upper thresholds differ in length")


@dataclass(frozen=True)
class Equilibrium:
    state: tuple[float, ...]
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "state", tuple(float(v) for v in self.state))
        if any(v < 0 for v in self.state):
            raise ValueError(f"equilibrium state must be nonnegative, got {self.state}")


def _as_state(spec: SystemSpec, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape[:1] != (spec.n,):
        raise ValueError(f"state has leading dimension {u.shape[:1]}, expected ({spec.n},)")
    return u


def eval_reaction(spec: SystemSpec, u) -> np.ndarray:
    """Return the factors ``(f_1, ..., f_n)`` at a nonnegative state."""
    u = _as_state(spec, u)
    if np.any(u < 0):
        raise ValueError("reaction evaluated at a state with a negative component")
    f = np.asarray(spec.reaction(u), dtype=float)
    if f.shape != u.shape:
        raise ValueError(f"reaction returned shape {f.shape}, expected {u.shape}")
    return f


def source_terms(spec: SystemSpec, u) -> np.ndarray:
    """``u_i**l_i * f_i(u)`` componentwise; accepts ``(n,)`` or ``(n, M)``."""
    u = _as_state(spec, u)
    f = eval_reaction(spec, u)
    l = np.asarray(spec.l).reshape((-1,) + (1,) * (u.ndim - 1))
    return u**l * f


def is_equilibrium(spec: SystemSpec, u, tol: float = 1e-12) -> bool:
    u = _as_state(spec, u)
    if u.ndim != 1:
        raise ValueError("is_equilibrium expects a single state vector")
    if np.any(u < 0):
        return False
    return bool(np.all(np.abs(source_terms(spec, u)) <= tol))


def lv2_reaction(p: LV2Params) -> tuple[Reaction, Reaction]:
    a1, a2, kappa = p.a1, p.a2, p.kappa

    def reaction(u: np.ndarray) -> np.ndarray:
        return np.stack([1.0 - u[0] - a1 * u[1], kappa * (1.0 - a2 * u[0] - u[1])])

    def jacobian(u: np.ndarray) -> np.ndarray:
        shape = (2, 2) + np.shape(u)[1:]
        jac = np.empty(shape)
        jac[0, 0], jac[0, 1] = -1.0, -a1
        jac[1, 0], jac[1, 1] = -kappa * a2, -kappa
        return jac

    return reaction, jacobian


def lv2_thresholds(a1: float, a2: float) -> HypothesisRegion:
    return HypothesisRegion(
        lower=(min(1.0, 1.0 / a2), min(1.0, 1.0 / a1)),
        upper=(max(1.0, 1.0 / a2), max(1.0, 1.0 / a1)),
    )


def lv2_coexistence(a1: float, a2: float) -> Optional[tuple[float, float]]:
    """Intersection of the two nullclines, or None when degenerate or outside the quadrant."""
    den = 1.0 - a1 * a2
    if den == 0.0:
        return None
    u, v = (1.0 - a1) / den, (1.0 - a2) / den
    if u < 0 or v < 0:
        return None
    return u, v


def lv2_system(p: LV2Params) -> tuple[SystemSpec, HypothesisRegion, list[Equilibrium]]:
    reaction, jacobian = lv2_reaction(p)
    spec = SystemSpec(
        d=(p.d1, p.d2),
        l=(1.0, 1.0),
        theta=p.theta,
        reaction=reaction,
        reaction_jacobian=jacobian,
        name="lv2",
    )
    equilibria = [
        Equilibrium((0.0, 0.0), "e1"),
        Equilibrium((1.0, 0.0), "e2"),
        Equilibrium((0.0, 1.0), "e3"),
    ]
    e4 = lv2_coexistence(p.a1, p.a2)
    if e4 is not None:
        equilibria.append(Equilibrium(e4, "e4"))
    return spec, lv2_thresholds(p.a1, p.a2), equilibria


def equilibrium_by_label(equilibria: Sequence[Equilibrium], label: str) -> Equilibrium:
    for e in equilibria:
        if e.label == label:
            return e
    raise KeyError(f"no equilibrium labelled {label!r} (available: {[e.label for e in equilibria]})")
