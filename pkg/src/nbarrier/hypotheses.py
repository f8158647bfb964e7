"""Sign hypotheses on the reaction factors.

H1: every f_i >= 0 on the inner simplex ``sum u_i / ulow_i <= 1``.
H2: every f_i <= 0 on the outer region ``sum u_i / ubar_i >= 1``.

Affine reactions are decided exactly from vertex values.  Anything else
falls back to sampling, whose ``holds=True`` only means nothing was found.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .model import HypothesisRegion, SystemSpec, eval_reaction

AFFINE_TOL = 1e-10
SIGN_TOL = 1e-12


@dataclass
class HypothesisReport:
    hypothesis: Literal["H1", "H2"]
    holds: bool
    method: Literal["affine_exact", "sampling"]
    worst_point: tuple[float, ...]
    worst_value: float
    samples_used: int
    seed: Optional[int] = None
    note: str = ""


def _eval_batch(spec: SystemSpec, pts: np.ndarray) -> np.ndarray:
    """Evaluate f at columns of ``pts`` (shape ``(n, M)``), vectorized when the evaluator allows it."""
    try:
        out = eval_reaction(spec, pts)
    except (ValueError, TypeError, IndexError):
        out = np.column_stack([eval_reaction(spec, pts[:, j]) for j in range(pts.shape[1])])
    return out


def affine_slopes(spec: SystemSpec, scale, seed: int = 0, tol: float = AFFINE_TOL) -> Optional[np.ndarray]:
    """Slope matrix ``G[i, j] = df_i/du_j`` if f is affine on the probed points, else None.

    Probes 0, ``s_i e_i``, ``s_i e_i + s_j e_j`` (including i == j) and two
    seeded random points in the box spanned by ``scale``.
    """
    n = spec.n
    s = np.asarray(scale, dtype=float)
    f0 = eval_reaction(spec, np.zeros(n))
    cols = np.diag(s)
    f_axes = _eval_batch(spec, cols)
    slopes = (f_axes - f0[:, None]) / s[None, :]

    probes = []
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        x = np.zeros(n)
        x[i] += s[i]
        x[j] += s[j]
        probes.append(x)
    rng = np.random.default_rng(seed)
    probes.extend(rng.uniform(0.0, 1.0, size=(2, n)) * 2.0 * s)
    pts = np.array(probes).T
    got = _eval_batch(spec, pts)
    want = f0[:, None] + slopes @ pts
    scale_f = 1.0 + np.abs(got) + np.abs(f0)[:, None]
    if np.any(np.abs(got - want) > tol * scale_f):
        return None
    return slopes


def _worst(values: np.ndarray, pts: np.ndarray, most: Literal["min", "max"]):
    """Extreme entry of ``values`` (shape ``(n, M)``); ties go to the lexicographically smallest point."""
    per_point = values.min(axis=0) if most == "min" else values.max(axis=0)
    target = per_point.min() if most == "min" else per_point.max()
    tied = np.flatnonzero(per_point == target)
    best = min(tied, key=lambda j: tuple(pts[:, j]))
    return tuple(float(v) for v in pts[:, best]), float(target)


def check_h1(
    spec: SystemSpec,
    region: HypothesisRegion,
    budget: int = 100_000,
    seed: int = 0,
    force_sampling: bool = False,
) -> HypothesisReport:
    if region.lower is None:
        raise ValueError("H1 needs lower thresholds")
    ulow = np.asarray(region.lower)
    if ulow.size != spec.n:
        raise ValueError(f"lower thresholds have length {ulow.size}, expected {spec.n}")

    slopes = None if force_sampling else affine_slopes(spec, ulow, seed)
    if slopes is not None:
        # an affine function attains its minimum over a simplex at a vertex
        verts = np.column_stack([np.zeros(spec.n), np.diag(ulow)])
        vals = _eval_batch(spec, verts)
        point, value = _worst(vals, verts, "min")
        return HypothesisReport("H1", value >= -SIGN_TOL, "affine_exact", point, value, verts.shape[1], seed)

    rng = np.random.default_rng(seed)
    bary = rng.dirichlet(np.ones(spec.n + 1), size=budget)[:, : spec.n]
    pts = (bary * ulow).T
    vals = _eval_batch(spec, pts)
    point, value = _worst(vals, pts, "min")
    return HypothesisReport(
        "H1", value >= -SIGN_TOL, "sampling", point, value, budget, seed,
        note="no violation found is not a proof",
    )


def check_h2(
    spec: SystemSpec,
    region: HypothesisRegion,
    box_factor: float = 4.0,
    budget: int = 100_000,
    seed: int = 0,
    force_sampling: bool = False,
) -> HypothesisReport:
    if region.upper is None:
        raise ValueError("H2 needs upper thresholds")
    if box_factor < 1:
        raise ValueError("box_factor must be >= 1")
    ubar = np.asarray(region.upper)
    if ubar.size != spec.n:
        raise ValueError(f"upper thresholds have length {ubar.size}, expected {spec.n}")

    slopes = None if force_sampling else affine_slopes(spec, ubar, seed)
    note = ""
    if slopes is not None and np.all(slopes <= AFFINE_TOL * (1.0 + np.abs(slopes).max())):
        # nonincreasing affine f peaks on the face sum u/ubar = 1, at one of its vertices
        verts = np.diag(ubar)
        vals = _eval_batch(spec, verts)
        point, value = _worst(vals, verts, "max")
        return HypothesisReport("H2", value <= SIGN_TOL, "affine_exact", point, value, verts.shape[1], seed)
    if slopes is not None:
        note = "affine with a positive slope; the maximum may leave the face, sampled instead. "

    rng = np.random.default_rng(seed)
    hi = box_factor * ubar
    chunks, have = [], 0
    while have < budget:
        cand = rng.uniform(0.0, 1.0, size=(max(budget - have, 1024), spec.n)) * hi
        cand = cand[np.sum(cand / ubar, axis=1) >= 1.0]
        chunks.append(cand)
        have += cand.shape[0]
    pts = np.concatenate(chunks)[:budget].T
    vals = _eval_batch(spec, pts)
    point, value = _worst(vals, pts, "max")
    return HypothesisReport(
        "H2", value <= SIGN_TOL, "sampling", point, value, budget, seed,
        note=note + f"sampled within [0, {box_factor}*ubar] only; no violation found is not a proof",
    )
