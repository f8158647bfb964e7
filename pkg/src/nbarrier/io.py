"""Profile CSV files and the summary JSON document.

Profile CSV layout::

    # nbarrier-profile v1
    # theta=<float>
    # L=<float>
    # h=<float>
    # left=<label>
    # right=<label>
    # residual_norm=<float>
    # iterations=<int>
    # boundary_defect=<float>
    x,u1,...,un,theta_meta
    <rows>

Floats are written with 17 significant digits, so a write/read round trip
is exact.  ``theta_meta`` repeats theta on every row for readers that skip
comment lines.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .solver import WaveProfile

MAGIC = "nbarrier-profile v1"
_META_FLOATS = ("theta", "L", "h", "residual_norm", "boundary_defect")


class ProfileFormatError(ValueError):
    pass


def _fmt(v: float) -> str:
    return "%.17g" % v


def write_profile_csv(profile: WaveProfile, path) -> None:
    path = Path(path)
    n = profile.n
    meta = {
        "theta": _fmt(profile.theta),
        "L": _fmt(profile.L),
        "h": _fmt(profile.h),
        "left": profile.left_state,
        "right": profile.right_state,
        "residual_norm": _fmt(profile.residual_norm),
        "iterations": str(int(profile.iterations)),
        "boundary_defect": _fmt(profile.boundary_defect),
    }
    with path.open("w", newline="") as fh:
        fh.write(f"# {MAGIC}\n")
        for key, val in meta.items():
            fh.write(f"# {key}={val}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x"] + [f"u{i + 1}" for i in range(n)] + ["theta_meta"])
        theta = _fmt(profile.theta)
        for j, x in enumerate(profile.grid):
            writer.writerow([_fmt(x)] + [_fmt(profile.values[i, j]) for i in range(n)] + [theta])


def read_profile_csv(path) -> WaveProfile:
    """Read a profile written by :func:`write_profile_csv`.

    Raises FileNotFoundError for a missing file and :class:`ProfileFormatError`
    for a bad header, bad numbers or a grid that is not strictly increasing.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"profile file not found: {path}")
    meta: dict[str, str] = {}
    header: Optional[list[str]] = None
    rows: list[list[str]] = []
    with path.open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, val = body.split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            if not line.strip():
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = [c.strip() for c in cells]
            else:
                rows.append(cells)

    if header is None or len(header) < 3 or header[0] != "x" or header[-1] != "theta_meta":
        raise ProfileFormatError(f"malformed header in {path}: {header}")
    n = len(header) - 2
    if header[1:-1] != [f"u{i + 1}" for i in range(n)]:
        raise ProfileFormatError(f"malformed species columns in {path}: {header[1:-1]}")
    if not rows:
        raise ProfileFormatError(f"no data rows in {path}")
    if any(len(r) != n + 2 for r in rows):
        raise ProfileFormatError(f"rows in {path} do not match the header width {n + 2}")
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ProfileFormatError(f"non-numeric value in {path}: {exc}") from exc

    x = data[:, 0]
    if np.any(np.diff(x) <= 0):
        raise ProfileFormatError(f"grid in {path} is not strictly increasing")
    try:
        theta = float(meta["theta"]) if "theta" in meta else float(data[0, -1])
        residual_norm = float(meta.get("residual_norm", "nan"))
        boundary_defect = float(meta.get("boundary_defect", "nan"))
        iterations = int(meta.get("iterations", "0"))
    except ValueError as exc:
        raise ProfileFormatError(f"bad metadata in {path}: {exc}") from exc
    return WaveProfile(
        grid=x,
        values=np.ascontiguousarray(data[:, 1:-1].T),
        theta=theta,
        left_state=meta.get("left", "custom"),
        right_state=meta.get("right", "custom"),
        residual_norm=residual_norm,
        iterations=iterations,
        boundary_defect=boundary_defect,
    )


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become None."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def build_summary(
    system: Any,
    hypotheses: Iterable[Any] = (),
    bounds: Optional[dict] = None,
    checks: Iterable[Any] = (),
    solver: Any = None,
    seed: Optional[int] = None,
    **extra: Any,
) -> dict:
    doc = {
        "system": to_jsonable(system),
        "hypotheses": to_jsonable(list(hypotheses)),
        "bounds": to_jsonable(bounds or {}),
        "checks": to_jsonable(list(checks)),
        "solver": to_jsonable(solver),
    }
    if seed is not None:
        doc["seed"] = int(seed)
    for key in sorted(extra):
        doc[key] = to_jsonable(extra[key])
    return doc


def dumps_summary(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_summary_json(path, doc: dict) -> None:
    Path(path).write_text(dumps_summary(doc))
