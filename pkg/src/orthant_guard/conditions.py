"""Face-condition checks: orthant quasi-positivity, rectangle invariance,
and the non-autonomous variant.

A "satisfied" certificate asserts only that no sampled point violates the
face inequality; it is evidence, not a proof.  A "violated" certificate
carries an exact witness that re-evaluates to the reported value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boxes import Face, Rectangle, positive_orthant
from .field import ModelSpec, compile_field

__all__ = [
    "Certificate",
    "FaceRecord",
    "Witness",
    "check_quasipositivity",
    "check_rectangle",
    "check_nonautonomous",
    "refine_witness",
    "TOL_WIT",
    "DEFAULT_CLIP",
    "DEFAULT_GRID",
    "DEFAULT_RANDOM",
]

# values in [-TOL_WIT, 0) on a low face are "marginal", not "violated":
# mass-action fields vanish identically on faces up to rounding noise
TOL_WIT = 1e-12
DEFAULT_CLIP = 10.0
DEFAULT_GRID = 17  # odd, so face centers are sampled
DEFAULT_RANDOM = 512


@dataclass(frozen=True)
class Witness:
    face: Face
    point: tuple[float, ...]
    value: float
    time: Optional[float] = None


@dataclass(frozen=True)
class FaceRecord:
    face: Face
    extremum: float  # min of f_i (low face) / max of f_i (high face)
    location: tuple[float, ...]
    time: Optional[float]
    verdict: str  # "satisfied" | "marginal" | "violated"


@dataclass(frozen=True)
class Certificate:
    verdict: str  # "satisfied" | "violated" | "marginal"
    faces: tuple[FaceRecord, ...]
    witness: Optional[Witness]
    strict: bool  # all face extrema strictly inside (cf. strict face conditions)
    clip: float
    grid_per_axis: int
    random_samples: int
    seed: int
    kind: str  # "quasipositivity" | "rectangle" | "nonautonomous"
    time_interval: Optional[tuple[float, float]] = None

    def to_dict(self) -> dict:
        def face_dict(rec: FaceRecord) -> dict:
            out = {
                "component": rec.face.index + 1,
                "side": rec.face.side,
                "extremum": rec.extremum,
                "location": list(rec.location),
            }
            if rec.time is not None:
                out["time"] = rec.time
            out["verdict"] = rec.verdict
            return out

        doc = {
            "schema": 1,
            "kind": self.kind,
            "verdict": self.verdict,
            "strict": self.strict,
            "faces": [face_dict(r) for r in self.faces],
            "witness": None,
            "sampling": {
                "clip": self.clip,
                "grid_per_axis": self.grid_per_axis,
                "random_samples": self.random_samples,
                "seed": self.seed,
                "tol_wit": TOL_WIT,
            },
        }
        if self.time_interval is not None:
            doc["time_interval"] = list(self.time_interval)
        if self.witness is not None:
            doc["witness"] = {
                "component": self.witness.face.index + 1,
                "side": self.witness.face.side,
                "point": list(self.witness.point),
                "value": self.witness.value,
            }
            if self.witness.time is not None:
                doc["witness"]["time"] = self.witness.time
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _signed(value: float, side: str) -> float:
    """Violation margin: positive means the inequality is broken."""
    return -value if side == "low" else value


def _face_verdict(extremum: float, side: str) -> str:
    margin = _signed(extremum, side)
    if margin > TOL_WIT:
        return "violated"
    if margin > 0.0:
        return "marginal"
    return "satisfied"


def _free_axes(face: Face, n: int) -> list[int]:
    return [j for j in range(n) if j != face.index]


def _face_grid(face: Face, rect: Rectangle, grid_per_axis: int) -> np.ndarray:
    """Tensor grid of points on the face, pinned coordinate included."""
    n = rect.n
    pinned = face.pinned_value(rect)
    free = _free_axes(face, n)
    if not free:
        return np.array([[pinned]])
    axes = [np.linspace(rect.alpha[j], rect.beta[j], grid_per_axis) for j in free]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.ravel() for m in mesh]
    points = np.empty((flat[0].size, n))
    points[:, face.index] = pinned
    for col, j in enumerate(free):
        points[:, j] = flat[col]
    return points


def _face_random(
    face: Face, rect: Rectangle, count: int, seed: int
) -> np.ndarray:
    n = rect.n
    rng = np.random.default_rng([seed, face.index, 0 if face.side == "low" else 1])
    points = np.empty((count, n))
    points[:, face.index] = face.pinned_value(rect)
    for j in _free_axes(face, n):
        points[:, j] = rect.alpha[j] + (rect.beta[j] - rect.alpha[j]) * rng.random(count)
    return points


def _lex_less(a, b) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def _check_face(
    model: ModelSpec,
    face: Face,
    rect: Rectangle,
    grid_per_axis: int,
    random_samples: int,
    seed: int,
    times: Optional[np.ndarray],
    max_refine_iters: int = 200,
) -> FaceRecord:
    field_fn = compile_field(model)
    i = face.index
    points = np.concatenate(
        [
            _face_grid(face, rect, grid_per_axis),
            _face_random(face, rect, random_samples, seed),
        ]
    )
    time_grid = times if times is not None else np.array([0.0])

    worst_margin = -math.inf
    worst_point: Optional[tuple[float, ...]] = None
    worst_time = 0.0
    for tv in time_grid:
        for row in points:
            value = field_fn(float(tv), row)[i]
            if value != value:
                raise ValueError(
                    f"NaN while sampling component {i + 1} at {tuple(row)}"
                )
            margin = _signed(value, face.side)
            key = (float(tv), *row)
            if margin > worst_margin or (
                margin == worst_margin
                and worst_point is not None
                and _lex_less(key, (worst_time, *worst_point))
            ):
                worst_margin = margin
                worst_point = tuple(float(x) for x in row)
                worst_time = float(tv)

    t_bounds = None
    if times is not None:
        t_bounds = (float(time_grid[0]), float(time_grid[-1]))
    point, value, tv = refine_witness(
        model,
        face,
        worst_point,
        rect,
        max_iters=max_refine_iters,
        time=worst_time,
        time_bounds=t_bounds,
    )
    record_time = tv if times is not None else None
    return FaceRecord(face, value, point, record_time, _face_verdict(value, face.side))


def refine_witness(
    model: ModelSpec,
    face: Face,
    start,
    bounds: Rectangle,
    max_iters: int = 200,
    time: float = 0.0,
    time_bounds: Optional[tuple[float, float]] = None,
):
    """Coordinate-wise pattern search on the face, confined to ``bounds``.

    Minimizes f_i on a low face / maximizes on a high face; never worsens the
    starting objective.  Returns (point, exactly re-evaluated value, time).
    """
    field_fn = compile_field(model)
    i = face.index
    free = _free_axes(face, bounds.n)
    x = [float(v) for v in start]
    x[i] = face.pinned_value(bounds)
    tv = float(time)

    def objective(point, at_time):
        return _signed(field_fn(at_time, point)[i], face.side)

    best = objective(x, tv)
    steps = {j: 0.25 * (bounds.beta[j] - bounds.alpha[j]) for j in free}
    t_step = 0.0
    if time_bounds is not None:
        t_step = 0.25 * (time_bounds[1] - time_bounds[0])

    for _ in range(max_iters):
        improved = False
        for j in free:
            for direction in (+1.0, -1.0):
                cand = min(bounds.beta[j], max(bounds.alpha[j], x[j] + direction * steps[j]))
                if cand == x[j]:
                    continue
                trial = list(x)
                trial[j] = cand
                val = objective(trial, tv)
                if val > best:
                    x, best, improved = trial, val, True
        if time_bounds is not None:
            for direction in (+1.0, -1.0):
                cand = min(time_bounds[1], max(time_bounds[0], tv + direction * t_step))
                if cand != tv:
                    val = objective(x, cand)
                    if val > best:
                        tv, best, improved = cand, val, True
        if not improved:
            for j in free:
                steps[j] *= 0.5
            t_step *= 0.5
            widths = [steps[j] for j in free] + ([t_step] if time_bounds else [])
            if not widths or max(widths) < 1e-12:
                break

    value = field_fn(tv, x)[i]
    return tuple(x), value, tv


def _faces_of(rect: Rectangle) -> list[Face]:
    faces = []
    for i in range(rect.n):
        faces.append(Face(i, "low"))
        if math.isfinite(rect.beta[i]):
            faces.append(Face(i, "high"))
    return faces


def _aggregate(
    model: ModelSpec,
    rect: Rectangle,
    clip: float,
    grid_per_axis: int,
    random_samples: int,
    seed: int,
    kind: str,
    times: Optional[np.ndarray] = None,
    time_interval: Optional[tuple[float, float]] = None,
) -> Certificate:
    clipped = rect.clipped(clip)
    records = [
        _check_face(model, face, clipped, grid_per_axis, random_samples, seed, times)
        for face in _faces_of(rect)
    ]
    verdicts = [r.verdict for r in records]
    if "violated" in verdicts:
        verdict = "violated"
        worst = max(
            (r for r in records if r.verdict == "violated"),
            key=lambda r: _signed(r.extremum, r.face.side),
        )
        witness = Witness(worst.face, worst.location, worst.extremum, worst.time)
    else:
        verdict = "marginal" if "marginal" in verdicts else "satisfied"
        witness = None
    strict = all(_signed(r.extremum, r.face.side) < 0.0 for r in records)
    return Certificate(
        verdict=verdict,
        faces=tuple(records),
        witness=witness,
        strict=strict,
        clip=clip,
        grid_per_axis=grid_per_axis,
        random_samples=random_samples,
        seed=seed,
        kind=kind,
        time_interval=time_interval,
    )


def check_quasipositivity(
    model: ModelSpec,
    clip: float = DEFAULT_CLIP,
    grid_per_axis: int = DEFAULT_GRID,
    random_samples: int = DEFAULT_RANDOM,
    seed: int = 0,
) -> Certificate:
    """Check f_i >= 0 on each face {u_i = 0} of the positive orthant,
    remaining coordinates sampled in [0, clip]^(n-1)."""
    if model.time_dependent:
        raise ValueError("model is time-dependent; use check_nonautonomous")
    if clip <= 0:
        raise ValueError("clip must be positive")
    return _aggregate(
        model,
        positive_orthant(model.n),
        clip,
        grid_per_axis,
        random_samples,
        seed,
        kind="quasipositivity",
    )


def check_rectangle(
    model: ModelSpec,
    rect: Rectangle,
    clip: float = DEFAULT_CLIP,
    grid_per_axis: int = DEFAULT_GRID,
    random_samples: int = DEFAULT_RANDOM,
    seed: int = 0,
) -> Certificate:
    """Check the rectangle face conditions: f_i >= 0 on each low face,
    f_i <= 0 on each (finite) high face."""
    if model.time_dependent:
        raise ValueError("model is time-dependent; rectangle checks are autonomous")
    if rect.n != model.n:
        raise ValueError("rectangle dimension does not match model")
    return _aggregate(
        model, rect, clip, grid_per_axis, random_samples, seed, kind="rectangle"
    )


def check_nonautonomous(
    model: ModelSpec,
    t_interval: tuple[float, float],
    clip: float = DEFAULT_CLIP,
    grid_per_axis: int = DEFAULT_GRID,
    random_samples: int = DEFAULT_RANDOM,
    seed: int = 0,
) -> Certificate:
    """Quasi-positivity with time sampled on a grid over [t0, t1]."""
    if not model.time_dependent:
        raise ValueError("model is autonomous; use check_quasipositivity")
    t0, t1 = t_interval
    if not t0 < t1:
        raise ValueError("need t0 < t1")
    times = np.linspace(t0, t1, DEFAULT_GRID)
    return _aggregate(
        model,
        positive_orthant(model.n),
        clip,
        grid_per_axis,
        random_samples,
        seed,
        kind="nonautonomous",
        times=times,
        time_interval=(float(t0), float(t1)),
    )
