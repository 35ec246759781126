"""Model loading, field evaluation, Lipschitz estimation, existence horizon."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import expr
from .boxes import Rectangle

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ModelSpec",
    "PdeSettings",
    "LipschitzEstimate",
    "ModelError",
    "load_model",
    "model_from_parts",
    "evaluate_field",
    "compile_field",
    "compile_field_numpy",
    "estimate_lipschitz",
    "existence_horizon",
    "shift_time",
    "trajectory_box",
    "gronwall_box",
    "FD_STEP_SCALE",
    "LIPSCHITZ_SAFETY",
    "BOX_INFLATION",
]

# central finite differences with h = FD_STEP_SCALE * max(1, |x_j|)
FD_STEP_SCALE = 1e-5
# sampling bounds M from below; bounds that must hold rigorously use M*LIPSCHITZ_SAFETY
LIPSCHITZ_SAFETY = 1.25
# trajectory bounding boxes are inflated by this fraction before estimating M
BOX_INFLATION = 0.10


class ModelError(ValueError):
    """Raised for malformed model documents."""


@dataclass(frozen=True)
class PdeSettings:
    bc: str  # "neumann" | "dirichlet"
    length: float
    cells: int


@dataclass(frozen=True)
class ModelSpec:
    names: tuple[str, ...]
    f: tuple[expr.Ast, ...]
    d: Optional[tuple[float, ...]] = None
    time_dependent: bool = False
    rectangle: Optional[Rectangle] = None
    pde: Optional[PdeSettings] = None

    @property
    def n(self) -> int:
        return len(self.names)


def model_from_parts(names, f_sources, d=None, rectangle=None, pde=None) -> ModelSpec:
    """Build a validated ModelSpec from plain values (same checks as load_model)."""
    names = tuple(names)
    if len(names) == 0:
        raise ModelError("model must declare at least one variable")
    if len(f_sources) != len(names):
        raise ModelError(
            f"f count ({len(f_sources)}) does not match names count ({len(names)})"
        )
    asts = tuple(expr.parse_expression(src, list(names)) for src in f_sources)
    time_dependent = any(expr.uses_time(a) for a in asts)
    if d is not None:
        d = tuple(float(x) for x in d)
        if len(d) != len(names):
            raise ModelError(
                f"d count ({len(d)}) does not match names count ({len(names)})"
            )
        for k, x in enumerate(d):
            if not x > 0:
                raise ModelError(f"nonpositive diffusion coefficient at index {k + 1}")
    if rectangle is not None and rectangle.n != len(names):
        raise ModelError("rectangle dimension does not match variable count")
    return ModelSpec(names, asts, d, time_dependent, rectangle, pde)


def _require_keys(table: dict, allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ModelError(f"unknown key `{path}{key}`")


def load_model(document: str) -> ModelSpec:
    """Parse and validate a TOML model document."""
    try:
        data = tomllib.loads(document)
    except tomllib.TOMLDecodeError as e:
        raise ModelError(f"TOML parse error: {e}") from e

    _require_keys(data, {"names", "f", "d", "rectangle", "pde"}, "")
    if "names" not in data or "f" not in data:
        raise ModelError("model must define `names` and `f`")
    names = data["names"]
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise ModelError("`names` must be an array of strings")
    f_sources = data["f"]
    if not isinstance(f_sources, list) or not all(isinstance(s, str) for s in f_sources):
        raise ModelError("`f` must be an array of strings")

    rectangle = None
    if "rectangle" in data:
        table = data["rectangle"]
        _require_keys(table, {"alpha", "beta"}, "rectangle.")
        if "alpha" not in table or "beta" not in table:
            raise ModelError("`rectangle` needs `alpha` and `beta` arrays")
        alpha = tuple(float(x) for x in table["alpha"])
        beta = tuple(
            math.inf if x == "inf" else float(x) for x in table["beta"]
        )
        try:
            rectangle = Rectangle(alpha, beta)
        except ValueError as e:
            raise ModelError(f"rectangle: {e}") from e

    pde = None
    if "pde" in data:
        table = data["pde"]
        _require_keys(table, {"bc", "length", "cells"}, "pde.")
        bc = table.get("bc")
        if bc not in ("neumann", "dirichlet"):
            raise ModelError("pde.bc must be 'neumann' or 'dirichlet'")
        length = float(table.get("length", 1.0))
        cells = int(table.get("cells", 64))
        if length <= 0:
            raise ModelError("pde.length must be positive")
        if cells < 2:
            raise ModelError("pde.cells must be at least 2")
        pde = PdeSettings(bc, length, cells)

    try:
        return model_from_parts(names, f_sources, data.get("d"), rectangle, pde)
    except expr.ExprError as e:
        raise ModelError(f"f: {e}") from e


def evaluate_field(model: ModelSpec, time: float, state) -> np.ndarray:
    """Evaluate F(t, state) componentwise; NaN/inf propagate."""
    if len(state) != model.n:
        raise ValueError(f"state length {len(state)} != component count {model.n}")
    return np.array(
        [expr.eval_ast(f_i, state, time) for f_i in model.f], dtype=float
    )


def compile_field(model: ModelSpec):
    """Compile the field into ``f(time, state) -> list[float]`` for hot loops."""
    fns = [expr.compile_scalar(f_i) for f_i in model.f]

    def field_fn(time, state):
        return [fn(state, time) for fn in fns]

    return field_fn


def compile_field_numpy(model: ModelSpec):
    """Vectorized variant: state rows may be numpy arrays (one value per node)."""
    fns = [expr.compile_numpy(f_i) for f_i in model.f]

    def field_fn(time, state_rows):
        return [fn(state_rows, time) for fn in fns]

    return field_fn


@dataclass(frozen=True)
class LipschitzEstimate:
    M: float
    box: Rectangle
    samples: int
    method: str = "sampled-jacobian-rowsum-inf"

    @property
    def M_safe(self) -> float:
        return LIPSCHITZ_SAFETY * self.M


def _sample_points(box: Rectangle, grid_per_axis: int, random_samples: int, seed: int):
    lo = np.asarray(box.alpha, dtype=float)
    hi = np.asarray(box.beta, dtype=float)
    axes = [np.linspace(a, b, grid_per_axis) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=-1)
    if random_samples > 0:
        rng = np.random.default_rng(seed)
        rand = lo + (hi - lo) * rng.random((random_samples, box.n))
        return np.concatenate([grid, rand], axis=0)
    return grid


def estimate_lipschitz(
    model: ModelSpec,
    box: Rectangle,
    grid_per_axis: int = 17,
    random_samples: int = 512,
    seed: int = 0,
    time: float = 0.0,
) -> LipschitzEstimate:
    """Estimate the inf-norm Lipschitz constant of F on a bounded box.

    Samples max_i sum_j |dF_i/dx_j| over a tensor grid plus random points,
    with central finite differences.  This bounds M from below; multiply by
    LIPSCHITZ_SAFETY where a rigorous bound is semantically required.
    """
    if not box.is_bounded():
        raise ValueError("Lipschitz estimation requires a bounded box")
    if grid_per_axis < 2:
        raise ValueError("grid_per_axis must be >= 2")
    field_fn = compile_field(model)
    n = model.n
    points = _sample_points(box, grid_per_axis, random_samples, seed)
    M = 0.0
    for point in points:
        row_sums = np.zeros(n)
        x = point.copy()
        for j in range(n):
            h = FD_STEP_SCALE * max(1.0, abs(x[j]))
            x[j] = point[j] + h
            f_plus = field_fn(time, x)
            x[j] = point[j] - h
            f_minus = field_fn(time, x)
            x[j] = point[j]
            col = [abs(p - m) / (2 * h) for p, m in zip(f_plus, f_minus)]
            if any(c != c for c in col):
                raise ValueError(
                    f"NaN in finite-difference Jacobian at sample point {tuple(point)}"
                )
            row_sums += col
        M = max(M, float(row_sums.max()))
    return LipschitzEstimate(M=M, box=box, samples=len(points))


def existence_horizon(initial_sup_norm: float, f0_norm: float, lipschitz: float) -> float:
    """Supremal local existence bound B; any delta < B is a guaranteed horizon
    at radius 2*initial_sup_norm.  Callers typically use B/2."""
    if initial_sup_norm <= 0:
        raise ValueError("initial_sup_norm must be positive")
    if f0_norm < 0 or lipschitz < 0:
        raise ValueError("norms must be nonnegative")
    denom = f0_norm + 2.0 * lipschitz * initial_sup_norm
    if denom == 0:
        raise ValueError("existence bound undefined: ||F(0)|| and L both zero")
    return initial_sup_norm / denom


def shift_time(model: ModelSpec, t0: float) -> ModelSpec:
    """Re-base a time-dependent field at t0: every `t` becomes `t + t0`."""
    if t0 == 0:
        return model
    shifted = tuple(_shift_ast(a, float(t0)) for a in model.f)
    return replace(model, f=shifted)


def _shift_ast(ast: expr.Ast, t0: float) -> expr.Ast:
    if isinstance(ast, expr.Var):
        if ast.index < 0:
            return expr.Binary(ast.span, "+", ast, expr.Const(ast.span, t0))
        return ast
    if isinstance(ast, expr.Unary):
        return expr.Unary(ast.span, ast.op, _shift_ast(ast.child, t0))
    if isinstance(ast, expr.Binary):
        return expr.Binary(
            ast.span, ast.op, _shift_ast(ast.left, t0), _shift_ast(ast.right, t0)
        )
    if isinstance(ast, expr.Call):
        return expr.Call(ast.span, ast.func, tuple(_shift_ast(a, t0) for a in ast.args))
    return ast


def gronwall_box(states, inflation: float = BOX_INFLATION) -> Rectangle:
    """Trajectory bounding box extended to include the coordinate hyperplanes
    u_i = 0 (the exponential bound needs a Lipschitz constant on the
    trajectory hull together with its face projections)."""
    box = trajectory_box(states, inflation)
    alpha = tuple(min(a, 0.0) for a in box.alpha)
    beta = tuple(max(b, 0.0) for b in box.beta)
    return Rectangle(alpha, beta)


def trajectory_box(states, inflation: float = BOX_INFLATION) -> Rectangle:
    """Bounding box of a batch of state vectors, inflated per axis.

    Degenerate axes (constant component) get an absolute pad so the box
    stays a valid rectangle.
    """
    arr = np.asarray(states, dtype=float)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    alpha, beta = [], []
    for a, b in zip(lo, hi):
        pad = inflation * (b - a)
        if pad == 0.0:
            pad = inflation * max(1.0, abs(a))
        alpha.append(float(a - pad))
        beta.append(float(b + pad))
    return Rectangle(tuple(alpha), tuple(beta))
