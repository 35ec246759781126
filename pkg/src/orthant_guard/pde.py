"""Method-of-lines reaction-diffusion on a 1-D interval.

Neumann uses a cell-centered conservative stencil (reflecting ghost
cells), Dirichlet a node-centered one (zero ghost values).  The diffusion
semigroup is realized by implicit-Euler resolvent steps: the resolvent of
the discrete Laplacian is an M-matrix, so one step maps nonnegative
nonzero data to strictly positive interior values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .field import ModelSpec, compile_field_numpy

__all__ = [
    "Grid1D",
    "GridState",
    "SpaceTimeTrajectory",
    "Eigenpair",
    "apply_laplacian",
    "cfl_limit",
    "step_explicit",
    "step_imex",
    "simulate_rd",
    "dirichlet_eigenpair",
    "check_positivity_evolution",
    "PositivityReport",
    "converse_functional",
    "thomas_solve",
    "BLOWUP_THRESHOLD",
]

BLOWUP_THRESHOLD = 1e8


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on (0, length) with either boundary condition.

    Neumann: m cell centers x_k = (k - 1/2) h, h = length/m.
    Dirichlet: m interior nodes x_k = k h, h = length/(m+1).
    """

    length: float
    cells: int
    bc: str  # "neumann" | "dirichlet"

    def __post_init__(self):
        if self.bc not in ("neumann", "dirichlet"):
            raise ValueError(f"bc must be 'neumann' or 'dirichlet', got {self.bc!r}")
        if self.cells < 1:
            raise ValueError("need at least one cell")
        if self.length <= 0:
            raise ValueError("length must be positive")

    @property
    def h(self) -> float:
        if self.bc == "neumann":
            return self.length / self.cells
        return self.length / (self.cells + 1)

    def nodes(self) -> np.ndarray:
        h = self.h
        if self.bc == "neumann":
            return (np.arange(1, self.cells + 1) - 0.5) * h
        return np.arange(1, self.cells + 1) * h


@dataclass(frozen=True)
class GridState:
    values: np.ndarray  # shape (n_species, m)
    grid: Grid1D
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] != self.grid.cells:
            raise ValueError(f"values must be (n, {self.grid.cells}), got {v.shape}")
        object.__setattr__(self, "values", v)


def apply_laplacian(row: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Second-difference stencil (w[k-1] - 2 w[k] + w[k+1]) / h^2 with
    reflecting (Neumann) or zero (Dirichlet) ghost values."""
    w = np.asarray(row, dtype=float)
    if len(w) != grid.cells:
        raise ValueError(f"row length {len(w)} != cells {grid.cells}")
    out = np.empty_like(w)
    h2 = grid.h * grid.h
    if grid.bc == "neumann":
        ghost_lo, ghost_hi = w[0], w[-1]
    else:
        ghost_lo, ghost_hi = 0.0, 0.0
    out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) / h2
    if len(w) == 1:
        out[0] = (ghost_lo - 2.0 * w[0] + ghost_hi) / h2
        return out
    out[0] = (ghost_lo - 2.0 * w[0] + w[1]) / h2
    out[-1] = (w[-2] - 2.0 * w[-1] + ghost_hi) / h2
    return out


def cfl_limit(grid: Grid1D, d) -> float:
    """Largest explicit step keeping the diffusion update a nonnegative
    convex combination: h^2 / (2 max_i d_i)."""
    return grid.h * grid.h / (2.0 * max(d))


def _require_diffusion(model: ModelSpec):
    if model.d is None:
        raise ValueError("model has no diffusion coefficients `d`")
    return model.d


def step_explicit(model: ModelSpec, state: GridState, dt: float) -> GridState:
    """Forward Euler: u += dt * (d_i lap(u_i) + f_i(u)).  Enforces the CFL
    limit so pure diffusion is a discrete maximum principle step."""
    d = _require_diffusion(model)
    limit = cfl_limit(state.grid, d)
    if dt > limit:
        raise ValueError(f"dt={dt} violates the CFL limit; need dt <= {limit}")
    field_fn = compile_field_numpy(model)
    rows = [state.values[i] for i in range(model.n)]
    reaction = field_fn(state.time, rows)
    new = np.empty_like(state.values)
    for i in range(model.n):
        new[i] = state.values[i] + dt * (
            d[i] * apply_laplacian(state.values[i], state.grid) + reaction[i]
        )
    return GridState(new, state.grid, state.time + dt)


def thomas_solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a tridiagonal system by the Thomas algorithm.

    lower[k] multiplies x[k-1] in row k (lower[0] unused); upper[k]
    multiplies x[k+1] (upper[-1] unused).
    """
    m = len(diag)
    c = np.empty(m)
    d = np.empty(m)
    c[0] = upper[0] / diag[0] if m > 1 else 0.0
    d[0] = rhs[0] / diag[0]
    for k in range(1, m):
        denom = diag[k] - lower[k] * c[k - 1]
        c[k] = upper[k] / denom if k < m - 1 else 0.0
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / denom
    x = np.empty(m)
    x[-1] = d[-1]
    for k in range(m - 2, -1, -1):
        x[k] = d[k] - c[k] * x[k + 1]
    return x


def _resolvent_bands(grid: Grid1D, coeff: float):
    """Bands of I - coeff * lap for the grid's boundary condition."""
    m = grid.cells
    lower = np.full(m, -coeff)
    upper = np.full(m, -coeff)
    diag = np.full(m, 1.0 + 2.0 * coeff)
    if grid.bc == "neumann":
        diag[0] = 1.0 + coeff
        diag[-1] = 1.0 + coeff
    return lower, diag, upper


class _TridiagFactor:
    """Thomas-algorithm factorization reused across solves with fixed bands."""

    def __init__(self, lower, diag, upper):
        m = len(diag)
        self.lower = np.asarray(lower, dtype=float)
        self.c = np.empty(m)
        self.denom = np.empty(m)
        self.denom[0] = diag[0]
        self.c[0] = upper[0] / diag[0] if m > 1 else 0.0
        for k in range(1, m):
            self.denom[k] = diag[k] - lower[k] * self.c[k - 1]
            self.c[k] = upper[k] / self.denom[k] if k < m - 1 else 0.0

    def solve(self, rhs):
        m = len(rhs)
        d = np.empty(m)
        d[0] = rhs[0] / self.denom[0]
        lower, c, denom = self.lower, self.c, self.denom
        for k in range(1, m):
            d[k] = (rhs[k] - lower[k] * d[k - 1]) / denom[k]
        x = np.empty(m)
        x[-1] = d[-1]
        for k in range(m - 2, -1, -1):
            x[k] = d[k] - c[k] * x[k + 1]
        return x


def step_imex(model: ModelSpec, state: GridState, dt: float) -> GridState:
    """Explicit reaction, backward-Euler diffusion:
    (I - dt d_i lap) u_i' = u_i + dt f_i(u), solved tridiagonally."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    d = _require_diffusion(model)
    field_fn = compile_field_numpy(model)
    rows = [state.values[i] for i in range(model.n)]
    reaction = field_fn(state.time, rows)
    h2 = state.grid.h * state.grid.h
    new = np.empty_like(state.values)
    for i in range(model.n):
        rhs = state.values[i] + dt * reaction[i]
        lower, diag, upper = _resolvent_bands(state.grid, dt * d[i] / h2)
        new[i] = thomas_solve(lower, diag, upper, rhs)
    return GridState(new, state.grid, state.time + dt)


@dataclass
class SpaceTimeTrajectory:
    grid: Grid1D
    names: tuple[str, ...]
    times: list[float]
    states: list[np.ndarray]  # each (n, m), thinned by save_every
    min_history: list[tuple[float, np.ndarray]]  # (t, per-species spatial min), every step
    max_history: list[tuple[float, np.ndarray]]
    dt: float = 0.0
    status: str = "completed"  # "completed" | "blow_up"
    status_time: Optional[float] = None
    events: list = dc_field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.names)

    def global_min(self, species: int) -> float:
        return float(min(mins[species] for _, mins in self.min_history))

    def to_csv(self) -> str:
        nodes = self.grid.nodes()
        lines = ["t,x,species,value"]
        for t, state in zip(self.times, self.states):
            for i, name in enumerate(self.names):
                for x, v in zip(nodes, state[i]):
                    lines.append(f"{t!r},{x!r},{name},{float(v)!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "names": list(self.names),
            "bc": self.grid.bc,
            "length": self.grid.length,
            "cells": self.grid.cells,
            "dt": self.dt,
            "status": self.status,
            "status_time": self.status_time,
            "steps": [
                {
                    "t": float(t),
                    "min": [float(v) for v in mins],
                    "max": [float(v) for v in maxs],
                }
                for (t, mins), (_, maxs) in zip(self.min_history, self.max_history)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def simulate_rd(
    model: ModelSpec,
    initial: GridState,
    t_end: float,
    scheme: str = "imex",
    dt: float = 1e-4,
    save_every: int = 1,
) -> SpaceTimeTrajectory:
    """Advance the reaction-diffusion system to t_end with fixed steps.

    Per-step spatial minima/maxima are always recorded; full states are
    kept every `save_every` steps (and at the final time).
    """
    _require_diffusion(model)
    if scheme not in ("explicit", "imex"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if initial.values.shape[0] != model.n:
        raise ValueError("initial state species count does not match model")
    d = model.d
    field_fn = compile_field_numpy(model)
    grid = initial.grid
    if scheme == "explicit":
        limit = cfl_limit(grid, d)
        if dt > limit:
            raise ValueError(f"dt={dt} violates the CFL limit; need dt <= {limit}")
        stepper = None
    else:
        h2 = grid.h * grid.h
        factors = [
            _TridiagFactor(*_resolvent_bands(grid, dt * d_i / h2)) for d_i in d
        ]

        def stepper(state):
            rows = [state.values[i] for i in range(model.n)]
            reaction = field_fn(state.time, rows)
            new = np.empty_like(state.values)
            for i in range(model.n):
                new[i] = factors[i].solve(state.values[i] + dt * reaction[i])
            return GridState(new, grid, state.time + dt)

    if stepper is None:

        def stepper(state):
            rows = [state.values[i] for i in range(model.n)]
            reaction = field_fn(state.time, rows)
            new = np.empty_like(state.values)
            for i in range(model.n):
                new[i] = state.values[i] + dt * (
                    d[i] * apply_laplacian(state.values[i], grid) + reaction[i]
                )
            return GridState(new, grid, state.time + dt)

    n_steps = max(1, int(round(t_end / dt)))

    state = initial
    traj = SpaceTimeTrajectory(
        grid=initial.grid,
        names=model.names,
        times=[state.time],
        states=[state.values.copy()],
        min_history=[(state.time, state.values.min(axis=1))],
        max_history=[(state.time, state.values.max(axis=1))],
        dt=dt,
    )
    for step in range(1, n_steps + 1):
        state = stepper(state)
        values = state.values
        if not np.all(np.isfinite(values)) or np.abs(values).max() > BLOWUP_THRESHOLD:
            traj.status = "blow_up"
            traj.status_time = state.time
            return traj
        traj.min_history.append((state.time, values.min(axis=1)))
        traj.max_history.append((state.time, values.max(axis=1)))
        if step % save_every == 0 or step == n_steps:
            traj.times.append(state.time)
            traj.states.append(values.copy())
    return traj


@dataclass(frozen=True)
class Eigenpair:
    lambda1: float
    phi1: np.ndarray  # positive entries, discrete L2-normalized: h sum phi^2 = 1
    grid: Grid1D


def dirichlet_eigenpair(grid: Grid1D, max_iters: int = 10000) -> Eigenpair:
    """Principal eigenpair of the Dirichlet stiffness operator -lap by
    inverse power iteration with tridiagonal solves."""
    if grid.bc != "dirichlet":
        raise ValueError("eigenpair is defined for Dirichlet grids")
    m = grid.cells
    h = grid.h
    h2 = h * h
    lower = np.full(m, -1.0 / h2)
    upper = np.full(m, -1.0 / h2)
    diag = np.full(m, 2.0 / h2)

    v = np.ones(m)
    v /= np.linalg.norm(v)
    lam = None
    for _ in range(max_iters):
        w = thomas_solve(lower, diag, upper, v)
        w_norm = np.linalg.norm(w)
        v_new = w / w_norm
        # Rayleigh quotient of the stiffness operator
        av = _mul_tridiag(lower, diag, upper, v_new)
        lam_new = float(v_new @ av)
        residual = float(np.max(np.abs(av - lam_new * v_new)))
        # lambda converges before the vector does: require both
        if (
            lam is not None
            and abs(lam_new - lam) <= 1e-12 * abs(lam_new)
            and residual <= 1e-12 * abs(lam_new)
        ):
            lam = lam_new
            v = v_new
            break
        lam, v = lam_new, v_new
    else:
        raise RuntimeError(f"inverse power iteration: no convergence in {max_iters} iterations")

    if v.sum() < 0:
        v = -v
    phi = v / math.sqrt(h * float(v @ v))
    return Eigenpair(lam, phi, grid)


def _mul_tridiag(lower, diag, upper, x):
    out = diag * x
    out[1:] += lower[1:] * x[:-1]
    out[:-1] += upper[:-1] * x[1:]
    return out


@dataclass(frozen=True)
class PositivityReport:
    global_min: np.ndarray  # per species, over all steps and nodes
    strict_min_after: Optional[np.ndarray]  # per species, min spatial min for t >= t_s
    ratio_min_after: Optional[np.ndarray]  # Dirichlet: min over nodes of u/phi1, t >= t_s
    t_s: float


def check_positivity_evolution(
    traj: SpaceTimeTrajectory,
    t_s: Optional[float] = None,
    eigenpair: Optional[Eigenpair] = None,
) -> PositivityReport:
    """Positivity diagnostics over a completed space-time trajectory.

    Neumann: reports the spatial minimum for t >= t_s (strict positivity
    probe).  Dirichlet: additionally the minimum of u/phi1 over interior
    nodes for t >= t_s; needs the grid's eigenpair and saved states.
    """
    if t_s is None:
        t_s = 10.0 * traj.dt
    n = traj.n
    global_min = np.array([traj.global_min(i) for i in range(n)])

    after = [mins for t, mins in traj.min_history if t >= t_s]
    strict_min = np.min(after, axis=0) if after else None

    ratio_min = None
    if traj.grid.bc == "dirichlet":
        if eigenpair is None:
            eigenpair = dirichlet_eigenpair(traj.grid)
        ratios = []
        for t, state in zip(traj.times, traj.states):
            if t >= t_s:
                ratios.append((state / eigenpair.phi1).min(axis=1))
        if ratios:
            ratio_min = np.min(ratios, axis=0)
    return PositivityReport(global_min, strict_min, ratio_min, t_s)


def converse_functional(
    model: ModelSpec,
    component: int,
    frozen_face_point,
    grid: Grid1D,
    t_probe: float,
    dt: Optional[float] = None,
) -> float:
    """Discrete contradiction functional for the Dirichlet converse.

    Starts the system from spatially constant data equal to the face point
    with species `component` identically zero, runs imex to t_probe, and
    returns (1/t_probe) * h * sum_k u_i(t_probe, x_k) phi1(x_k).  For a
    violating face point with f_i(face) = -beta < 0 this approaches
    -beta * h * sum(phi1) as t_probe -> 0.
    """
    if grid.bc != "dirichlet":
        raise ValueError("converse functional is a Dirichlet diagnostic")
    if model.time_dependent:
        raise ValueError("model must be autonomous")
    face_point = list(frozen_face_point)
    if len(face_point) == model.n:
        face_point[component] = 0.0
    elif len(face_point) == model.n - 1:
        face_point.insert(component, 0.0)
    else:
        raise ValueError("face point must have n or n-1 entries")
    if dt is None:
        dt = t_probe / 20.0

    m = grid.cells
    values = np.array([np.full(m, v, dtype=float) for v in face_point])
    traj = simulate_rd(model, GridState(values, grid, 0.0), t_probe, "imex", dt)
    if traj.status != "completed":
        raise RuntimeError(f"simulation did not complete: {traj.status}")
    pair = dirichlet_eigenpair(grid)
    u_i = traj.states[-1][component]
    return float(grid.h * np.dot(u_i, pair.phi1) / t_probe)
