"""Adaptive ODE integration with sign-change event detection.

The integrator is a Dormand-Prince 5(4) embedded pair with standard
PI-free step control and cubic Hermite dense output for event location.
No positivity clipping is done anywhere: the solver reports what the
numerics do, and positivity is verified as an observed property.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .conditions import TOL_WIT, Certificate
from .field import ModelSpec, compile_field

__all__ = [
    "Trajectory",
    "Event",
    "integrate",
    "first_negative_event",
    "gronwall_check",
    "GronwallReport",
    "find_counterexample",
    "CounterexampleError",
    "BLOWUP_THRESHOLD",
]

BLOWUP_THRESHOLD = 1e8
STEP_UNDERFLOW_FRACTION = 1e-14  # relative to t_end


@dataclass(frozen=True)
class Event:
    component: int  # 0-based
    time: float
    kind: str  # "first_zero" | "went_negative"


@dataclass
class Trajectory:
    times: list[float]
    states: list[np.ndarray]
    events: list[Event] = dc_field(default_factory=list)
    status: str = "completed"  # "completed" | "blow_up" | "step_failure"
    status_time: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.states[0])

    def first_event(self, kind: str) -> Optional[Event]:
        matching = [e for e in self.events if e.kind == kind]
        return min(matching, key=lambda e: e.time) if matching else None

    def component_min(self) -> float:
        return float(min(s.min() for s in self.states))

    def state_array(self) -> np.ndarray:
        return np.array(self.states)

    def to_csv(self, names) -> str:
        lines = ["t," + ",".join(names)]
        for t, s in zip(self.times, self.states):
            lines.append(",".join([repr(t)] + [repr(float(x)) for x in s]))
        return "\n".join(lines) + "\n"

    def to_dict(self, names) -> dict:
        return {
            "schema": 1,
            "names": list(names),
            "status": self.status,
            "status_time": self.status_time,
            "events": [
                {"component": e.component + 1, "time": e.time, "kind": e.kind}
                for e in self.events
            ],
            "times": [float(t) for t in self.times],
            "states": [[float(x) for x in s] for s in self.states],
        }

    def to_json(self, names) -> str:
        return json.dumps(self.to_dict(names), indent=2)


# Dormand-Prince 5(4) tableau
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_C = [0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0]
_B5 = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0]
_B4 = [
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
]


def _hermite(t, t0, t1, y0, y1, f0, f1):
    """Cubic Hermite interpolant on [t0, t1]."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _initial_step(field_fn, t0, y0, f0, rel_tol, abs_tol, t_end):
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = float(np.max(np.abs(y0) / scale))
    d1 = float(np.max(np.abs(f0) / scale))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h0, 0.1 * (t_end - t0))


def integrate(
    model: ModelSpec,
    u0,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
) -> Trajectory:
    """Integrate du/dt = F(t, u) from t=0 to t_end adaptively.

    Returns the accepted-step samples plus sign-change events.  Blow-up is
    declared when the state inf-norm exceeds BLOWUP_THRESHOLD or the step
    size underflows; a NaN from the field gives status "step_failure" with
    the last valid state retained.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    y = np.asarray(u0, dtype=float).copy()
    if len(y) != model.n:
        raise ValueError(f"u0 length {len(y)} != component count {model.n}")

    field_fn = compile_field(model)

    def rhs(t, state):
        return np.array(field_fn(t, state))

    traj = Trajectory(times=[0.0], states=[y.copy()])
    t = 0.0
    f_now = rhs(t, y)
    if not np.all(np.isfinite(f_now)):
        traj.status = "step_failure"
        traj.status_time = 0.0
        return traj

    h = _initial_step(rhs, t, y, f_now, rel_tol, abs_tol, t_end)
    h_min = STEP_UNDERFLOW_FRACTION * t_end
    t_tol = 1e-10 * t_end
    # per-component event latches
    seen_first_zero = [False] * model.n
    seen_negative = [False] * model.n

    k = [np.zeros_like(y) for _ in range(7)]
    while t < t_end:
        h = min(h, t_end - t)
        if h < h_min:
            traj.status = "blow_up"
            traj.status_time = t
            return traj

        k[0] = f_now
        failed = False
        for s in range(1, 7):
            ys = y + h * sum(a * k[j] for j, a in enumerate(_A[s]))
            k[s] = rhs(t + _C[s] * h, ys)
            if not np.all(np.isfinite(k[s])):
                failed = True
                break
        if failed:
            # try a smaller step before declaring failure
            if h > 16 * h_min:
                h *= 0.25
                continue
            traj.status = "step_failure"
            traj.status_time = t
            return traj

        y5 = y + h * sum(b * k[j] for j, b in enumerate(_B5) if b)
        y4 = y + h * sum(b * k[j] for j, b in enumerate(_B4) if b)
        if not np.all(np.isfinite(y5)):
            if h > 16 * h_min:
                h *= 0.25
                continue
            traj.status = "step_failure"
            traj.status_time = t
            return traj

        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))

        if err <= 1.0:
            t_new = t + h
            f_new = k[6] if np.all(np.isfinite(k[6])) else rhs(t_new, y5)
            _detect_events(
                traj, model.n, t, t_new, y, y5, f_now, f_new,
                seen_first_zero, seen_negative, t_tol,
            )
            t, y, f_now = t_new, y5, f_new
            traj.times.append(t)
            traj.states.append(y.copy())
            if float(np.max(np.abs(y))) > BLOWUP_THRESHOLD:
                traj.status = "blow_up"
                traj.status_time = t
                return traj

        factor = 0.9 * (err ** -0.2) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))

    return traj


def _detect_events(
    traj, n, t0, t1, y0, y1, f0, f1, seen_first_zero, seen_negative, t_tol
):
    for j in range(n):
        a, b = float(y0[j]), float(y1[j])
        if not seen_negative[j] and a >= -TOL_WIT and b < -TOL_WIT:
            t_cross = _bisect_crossing(j, t0, t1, y0, y1, f0, f1, t_tol)
            traj.events.append(Event(j, t_cross, "went_negative"))
            seen_negative[j] = True
        elif (
            not seen_first_zero[j]
            and not seen_negative[j]
            and a > TOL_WIT
            and -TOL_WIT <= b <= 0.0
        ):
            traj.events.append(Event(j, t1, "first_zero"))
            seen_first_zero[j] = True


def _bisect_crossing(j, t0, t1, y0, y1, f0, f1, t_tol):
    """Bisect the dense output for the zero crossing of component j."""
    lo, hi = t0, t1
    if float(y0[j]) <= 0.0:
        return t0
    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        val = float(_hermite(mid, t0, t1, y0, y1, f0, f1)[j])
        if val > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_negative_event(
    model: ModelSpec,
    u0,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
) -> Optional[tuple[int, float]]:
    """Earliest time any component crosses from >= 0 to < 0, or None."""
    traj = integrate(model, u0, t_end, rel_tol, abs_tol)
    event = traj.first_event("went_negative")
    return (event.component, event.time) if event else None


@dataclass(frozen=True)
class GronwallReport:
    component: int
    min_residual: float
    argmin_time: float
    M_safe: float

    def passed(self, u0_j: float, tol: float = 1e-8) -> bool:
        return self.min_residual >= -tol * (1.0 + abs(u0_j))


def gronwall_check(
    model: ModelSpec, trajectory: Trajectory, component: int, M_safe: float
) -> GronwallReport:
    """Residual of the exponential lower bound u_j(t) >= exp(-M t) u_j(0)
    along the sampled trajectory."""
    if not 0 <= component < trajectory.n:
        raise ValueError(f"component {component} out of range")
    u0_j = float(trajectory.states[0][component])
    min_res = math.inf
    arg = 0.0
    # skip t=0, where the residual is identically zero
    for t, state in zip(trajectory.times[1:], trajectory.states[1:]):
        res = float(state[component]) - math.exp(-M_safe * t) * u0_j
        if res < min_res:
            min_res, arg = res, t
    return GronwallReport(component, min_res, arg, M_safe)


class CounterexampleError(RuntimeError):
    def __init__(self, message, trajectories):
        super().__init__(message)
        self.trajectories = trajectories


def find_counterexample(
    model: ModelSpec,
    certificate: Certificate,
    a: float = 0.01,
    t_end: float = 10.0,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
) -> tuple[np.ndarray, Trajectory]:
    """Build strictly positive initial data near a violated-face witness and
    integrate until some component goes negative.

    Starts from witness + a*(1,...,1) and retries with a/10 (up to 6 times)
    if no negativity shows up before t_end.
    """
    if certificate.verdict != "violated" or certificate.witness is None:
        raise ValueError("certificate must be violated with a witness")
    if certificate.witness.face.side != "low":
        raise ValueError("counterexample construction needs a low-face witness")
    if a <= 0:
        raise ValueError("a must be positive")
    witness = np.asarray(certificate.witness.point, dtype=float)
    tried = []
    for _ in range(6):
        u0 = witness + a
        traj = integrate(model, u0, t_end, rel_tol, abs_tol)
        if traj.first_event("went_negative") is not None:
            return u0, traj
        tried.append(traj)
        a /= 10.0
    raise CounterexampleError(
        "no negativity found before t_end for any perturbation size; "
        "the witness may be too shallow for this horizon",
        tried,
    )
