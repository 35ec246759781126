"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; any assertion failure marks that criterion failed.
"""

import json
import math
import time

import numpy as np
import pytest

from orthant_guard import (
    Grid1D,
    GridState,
    Rectangle,
    check_nonautonomous,
    check_quasipositivity,
    check_rectangle,
    check_positivity_evolution,
    converse_functional,
    dirichlet_eigenpair,
    estimate_lipschitz,
    evaluate_field,
    find_counterexample,
    gronwall_box,
    gronwall_check,
    integrate,
    model_from_parts,
    shift_time,
    simulate_rd,
    step_explicit,
    step_imex,
    zoo,
)
from orthant_guard.cli import main as cli_main
from orthant_guard.pde import cfl_limit


def _line(index, label):
    print(f"ACCEPTANCE {index:2d} PASS  {label}")


def _satisfied_entries():
    return [
        e for e in zoo.list_models()
        if e.expected_verdict == "satisfied" and not e.model.time_dependent
    ]


@pytest.fixture(scope="module")
def positivity_sweep():
    """100 seeded nonnegative initial vectors per satisfied zoo model,
    integrated to t_end=10.  Shared by criteria 2 and 3."""
    runs = {}
    start = time.perf_counter()
    for idx, entry in enumerate(_satisfied_entries()):
        model = entry.model
        trajectories = []
        for k in range(100):
            rng = np.random.default_rng([2024, idx, k])
            u0 = 2.0 * rng.random(model.n)
            trajectories.append((u0, integrate(model, u0, 10.0, 1e-8, 1e-10)))
        runs[entry.name] = (model, trajectories)
    return runs, time.perf_counter() - start


def test_criterion_01_condition_soundness():
    start = time.perf_counter()
    for entry in zoo.list_models():
        model = entry.model
        if model.time_dependent:
            cert = check_nonautonomous(model, entry.nonautonomous_interval, seed=0)
        else:
            cert = check_quasipositivity(model, seed=0)
        assert cert.verdict == entry.expected_verdict, entry.name
        if cert.verdict == "violated" and not model.time_dependent:
            w = cert.witness
            re_eval = evaluate_field(model, 0.0, w.point)[w.face.index]
            assert re_eval == w.value
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"runtime {elapsed:.2f}s exceeds 5s"
    _line(1, f"zoo verdicts reproduced, witnesses exact ({elapsed:.2f}s)")


def test_criterion_02_sufficiency(positivity_sweep):
    runs, elapsed = positivity_sweep
    for name, (model, trajectories) in runs.items():
        for u0, traj in trajectories:
            assert traj.status == "completed", (name, u0)
            bound = -1e-9 * (1.0 + float(np.max(np.abs(u0))))
            assert traj.component_min() >= bound, (name, u0, traj.component_min())
    assert elapsed < 30.0, f"runtime {elapsed:.2f}s exceeds 30s"
    _line(2, f"positivity preserved on {len(runs)}x100 seeded runs ({elapsed:.2f}s)")


def test_criterion_03_gronwall_bound(positivity_sweep):
    runs, _ = positivity_sweep
    checked = 0
    for name, (model, trajectories) in runs.items():
        for u0, traj in trajectories[:25]:  # box+estimate per trajectory
            box = gronwall_box(traj.states)
            est = estimate_lipschitz(model, box, grid_per_axis=5, random_samples=64)
            for j in range(model.n):
                report = gronwall_check(model, traj, j, est.M_safe)
                assert report.min_residual >= -1e-8, (name, j, report)
                checked += 1
    _line(3, f"exponential lower bound holds on {checked} component checks")


def test_criterion_04_necessity():
    violated = [
        e for e in zoo.list_models()
        if e.expected_verdict == "violated" and not e.model.time_dependent
    ]
    assert violated, "zoo must contain a violated autonomous model"
    for entry in violated:
        model = entry.model
        cert = check_quasipositivity(model, clip=1.0)
        assert cert.verdict == "violated"
        u0, traj = find_counterexample(model, cert, a=0.01)
        assert traj.first_event("went_negative") is not None, entry.name
        if entry.name == "rotation":
            event = traj.first_event("went_negative")
            assert abs(event.time - math.atan(0.01 / 1.01)) < 1e-4
    _line(4, "counterexample construction succeeds on violated zoo models")


def test_criterion_05_nonautonomous_nonnecessity():
    entry = zoo.get_model("nonaut-gprime")
    model = entry.model
    cert = check_nonautonomous(model, (0.0, 2.0))
    assert cert.verdict == "violated"
    traj = integrate(model, [0.0], 5.0)
    assert traj.component_min() >= -1e-9
    rebased = shift_time(model, 2.0)
    traj2 = integrate(rebased, [0.0], 5.0)
    assert traj2.first_event("went_negative") is not None
    _line(5, "condition violated on [0,2], flow from 0 nonnegative, rebased flow negative")


def test_criterion_06_discrete_semigroup():
    model = model_from_parts(["u"], ["0"], d=[1.0])
    # (a) explicit step at CFL maps nonnegative to nonnegative exactly
    grid = Grid1D(1.0, 16, "neumann")
    rng = np.random.default_rng(6)
    state = GridState(rng.random((1, 16)), grid)
    dt = cfl_limit(grid, model.d)
    for _ in range(25):
        state = step_explicit(model, state, dt)
        assert np.all(state.values >= 0.0)
    # (b) one imex step on nonnegative nonzero data is strictly positive inside
    for bc in ("neumann", "dirichlet"):
        g = Grid1D(1.0, 8, bc)
        data = np.zeros((1, 8))
        data[0, 0] = 1.0
        out = step_imex(model, GridState(data, g), 0.05)
        assert np.all(out.values > 0.0), bc
    # (c) Neumann mass conservation exact per step for f = 0
    g = Grid1D(2.0, 12, "neumann")
    data = np.zeros((1, 12))
    data[0, 4] = 1.0
    state = GridState(data, g)
    mass = g.h * state.values.sum()
    for _ in range(40):
        state = step_explicit(model, state, cfl_limit(g, model.d))
        assert g.h * state.values.sum() == mass
    _line(6, "maximum principle, strong positivity, exact mass conservation")


def test_criterion_07_eigenpair():
    pair3 = dirichlet_eigenpair(Grid1D(1.0, 3, "dirichlet"))
    exact3 = 64.0 * math.sin(math.pi / 8.0) ** 2
    assert abs(pair3.lambda1 - exact3) <= 1e-9 * exact3
    pair255 = dirichlet_eigenpair(Grid1D(1.0, 255, "dirichlet"))
    assert abs(pair255.lambda1 - math.pi**2) < 1e-3
    # heat decay from phi1: per-step factor (1 + dt lambda1)^-1
    model = model_from_parts(["u"], ["0"], d=[1.0])
    grid = Grid1D(1.0, 31, "dirichlet")
    pair = dirichlet_eigenpair(grid)
    dt = 5e-3
    state = GridState(pair.phi1[None, :].copy(), grid)
    for k in range(1, 9):
        state = step_imex(model, state, dt)
        expected = pair.phi1 / (1.0 + dt * pair.lambda1) ** k
        assert np.max(np.abs(state.values[0] - expected)) < 1e-10
    _line(7, "principal eigenpair matches closed forms; eigen decay exact")


def test_criterion_08_homogeneous_consistency():
    start = time.perf_counter()
    model = zoo.get_model("brusselator").model
    grid = Grid1D(1.0, 64, "neumann")
    values = np.vstack([np.full(64, 1.0), np.full(64, 3.0)])
    traj = simulate_rd(model, GridState(values, grid), 1.0, "imex", 1e-4,
                       save_every=100_000)
    final = traj.states[-1]
    constancy = max(float(final[i].max() - final[i].min()) for i in range(2))
    assert constancy <= 1e-9
    oracle = integrate(model, [1.0, 3.0], 1.0).states[-1]
    assert float(np.max(np.abs(final.mean(axis=1) - oracle))) < 1e-4
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"runtime {elapsed:.2f}s exceeds 10s"
    _line(8, f"constant Neumann data tracks the ODE oracle ({elapsed:.2f}s)")


def test_criterion_09_pde_positivity():
    entries = [e for e in _satisfied_entries() if e.model.d is not None]
    assert entries
    dt = 1e-4
    for entry in entries:
        model = entry.model
        for bc in ("neumann", "dirichlet"):
            grid = Grid1D(1.0, 32, bc)
            x = grid.nodes()
            bump = np.exp(-50.0 * (x - 0.5) ** 2)
            values = np.vstack([(0.3 + 0.2 * i) * bump for i in range(model.n)])
            traj = simulate_rd(model, GridState(values, grid), 0.02, "imex", dt)
            assert traj.status == "completed", (entry.name, bc)
            report = check_positivity_evolution(traj, t_s=10 * dt)
            assert np.all(report.global_min >= -1e-8), (entry.name, bc)
            if bc == "neumann":
                assert np.all(report.strict_min_after > 0.0), entry.name
            else:
                assert np.all(report.ratio_min_after > 0.0), entry.name
    _line(9, f"space-time positivity on {len(entries)} diffusive zoo models, both BCs")


def test_criterion_10_converse_functional():
    model = model_from_parts(["u"], ["-1"], d=[1.0])
    grid = Grid1D(1.0, 63, "dirichlet")
    value = converse_functional(model, 0, [0.0], grid, 1e-3)
    pair = dirichlet_eigenpair(grid)
    discrete = -float(grid.h * pair.phi1.sum())
    continuum = -2.0 * math.sqrt(2.0) / math.pi
    assert abs(value - discrete) <= 0.02 * abs(discrete)
    assert abs(value - continuum) <= 0.03 * abs(continuum)
    _line(10, f"converse functional {value:.4f} vs discrete {discrete:.4f}")


def test_criterion_11_invariant_rectangles():
    entry = zoo.get_model("chafee-infante")
    model = entry.model
    rect = entry.rectangle
    cert = check_rectangle(model, rect)
    assert cert.verdict == "satisfied"
    for k in range(100):
        rng = np.random.default_rng([11, k])
        u0 = -1.0 + 2.0 * rng.random(1)
        traj = integrate(model, u0, 10.0)
        states = traj.state_array()
        assert states.min() >= -1.0 - 1e-8
        assert states.max() <= 1.0 + 1e-8
    # Neumann PDE run from in-rectangle bump data
    grid = Grid1D(1.0, 32, "neumann")
    x = grid.nodes()
    values = (0.9 * np.sin(2 * math.pi * x))[None, :]
    traj = simulate_rd(model, GridState(values, grid), 1.0, "imex", 1e-3)
    assert traj.global_min(0) >= -1.0 - 1e-8
    assert max(float(m[0]) for _, m in traj.max_history) <= 1.0 + 1e-8
    # escape at the high face is flagged
    escaping = model_from_parts(["u"], ["1"])
    cert2 = check_rectangle(escaping, Rectangle((0.0,), (1.0,)))
    assert cert2.verdict == "violated"
    assert cert2.witness.face.side == "high"
    _line(11, "rectangle containment holds; escaping field flagged at high face")


def test_criterion_12_cli_determinism(tmp_path, capsys):
    path = tmp_path / "rotation.toml"
    path.write_text(zoo.get_model("rotation").document)
    commands = [
        ["check", str(path), "--format", "json", "--seed", "7"],
        ["simulate", str(path), "--u0", "1.01,0.01", "--format", "json"],
        ["counterexample", str(path), "--clip", "1", "--format", "json"],
    ]
    for argv in commands:
        cli_main(argv)
        first = capsys.readouterr().out
        cli_main(argv)
        second = capsys.readouterr().out
        assert first == second, argv
        json.loads(first)  # and it is valid JSON
    with capsys.disabled():
        _line(12, "CLI reruns byte-identical for check/simulate/counterexample")
