import math

import numpy as np
import pytest

from orthant_guard import (
    Rectangle,
    estimate_lipschitz,
    evaluate_field,
    existence_horizon,
    gronwall_box,
    load_model,
    model_from_parts,
    shift_time,
    trajectory_box,
)
from orthant_guard.field import ModelError

ROTATION = """\
names = ["u", "v"]
f = ["v", "-u"]
"""

SIR = """\
names = ["s", "i", "r"]
f = ["-0.3*s*i", "0.3*s*i - 0.1*i", "0.1*i"]
"""


def test_load_rotation():
    model = load_model(ROTATION)
    assert model.n == 2
    assert model.names == ("u", "v")
    assert not model.time_dependent
    assert model.d is None


def test_load_sir():
    model = load_model(SIR)
    assert model.n == 3


def test_nonpositive_diffusion():
    doc = 'names = ["u", "v"]\nf = ["v", "-u"]\nd = [1.0, -0.5]\n'
    with pytest.raises(ModelError, match="nonpositive diffusion coefficient at index 2"):
        load_model(doc)


def test_dimension_mismatch():
    with pytest.raises(ModelError, match="does not match"):
        load_model('names = ["u", "v"]\nf = ["v"]\n')


def test_unknown_key_rejected():
    with pytest.raises(ModelError, match="unknown key"):
        load_model(ROTATION + 'bogus = 1\n')
    with pytest.raises(ModelError, match="rectangle"):
        load_model(ROTATION + '[rectangle]\nalpha = [0.0, 0.0]\nbeta = [1.0, 1.0]\nextra = 2\n')


def test_rectangle_and_pde_tables():
    doc = (
        'names = ["u"]\nf = ["1 - u"]\nd = [1.0]\n'
        '[rectangle]\nalpha = [0.0]\nbeta = ["inf"]\n'
        '[pde]\nbc = "neumann"\nlength = 2.0\ncells = 32\n'
    )
    model = load_model(doc)
    assert model.rectangle.beta == (math.inf,)
    assert model.pde.bc == "neumann"
    assert model.pde.length == 2.0
    assert model.pde.cells == 32


def test_time_dependent_flag():
    model = load_model('names = ["u"]\nf = ["(1 - t)*exp(-t)"]\n')
    assert model.time_dependent


def test_evaluate_field_examples():
    rotation = load_model(ROTATION)
    assert evaluate_field(rotation, 0.0, [0.0, 1.0]).tolist() == [1.0, 0.0]
    # witnesses the positivity failure on the face v = 0
    assert evaluate_field(rotation, 0.0, [1.0, 0.0]).tolist() == [0.0, -1.0]
    lv = model_from_parts(["u", "v"], ["u*(1-v)", "v*(u-1)"])
    assert evaluate_field(lv, 0.0, [2.0, 2.0]).tolist() == [-2.0, 2.0]


def test_evaluate_field_length_check():
    with pytest.raises(ValueError):
        evaluate_field(load_model(ROTATION), 0.0, [1.0])


class TestLipschitz:
    def test_scalar_affine(self):
        model = model_from_parts(["u"], ["-u"])
        est = estimate_lipschitz(model, Rectangle((0.0,), (2.0,)))
        assert est.M == pytest.approx(1.0, abs=1e-8)

    def test_rotation(self):
        model = load_model(ROTATION)
        est = estimate_lipschitz(model, Rectangle((0.0, 0.0), (1.0, 1.0)))
        assert est.M == pytest.approx(1.0, abs=1e-8)

    def test_lotka_volterra_against_dense_oracle(self):
        # oracle: dense finite-difference sampling of Jacobian row sums,
        # independent of the sampling strategy under test
        model = model_from_parts(["u", "v"], ["u*(1-v)", "v*(u-1)"])
        grid = np.linspace(0.0, 2.0, 200)
        h = 1e-6
        oracle = 0.0
        for u in grid:
            for v in grid:

                def f(x, y):
                    return np.array([x * (1 - y), y * (x - 1)])

                j_u = (f(u + h, v) - f(u - h, v)) / (2 * h)
                j_v = (f(u, v + h) - f(u, v - h)) / (2 * h)
                oracle = max(oracle, float((np.abs(j_u) + np.abs(j_v)).max()))
        assert oracle == pytest.approx(3.0, abs=1e-5)
        est = estimate_lipschitz(model, Rectangle((0.0, 0.0), (2.0, 2.0)))
        assert est.M == pytest.approx(3.0, abs=1e-6)

    def test_monotone_in_samples(self):
        model = model_from_parts(["u", "v"], ["sin(u)*v", "cos(v)*u"])
        box = Rectangle((0.0, 0.0), (3.0, 3.0))
        small = estimate_lipschitz(model, box, grid_per_axis=4, random_samples=16)
        big = estimate_lipschitz(model, box, grid_per_axis=12, random_samples=256)
        assert big.M >= small.M - 1e-12

    def test_deterministic(self):
        model = model_from_parts(["u", "v"], ["u*v", "u - v"])
        box = Rectangle((0.0, 0.0), (2.0, 2.0))
        a = estimate_lipschitz(model, box, seed=7)
        b = estimate_lipschitz(model, box, seed=7)
        assert a.M == b.M

    def test_nan_is_reported(self):
        model = model_from_parts(["u"], ["sqrt(u - 5)"])
        with pytest.raises(ValueError, match="NaN"):
            estimate_lipschitz(model, Rectangle((0.0,), (2.0,)))

    def test_unbounded_box_rejected(self):
        model = model_from_parts(["u"], ["-u"])
        with pytest.raises(ValueError):
            estimate_lipschitz(model, Rectangle((0.0,), (math.inf,)))


class TestExistenceHorizon:
    def test_paper_formula(self):
        assert existence_horizon(1.0, 0.0, 1.0) == 0.5

    def test_degenerate_lipschitz(self):
        assert existence_horizon(2.0, 1.0, 0.0) == 2.0

    def test_mixed(self):
        assert existence_horizon(1.0, 1.0, 1.0) == pytest.approx(1.0 / 3.0)

    def test_undefined(self):
        with pytest.raises(ValueError):
            existence_horizon(1.0, 0.0, 0.0)

    def test_monotone_decreasing(self):
        base = existence_horizon(1.0, 1.0, 1.0)
        assert existence_horizon(1.0, 2.0, 1.0) < base
        assert existence_horizon(1.0, 1.0, 2.0) < base


def test_shift_time():
    model = load_model('names = ["u"]\nf = ["(1 - t)*exp(-t)"]\n')
    shifted = shift_time(model, 2.0)
    v0 = evaluate_field(model, 3.0, [0.0])[0]
    v1 = evaluate_field(shifted, 1.0, [0.0])[0]
    assert v0 == v1
    assert shift_time(model, 0.0) is model


def test_trajectory_box():
    box = trajectory_box([[1.0, 2.0], [0.5, 3.0]], inflation=0.1)
    assert box.alpha == pytest.approx((0.45, 1.9))
    assert box.beta == pytest.approx((1.05, 3.1))
    # degenerate axis still yields a valid rectangle
    box2 = trajectory_box([[1.0], [1.0]])
    assert box2.alpha[0] < 1.0 < box2.beta[0]


def test_gronwall_box_includes_zero_hyperplanes():
    box = gronwall_box([[1.0, 2.0], [0.5, 3.0]])
    assert all(a <= 0.0 for a in box.alpha)
