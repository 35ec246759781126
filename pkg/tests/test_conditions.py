import math

import pytest

from orthant_guard import (
    Face,
    Rectangle,
    check_nonautonomous,
    check_quasipositivity,
    check_rectangle,
    evaluate_field,
    model_from_parts,
    positive_orthant,
    refine_witness,
)
from orthant_guard.conditions import TOL_WIT


def rotation():
    return model_from_parts(["u", "v"], ["v", "-u"])


def sir():
    return model_from_parts(
        ["s", "i", "r"], ["-0.3*s*i", "0.3*s*i - 0.1*i", "0.1*i"]
    )


class TestQuasipositivity:
    def test_rotation_violated(self):
        cert = check_quasipositivity(rotation(), clip=10.0)
        assert cert.verdict == "violated"
        w = cert.witness
        assert w.face == Face(1, "low")
        assert w.point == (10.0, 0.0)
        assert w.value == -10.0

    def test_sir_satisfied(self):
        cert = check_quasipositivity(sir(), clip=10.0)
        assert cert.verdict == "satisfied"
        for rec in cert.faces:
            assert rec.extremum >= 0.0

    def test_scalar_reduces_to_f_at_zero(self):
        cert = check_quasipositivity(model_from_parts(["u"], ["1 - u"]))
        assert cert.verdict == "satisfied"
        assert cert.faces[0].extremum == 1.0

    def test_rejects_time_dependent(self):
        model = model_from_parts(["u"], ["(1 - t)*exp(-t)"])
        with pytest.raises(ValueError):
            check_quasipositivity(model)

    def test_rejects_bad_clip(self):
        with pytest.raises(ValueError):
            check_quasipositivity(rotation(), clip=-1.0)


class TestRectangle:
    def test_logistic_unit_interval(self):
        model = model_from_parts(["u"], ["u*(1 - u)"])
        cert = check_rectangle(model, Rectangle((0.0,), (1.0,)))
        assert cert.verdict == "satisfied"
        assert {r.extremum for r in cert.faces} == {0.0}
        assert not cert.strict  # boundary equalities are not strict

    def test_constant_field_exits_high_face(self):
        model = model_from_parts(["u"], ["1"])
        cert = check_rectangle(model, Rectangle((0.0,), (1.0,)))
        assert cert.verdict == "violated"
        assert cert.witness.face == Face(0, "high")
        assert cert.witness.point == (1.0,)
        assert cert.witness.value == 1.0

    def test_chafee_infante(self):
        model = model_from_parts(["u"], ["u - u^3"])
        cert = check_rectangle(model, Rectangle((-1.0,), (1.0,)))
        assert cert.verdict == "satisfied"

    def test_strict_flag(self):
        model = model_from_parts(["u"], ["1 - 2*u"])
        cert = check_rectangle(model, Rectangle((0.25,), (0.75,)))
        assert cert.verdict == "satisfied"
        assert cert.strict


class TestNonautonomous:
    def test_gprime_violated_on_0_2(self):
        model = model_from_parts(["u"], ["(1 - t)*exp(-t)"])
        cert = check_nonautonomous(model, (0.0, 2.0))
        assert cert.verdict == "violated"
        assert cert.witness.time == 2.0
        assert cert.witness.value == pytest.approx(-math.exp(-2.0))

    def test_gprime_satisfied_on_0_1(self):
        model = model_from_parts(["u"], ["(1 - t)*exp(-t)"])
        cert = check_nonautonomous(model, (0.0, 1.0))
        assert cert.verdict == "satisfied"

    def test_time_tagged_rotation_matches_autonomous(self):
        # field unchanged, but referencing t makes it formally time-dependent
        tagged = model_from_parts(["u", "v"], ["v + 0*t", "-u + 0*t"])
        cert = check_nonautonomous(tagged, (0.0, 1.0))
        auto = check_quasipositivity(rotation())
        assert cert.verdict == auto.verdict == "violated"
        assert cert.witness.point == auto.witness.point

    def test_rejects_autonomous(self):
        with pytest.raises(ValueError):
            check_nonautonomous(rotation(), (0.0, 1.0))


class TestRefineWitness:
    def test_linear_objective_reaches_bound(self):
        bounds = Rectangle((0.0, 0.0), (10.0, 10.0))
        point, value, _ = refine_witness(rotation(), Face(1, "low"), (5.0, 0.0), bounds)
        assert point == (10.0, 0.0)
        assert value == -10.0

    def test_identically_zero_face(self):
        bounds = Rectangle((0.0,) * 3, (10.0,) * 3)
        point, value, _ = refine_witness(sir(), Face(0, "low"), (0.0, 3.0, 1.0), bounds)
        assert value == 0.0

    def test_fixed_point_of_search(self):
        model = model_from_parts(["u"], ["u*(1 - u)"])
        bounds = Rectangle((0.0,), (1.0,))
        point, value, _ = refine_witness(model, Face(0, "high"), (1.0,), bounds)
        assert point == (1.0,)
        assert value == 0.0

    def test_monotone_refinement(self):
        model = model_from_parts(["u", "v"], ["v", "-u*u + sin(3*u)"])
        bounds = Rectangle((0.0, 0.0), (10.0, 10.0))
        start = (2.0, 0.0)
        start_value = evaluate_field(model, 0.0, start)[1]
        _, value, _ = refine_witness(model, Face(1, "low"), start, bounds)
        assert value <= start_value


class TestCertificateContracts:
    def test_witness_reevaluates_exactly(self):
        for model in (rotation(), model_from_parts(["u", "v"], ["v", "1 - u*v"])):
            cert = check_quasipositivity(model)
            if cert.verdict != "violated":
                continue
            w = cert.witness
            value = evaluate_field(model, 0.0, w.point)[w.face.index]
            assert value == w.value
            assert value < -TOL_WIT

    def test_orthant_rectangle_coherence(self):
        for model in (rotation(), sir(), model_from_parts(["u"], ["1 - u"])):
            quasi = check_quasipositivity(model, clip=10.0)
            rect = check_rectangle(model, positive_orthant(model.n), clip=10.0)
            assert quasi.verdict == rect.verdict
            assert [r.extremum for r in quasi.faces] == [r.extremum for r in rect.faces]

    def test_deterministic_serialization(self):
        a = check_quasipositivity(rotation(), seed=3).to_json()
        b = check_quasipositivity(rotation(), seed=3).to_json()
        assert a == b

    def test_sampling_metadata_recorded(self):
        cert = check_quasipositivity(sir(), clip=7.0, grid_per_axis=5, random_samples=32, seed=9)
        doc = cert.to_dict()
        assert doc["sampling"] == {
            "clip": 7.0,
            "grid_per_axis": 5,
            "random_samples": 32,
            "seed": 9,
            "tol_wit": TOL_WIT,
        }

    def test_marginal_band(self):
        model = model_from_parts(["u"], ["0 - 1e-13"])
        cert = check_quasipositivity(model)
        assert cert.verdict == "marginal"
