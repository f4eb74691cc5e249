import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusrot.errors import ArgumentError, ConfigError, EvaluationFault, PeriodicityError
from torusrot.maps import (
    Expression,
    Translation,
    TwoShear,
    check_periodicity,
    cos2pi,
    eval_lift,
    finite_difference_jacobian,
    jacobian,
    make_lift,
    parse_map_expr,
    project_torus,
    sin2pi,
    spec_from_mapping,
    spec_to_mapping,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_sin2pi_exact_zeros_and_accuracy():
    xs = np.array([0.0, 0.5, 1.0, -0.5, 3.0, 7.5, -12.0])
    assert np.all(sin2pi(xs) == 0.0)
    grid = np.linspace(-3, 3, 20001)
    assert np.max(np.abs(sin2pi(grid) - np.sin(2 * np.pi * grid))) < 1e-14
    assert np.max(np.abs(cos2pi(grid) - np.cos(2 * np.pi * grid))) < 1e-14
    assert abs(sin2pi(0.25) - 1.0) <= 2.3e-16 and abs(sin2pi(0.75) + 1.0) <= 2.3e-16


def test_translation_and_shear_values():
    T = make_lift(Translation(0.25, 0.75))
    assert eval_lift(T, (1.0, 2.0)) == (1.25, 2.75)
    S = make_lift(TwoShear(1.2, 1.2, 0.0, 0.0))
    assert eval_lift(S, (0.0, 0.0)) == (0.0, 0.0)
    assert eval_lift(S, (0.5, 0.5)) == (0.5, 0.5)
    x, y = 0.13, 0.37
    xh = x + 1.2 * math.sin(2 * math.pi * y)
    fx, fy = eval_lift(S, (x, y))
    assert fx == pytest.approx(xh, abs=1e-15)
    assert fy == pytest.approx(y + 1.2 * math.sin(2 * math.pi * xh), abs=1e-14)


def test_shear_with_zero_amplitude_is_translation():
    S = make_lift(TwoShear(0.0, 0.0, 0.25, 0.75))
    assert eval_lift(S, (0.1, 0.2)) == eval_lift(make_lift(Translation(0.25, 0.75)), (0.1, 0.2))


def test_eval_rejects_nonfinite_point():
    with pytest.raises(ArgumentError):
        eval_lift(make_lift(Translation(0, 0)), (math.nan, 0.0))
    with pytest.raises(ArgumentError):
        TwoShear(math.inf, 0.0)


@settings(max_examples=200, deadline=None)
@given(x=finite, y=finite, m=st.integers(-20, 20), k=st.integers(-20, 20))
def test_deck_commutation_builtin(x, y, m, k):
    S = make_lift(TwoShear(1.2, 0.7, 0.1, -0.3))
    fx, fy = eval_lift(S, (x, y))
    gx, gy = eval_lift(S, (x + m, y + k))
    # exact reduction makes sin2pi(y + k) == sin2pi(y) up to the rounding of y + k
    assert gx - m == pytest.approx(fx, abs=1e-12 * (1 + abs(x) + abs(m)))
    assert gy - k == pytest.approx(fy, abs=1e-12 * (1 + abs(y) + abs(k) + abs(x) + abs(m)))


def test_expression_map_matches_builtin():
    E = make_lift(
        parse_map_expr(
            "x + a*sin(2*pi*y)",
            "y + b*sin(2*pi*(x + a*sin(2*pi*y)))",
            {"a": 1.2, "b": 0.8},
        )
    )
    S = make_lift(TwoShear(1.2, 0.8))
    rng = np.random.default_rng(3)
    p = rng.uniform(-1, 2, size=(100, 2))
    ex = np.stack(E(p[:, 0], p[:, 1]), axis=1)
    sx = np.stack(S(p[:, 0], p[:, 1]), axis=1)
    np.testing.assert_allclose(ex, sx, atol=1e-13)
    np.testing.assert_allclose(E.jacobian(p[:, 0], p[:, 1]), S.jacobian(p[:, 0], p[:, 1]), atol=1e-11)


def test_periodicity_check_rejects_non_lift():
    with pytest.raises(PeriodicityError):
        make_lift(parse_map_expr("x^2", "y"))
    with pytest.raises(PeriodicityError):
        make_lift(parse_map_expr("2*x", "y"))  # degree-2 map, not homotopic to the identity
    lift = make_lift(parse_map_expr("x^2", "y"), validate=False)
    report = check_periodicity(lift)
    assert not report.passed and report.max_defect > 1


def test_periodicity_report_for_builtins():
    for spec in (Translation(0.3, 0.1), TwoShear(1.2, 1.2, 0.1, 0.2)):
        r = check_periodicity(make_lift(spec), n_samples=500)
        assert r.passed and r.max_defect < 1e-12


def test_expression_fault_propagates_location():
    lift = make_lift(parse_map_expr("x + 0*1/(sin(2*pi*y))", "y"), validate=False)
    with pytest.raises(EvaluationFault) as info:
        eval_lift(lift, (0.3, 0.0))
    assert info.value.point == (0.3, 0.0)
    assert "offset" in info.value.location


@pytest.mark.parametrize(
    "spec",
    [
        Translation(0.25, 0.75),
        TwoShear(1.2, 1.2),
        TwoShear(0.4, -0.9, 0.1, 0.3),
        Expression("x + 0.3*sin(2*pi*y) + 0.1*cos(2*pi*x)", "y + 0.2*sin(2*pi*x)"),
    ],
)
def test_jacobian_against_finite_differences(spec):
    lift = make_lift(spec)
    rng = np.random.default_rng(11)
    p = rng.uniform(0, 1, size=(100, 2))
    J = lift.jacobian(p[:, 0], p[:, 1])
    F = finite_difference_jacobian(lift, p[:, 0], p[:, 1])
    assert np.max(np.abs(J - F)) < 1e-6


def test_jacobian_single_point_shape():
    J = jacobian(make_lift(TwoShear(1.2, 1.2)), (0.0, 0.0))
    assert J.shape == (2, 2)
    a = 2 * math.pi * 1.2
    np.testing.assert_allclose(J, [[1, a], [a, 1 + a * a]], rtol=1e-15)


@settings(max_examples=200, deadline=None)
@given(x=finite, y=finite)
def test_project_torus(x, y):
    base, k = project_torus(np.array([x, y]))
    assert np.all(base >= 0) and np.all(base < 1)
    assert np.all(k == np.round(k))
    assert abs(base[0] + k[0] - x) <= math.ulp(max(abs(x), 1.0))
    assert abs(base[1] + k[1] - y) <= math.ulp(max(abs(y), 1.0))


def test_project_torus_clamps_rounding_to_one():
    base, k = project_torus(np.array([-1e-20, 0.5]))
    assert base[0] == 0.0 and k[0] == 0.0


def test_spec_mapping_roundtrip_and_errors():
    for spec in (Translation(0.25, 0.75), TwoShear(1.2, 1.2, 0.1, 0.0)):
        assert spec_from_mapping(spec_to_mapping(spec)) == spec
    e = parse_map_expr("x + k*sin(2*pi*y)", "y", {"k": 0.5})
    back = spec_from_mapping(spec_to_mapping(e))
    assert back == e
    with pytest.raises(ConfigError, match="missing key: family"):
        spec_from_mapping({"alpha": 0.1})
    with pytest.raises(ConfigError, match="missing key: b"):
        spec_from_mapping({"family": "two_shear", "a": 1.0})
    with pytest.raises(ConfigError, match="unknown map family"):
        spec_from_mapping({"family": "standard"})


def test_lift_is_immutable():
    lift = make_lift(Translation(0.1, 0.2))
    with pytest.raises(AttributeError):
        lift.spec = None
