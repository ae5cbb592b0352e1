"""Tests for the time-expression language, system validation, and configs."""

import json
import math

import numpy as np
import pytest

from fracdelay.errors import (
    ConfigError,
    DimensionError,
    DomainError,
    ExprEvalError,
    ExprSyntaxError,
)
from fracdelay.scenarios import SCENARIOS
from fracdelay.system_model import (
    InitialData,
    MultiOrder,
    MultiOrderSystem,
    derive_initial_phi,
    derived_initial_data,
    eval_time_expr,
    parse_time_expr,
    system_from_config,
    validate_system,
)


# --- parsing -------------------------------------------------------------


def test_parse_delay_expression():
    e = parse_time_expr("1 + 0.5*t*sin(t)^2")
    assert e(0.0) == 1.0
    # sin(pi) is ~1e-16, squared it vanishes
    assert abs(e(math.pi) - 1.0) < 1e-12


def test_parse_rational_expression():
    e = parse_time_expr("t/(1+t^2)")
    assert e(1.0) == 0.5
    assert e(0.0) == 0.0


def test_parse_exponent_base():
    e = parse_time_expr("0.1 + 0.25*2^(t/(t+1))")
    assert abs(e(0.0) - 0.35) < 1e-15
    # t -> inf limit is 0.1 + 0.5
    assert e(1e6) < 0.6


def test_parse_error_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse_time_expr("2^^3")
    assert err.value.offset == 2


def test_parse_unknown_identifier():
    with pytest.raises(ExprSyntaxError) as err:
        parse_time_expr("2*foo + 1")
    assert err.value.offset == 2
    assert "foo" in str(err.value)


def test_parse_arity_mismatch():
    with pytest.raises(ExprSyntaxError):
        parse_time_expr("sin(t, 1)")


def test_parse_function_without_parens():
    with pytest.raises(ExprSyntaxError):
        parse_time_expr("sin + 1")


def test_parse_unbalanced():
    with pytest.raises(ExprSyntaxError):
        parse_time_expr("(1 + t")


def test_constants_and_precedence():
    assert abs(parse_time_expr("cos(pi)")(0.0) + 1.0) < 1e-15
    assert parse_time_expr("e")(0.0) == math.e
    assert parse_time_expr("2 + 3*4")(0.0) == 14.0
    assert parse_time_expr("2*3^2")(0.0) == 18.0
    assert parse_time_expr("-t^2")(3.0) == -9.0  # unary minus binds below ^
    assert parse_time_expr("2^3^2")(0.0) == 512.0  # right associative
    assert parse_time_expr("8/4/2")(0.0) == 1.0  # left associative
    assert parse_time_expr("1 - 2 - 3")(0.0) == -4.0


def test_eval_examples():
    assert parse_time_expr("0.1+0.1*cos(t)")(0.0) == 0.2
    assert eval_time_expr(parse_time_expr("t/(1+t^2)"), 0.0) == 0.0


def test_eval_errors():
    with pytest.raises(ExprEvalError):
        parse_time_expr("1/t")(0.0)
    with pytest.raises(ExprEvalError):
        parse_time_expr("log(t)")(0.0)
    with pytest.raises(ExprEvalError):
        parse_time_expr("sqrt(t)")(-1.0)
    with pytest.raises(ExprEvalError):
        parse_time_expr("exp(t)")(1e9)
    with pytest.raises(DomainError):
        parse_time_expr("t")(math.inf)


def test_roundtrip_is_bit_exact():
    sources = [
        "1 + 0.5*t*sin(t)^2",
        "t/(1+t^2)",
        "0.1 + 0.25*2^(t/(t+1))",
        "-(t - 2)*(t + 3)/(1 + abs(t))",
        "2^3^(t/10)",
        "exp(-t)*cos(2*t) - sqrt(t + 5)",
        "1 - 2 - t",
        "8/t/2",
        "-t^2 + (-t)^2",
    ]
    rng = np.random.RandomState(42)
    ts = rng.uniform(0.05, 10.0, size=100)
    for src in sources:
        first = parse_time_expr(src)
        second = parse_time_expr(first.to_source())
        for t in ts:
            assert first(float(t)) == second(float(t)), src


def test_zero_literal_detection():
    assert parse_time_expr("0").is_zero_literal
    assert parse_time_expr("0.0").is_zero_literal
    assert parse_time_expr("-0").is_zero_literal
    assert not parse_time_expr("t").is_zero_literal
    assert not parse_time_expr("0 + 0").is_zero_literal


# --- system construction ---------------------------------------------------


def _ex1_system():
    return system_from_config(SCENARIOS["ex1"].config_doc())


def test_multi_order_validation():
    with pytest.raises(DomainError):
        MultiOrder((0.5, 1.2))
    with pytest.raises(DomainError):
        MultiOrder((0.0,))
    with pytest.raises(DimensionError):
        MultiOrder(())


def test_dimension_mismatch_detection():
    doc = SCENARIOS["ex1"].config_doc()
    doc["B"] = [[0.1, 0.2], [0.3, 0.4]]  # wrong shape for d = 3
    with pytest.raises(ConfigError):
        system_from_config(doc)


def test_derive_initial_phi_example1():
    system, _ = _ex1_system()
    phi = derive_initial_phi(system, np.array([0.3, 0.2, 0.8]), np.zeros(2))
    np.testing.assert_allclose(phi, [0.219481, 0.237662], atol=5e-7)


def test_derive_initial_phi_example2_paper_value():
    # the printed value in the source example equals (I-D)^{-1} C psi(0),
    # i.e. the forcing offset at zero is not included there
    system, _ = _ex1_system()
    phi = derive_initial_phi(system, np.array([0.5, 0.1, 1.2]), np.zeros(2))
    np.testing.assert_allclose(phi, [0.2740, 0.2831], atol=5e-5)


def test_derive_initial_phi_identity_case():
    z = parse_time_expr("0")
    system = MultiOrderSystem(
        order=MultiOrder((0.5, 0.5)),
        A=-np.eye(2),
        B=np.zeros((2, 2)),
        E=np.zeros((2, 2)),
        C=np.eye(2) * 0.9,
        D=np.zeros((2, 2)),
        f=(z, z),
        g=(z, z),
        tau1=parse_time_expr("1"),
        tau2=parse_time_expr("1"),
        tau3=parse_time_expr("1"),
        r=1.0,
    )
    psi0 = np.array([0.4, 0.7])
    np.testing.assert_allclose(
        derive_initial_phi(system, psi0, np.zeros(2)), 0.9 * psi0, atol=1e-14
    )


def test_derived_phi_satisfies_fixed_point():
    for name in ("ex1", "ex2", "ex3"):
        system, init = system_from_config(SCENARIOS[name].config_doc())
        phi0 = init.eval_phi(0.0)
        psi0 = init.eval_psi(0.0)
        g0 = system.eval_g(0.0)
        residual = (np.eye(system.dim_y) - system.D) @ phi0 - system.C @ psi0 - g0
        assert np.max(np.abs(residual)) <= 1e-12


# --- validation ---------------------------------------------------------------


def test_validate_example_scenarios_all_pass():
    for name in ("ex1", "ex2", "ex3"):
        scenario = SCENARIOS[name]
        system, init = system_from_config(scenario.config_doc())
        report = validate_system(system, init, scenario.t_end)
        assert report.all_ok, (name, report.failures())
        assert report.t2_holds


def test_validate_detects_d1_failure():
    doc = SCENARIOS["ex1"].config_doc()
    doc["D"] = [[0.9, 0.3], [0.2, 0.1]]  # row sum 1.2
    system, init = system_from_config(doc)
    report = validate_system(system, init, 10.0)
    assert not report.d1_ok
    assert not report.existence_uniqueness_ok


def test_validate_detects_compat_failure():
    doc = SCENARIOS["ex1"].config_doc()
    doc["phi"] = ["0.7", "0.7"]  # far from the compatible value
    system, init = system_from_config(doc)
    report = validate_system(system, init, 10.0)
    assert not report.compat_ok
    assert report.compat_residual > 0.1


def test_validate_detects_t1_violation():
    doc = SCENARIOS["ex1"].config_doc()
    doc["tau1"] = "3"  # t - 3 < -1 = -r near t = 0
    system, init = system_from_config(doc)
    report = validate_system(system, init, 10.0)
    assert not report.t1_ok


def test_validate_flags_negative_delay():
    doc = SCENARIOS["ex1"].config_doc()
    doc["tau2"] = "0.5 - 0.1*t"
    system, init = system_from_config(doc)
    report = validate_system(system, init, 10.0)
    assert not report.delays_nonnegative


def test_validate_t4_heuristic_rejects_stalling_lag():
    doc = SCENARIOS["ex1"].config_doc()
    doc["tau2"] = "t"  # t - tau = 0 forever: no growth
    system, init = system_from_config(doc)
    report = validate_system(system, init, 10.0)
    assert not report.t4_ok


# --- config handling -----------------------------------------------------------


def test_config_roundtrip_scenarios():
    for name, scenario in SCENARIOS.items():
        doc = json.loads(scenario.config_text)
        system, init = system_from_config(doc)
        assert system.dim_x == len(doc["order"])
        assert init.phi_mode == "derived"


def test_config_unknown_key():
    doc = SCENARIOS["ex1"].config_doc()
    doc["extra"] = 1
    with pytest.raises(ConfigError) as err:
        system_from_config(doc)
    assert "extra" in str(err.value)


def test_config_missing_key():
    doc = SCENARIOS["ex1"].config_doc()
    del doc["tau3"]
    with pytest.raises(ConfigError) as err:
        system_from_config(doc)
    assert "tau3" in str(err.value)


def test_config_bad_expression_reports_key():
    doc = SCENARIOS["ex1"].config_doc()
    doc["tau1"] = "2^^3"
    with pytest.raises(ConfigError) as err:
        system_from_config(doc)
    assert "tau1" in str(err.value)


def test_config_explicit_phi():
    doc = SCENARIOS["ex1"].config_doc()
    # the derived constant, written out explicitly, still satisfies (K)
    system, init = system_from_config(doc)
    phi0 = init.eval_phi(0.0)
    doc["phi"] = [repr(float(v)) for v in phi0]
    system2, init2 = system_from_config(doc)
    assert init2.phi_mode == "explicit"
    report = validate_system(system2, init2, 5.0)
    assert report.compat_ok


def test_initial_data_phi_mode_validation():
    one = parse_time_expr("1")
    with pytest.raises(DomainError):
        InitialData(psi=(one,), phi=(one,), phi_mode="other")
