import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rumorsim.analysis import (
    ALWAYS_SPREADS,
    DegenerateParametersError,
    c_constant,
    epsilon,
    final_size_rumor_only,
    initial_rates,
    parse_report,
    solve_final_size,
    spreading_condition,
    threshold_lambda1,
    threshold_lambda2,
    threshold_report,
)
from rumorsim.model import FIG2_PARAMS, FIG11_PARAMS, DiscernibilitySpec, StateVector, rhs

from .strategies import params_st, random_params


def fixed_point_final_size(eps, r0=0.5, iters=10_000):
    """Independent oracle: iterate R <- 1 - exp(-eps R)."""
    r = r0
    for _ in range(iters):
        r = 1.0 - math.exp(-eps * r)
    return r


def test_c_constant():
    assert c_constant(FIG2_PARAMS) == pytest.approx(0.279, abs=1e-15)
    assert c_constant(FIG2_PARAMS.with_(lambda1=0.0, eta=0.0)) == 1.0
    one = FIG2_PARAMS.with_(eta=1.0, f_spec=DiscernibilitySpec("constant", value=1.0))
    assert c_constant(one) == 0.0


def test_epsilon_fig2():
    assert epsilon(FIG2_PARAMS) == pytest.approx(1.021 / 0.3125, abs=1e-12)
    assert epsilon(FIG2_PARAMS) == pytest.approx(3.2672, abs=1e-4)


def test_epsilon_without_transmission_is_subcritical():
    p = FIG2_PARAMS.with_(lambda1=0.0, eta=0.0)
    assert epsilon(p) < 1.0


def test_epsilon_degenerate():
    with pytest.raises(DegenerateParametersError):
        epsilon(FIG2_PARAMS.with_(beta1=0.0, gamma1=0.0))


def test_epsilon_is_one_at_the_threshold():
    rng = np.random.default_rng(7)
    hits = 0
    while hits < 20:
        p = random_params(rng).with_(beta1=0.0)
        l1c = threshold_lambda1(p)
        if l1c == ALWAYS_SPREADS or not 0 < l1c <= 1 or p.gamma1 == 0:
            continue
        f = p.f
        if (1 - f) * l1c + f * p.eta > 1:
            continue
        assert epsilon(p.with_(lambda1=l1c)) == pytest.approx(1.0, abs=1e-12)
        hits += 1


def test_final_size_subcritical_is_zero():
    p = FIG2_PARAMS.with_(lambda1=0.0, eta=0.0)
    assert final_size_rumor_only(p) == 0.0


def test_final_size_fig2_matches_fixed_point():
    r = final_size_rumor_only(FIG2_PARAMS)
    assert r == pytest.approx(fixed_point_final_size(epsilon(FIG2_PARAMS)), abs=1e-12)
    assert r == pytest.approx(0.956, abs=5e-4)
    assert abs(r - 1 + math.exp(-epsilon(FIG2_PARAMS) * r)) < 1e-12


def test_final_size_large_epsilon():
    assert solve_final_size(50.0) > 0.999


@settings(max_examples=200, deadline=None)
@given(eps=st.floats(1.05, 60.0))
def test_final_size_root_property(eps):
    r = solve_final_size(eps)
    assert 0 < r < 1
    assert abs(r - 1 + math.exp(-eps * r)) < 1e-12
    assert r == pytest.approx(fixed_point_final_size(eps), abs=1e-9)


def test_final_size_continuous_and_monotone():
    eps = np.linspace(0.5, 10, 2000)
    r = np.array([solve_final_size(e) for e in eps])
    assert np.all(np.diff(r) >= 0)
    assert np.all(r[eps <= 1] == 0)
    # near-critical branch is continuous: R ~ 2(eps-1) for eps -> 1+
    assert solve_final_size(1.0 + 1e-6) == pytest.approx(2e-6, rel=1e-3)


def test_threshold_lambda1_fig11():
    assert threshold_lambda1(FIG11_PARAMS) == pytest.approx(0.1, abs=1e-15)


def test_threshold_lambda1_without_discernibility():
    p = FIG2_PARAMS.with_(m=0.0)
    assert threshold_lambda1(p) == pytest.approx(p.gamma1 / p.k_avg)


def test_threshold_lambda1_always_spreads():
    assert threshold_lambda1(FIG2_PARAMS) == ALWAYS_SPREADS


def test_threshold_lambda1_undefined_at_f_one():
    p = FIG2_PARAMS.with_(eta=0.5, f_spec=DiscernibilitySpec("constant", value=1.0))
    with pytest.raises(DegenerateParametersError):
        threshold_lambda1(p)


def test_threshold_lambda2():
    assert threshold_lambda2(FIG11_PARAMS) == pytest.approx(0.1, abs=1e-15)
    assert threshold_lambda2(FIG2_PARAMS.with_(gamma2=0.0)) == 0.0
    assert threshold_lambda2(FIG2_PARAMS) == 0.0125


def test_initial_rates_fig2():
    d = initial_rates(FIG2_PARAMS, 10**5)
    assert d.di == pytest.approx(-2 * 8 * (10**5 - 2) / 1e10, rel=1e-14)
    assert d.di == pytest.approx(-1.59997e-4, rel=1e-5)
    assert abs(math.fsum(d)) < 1e-18


@settings(max_examples=300, deadline=None)
@given(params=params_st())
def test_initial_rates_equal_rhs(params):
    d = initial_rates(params, params.n)
    ref = rhs(StateVector.two_seed(params.n), params)
    for a, b in zip(d, ref):
        assert abs(a - b) <= 1e-15


def test_spreading_condition_examples():
    v = spreading_condition(FIG11_PARAMS.with_(lambda1=0.2, lambda2=0.1))
    assert v.spreads and v.margin == pytest.approx(0.05, abs=1e-12)
    v = spreading_condition(FIG11_PARAMS.with_(lambda1=0.1, lambda2=0.05))
    assert not v.spreads and v.lhs == pytest.approx(0.15) and v.rhs == pytest.approx(0.2)


@settings(max_examples=200, deadline=None)
@given(params=params_st())
def test_spreading_condition_large_n_matches_limit(params):
    a = spreading_condition(params, n=10**12)
    b = spreading_condition(params)
    assert abs(a.margin - b.margin) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(params=params_st())
def test_finite_n_margin_tracks_initial_active_growth(params):
    # the margin has the sign of s1'(0) + s2'(0) + h'(0) at the two-seed start
    d = initial_rates(params, params.n)
    growth = d.ds1 + d.ds2 + d.dh
    v = spreading_condition(params, n=params.n)
    scale = params.k_avg * (params.n - 2) / params.n**2
    assert growth == pytest.approx(scale * v.margin, abs=1e-12 * max(1.0, abs(growth)))


@settings(max_examples=300, deadline=None)
@given(params=params_st())
def test_epsilon_above_one_iff_above_threshold(params):
    assume(params.beta1 + params.gamma1 / params.k_avg > 0)
    assume(params.f < 1.0)
    l1c = threshold_lambda1(params)
    assume(l1c != ALWAYS_SPREADS)
    # away from the boundary, where rounding could flip either side
    assume(abs(params.lambda1 - l1c) > 1e-9)
    assert (epsilon(params) > 1) == (params.lambda1 > l1c)


@settings(max_examples=200, deadline=None)
@given(params=params_st())
def test_general_condition_degenerates(params):
    assume(params.f < 1.0)
    rumor = spreading_condition(params.with_(lambda2=0.0, gamma2=0.0))
    l1c = threshold_lambda1(params)
    if l1c == ALWAYS_SPREADS:
        assert rumor.spreads or rumor.margin == pytest.approx(0.0, abs=1e-12)
    elif abs(params.lambda1 - l1c) > 1e-9:
        assert rumor.spreads == (params.lambda1 > l1c)

    truth_only = params.with_(lambda1=0.0, m=0.0, f_spec=DiscernibilitySpec("constant", value=0.0),
                              gamma1=0.0)
    truth = spreading_condition(truth_only)
    l2c = threshold_lambda2(truth_only)
    if abs(params.lambda2 - l2c) > 1e-9:
        assert truth.spreads == (params.lambda2 > l2c)


def test_report_text_and_csv():
    rep = threshold_report(FIG11_PARAMS)
    kv = parse_report(rep.as_text())
    assert kv["lambda1_c"] == "0.1" and kv["lambda2_c"] == "0.1"
    assert len(rep.csv_header().split(",")) == len(rep.csv_row().split(","))
    assert rep.lambda2_c == FIG11_PARAMS.gamma2 / FIG11_PARAMS.k_avg
    assert rep.epsilon == pytest.approx(
        (FIG11_PARAMS.beta1 - rep.c_const + 1) / (FIG11_PARAMS.beta1 + FIG11_PARAMS.gamma1 / FIG11_PARAMS.k_avg)
    )
