from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yardsale.errors import (EmptyStateError, NegativeWealthError, ParameterError,
                             ZeroTotalError)
from yardsale.model import (ModelParams, TradeDraw, apply_taxation, apply_trade,
                            make_state, resolve_roles, step, uniform_state)


def exact_trade(x, poorer, richer, fraction, richer_wins, lam=1):
    """Rational-arithmetic oracle for one trade."""
    x = [Fraction(v) for v in x]
    t = Fraction(fraction) * x[poorer] * Fraction(lam)
    sign = -1 if richer_wins else 1
    x[poorer] += sign * t
    x[richer] -= sign * t
    return x


def exact_tax(x, chi):
    chi = Fraction(chi)
    return [(1 - chi) * Fraction(v) + chi / len(x) for v in x]


@pytest.mark.parametrize("raw, expected", [
    ([2, 2], [0.5, 0.5]),
    ([0.3, 0.7], [0.3, 0.7]),
    ([1, 1, 2], [0.25, 0.25, 0.5]),
])
def test_make_state(raw, expected):
    s = make_state(raw)
    np.testing.assert_allclose(s.wealth, expected, rtol=0, atol=1e-15)
    assert abs(s.wealth.sum() - 1) <= 1e-12


@pytest.mark.parametrize("raw, err", [
    ([], EmptyStateError),
    ([0.5, -0.1], NegativeWealthError),
    ([0, 0], ZeroTotalError),
])
def test_make_state_errors(raw, err):
    with pytest.raises(err):
        make_state(raw)


def test_state_is_immutable():
    s = uniform_state(3)
    with pytest.raises(ValueError):
        s.wealth[0] = 1.0


@pytest.mark.parametrize("x, a, b, roles", [
    ([0.3, 0.7], 1, 0, (0, 1)),
    ([0.5, 0.5], 1, 0, (0, 1)),
    ([0.2, 0.3, 0.5], 2, 1, (1, 2)),
])
def test_resolve_roles(x, a, b, roles):
    assert resolve_roles(make_state(x), TradeDraw(a, b, 0.5, True)) == roles


def test_resolve_roles_out_of_range():
    with pytest.raises(IndexError):
        resolve_roles(make_state([0.5, 0.5]), TradeDraw(0, 2, 0.5, True))


def test_trade_draw_validation():
    with pytest.raises(ParameterError):
        TradeDraw(1, 1, 0.5, True)
    for f in (0.0, 1.0):
        with pytest.raises(ParameterError):
            TradeDraw(0, 1, f, True)


@pytest.mark.parametrize("wins, lam", [(True, None), (False, None), (False, (0.5, 0.5))])
def test_apply_trade_examples(wins, lam):
    params = ModelParams(2, risk_lambda=lam)
    new, out = apply_trade(make_state([0.3, 0.7]), TradeDraw(0, 1, 0.5, wins), params)
    expected = exact_trade([0.3, 0.7], 0, 1, 0.5, wins, 1 if lam is None else lam[0])
    np.testing.assert_allclose(new.wealth, [float(v) for v in expected], rtol=0, atol=1e-15)
    assert out.stake == pytest.approx(0.15, abs=1e-16)
    assert (out.poorer, out.richer) == (0, 1)
    scale = 1 if lam is None else lam[0]
    assert out.transfer_signed == pytest.approx((-1 if wins else 1) * 0.15 * scale, abs=1e-16)


def test_spec_values_for_trade():
    # frozen from the rational oracle above
    p = ModelParams(2)
    s = make_state([0.3, 0.7])
    np.testing.assert_allclose(apply_trade(s, TradeDraw(0, 1, 0.5, True), p)[0].wealth, [0.15, 0.85], atol=1e-15)
    np.testing.assert_allclose(apply_trade(s, TradeDraw(0, 1, 0.5, False), p)[0].wealth, [0.45, 0.55], atol=1e-15)
    lam = ModelParams(2, risk_lambda=(0.5, 0.5))
    new, out = apply_trade(s, TradeDraw(0, 1, 0.5, False), lam)
    np.testing.assert_allclose(new.wealth, [0.375, 0.625], atol=1e-15)
    assert out.transfer_signed == pytest.approx(0.075, abs=1e-16)


@pytest.mark.parametrize("x, chi, expected", [
    ([1, 0], 0.1, [0.95, 0.05]),
    ([0.3, 0.7], 0.2, [0.34, 0.66]),
])
def test_apply_taxation(x, chi, expected):
    got = apply_taxation(make_state(x), chi).wealth
    oracle = [float(v) for v in exact_tax(x, chi)]
    np.testing.assert_allclose(got, oracle, rtol=0, atol=1e-15)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("n", [2, 5, 17])
def test_taxation_fixed_point(n):
    u = uniform_state(n)
    np.testing.assert_allclose(apply_taxation(u, 0.3).wealth, u.wealth, rtol=0, atol=1e-16)


@pytest.mark.parametrize("chi", [0.0, 1.0, -0.1, 1.5])
def test_taxation_domain(chi):
    with pytest.raises(ParameterError):
        apply_taxation(uniform_state(2), chi)


def test_step_without_tax_is_trade():
    p = ModelParams(3)
    s = make_state([0.2, 0.3, 0.5])
    d = TradeDraw(2, 0, 0.3, False)
    assert step(s, d, p)[0] == apply_trade(s, d, p)[0]


def test_step_with_tax_example():
    p = ModelParams(2, tax_chi=0.1)
    new, out = step(make_state([0.3, 0.7]), TradeDraw(0, 1, 0.5, True), p)
    oracle = exact_tax(exact_trade([0.3, 0.7], 0, 1, 0.5, True), 0.1)
    np.testing.assert_allclose(new.wealth, [float(v) for v in oracle], atol=1e-15)
    np.testing.assert_allclose(new.wealth, [0.185, 0.815], atol=1e-15)
    assert out.stake == pytest.approx(0.15, abs=1e-16)


@pytest.mark.parametrize("kwargs", [
    dict(n_agents=1),
    dict(n_agents=2, delta=0.5),
    dict(n_agents=2, delta=-0.01),
    dict(n_agents=2, risk_lambda=(0.5,)),
    dict(n_agents=2, risk_lambda=(0.5, 1.0)),
    dict(n_agents=2, tax_chi=0.0),
    dict(n_agents=2, tax_chi=1.0),
])
def test_model_params_domain(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


def test_model_params_edges():
    assert ModelParams(2, delta=0.0).p == 0.5
    # largest admissible bias is accepted; 1/2 itself is not
    ModelParams(2, delta=np.nextafter(0.5, 0))


# -- properties -------------------------------------------------------------

@st.composite
def trade_cases(draw, with_lambda=False, with_tax=False):
    n = draw(st.integers(2, 12))
    raw = draw(st.lists(st.floats(0, 10, allow_subnormal=False), min_size=n, max_size=n)
               .filter(lambda v: sum(v) > 0))
    a = draw(st.integers(0, n - 1))
    b = draw(st.integers(0, n - 2))
    b = b + 1 if b >= a else b
    f = draw(st.floats(1e-9, 1 - 1e-9))
    lam = tuple(draw(st.lists(st.floats(0.01, 0.99), min_size=n, max_size=n))) if with_lambda else None
    chi = draw(st.floats(0.001, 0.999)) if with_tax else None
    params = ModelParams(n, delta=draw(st.floats(0, 0.49)), risk_lambda=lam, tax_chi=chi)
    return make_state(raw), TradeDraw(a, b, f, draw(st.booleans())), params


@settings(max_examples=300)
@given(trade_cases(with_lambda=True))
def test_trade_conserves_and_stays_nonnegative(case):
    state, draw, params = case
    new, out = apply_trade(state, draw, params)
    assert abs(new.wealth.sum() - state.wealth.sum()) <= 1e-15 * state.n_agents
    assert np.all(new.wealth >= 0)
    assert out.stake <= state.wealth[out.poorer]
    if state.wealth[out.poorer] > 0:
        assert out.stake < state.wealth[out.poorer]
    assert abs(out.transfer_signed) == pytest.approx(out.stake * params.risk_lambda[out.poorer], rel=1e-15, abs=0)


@settings(max_examples=300)
@given(trade_cases())
def test_trade_locality_and_zero_absorption(case):
    state, draw, params = case
    new, out = apply_trade(state, draw, params)
    others = np.ones(state.n_agents, bool)
    others[[draw.agent_a, draw.agent_b]] = False
    assert np.array_equal(new.wealth[others], state.wealth[others])
    zero = state.wealth == 0
    assert np.all(new.wealth[zero] == 0)


@settings(max_examples=200)
@given(trade_cases(with_lambda=True))
def test_roles_ignore_lambda(case):
    state, draw, params = case
    plain = ModelParams(params.n_agents, params.delta)
    assert apply_trade(state, draw, params)[1].poorer == apply_trade(state, draw, plain)[1].poorer
    assert resolve_roles(state, draw)[0] <= state.n_agents


@settings(max_examples=300)
@given(trade_cases(with_tax=True))
def test_taxed_step_floor_and_conservation(case):
    state, draw, params = case
    new, _ = step(state, draw, params)
    assert np.all(new.wealth >= params.tax_chi / params.n_agents)
    assert abs(new.wealth.sum() - state.wealth.sum()) <= 1e-15 * state.n_agents
