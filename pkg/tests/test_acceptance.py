"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from yardsale import experiments as ex
from yardsale.metrics import expected_norm_increment, gini, norm_sq
from yardsale.model import ModelParams, TradeDraw, apply_trade, make_state, uniform_state
from yardsale.output import write_outputs
from yardsale.sampling import ConstantFraction, StreamKey


def binomial_3sigma(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    ex.run_trajectory(ex.TrajectoryConfig(ModelParams(3), max_steps=10, condensation_epsilon=None))


def test_c01_conservation(criterion):
    cfg = ex.TrajectoryConfig(ModelParams(100, 0.0, ConstantFraction(0.1)), max_steps=10**6,
                              condensation_epsilon=None, record_every=1, key=StreamKey(2024))
    t0 = time.perf_counter()
    rec = ex.run_trajectory(cfg)
    elapsed = time.perf_counter() - t0
    drift = float(np.max(np.abs(rec.snapshots.total - 1.0)))
    ok = len(rec.snapshots) == 10**6 + 1 and drift <= 1e-9 and elapsed < 5.0
    criterion("C1 conservation", ok, f"max |sum-1| = {drift:.3e} over 1e6 steps, {elapsed:.2f}s")
    assert drift <= 1e-9
    assert elapsed < 5.0


def _win_freq(initial, lam=None, seed=1):
    params = ModelParams(2, 0.0, ConstantFraction(0.2), risk_lambda=lam)
    cfg = ex.TrajectoryConfig(params, initial=initial, condensation_epsilon=1e-6, record_every=10**6)
    t0 = time.perf_counter()
    summary = ex.run_ensemble(cfg, 10_000, seed)
    return summary, time.perf_counter() - t0


def test_c02_win_probability_law(criterion):
    summary, elapsed = _win_freq((0.3, 0.7))
    freq = summary.win_counts[0] / summary.n_trajectories
    assert binomial_3sigma(0.3, 10_000) == pytest.approx(0.014, abs=5e-4)
    ok = summary.n_condensed == 10_000 and abs(freq - 0.3) <= 0.014 and elapsed < 60
    criterion("C2 win law", ok, f"agent-0 frequency {freq:.4f} (target 0.3 +- 0.014), {elapsed:.1f}s")
    assert summary.n_condensed == 10_000
    assert abs(freq - 0.3) <= 0.014
    assert elapsed < 60
    assert all(e.consistent for e in ex.estimate_win_probabilities(summary))


def test_c03_win_law_with_risk_tolerance(criterion):
    summary, _ = _win_freq((0.3, 0.7), lam=(0.2, 0.9))
    freq = summary.win_counts[0] / summary.n_trajectories
    ok = summary.n_condensed == 10_000 and abs(freq - 0.3) <= 0.014
    criterion("C3 lambda invariance", ok, f"agent-0 frequency {freq:.4f} with lambda=(0.2, 0.9)")
    assert summary.n_condensed == 10_000
    assert abs(freq - 0.3) <= 0.014


def test_c04_closed_form_increment(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(2, 40))
        state = make_state(rng.dirichlet(np.full(n, rng.uniform(0.1, 3.0))))
        a, b = rng.choice(n, size=2, replace=False)
        f = float(rng.uniform(1e-6, 1 - 1e-6))
        delta = float(rng.uniform(0, 0.5))
        params = ModelParams(n, delta)
        base = norm_sq(state)
        up = norm_sq(apply_trade(state, TradeDraw(int(a), int(b), f, True), params)[0]) - base
        down = norm_sq(apply_trade(state, TradeDraw(int(a), int(b), f, False), params)[0]) - base
        enumerated = (0.5 + delta) * up + (0.5 - delta) * down
        lo, hi = (a, b) if state.wealth[a] <= state.wealth[b] else (b, a)
        closed = expected_norm_increment(state, int(lo), int(hi), f, delta)
        worst = max(worst, abs(closed - enumerated))
    criterion("C4 closed-form increment", worst <= 1e-12, f"max |closed - enumerated| = {worst:.2e}")
    assert worst <= 1e-12


def test_c05_increment_inequality(criterion):
    cfg0 = ex.TrajectoryConfig(ModelParams(10, 0.0, ConstantFraction(0.1)))
    rep0 = ex.verify_increment_bound(cfg0, 1000, 10_000, 5)
    ok0 = abs(rep0.pooled_gap_z) <= 3 and rep0.n_exceed <= rep0.allowed_exceed
    criterion("C5a inequality, delta=0", ok0,
              f"pooled z = {rep0.pooled_gap_z:.2f}, steps with |z|>3: {rep0.n_exceed}/{rep0.n_steps} "
              f"(allowed {rep0.allowed_exceed})")

    cfg2 = ex.TrajectoryConfig(ModelParams(10, 0.2, ConstantFraction(0.1)))
    rep2 = ex.verify_increment_bound(cfg2, 1000, 10_000, 5)
    ok2 = (rep2.pooled_gap_z > 3 and abs(rep2.pooled_resid_z) <= 3
           and rep2.n_exceed <= rep2.allowed_exceed)
    criterion("C5b inequality, delta=0.2", ok2,
              f"gap z = {rep2.pooled_gap_z:.1f}, residual vs 4*delta*E[w gap] z = {rep2.pooled_resid_z:.2f}, "
              f"steps with |z|>3: {rep2.n_exceed}")
    assert ok0
    assert ok2
    assert rep0.passed and rep2.passed


def test_c06_summability(criterion):
    cfg = ex.TrajectoryConfig(ModelParams(2, 0.0, ConstantFraction(0.1)), initial=(0.5, 0.5))
    rep = ex.verify_stake_summability(cfg, 10**5, 10_000, 6)
    ok = rep.bound == 0.25 and rep.stake_sq.mean <= rep.bound + rep.margin and rep.monotone
    criterion("C6 summability", ok,
              f"mean sum w^2 = {rep.stake_sq.mean:.5f} +- {rep.stake_sq.stderr:.5f} vs bound 0.25")
    assert rep.bound == 0.25
    assert rep.stake_sq.mean <= 0.25 + 3 * rep.stake_sq.stderr
    assert rep.monotone


def test_c07_taxation_floor(criterion):
    floor = 0.1 / 10
    worst = math.inf
    for delta in (0.0, 0.3):
        cfg = ex.TrajectoryConfig(ModelParams(10, delta, ConstantFraction(0.1), tax_chi=0.1),
                                  max_steps=10**5, condensation_epsilon=None, record_every=1,
                                  key=StreamKey(7))
        steps, states = ex.wealth_path(cfg)
        assert steps.tolist() == list(range(10**5 + 1))
        worst = min(worst, float(states[1:].min()))
    ok = worst >= floor - math.ulp(floor)
    criterion("C7 taxation floor", ok, f"min wealth over 1e5 steps = {worst!r} (floor 0.01)")
    assert ok


def test_c08_condensation_with_bias(criterion):
    cfg = ex.TrajectoryConfig(ModelParams(2, 0.2, ConstantFraction(0.2)), max_steps=10**7,
                              condensation_epsilon=1e-6, record_every=10**7)
    summary = ex.run_ensemble(cfg, 100, 8)
    criterion("C8 condensation, delta=0.2", summary.n_condensed == 100,
              f"{summary.n_condensed}/100 condensed, mean step {summary.condensation_step.mean:.0f}")
    assert summary.n_condensed == 100


def test_c09_martingale(criterion):
    x0 = tuple(np.random.default_rng(9).dirichlet(np.ones(5)))
    cfg = ex.TrajectoryConfig(ModelParams(5, 0.0, ConstantFraction(0.1)), initial=x0)
    rep = ex.martingale_check(cfg, [10, 100, 1000], 10_000, 9)
    worst = float(np.max(np.abs(rep.z)))
    criterion("C9 martingale", rep.passed, f"max |z| over 3 steps x 5 agents = {worst:.2f}")
    assert rep.passed


def _gini_double_sum(x):
    return np.abs(x[:, None] - x[None, :]).sum() / (2 * len(x) * x.sum())


def test_c10_gini_oracle(criterion):
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        x = make_state(rng.exponential(size=n) ** rng.uniform(0.5, 4)).wealth
        worst = max(worst, abs(gini(x) - _gini_double_sum(x)))
    uni = gini(uniform_state(37))
    cond = gini(np.array([0.0, 0.0, 1.0, 0.0]))
    ok = worst <= 1e-12 and uni == 0.0 and cond == 0.75
    criterion("C10 Gini oracle", ok, f"max |fast - double sum| = {worst:.1e}, uniform {uni}, condensed {cond}")
    assert worst <= 1e-12
    assert uni == 0.0
    assert cond == 0.75


def test_c11_determinism_across_threads(criterion, tmp_path):
    cfg = ex.TrajectoryConfig(ModelParams(3, 0.1, ConstantFraction(0.2)), initial=(0.2, 0.3, 0.5),
                              condensation_epsilon=1e-4, record_every=4)
    files = []
    for threads in (1, 2, 7):
        path = write_outputs(ex.run_ensemble(cfg, 600, 11, threads=threads), tmp_path / f"t{threads}")
        files.append(path.read_bytes())
    ok = all(f == files[0] for f in files)
    criterion("C11 determinism", ok, "summary files for 1, 2 and 7 threads byte-identical")
    assert ok
