"""Trajectory and ensemble runners plus the statistical verification suite.

Trajectory ``k`` of an ensemble always draws from ``StreamKey(master_seed, k)``
and per-trajectory results are folded in index order, so every summary is
bitwise reproducible regardless of how many worker threads ran it.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import _kernel
from .errors import ExperimentError, ParameterError, UnsupportedClaimError
from .metrics import Snapshots, norm_sq
from .model import ModelParams, WealthState, make_state, uniform_state
from .sampling import ConstantFraction, StreamKey, derive_stream, trade_blocks

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-6
DEFAULT_MAX_STEPS = 10**8
SIGMAS = 3.0
# two-sided normal tail beyond 3 sigma
TAIL_3SIGMA = math.erfc(SIGMAS / math.sqrt(2.0))
ENSEMBLE_CHUNK = 256

InitialSpec = Union[str, tuple]


@dataclass(frozen=True)
class TrajectoryConfig:
    params: ModelParams
    initial: InitialSpec = "uniform"
    max_steps: int = DEFAULT_MAX_STEPS
    condensation_epsilon: Optional[float] = DEFAULT_EPSILON
    record_every: int = 1
    key: StreamKey = field(default_factory=lambda: StreamKey(0, 0))

    def __post_init__(self):
        if not isinstance(self.initial, str):
            object.__setattr__(self, "initial", tuple(float(v) for v in self.initial))
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ParameterError(f"max_steps must be an integer >= 1, got {self.max_steps!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ParameterError(f"record_every must be an integer >= 1, got {self.record_every!r}")
        eps = self.condensation_epsilon
        if eps is not None:
            if not 0.0 < eps < 1.0:
                raise ParameterError(f"condensation_epsilon must lie in (0, 1), got {eps!r}")
            chi = self.params.tax_chi
            n = self.params.n_agents
            # the tax floor caps the richest agent at 1 - chi (N-1)/N
            if chi is not None and eps < chi * (n - 1) / n:
                raise ParameterError(
                    f"condensation_epsilon={eps} is unreachable under taxation chi={chi}: "
                    f"max wealth cannot exceed {1 - chi * (n - 1) / n}")
        self.initial_state()

    def initial_state(self) -> WealthState:
        n = self.params.n_agents
        if isinstance(self.initial, str):
            if self.initial != "uniform":
                raise ParameterError(f"initial must be 'uniform' or a vector, got {self.initial!r}")
            return uniform_state(n)
        if len(self.initial) != n:
            raise ParameterError(f"initial vector has {len(self.initial)} entries for {n} agents")
        return make_state(self.initial)

    @property
    def threshold(self) -> Optional[float]:
        if self.condensation_epsilon is None:
            return None
        return 1.0 - self.condensation_epsilon

    def with_key(self, master_seed: int, trajectory_index: int = 0) -> "TrajectoryConfig":
        return replace(self, key=StreamKey(master_seed, trajectory_index))


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error (``None`` below two samples)."""

    mean: float
    stderr: Optional[float]
    n: int

    @classmethod
    def of(cls, values) -> Optional["Estimate"]:
        v = np.asarray(values, dtype=np.float64)
        if v.size == 0:
            return None
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
        return cls(float(np.mean(v)), se, int(v.size))

    @property
    def ci(self) -> tuple[float, float]:
        half = SIGMAS * (self.stderr or 0.0)
        return self.mean - half, self.mean + half


@dataclass
class _Raw:
    steps: np.ndarray
    stakes: np.ndarray
    cum_stake_sq: np.ndarray
    stake_sq: float
    condensed: bool
    steps_run: int
    final: np.ndarray
    states: Optional[np.ndarray] = None
    snapshots: Optional[Snapshots] = None
    diag: Optional[tuple] = None


def _simulate(config: TrajectoryConfig, *, record_every: int, stop: bool = True,
              keep: str = "none", diag: bool = False) -> _Raw:
    """Advance one chain block by block.

    ``keep`` selects what survives of each recorded state: ``"snapshots"``
    (metrics only), ``"states"`` (full vectors) or ``"none"``.
    """
    p = config.params
    x = config.initial_state().wealth.copy()
    lam = p.lambda_array()
    threshold = config.threshold if stop else None
    steps, stakes, cums = [np.zeros(1, np.int64)], [np.zeros(1)], [np.zeros(1)]
    states, snaps, diags = [], [], []

    def keep_states(st, xs, ws):
        if keep == "states":
            states.append(xs.copy())
        elif keep == "snapshots":
            snaps.append(Snapshots.from_states(st, xs, ws))

    keep_states(steps[0], x[None], stakes[0])
    stake_sq = 0.0
    done = 0
    condensed = threshold is not None and x.max() >= threshold
    if not condensed:
        rng = derive_stream(config.key)
        for block in trade_blocks(rng, p.n_agents, p.fraction_dist, p.delta, config.max_steps):
            k, rec, stake_sq, condensed, d = _kernel.run_block(
                x, block, lam, p.tax_chi, threshold, record_every, done, config.max_steps,
                stake_sq, diag=diag)
            done += k
            rec_steps, rec_states, rec_stakes, rec_cum = rec
            steps.append(rec_steps)
            stakes.append(rec_stakes)
            cums.append(rec_cum)
            keep_states(rec_steps, rec_states, rec_stakes)
            if diag:
                diags.append(d)
            if condensed:
                break
    return _Raw(
        steps=np.concatenate(steps), stakes=np.concatenate(stakes),
        cum_stake_sq=np.concatenate(cums), stake_sq=stake_sq, condensed=bool(condensed),
        steps_run=done, final=x,
        states=np.concatenate(states) if keep == "states" else None,
        snapshots=Snapshots.concat(snaps) if keep == "snapshots" else None,
        diag=tuple(np.concatenate(parts) for parts in zip(*diags)) if diag else None,
    )


@dataclass
class TrajectoryRecord:
    snapshots: Snapshots
    stop_reason: str  # "condensed" | "max_steps"
    condensation_step: Optional[int]
    cumulative_stake_sq: float
    winner: Optional[int]
    steps_run: int
    final_state: WealthState
    stake_sq_path: np.ndarray  # cumulative sum of squared stakes at each snapshot


def run_trajectory(config: TrajectoryConfig) -> TrajectoryRecord:
    """Run one chain until condensation or ``max_steps``.

    Snapshots are taken at step 0, every ``record_every`` steps and at the stop
    step; squared stakes are accumulated on every step.
    """
    raw = _simulate(config, record_every=config.record_every, keep="snapshots")
    return TrajectoryRecord(
        snapshots=raw.snapshots,
        stop_reason="condensed" if raw.condensed else "max_steps",
        condensation_step=raw.steps_run if raw.condensed else None,
        cumulative_stake_sq=raw.stake_sq,
        winner=int(np.argmax(raw.final)) if raw.condensed else None,
        steps_run=raw.steps_run,
        final_state=WealthState.from_dynamics(raw.final),
        stake_sq_path=raw.cum_stake_sq,
    )


def wealth_path(config: TrajectoryConfig, record_every: Optional[int] = None,
                stop: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Steps and full wealth vectors at every snapshot of one trajectory."""
    raw = _simulate(config, record_every=record_every or config.record_every, stop=stop,
                    keep="states")
    return raw.steps, raw.states


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("YARDSALE_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise ParameterError(f"thread count must be >= 1, got {threads}")
    return threads


def _ordered_map(fn: Callable[[int], object], n: int, threads: Optional[int],
                 fold: Callable[[int, object], None]) -> None:
    """Evaluate ``fn(k)`` for ``k < n`` and feed results to ``fold`` in index order."""
    threads = resolve_threads(threads)
    try:
        if threads == 1:
            for k in range(n):
                fold(k, fn(k))
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for start in range(0, n, ENSEMBLE_CHUNK):
                idx = range(start, min(start + ENSEMBLE_CHUNK, n))
                for k, res in zip(idx, pool.map(fn, idx)):
                    fold(k, res)
    except MemoryError as exc:
        raise ExperimentError(f"ran out of memory after scheduling {n} trajectories") from exc


class _SeriesSum:
    """Running sums over the regular snapshot grid ``0, r, 2r, ...``.

    Off-grid stop steps are left out, so every entry averages the same step.
    """

    def __init__(self, every: int):
        self.every = every
        self.total = np.zeros(0)
        self.count = np.zeros(0, np.int64)

    def add(self, steps: np.ndarray, values: np.ndarray):
        on_grid = steps % self.every == 0
        idx = steps[on_grid] // self.every
        need = int(idx[-1]) + 1 if idx.size else 0
        if need > self.total.size:
            grow = need - self.total.size
            self.total = np.concatenate([self.total, np.zeros(grow)])
            self.count = np.concatenate([self.count, np.zeros(grow, np.int64)])
        self.total[idx] += values[on_grid]
        self.count[idx] += 1

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.total.size, dtype=np.int64) * self.every

    def mean(self) -> np.ndarray:
        return self.total / np.maximum(self.count, 1)


@dataclass
class EnsembleSummary:
    config: TrajectoryConfig
    master_seed: int
    n_trajectories: int
    win_counts: tuple[int, ...]
    n_condensed: int
    n_max_steps: int
    condensation_step: Optional[Estimate]
    cumulative_stake_sq: Optional[Estimate]
    norm_sq_steps: np.ndarray
    norm_sq_mean: np.ndarray
    norm_sq_count: np.ndarray


def run_ensemble(template: TrajectoryConfig, n_trajectories: int, master_seed: int,
                 threads: Optional[int] = None) -> EnsembleSummary:
    """Run ``n_trajectories`` independent chains of ``template``.

    The mean ``||X||^2`` series averages, at each recorded step, over the
    trajectories that recorded that step.
    """
    if n_trajectories < 1:
        raise ParameterError(f"n_trajectories must be >= 1, got {n_trajectories}")
    StreamKey(master_seed, 0)
    n = template.params.n_agents
    wins = np.zeros(n, np.int64)
    cond_steps = np.full(n_trajectories, -1, np.int64)
    stake_sq = np.empty(n_trajectories)
    series = _SeriesSum(template.record_every)

    def one(k):
        rec = run_trajectory(template.with_key(master_seed, k))
        return rec.winner, rec.condensation_step, rec.cumulative_stake_sq, \
            rec.snapshots.step, rec.snapshots.norm_sq

    def fold(k, res):
        winner, cstep, s2, steps, ns = res
        if winner is not None:
            wins[winner] += 1
            cond_steps[k] = cstep
        stake_sq[k] = s2
        series.add(steps, ns)

    _ordered_map(one, n_trajectories, threads, fold)
    condensed = cond_steps >= 0
    return EnsembleSummary(
        config=template.with_key(master_seed, 0),
        master_seed=int(master_seed),
        n_trajectories=n_trajectories,
        win_counts=tuple(int(c) for c in wins),
        n_condensed=int(condensed.sum()),
        n_max_steps=int((~condensed).sum()),
        condensation_step=Estimate.of(cond_steps[condensed]),
        cumulative_stake_sq=Estimate.of(stake_sq),
        norm_sq_steps=series.steps,
        norm_sq_mean=series.mean(),
        norm_sq_count=series.count,
    )


def wilson_interval(successes: int, n: int, z: float = SIGMAS) -> tuple[float, float]:
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class WinEstimate:
    agent: int
    initial_share: float
    estimate: float
    lo: float
    hi: float

    @property
    def consistent(self) -> bool:
        return self.lo <= self.initial_share <= self.hi


def estimate_win_probabilities(summary: EnsembleSummary) -> list[WinEstimate]:
    """Per-agent win frequency with a 3-sigma Wilson score interval.

    Only the unbiased model has a known win law (each agent wins with its
    initial share), so biased ensembles are rejected.
    """
    params = summary.config.params
    if params.delta != 0.0:
        raise UnsupportedClaimError(
            f"win probabilities equal initial shares only for p = 1/2; got p = {params.p}")
    if params.tax_chi is not None:
        raise UnsupportedClaimError("taxation prevents condensation; there is no winner")
    if summary.n_condensed != summary.n_trajectories:
        raise ExperimentError(
            f"{summary.n_max_steps} of {summary.n_trajectories} trajectories hit max_steps "
            "before condensing; raise max_steps or epsilon")
    x0 = summary.config.initial_state().wealth
    out = []
    for i, c in enumerate(summary.win_counts):
        lo, hi = wilson_interval(c, summary.n_trajectories)
        out.append(WinEstimate(i, float(x0[i]), c / summary.n_trajectories, lo, hi))
    return out


def _require_plain(config: TrajectoryConfig, what: str):
    if not config.params.plain:
        raise UnsupportedClaimError(f"{what} applies to the plain model (no lambda, no tax)")


def _z(mean: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    return mean / se


def exceedance_allowance(m: int, tail: float = TAIL_3SIGMA) -> int:
    """Largest count of |z| > 3 among ``m`` independent null tests within 3 sigma."""
    return int(math.floor(m * tail + SIGMAS * math.sqrt(m * tail * (1 - tail))))


@dataclass
class IncrementReport:
    delta: float
    n_steps: int
    n_trajectories: int
    mean_dnorm: np.ndarray
    mean_stake_sq: np.ndarray
    gap_mean: np.ndarray  # mean dnorm - 2 mean w^2, per step
    gap_se: np.ndarray
    predicted_gap: np.ndarray  # 4 delta mean[w (x_richer - x_poorer)]
    resid_mean: np.ndarray  # mean of dnorm - closed-form conditional increment
    resid_se: np.ndarray
    pooled_gap: Estimate
    pooled_resid: Estimate

    @property
    def resid_z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.resid_se > 0, self.resid_mean / np.where(self.resid_se > 0, self.resid_se, 1), 0.0)

    @property
    def gap_z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.gap_se > 0, self.gap_mean / np.where(self.gap_se > 0, self.gap_se, 1), 0.0)

    @property
    def n_exceed(self) -> int:
        return int(np.sum(np.abs(self.resid_z) > SIGMAS))

    @property
    def allowed_exceed(self) -> int:
        return exceedance_allowance(self.n_steps)

    @property
    def pooled_resid_z(self) -> float:
        return _z(self.pooled_resid.mean, self.pooled_resid.stderr or 0.0)

    @property
    def pooled_gap_z(self) -> float:
        return _z(self.pooled_gap.mean, self.pooled_gap.stderr or 0.0)

    @property
    def passed(self) -> bool:
        ok = abs(self.pooled_resid_z) <= SIGMAS and self.n_exceed <= self.allowed_exceed
        if self.delta > 0:
            ok = ok and self.pooled_gap_z > SIGMAS
        return ok


def verify_increment_bound(config: TrajectoryConfig, n_steps: int, n_trajectories: int,
                           master_seed: int, threads: Optional[int] = None) -> IncrementReport:
    """Check the one-step lower bound on the growth of ``E||X_n||^2``.

    For every step ``n`` the ensemble mean of ``||X_n||^2 - ||X_{n-1}||^2 - 2 w_n^2``
    is estimated together with the residual against the closed-form
    conditional increment.  Per-step residuals have mean zero for every delta;
    their z-scores are screened with a multiplicity allowance, and the pooled
    residual over all steps must lie within 3 sigma of zero.  For delta > 0 the
    pooled gap must also be significantly positive.
    """
    _require_plain(config, "the increment bound")
    if n_steps < 1 or n_trajectories < 2:
        raise ParameterError("need n_steps >= 1 and n_trajectories >= 2")
    delta = config.params.delta
    base = replace(config, max_steps=n_steps)
    acc = {k: np.zeros(n_steps) for k in ("dn", "w2", "gap", "gap2", "res", "res2", "term")}
    tot_gap = np.empty(n_trajectories)
    tot_res = np.empty(n_trajectories)

    def one(k):
        raw = _simulate(base.with_key(master_seed, k), record_every=n_steps, stop=False, diag=True)
        return raw.diag

    def fold(k, d):
        dn, w2, wgap = d
        gap = dn - 2.0 * w2
        term = 4.0 * delta * wgap
        res = gap - term
        acc["dn"] += dn
        acc["w2"] += w2
        acc["gap"] += gap
        acc["gap2"] += gap * gap
        acc["res"] += res
        acc["res2"] += res * res
        acc["term"] += term
        tot_gap[k] = gap.sum()
        tot_res[k] = res.sum()

    _ordered_map(one, n_trajectories, threads, fold)
    m = n_trajectories

    def mean_se(s, s2):
        mu = s / m
        var = np.maximum(s2 / m - mu * mu, 0.0) * m / (m - 1)
        return mu, np.sqrt(var / m)

    gap_mean, gap_se = mean_se(acc["gap"], acc["gap2"])
    res_mean, res_se = mean_se(acc["res"], acc["res2"])
    return IncrementReport(delta, n_steps, n_trajectories, acc["dn"] / m, acc["w2"] / m,
                           gap_mean, gap_se, acc["term"] / m, res_mean, res_se,
                           Estimate.of(tot_gap), Estimate.of(tot_res))


@dataclass
class SummabilityReport:
    horizon: int
    n_trajectories: int
    initial_norm_sq: float
    stake_sq: Estimate
    checkpoint_steps: np.ndarray
    checkpoint_means: np.ndarray

    @property
    def bound(self) -> float:
        """Sharp bound ``(1 - ||X_0||^2) / 2``; the coarse one is ``1/2``."""
        return 0.5 * (1.0 - self.initial_norm_sq)

    @property
    def margin(self) -> float:
        return SIGMAS * (self.stake_sq.stderr or 0.0)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.checkpoint_means) >= 0))

    @property
    def passed(self) -> bool:
        return self.stake_sq.mean <= self.bound + self.margin and self.monotone


def verify_stake_summability(config: TrajectoryConfig, horizon: int, n_trajectories: int,
                             master_seed: int, threads: Optional[int] = None,
                             n_checkpoints: int = 10) -> SummabilityReport:
    """Estimate ``E sum_{n<=T} w_n^2`` and compare with ``(1 - ||X_0||^2)/2``.

    Trajectories always run the full horizon; the condensation stop is ignored.
    """
    _require_plain(config, "the summability bound")
    if horizon < 1 or n_trajectories < 1:
        raise ParameterError("need horizon >= 1 and n_trajectories >= 1")
    every = max(1, horizon // n_checkpoints)
    base = replace(config, max_steps=horizon)
    totals = np.empty(n_trajectories)
    path = None

    def one(k):
        raw = _simulate(base.with_key(master_seed, k), record_every=every, stop=False)
        return raw.steps, raw.cum_stake_sq, raw.stake_sq

    def fold(k, res):
        nonlocal path
        steps, cum, s2 = res
        totals[k] = s2
        if path is None:
            path = (steps, np.zeros_like(cum))
        path[1][:] += cum

    _ordered_map(one, n_trajectories, threads, fold)
    return SummabilityReport(horizon, n_trajectories, float(norm_sq(config.initial_state())),
                             Estimate.of(totals), path[0], path[1] / n_trajectories)


@dataclass(frozen=True)
class GridPoint:
    n_agents: int
    delta: float
    beta: float
    epsilon: float


@dataclass
class CondensationRow:
    point: GridPoint
    n_trajectories: int
    n_condensed: int
    time: Optional[Estimate]
    median: Optional[float]


def condensation_time_study(template: TrajectoryConfig, grid: Iterable[GridPoint],
                            n_trajectories: int, master_seed: int,
                            threads: Optional[int] = None) -> list[CondensationRow]:
    """Steps until ``max wealth >= 1 - epsilon`` across a parameter grid.

    Each grid point replaces N, delta, a constant fraction beta and epsilon in
    ``template``; an explicit initial vector must match every N in the grid.
    Trajectories that hit ``max_steps`` are counted but excluded from the times.
    """
    if template.params.tax_chi is not None:
        raise UnsupportedClaimError("condensation cannot occur under taxation")
    rows = []
    for pt in grid:
        params = replace(template.params, n_agents=pt.n_agents, delta=pt.delta,
                         fraction_dist=ConstantFraction(pt.beta),
                         risk_lambda=template.params.risk_lambda if pt.n_agents == template.params.n_agents else None)
        cfg = replace(template, params=params, condensation_epsilon=pt.epsilon,
                      record_every=template.max_steps)
        times = np.full(n_trajectories, -1, np.int64)

        def one(k, cfg=cfg):
            raw = _simulate(cfg.with_key(master_seed, k), record_every=cfg.max_steps)
            return raw.steps_run if raw.condensed else -1

        def fold(k, t, times=times):
            times[k] = t

        _ordered_map(one, n_trajectories, threads, fold)
        hit = times[times >= 0]
        rows.append(CondensationRow(pt, n_trajectories, int(hit.size), Estimate.of(hit),
                                    float(np.median(hit)) if hit.size else None))
        log.info("grid point %s: %d/%d condensed", pt, hit.size, n_trajectories)
    return rows


def monotonicity_notes(rows: Sequence[CondensationRow]) -> list[str]:
    """Flag grid neighbours where a larger delta condensed significantly slower."""
    notes = []
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.point.n_agents, r.point.beta, r.point.epsilon), []).append(r)
    for key, grp in groups.items():
        grp = sorted((r for r in grp if r.time is not None), key=lambda r: r.point.delta)
        for lo, hi in zip(grp, grp[1:]):
            if hi.time.ci[0] > lo.time.ci[1]:
                notes.append(f"N={key[0]} beta={key[1]} eps={key[2]}: delta={hi.point.delta} "
                             f"slower than delta={lo.point.delta}")
    return notes


@dataclass
class MartingaleReport:
    steps: np.ndarray
    initial: np.ndarray
    mean: np.ndarray  # (len(steps), N)
    stderr: np.ndarray

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            diff = self.mean - self.initial
            return np.where(self.stderr > 0, diff / np.where(self.stderr > 0, self.stderr, 1),
                            np.where(diff == 0, 0.0, np.inf))

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.z) <= SIGMAS))


def martingale_check(config: TrajectoryConfig, steps: Sequence[int], n_trajectories: int,
                     master_seed: int, threads: Optional[int] = None) -> MartingaleReport:
    """Ensemble mean of each agent's wealth at the given steps versus ``X_0``."""
    if config.params.delta != 0.0:
        raise UnsupportedClaimError("agent wealth is a martingale only for p = 1/2")
    if config.params.tax_chi is not None:
        raise UnsupportedClaimError("taxation breaks the martingale property")
    steps = np.array(sorted(set(int(s) for s in steps)), dtype=np.int64)
    every = math.gcd(*steps.tolist()) if len(steps) > 1 else int(steps[0])
    base = replace(config, max_steps=int(steps[-1]))
    n = config.params.n_agents
    s1 = np.zeros((len(steps), n))
    s2 = np.zeros((len(steps), n))

    def one(k):
        raw = _simulate(base.with_key(master_seed, k), record_every=every, stop=False,
                        keep="states")
        pos = np.searchsorted(raw.steps, steps)
        return raw.states[pos]

    def fold(k, xs):
        s1[...] += xs
        s2[...] += xs * xs

    _ordered_map(one, n_trajectories, threads, fold)
    m = n_trajectories
    mean = s1 / m
    var = np.maximum(s2 / m - mean * mean, 0.0) * m / (m - 1)
    return MartingaleReport(steps, config.initial_state().wealth.copy(), mean, np.sqrt(var / m))
