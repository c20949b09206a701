"""Concentration and inequality measures on wealth vectors.

The array functions accept a single state or a 2-d batch with one state per
row, and reduce along the last axis.  Reductions avoid BLAS so results do not
depend on library threading.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import ParameterError
from .model import WealthState
from .sampling import check_delta


def _values(state) -> np.ndarray:
    if isinstance(state, WealthState):
        return state.wealth
    return np.asarray(state, dtype=np.float64)


def norm_sq(state) -> np.ndarray | float:
    x = _values(state)
    return np.sum(x * x, axis=-1)[()]


def max_wealth(state):
    return np.max(_values(state), axis=-1)[()]


def ipr(state):
    """Inverse participation ratio ``1 / ||x||^2``, an effective agent count."""
    return 1.0 / norm_sq(state)


def total(state):
    return np.sum(_values(state), axis=-1)[()]


def gini(state):
    """Gini index ``sum_ij |x_i - x_j| / (2 N sum_k x_k)``.

    Evaluated in O(N log N) from the gaps of the sorted values:
    ``sum_{i<j} (x_(j) - x_(i)) = sum_k k (N - k) (x_(k+1) - x_(k))``.  Every
    term is nonnegative, so equal wealth gives exactly 0.
    """
    x = np.sort(_values(state), axis=-1)
    n = x.shape[-1]
    k = np.arange(1, n, dtype=np.float64)
    gaps = np.diff(x, axis=-1)
    return (np.sum(gaps * (k * (n - k)), axis=-1) / (n * np.sum(x, axis=-1)))[()]


def expected_norm_increment(state, poorer: int, richer: int, fraction: float,
                            delta: float) -> float:
    """Conditional mean of ``||X_n||^2 - ||X_{n-1}||^2`` given pair and fraction.

    Equals ``2 w^2 + 4 delta w (x_richer - x_poorer)`` with stake
    ``w = fraction * x_poorer``, for the plain model without risk tolerance or
    taxation.
    """
    x = _values(state)
    check_delta(delta)
    xp, xr = float(x[poorer]), float(x[richer])
    if xp > xr:
        raise ParameterError(f"agent {poorer} ({xp}) is richer than agent {richer} ({xr})")
    w = fraction * xp
    return 2.0 * w * w + 4.0 * delta * w * (xr - xp)


@dataclass(frozen=True)
class MetricsSnapshot:
    step: int
    max_wealth: float
    norm_sq: float
    ipr: float
    gini: float
    total: float
    last_stake: float


SNAPSHOT_FIELDS = tuple(f.name for f in fields(MetricsSnapshot))


class Snapshots:
    """Column store of :class:`MetricsSnapshot` rows.

    Long trajectories may record millions of snapshots, so the columns are
    numpy arrays; indexing and iteration still hand back snapshot objects.
    """

    def __init__(self, step, max_wealth, norm_sq, ipr, gini, total, last_stake):
        self.step = np.asarray(step, dtype=np.int64)
        self.max_wealth = np.asarray(max_wealth, dtype=np.float64)
        self.norm_sq = np.asarray(norm_sq, dtype=np.float64)
        self.ipr = np.asarray(ipr, dtype=np.float64)
        self.gini = np.asarray(gini, dtype=np.float64)
        self.total = np.asarray(total, dtype=np.float64)
        self.last_stake = np.asarray(last_stake, dtype=np.float64)

    @classmethod
    def from_states(cls, steps, states: np.ndarray, last_stakes) -> "Snapshots":
        if len(steps) == 0:
            return cls.empty()
        states = np.asarray(states, dtype=np.float64).reshape(len(steps), -1)
        ns = norm_sq(states)
        return cls(steps, max_wealth(states), ns, 1.0 / ns, gini(states), total(states), last_stakes)

    @classmethod
    def empty(cls) -> "Snapshots":
        return cls(*([] for _ in SNAPSHOT_FIELDS))

    @classmethod
    def concat(cls, parts) -> "Snapshots":
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, name) for p in parts]) for name in SNAPSHOT_FIELDS))

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in SNAPSHOT_FIELDS}

    def __len__(self) -> int:
        return len(self.step)

    def __getitem__(self, i) -> MetricsSnapshot:
        return MetricsSnapshot(int(self.step[i]), *(float(getattr(self, n)[i]) for n in SNAPSHOT_FIELDS[1:]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, Snapshots):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.columns().values(), other.columns().values()))


def snapshot(step: int, state, last_stake: float = 0.0) -> MetricsSnapshot:
    x = _values(state)
    ns = float(norm_sq(x))
    return MetricsSnapshot(int(step), float(max_wealth(x)), ns, 1.0 / ns, float(gini(x)),
                           float(total(x)), float(last_stake))
