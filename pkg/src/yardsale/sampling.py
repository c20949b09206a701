"""Random draws for the yard-sale dynamics.

Every trajectory owns one :class:`numpy.random.Generator`.  Streams are derived
from a ``(master_seed, trajectory_index)`` pair through
:class:`numpy.random.SeedSequence` spawn keys, so two trajectories of an
ensemble never share state no matter how the ensemble is scheduled.

Two layers are exposed: scalar draws (``draw_pair``, ``draw_fraction``,
``draw_richer_wins``) for single trades, and :func:`trade_blocks`, which yields
vectorised blocks of trades in a fixed schedule.  The trajectory runner and the
pure-Python reference loop both consume :func:`trade_blocks`, so for a given
stream they see exactly the same trades.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .errors import ParameterError

MAX_SEED = 2**64


@dataclass(frozen=True)
class ConstantFraction:
    """Degenerate fraction law: every trade stakes the same ``beta``."""

    beta: float = 0.1
    kind = "constant"

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"constant fraction beta must lie in (0, 1), got {self.beta!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # consumes no randomness
        return np.full(size, self.beta, dtype=np.float64)

    def mean(self) -> float:
        return self.beta


@dataclass(frozen=True)
class UniformFraction:
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        if not 0.0 < self.lo < self.hi < 1.0:
            raise ParameterError(
                f"uniform fraction needs 0 < lo < hi < 1, got lo={self.lo!r}, hi={self.hi!r}"
            )

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(size)

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)


@dataclass(frozen=True)
class BetaFraction:
    """Beta(a, b) fractions; exact 0.0 or 1.0 outcomes are redrawn."""

    a: float
    b: float
    kind = "beta"

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ParameterError(f"beta fraction needs a > 0 and b > 0, got a={self.a!r}, b={self.b!r}")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        out = rng.beta(self.a, self.b, size)
        bad = np.flatnonzero((out <= 0.0) | (out >= 1.0))
        while bad.size:
            out[bad] = rng.beta(self.a, self.b, bad.size)
            bad = bad[(out[bad] <= 0.0) | (out[bad] >= 1.0)]
        return out

    def mean(self) -> float:
        return self.a / (self.a + self.b)


FractionDistribution = Union[ConstantFraction, UniformFraction, BetaFraction]


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    trajectory_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < MAX_SEED:
            raise ParameterError(f"master seed must be an unsigned 64-bit integer, got {self.master_seed!r}")
        if int(self.trajectory_index) < 0:
            raise ParameterError(f"trajectory index must be >= 0, got {self.trajectory_index!r}")


def derive_stream(key: StreamKey) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(key.master_seed), spawn_key=(int(key.trajectory_index),))
    return np.random.Generator(np.random.PCG64(seq))


def check_delta(delta: float) -> float:
    if not 0.0 <= delta < 0.5:
        raise ParameterError(f"bias delta must lie in [0, 0.5), got {delta!r}")
    return float(delta)


def n_pair_codes(n_agents: int) -> int:
    if n_agents < 2:
        raise ParameterError(f"need at least two agents, got {n_agents!r}")
    return n_agents * (n_agents - 1)


def decode_pair(code: int, n_agents: int) -> tuple[int, int]:
    """Map a code in ``[0, N(N-1))`` to an ordered pair of distinct agents."""
    a, b = divmod(int(code), n_agents - 1)
    if b >= a:
        b += 1
    return a, b


def draw_pair(rng: np.random.Generator, n_agents: int) -> tuple[int, int]:
    """Ordered pair ``(i, j)``, ``i != j``, uniform over all ``N(N-1)`` pairs."""
    code = rng.integers(0, n_pair_codes(n_agents))
    return decode_pair(code, n_agents)


def draw_fraction(rng: np.random.Generator, dist: FractionDistribution) -> float:
    return float(dist.sample(rng, 1)[0])


def draw_richer_wins(rng: np.random.Generator, delta: float) -> bool:
    """True with probability ``1/2 + delta``."""
    return bool(rng.random() < 0.5 + check_delta(delta))


@dataclass(frozen=True)
class TradeBlock:
    """A run of consecutive trades stored column-wise."""

    pair_codes: np.ndarray
    fractions: np.ndarray
    richer_wins: np.ndarray

    def __len__(self) -> int:
        return len(self.pair_codes)


FIRST_BLOCK = 256
MAX_BLOCK = 65536


def draw_block(rng: np.random.Generator, n_agents: int, dist: FractionDistribution,
               delta: float, size: int) -> TradeBlock:
    codes = rng.integers(0, n_pair_codes(n_agents), size=size, dtype=np.int64)
    fractions = dist.sample(rng, size)
    wins = rng.random(size) < 0.5 + check_delta(delta)
    return TradeBlock(codes, fractions, wins)


def trade_blocks(rng: np.random.Generator, n_agents: int, dist: FractionDistribution,
                 delta: float, max_steps: int | None = None,
                 first: int = FIRST_BLOCK, largest: int = MAX_BLOCK) -> Iterator[TradeBlock]:
    """Yield trade blocks whose sizes double from ``first`` up to ``largest``.

    The schedule depends only on the arguments, which keeps a trajectory a pure
    function of its stream.  Draws left over after an early stop are discarded.
    """
    done = 0
    size = first
    while max_steps is None or done < max_steps:
        k = size if max_steps is None else min(size, max_steps - done)
        yield draw_block(rng, n_agents, dist, delta, k)
        done += k
        size = min(2 * size, largest)
