"""Single-step yard-sale dynamics.

Everything here is a pure function of its arguments.  A trade moves a stake
``fraction * wealth[poorer]`` (scaled by the poorer agent's risk tolerance when
one is configured) between the two drawn agents; the richer agent wins with
probability ``1/2 + delta``.  Optional flat taxation then shrinks every holding
by ``chi`` and hands the proceeds back in equal shares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (EmptyStateError, NegativeWealthError, ParameterError, StateError,
                     ZeroTotalError)
from .sampling import ConstantFraction, FractionDistribution, check_delta

SUM_TOL = 1e-12


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WealthState:
    """Nonnegative wealth vector with unit total.

    Construction checks the total to ``1e-12``.  States produced by the
    dynamics skip that check (see :meth:`from_dynamics`) because rounding may
    drift the total slightly; conservation is asserted by the callers instead.
    """

    wealth: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.wealth)
        if arr.ndim != 1 or arr.size == 0:
            raise EmptyStateError("wealth must be a nonempty 1-d vector")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise NegativeWealthError("wealth entries must be finite and >= 0")
        if abs(arr.sum() - 1.0) > SUM_TOL:
            raise StateError(f"wealth must sum to 1 within {SUM_TOL}, got {arr.sum()!r}")
        object.__setattr__(self, "wealth", arr)

    @classmethod
    def from_dynamics(cls, wealth: np.ndarray) -> "WealthState":
        obj = object.__new__(cls)
        object.__setattr__(obj, "wealth", _frozen(wealth))
        return obj

    @property
    def n_agents(self) -> int:
        return self.wealth.size

    def __len__(self) -> int:
        return self.wealth.size

    def __getitem__(self, i):
        return self.wealth[i]

    def __eq__(self, other):
        if not isinstance(other, WealthState):
            return NotImplemented
        return np.array_equal(self.wealth, other.wealth)

    def __repr__(self):
        return f"WealthState({self.wealth.tolist()!r})"


def make_state(raw: Sequence[float]) -> WealthState:
    """Normalise ``raw`` to unit total."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyStateError("cannot build a state from an empty vector")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise NegativeWealthError(f"wealth entries must be finite and >= 0: {arr.tolist()}")
    total = arr.sum()
    if total <= 0:
        raise ZeroTotalError("total wealth must be positive")
    return WealthState(arr / total)


def uniform_state(n_agents: int) -> WealthState:
    return make_state(np.ones(n_agents))


@dataclass(frozen=True)
class ModelParams:
    n_agents: int
    delta: float = 0.0
    fraction_dist: FractionDistribution = field(default_factory=ConstantFraction)
    risk_lambda: Optional[tuple[float, ...]] = None
    tax_chi: Optional[float] = None

    def __post_init__(self):
        if int(self.n_agents) != self.n_agents or self.n_agents < 2:
            raise ParameterError(f"n_agents must be an integer >= 2, got {self.n_agents!r}")
        check_delta(self.delta)
        if self.risk_lambda is not None:
            lam = tuple(float(v) for v in self.risk_lambda)
            if len(lam) != self.n_agents:
                raise ParameterError(f"risk_lambda has {len(lam)} entries for {self.n_agents} agents")
            if not all(0.0 < v < 1.0 for v in lam):
                raise ParameterError("every risk_lambda entry must lie in (0, 1)")
            object.__setattr__(self, "risk_lambda", lam)
        if self.tax_chi is not None:
            check_chi(self.tax_chi)

    @property
    def p(self) -> float:
        return 0.5 + self.delta

    @property
    def plain(self) -> bool:
        """No risk tolerance and no taxation."""
        return self.risk_lambda is None and self.tax_chi is None

    def lambda_array(self) -> np.ndarray:
        if self.risk_lambda is None:
            return np.ones(self.n_agents)
        return np.array(self.risk_lambda, dtype=np.float64)


def check_chi(chi: float) -> float:
    if not 0.0 < chi < 1.0:
        raise ParameterError(f"tax rate chi must lie in (0, 1), got {chi!r}")
    return float(chi)


@dataclass(frozen=True)
class TradeDraw:
    agent_a: int
    agent_b: int
    fraction: float
    richer_wins: bool

    def __post_init__(self):
        if self.agent_a == self.agent_b:
            raise ParameterError("a trade needs two distinct agents")
        if not 0.0 < self.fraction < 1.0:
            raise ParameterError(f"fraction must lie in (0, 1), got {self.fraction!r}")


@dataclass(frozen=True)
class StepOutcome:
    stake: float
    poorer: int
    richer: int
    transfer_signed: float  # > 0 when the poorer agent gains


def resolve_roles(state: WealthState, draw: TradeDraw) -> tuple[int, int]:
    """Return ``(poorer, richer)``; on a tie the smaller index is the poorer."""
    n = state.n_agents
    a, b = draw.agent_a, draw.agent_b
    for i in (a, b):
        if not 0 <= i < n:
            raise IndexError(f"agent index {i} out of range for {n} agents")
    xa, xb = state.wealth[a], state.wealth[b]
    if xa < xb or (xa == xb and a < b):
        return a, b
    return b, a


def apply_trade(state: WealthState, draw: TradeDraw,
                params: ModelParams) -> tuple[WealthState, StepOutcome]:
    poorer, richer = resolve_roles(state, draw)
    x = state.wealth.copy()
    stake = draw.fraction * x[poorer]
    lam = 1.0 if params.risk_lambda is None else params.risk_lambda[poorer]
    transfer = stake * lam
    if draw.richer_wins:
        x[poorer] = x[poorer] - transfer
        x[richer] = x[richer] + transfer
        signed = -transfer
    else:
        x[poorer] = x[poorer] + transfer
        x[richer] = x[richer] - transfer
        signed = transfer
    return WealthState.from_dynamics(x), StepOutcome(float(stake), poorer, richer, float(signed))


def apply_taxation(state: WealthState, chi: float) -> WealthState:
    chi = check_chi(chi)
    x = (1.0 - chi) * state.wealth + chi / state.n_agents
    return WealthState.from_dynamics(x)


def step(state: WealthState, draw: TradeDraw,
         params: ModelParams) -> tuple[WealthState, StepOutcome]:
    new, outcome = apply_trade(state, draw, params)
    if params.tax_chi is not None:
        new = apply_taxation(new, params.tax_chi)
    return new, outcome
