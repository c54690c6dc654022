"""Revision protocols RP1-RP6 and the information each customer receives.

RP1  sliding window: customer i sees the choices of customers i..i+k (mod N).
RP2  customer blocks: every member of a block sees the whole block's choices.
RP3  restaurant blocks: a customer sees which restaurants in the block of
     the restaurant she visited served someone.
RP4  a noisy report of the idle set, fully believed.
RP5  the true idle set, believed with probability pi.
RP6  the noisy report, believed with probability pi.

All functions here act on a single ``ProbabilityVector``; the engine runs the
same rules in batch through :mod:`kprsim.kernels`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import AbstractSet, Iterable, Optional, Sequence

import numpy as np

from .core import PeriodOutcome, ProbabilityVector, zero_and_redistribute
from .errors import ConfigError
from .rng import RngStream

INV_E = math.exp(-1.0)


class ProtocolKind(str, enum.Enum):
    RP1 = "rp1"
    RP2 = "rp2"
    RP3 = "rp3"
    RP4 = "rp4"
    RP5 = "rp5"
    RP6 = "rp6"

    @classmethod
    def parse(cls, value) -> "ProtocolKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown protocol {value!r}; expected one of rp1..rp6") from None

    @property
    def uses_idle_report(self) -> bool:
        return self in (ProtocolKind.RP4, ProtocolKind.RP5, ProtocolKind.RP6)


@dataclass(frozen=True)
class ProtocolConfig:
    """Active revision protocol and its parameters.

    Only the fields relevant to ``kind`` are consulted: ``k`` for RP1,
    ``customer_group_size`` for RP2, ``restaurant_group_size`` for RP3,
    ``alpha`` for RP4/RP6 and ``pi`` for RP5/RP6.
    """

    kind: ProtocolKind = ProtocolKind.RP1
    k: int = 50
    customer_group_size: int = 50
    restaurant_group_size: int = 50
    alpha: float = 1.0
    pi: float = 1.0
    literal_equations: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind.parse(self.kind))

    def validate(self, n: int) -> "ProtocolConfig":
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (0.0 <= self.pi <= 1.0):
            raise ConfigError(f"pi must lie in [0, 1], got {self.pi}")
        if self.kind is ProtocolKind.RP1 and not (1 <= self.k <= n - 1):
            raise ConfigError(f"k must lie in [1, N-1] = [1, {n - 1}], got {self.k}")
        if self.kind is ProtocolKind.RP2 and not (1 <= self.customer_group_size <= n):
            raise ConfigError(f"customer group size must lie in [1, {n}], got {self.customer_group_size}")
        if self.kind is ProtocolKind.RP3 and not (1 <= self.restaurant_group_size <= n):
            raise ConfigError(f"restaurant group size must lie in [1, {n}], got {self.restaurant_group_size}")
        return self

    @property
    def effective_alpha(self) -> float:
        """Accuracy of the idle report actually handed to customers."""
        return 1.0 if self.kind is ProtocolKind.RP5 else self.alpha

    @property
    def effective_pi(self) -> float:
        """Belief placed in the idle report."""
        return 1.0 if self.kind is ProtocolKind.RP4 else self.pi

    def with_(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)

    def label(self) -> str:
        kind = self.kind
        if kind is ProtocolKind.RP1:
            return f"rp1(k={self.k})"
        if kind is ProtocolKind.RP2:
            return f"rp2(block={self.customer_group_size})"
        if kind is ProtocolKind.RP3:
            return f"rp3(block={self.restaurant_group_size})"
        if kind is ProtocolKind.RP4:
            return f"rp4(alpha={self.alpha:g})"
        if kind is ProtocolKind.RP5:
            return f"rp5(pi={self.pi:g})"
        return f"rp6(alpha={self.alpha:g},pi={self.pi:g})"


class Partition:
    """A partition of ``range(n)`` into disjoint blocks."""

    def __init__(self, blocks: Iterable[Iterable[int]], n: Optional[int] = None):
        self.blocks = [tuple(sorted(int(x) for x in b)) for b in blocks]
        members = [x for b in self.blocks for x in b]
        n = len(members) if n is None else n
        if sorted(members) != list(range(n)):
            raise ValueError("blocks must cover 0..n-1 exactly once")
        self.n = n
        self._owner = np.empty(n, dtype=np.int64)
        for b, block in enumerate(self.blocks):
            self._owner[list(block)] = b

    @classmethod
    def contiguous(cls, n: int, size: int) -> "Partition":
        """Consecutive index blocks of ``size``; the last block may be shorter."""
        if size < 1:
            raise ValueError("block size must be >= 1")
        return cls((range(s, min(n, s + size)) for s in range(0, n, size)), n)

    def block_of(self, x: int) -> tuple:
        return self.blocks[self._owner[x]]


@dataclass(frozen=True)
class InformationView:
    visited_restaurants: Optional[frozenset] = None
    group_served: Optional[frozenset] = None
    group_idle: Optional[frozenset] = None
    reported_idle: Optional[frozenset] = None


def window_view(i: int, outcome: PeriodOutcome, k: int) -> InformationView:
    n = outcome.n
    if not (1 <= k <= n - 1):
        raise ValueError(f"k must lie in [1, N-1], got {k}")
    known = [(i + m) % n for m in range(k + 1)]
    return InformationView(visited_restaurants=frozenset(int(outcome.choices[c]) for c in known))


def partition_view(i: int, outcome: PeriodOutcome, partition: Partition) -> InformationView:
    block = partition.block_of(i)
    return InformationView(visited_restaurants=frozenset(int(outcome.choices[c]) for c in block))


def restaurant_group_view(r: int, outcome: PeriodOutcome, partition: Partition) -> InformationView:
    block = partition.block_of(r)
    served = frozenset(j for j in block if outcome.served[j] >= 0)
    return InformationView(group_served=served, group_idle=frozenset(block) - served)


def idle_inclusion_probabilities(alpha: float) -> tuple:
    """(P[idle restaurant reported], P[busy restaurant reported]) at accuracy alpha."""
    return alpha + (1.0 - alpha) * INV_E, (1.0 - alpha) * INV_E


def noisy_idle_set(true_idle: AbstractSet[int], alpha: float, rng: RngStream, n: int) -> frozenset:
    """Reported idle set: one draw per restaurant, in ascending id order."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    p_idle, p_busy = idle_inclusion_probabilities(alpha)
    u = rng.random_array(n)
    idle = np.zeros(n, dtype=bool)
    idle[list(true_idle)] = True
    include = u < np.where(idle, p_idle, p_busy)
    return frozenset(np.flatnonzero(include).tolist())


def _all_but(n: int, r: int) -> ProbabilityVector:
    out = np.full(n, 1.0 / (n - 1))
    out[r] = 0.0
    return ProbabilityVector(out, validate=False)


def rp1_rp2_revise(v: ProbabilityVector, view: InformationView, own_choice: int,
                   *, literal: bool = False) -> ProbabilityVector:
    visited = view.visited_restaurants
    if not visited:
        raise ValueError("RP1/RP2 revision needs a non-empty visited set")
    if len(visited) >= v.n:
        return _all_but(v.n, own_choice)
    return zero_and_redistribute(v, visited, literal=literal)


def rp3_revise(v: ProbabilityVector, view: InformationView, *, literal: bool = False) -> ProbabilityVector:
    """Move the mass on busy restaurants of the visited block onto its idle ones.

    Entries outside the block are returned untouched. With no idle restaurant
    in the block there is nowhere to move mass and ``v`` comes back as is.
    """
    busy = sorted(view.group_served)
    idle = sorted(view.group_idle)
    if not idle:
        return v
    p = v.entries
    out = p.copy()
    moved = float(p[busy].sum()) if busy else 0.0
    q = float(p[idle].sum())
    out[busy] = 0.0
    if literal:
        if q > 0.0:
            out[idle] = p[idle] * (1.0 + moved * p[idle] / q)
        else:
            out[idle] = 1.0 / len(idle)
        out /= out.sum()
    elif q > 0.0:
        out[idle] = p[idle] * (1.0 + moved / q)
    else:
        out[idle] = p[idle] + moved / len(idle)
    return ProbabilityVector(out, validate=False)


def _concentrate(p: np.ndarray, reported: Sequence[int]) -> np.ndarray:
    out = np.zeros(p.size)
    mass = float(p[reported].sum())
    if mass > 0.0:
        out[reported] = p[reported] / mass
    else:
        out[reported] = 1.0 / len(reported)
    return out


def _remove_own(p: np.ndarray, r: int, literal: bool) -> np.ndarray:
    n = p.size
    rest = 1.0 - p[r] if literal else float(p.sum() - p[r])
    if rest <= 0.0 or p[r] >= 1.0:
        out = np.full(n, 1.0 / (n - 1))
    elif literal:
        out = p * (1.0 + p[r] / (1.0 - p[r]))
    else:
        out = p / rest
    out[r] = 0.0
    return out


def rp5_revise(v: ProbabilityVector, reported_idle: AbstractSet[int], own_choice: int, pi: float,
               *, literal: bool = False) -> ProbabilityVector:
    """Blend full belief in the idle report with plain removal of ``own_choice``.

    An empty report carries no usable information; both halves of the blend
    then fall back to removing ``own_choice`` alone.
    """
    if not (0.0 <= pi <= 1.0):
        raise ValueError(f"pi must lie in [0, 1], got {pi}")
    p = v.entries
    removal = _remove_own(p, own_choice, literal)
    reported = sorted(reported_idle)
    belief = _concentrate(p, reported) if reported else removal
    out = pi * belief + (1.0 - pi) * removal
    out /= out.sum()
    return ProbabilityVector(out, validate=False)


def rp4_revise(v: ProbabilityVector, reported_idle: AbstractSet[int], own_choice: int,
               *, literal: bool = False) -> ProbabilityVector:
    return rp5_revise(v, reported_idle, own_choice, 1.0, literal=literal)


def rp6_revise(v: ProbabilityVector, noisy_idle: AbstractSet[int], own_choice: int, pi: float,
               *, literal: bool = False) -> ProbabilityVector:
    return rp5_revise(v, noisy_idle, own_choice, pi, literal=literal)
