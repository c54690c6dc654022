"""Period loop: simultaneous choice, random tie-break, loyalty update.

Random draws within a period are consumed in a fixed order:

1. one uniform per customer, ascending id, for the restaurant choice;
2. one uniform per restaurant with two or more visitors, ascending id, to
   pick the visitor it serves;
3. for RP4 and RP6 only, one uniform per restaurant, ascending id, for the
   reported idle set shared by every customer that period.

All revisions of a period are computed from the vectors as they stood when
the period was resolved and written back together, so customer order has
no effect on the result.
"""

from __future__ import annotations

from typing import Callable, List, Optional

import numpy as np

from . import kernels
from .config import SimConfig, VariantId
from .core import CustomerState, PeriodOutcome, ProbabilityVector
from .errors import InvariantViolation
from .metrics import MetricsSeries
from .protocols import ProtocolConfig, ProtocolKind, idle_inclusion_probabilities
from .rng import RngStream

# revise(rows, ids) rewrites rows[m] in place for customers ids[m]
ReviseFn = Callable[[np.ndarray, np.ndarray], None]


class WorldState:
    """All customers of one run, stored as dense N x N matrices.

    ``stable[i]`` is the restaurant customer ``i``'s vector points at when
    that vector is one-hot, else -1; the matching row of ``vectors`` is then
    exactly 0/1. ``saved``/``has_saved`` hold the Variant-2 copy taken when
    a customer starts being served.
    """

    def __init__(self, n: int, variant: VariantId, protocol: Optional[ProtocolConfig],
                 initial_choices=None):
        self.n = n
        self.period = 0
        self.variant = VariantId.parse(variant)
        self.protocol = protocol
        self.vectors = np.full((n, n), 1.0 / n)
        self.stable = np.full(n, -1, dtype=np.int64)
        if initial_choices is not None:
            init = np.asarray(initial_choices, dtype=np.int64)
            self.vectors[:] = 0.0
            self.vectors[np.arange(n), init] = 1.0
            self.stable[:] = init
        elif n == 1:
            self.stable[:] = 0
        self.saved = np.zeros((n, n))
        self.has_saved = np.zeros(n, dtype=bool)
        self.served_current = np.zeros(n, dtype=bool)
        self.served_previous = np.zeros(n, dtype=bool)
        self.last_choice = np.full(n, -1, dtype=np.int64)

    @classmethod
    def from_config(cls, config: SimConfig) -> "WorldState":
        return cls(config.n, config.variant, config.protocol, config.initial_choices)

    def customer(self, i: int) -> CustomerState:
        return CustomerState(
            id=i,
            vector=ProbabilityVector(self.vectors[i], validate=False),
            saved_copy=ProbabilityVector(self.saved[i], validate=False) if self.has_saved[i] else None,
            served_current=bool(self.served_current[i]),
            served_previous=bool(self.served_previous[i]),
            last_choice=int(self.last_choice[i]) if self.last_choice[i] >= 0 else None,
        )

    @property
    def customers(self) -> List[CustomerState]:
        return [self.customer(i) for i in range(self.n)]

    def stable_fraction(self) -> float:
        if self.variant is VariantId.VARIANT1:
            return float(np.count_nonzero(self.stable >= 0)) / self.n
        return float(np.count_nonzero(self.served_current)) / self.n

    def _stabilize(self, who: np.ndarray, at: np.ndarray) -> None:
        self.vectors[who] = 0.0
        self.vectors[who, at] = 1.0
        self.stable[who] = at


def snap_stable(rows: np.ndarray) -> np.ndarray:
    """Make single-support rows exactly one-hot; return their index or -1 per row."""
    if rows.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    single = np.count_nonzero(rows, axis=1) == 1
    at = np.where(single, rows.argmax(axis=1), -1).astype(np.int64)
    if single.any():
        idx = np.flatnonzero(single)
        rows[idx] = 0.0
        rows[idx, at[idx]] = 1.0
    return at


def resolve_period(state: WorldState, rng: RngStream) -> PeriodOutcome:
    n = state.n
    u = rng.random_array(n)
    choices = kernels.sample_rows(state.vectors, state.stable, u)
    counts = np.bincount(choices, minlength=n)
    # customers grouped by restaurant, ascending customer id within a group
    order = np.argsort(choices, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    served = np.full(n, -1, dtype=np.int64)
    single = counts == 1
    served[single] = order[starts[single]]
    contested = np.flatnonzero(counts > 1)
    if contested.size:
        pick = np.floor(rng.random_array(contested.size) * counts[contested]).astype(np.int64)
        served[contested] = order[starts[contested] + pick]
    idle = frozenset(np.flatnonzero(counts == 0).tolist())
    return PeriodOutcome(choices=choices, served=served, idle_set=idle)


class Reviser:
    """Batched form of one revision protocol.

    ``bind`` fixes the period's outcome (and, for RP4/RP6, draws the shared
    idle report) and returns the ``revise(rows, ids)`` function the variant
    updates call.
    """

    def __init__(self, protocol: ProtocolConfig, n: int):
        self.protocol = protocol.validate(n)
        self.n = n

    def reported_idle(self, outcome: PeriodOutcome, rng: RngStream) -> np.ndarray:
        idle = outcome.idle_mask
        alpha = self.protocol.effective_alpha
        if self.protocol.kind is ProtocolKind.RP5:
            return idle.astype(np.uint8)
        p_idle, p_busy = idle_inclusion_probabilities(alpha)
        u = rng.random_array(self.n)
        return (u < np.where(idle, p_idle, p_busy)).astype(np.uint8)

    def bind(self, outcome: PeriodOutcome, rng: RngStream) -> ReviseFn:
        cfg = self.protocol
        n = self.n
        kind = cfg.kind
        literal = cfg.literal_equations
        choices = outcome.choices

        if kind is ProtocolKind.RP1:
            def revise(rows, ids):
                lens = np.full(ids.size, cfg.k + 1, dtype=np.int64)
                kernels.zero_known_rows(rows, ids.astype(np.int64), lens, choices, choices[ids], literal)
        elif kind is ProtocolKind.RP2:
            g = cfg.customer_group_size

            def revise(rows, ids):
                starts = (ids // g) * g
                lens = np.minimum(g, n - starts).astype(np.int64)
                kernels.zero_known_rows(rows, starts.astype(np.int64), lens, choices, choices[ids], literal)
        elif kind is ProtocolKind.RP3:
            g = cfg.restaurant_group_size

            def revise(rows, ids):
                kernels.group_rows(rows, choices[ids], outcome.served, g, literal)
        else:
            reported = self.reported_idle(outcome, rng)
            pi = cfg.effective_pi

            def revise(rows, ids):
                kernels.info_rows(rows, choices[ids], reported, pi, literal)

        return revise


def _revise_rows(state: WorldState, ids: np.ndarray, rows: np.ndarray, revise: Optional[ReviseFn]) -> None:
    """Revise ``rows`` (pre-update vectors of customers ``ids``) and store them."""
    if ids.size == 0:
        return
    if revise is not None:
        revise(rows, ids)
    state.stable[ids] = snap_stable(rows)
    state.vectors[ids] = rows


def apply_variant1(state: WorldState, outcome: PeriodOutcome, revise: Optional[ReviseFn]) -> WorldState:
    """Served customers lock onto their restaurant; unserved unstable ones revise."""
    served = outcome.served_customers
    if revise is not None:
        ids = np.flatnonzero(~served & (state.stable < 0))
        _revise_rows(state, ids, state.vectors[ids], revise)
    who = np.flatnonzero(served)
    state._stabilize(who, outcome.choices[who])
    state.served_previous = state.served_current
    state.served_current = served
    state.last_choice = outcome.choices.copy()
    state.period += 1
    return state


def apply_variant2(state: WorldState, outcome: PeriodOutcome, revise: Optional[ReviseFn]) -> WorldState:
    """Loyalty lasts only while reciprocated.

    Newly served customers save their vector and lock on; customers bumped
    after being served restore the saved vector and revise it; customers
    unserved twice running revise their current vector.
    """
    served = outcome.served_customers
    before = state.served_current if state.period > 0 else np.zeros(state.n, dtype=bool)
    newly = served & ~before
    bumped = ~served & before
    if bumped.any() and not state.has_saved[bumped].all():
        raise InvariantViolation("customer lost service but has no saved vector to restore")

    ids = np.flatnonzero(~served)
    rows = state.vectors[ids]
    restore = bumped[ids]
    if restore.any():
        rows[restore] = state.saved[ids[restore]]
        state.has_saved[ids[restore]] = False
    _revise_rows(state, ids, rows, revise)

    who = np.flatnonzero(newly)
    state.saved[who] = state.vectors[who]
    state.has_saved[who] = True
    state._stabilize(who, outcome.choices[who])

    state.served_previous = before
    state.served_current = served
    state.last_choice = outcome.choices.copy()
    state.period += 1
    return state


def run_simulation(config: SimConfig, rng: RngStream, *, seed: Optional[int] = None) -> MetricsSeries:
    """Run ``config.periods`` periods of one replicate and return its series."""
    config.validate()
    state = WorldState.from_config(config)
    reviser = Reviser(config.protocol, config.n) if config.protocol is not None else None
    update = apply_variant1 if config.variant is VariantId.VARIANT1 else apply_variant2
    util = np.empty(config.periods)
    stab = np.empty(config.periods)
    for t in range(config.periods):
        outcome = resolve_period(state, rng)
        util[t] = (config.n - len(outcome.idle_set)) / config.n
        if reviser is None:
            # pure random choice: nobody locks on, nobody revises
            state.served_previous = state.served_current
            state.served_current = outcome.served_customers
            state.last_choice = outcome.choices.copy()
            state.period += 1
        else:
            update(state, outcome, reviser.bind(outcome, rng))
        if reviser is None:
            stab[t] = float(np.count_nonzero(state.stable >= 0)) / config.n
        else:
            stab[t] = state.stable_fraction()
    return MetricsSeries(
        utilization=util,
        stability=stab,
        seed=rng.run if seed is None else seed,
        protocol=config.protocol_label,
        variant=int(config.variant),
        n=config.n,
    )
