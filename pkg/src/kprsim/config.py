"""Simulation configuration shared by the engine and the experiment driver."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .errors import ConfigError
from .protocols import ProtocolConfig
from .rng import MAX_SEED


class VariantId(enum.IntEnum):
    """Loyalty rule applied after each period.

    VARIANT1: a served customer stays on her restaurant forever.
    VARIANT2: she stays only while the restaurant keeps serving her.
    """

    VARIANT1 = 1
    VARIANT2 = 2

    @classmethod
    def parse(cls, value) -> "VariantId":
        if isinstance(value, cls):
            return value
        try:
            return cls(int(str(value).strip().lower().removeprefix("variant")))
        except ValueError:
            raise ConfigError(f"unknown variant {value!r}; expected 1 or 2") from None


@dataclass(frozen=True)
class SimConfig:
    """One experiment: ``n_seeds`` replicate runs of the same setup.

    Replicate ``r`` draws from ``RngStream(seed_base, run=r)``. ``protocol``
    set to None means nobody ever revises (uniform random choice each period).
    ``initial_choices`` optionally starts every customer stable on a given
    restaurant instead of uniform.
    """

    n: int = 1000
    periods: int = 20
    variant: VariantId = VariantId.VARIANT2
    protocol: Optional[ProtocolConfig] = field(default_factory=ProtocolConfig)
    seed_base: int = 0
    n_seeds: int = 10
    out: Optional[str] = None
    initial_choices: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", VariantId.parse(self.variant))
        if self.initial_choices is not None:
            object.__setattr__(self, "initial_choices", tuple(int(c) for c in self.initial_choices))

    @property
    def seeds(self) -> Tuple[int, ...]:
        """Replicate (run) indices of this experiment."""
        return tuple(range(self.n_seeds))

    def validate(self) -> "SimConfig":
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.periods < 1:
            raise ConfigError(f"periods must be >= 1, got {self.periods}")
        if self.n_seeds < 1:
            raise ConfigError(f"need at least one seed, got {self.n_seeds}")
        if not (0 <= self.seed_base <= MAX_SEED):
            raise ConfigError(f"seed base must be a 64-bit unsigned integer, got {self.seed_base}")
        if self.protocol is not None:
            self.protocol.validate(self.n)
        if self.initial_choices is not None:
            ic = self.initial_choices
            if len(ic) != self.n or any(not (0 <= c < self.n) for c in ic):
                raise ConfigError("initial_choices must list one restaurant in [0, n) per customer")
        return self

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    @property
    def protocol_label(self) -> str:
        return "random" if self.protocol is None else self.protocol.kind.value
