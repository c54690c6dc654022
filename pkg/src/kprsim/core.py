"""Domain types and primitive probability-vector operations.

Vectors are immutable numpy-backed values. A stable vector (a single entry
equal to 1) additionally records the restaurant it points at, so the
stability predicate never depends on floating-point comparisons after the
fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import CorruptedStateError, DegenerateSupportError, InvalidSizeError
from .rng import RngStream

TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def one_hot_index(entries: np.ndarray) -> Optional[int]:
    """Index of the single exact 1.0 if ``entries`` is one-hot, else None."""
    nz = np.flatnonzero(entries)
    if nz.size == 1 and entries[nz[0]] == 1.0:
        return int(nz[0])
    return None


class ProbabilityVector:
    """A customer's distribution over the N restaurants."""

    __slots__ = ("_entries", "stable_at")

    def __init__(self, entries, *, validate: bool = True):
        arr = np.array(entries, dtype=np.float64, copy=True).reshape(-1)
        if arr.size == 0:
            raise InvalidSizeError("a probability vector needs at least one entry")
        if validate:
            check_distribution(arr)
        self._entries = _frozen(arr)
        self.stable_at = one_hot_index(arr)

    @classmethod
    def one_hot(cls, n: int, r: int) -> "ProbabilityVector":
        arr = np.zeros(n)
        arr[r] = 1.0
        return cls(arr, validate=False)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.size

    @property
    def is_stable(self) -> bool:
        return self.stable_at is not None

    def __len__(self) -> int:
        return self._entries.size

    def __getitem__(self, j):
        return self._entries[j]

    def __iter__(self):
        return iter(self._entries.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    def __hash__(self):
        return hash(self._entries.tobytes())

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other = other.entries if isinstance(other, ProbabilityVector) else np.asarray(other)
        return self._entries.shape == other.shape and bool(np.allclose(self._entries, other, rtol=0, atol=atol))

    def __repr__(self) -> str:
        if self.n <= 8:
            body = ", ".join(f"{x:.6g}" for x in self._entries)
        else:
            body = f"n={self.n}"
        return f"ProbabilityVector({body})"


def check_distribution(entries: np.ndarray, tol: float = TOL) -> None:
    if not np.all(np.isfinite(entries)) or np.any(entries < 0):
        raise CorruptedStateError("probability vector has negative or non-finite entries")
    total = float(entries.sum())
    if abs(total - 1.0) > tol:
        raise CorruptedStateError(f"probability vector sums to {total!r}, not 1")


@dataclass
class CustomerState:
    id: int
    vector: ProbabilityVector
    saved_copy: Optional[ProbabilityVector] = None
    served_current: bool = False
    served_previous: bool = False
    last_choice: Optional[int] = None


@dataclass(frozen=True)
class PeriodOutcome:
    """Resolution of one period.

    ``choices[i]`` is the restaurant customer ``i`` visited and ``served[r]``
    the customer restaurant ``r`` served, or -1 when ``r`` had no visitors.
    """

    choices: np.ndarray
    served: np.ndarray
    idle_set: frozenset = field(default_factory=frozenset)

    @property
    def n(self) -> int:
        return self.choices.size

    @property
    def idle_mask(self) -> np.ndarray:
        return self.served < 0

    @property
    def served_customers(self) -> np.ndarray:
        """Boolean mask over customers: True where the customer was served."""
        mask = np.zeros(self.choices.size, dtype=bool)
        mask[self.served[self.served >= 0]] = True
        return mask

    def served_map(self) -> Mapping[int, Optional[int]]:
        return {r: (int(c) if c >= 0 else None) for r, c in enumerate(self.served)}


def uniform_vector(n: int) -> ProbabilityVector:
    if n < 1:
        raise InvalidSizeError(f"vector size must be >= 1, got {n}")
    arr = np.full(n, 1.0 / n)
    arr /= arr.sum()
    return ProbabilityVector(arr, validate=False)


def stabilize(v: ProbabilityVector, r: int) -> ProbabilityVector:
    if not (0 <= r < v.n):
        raise IndexError(f"restaurant {r} out of range for N={v.n}")
    if v.stable_at == r:
        return v
    return ProbabilityVector.one_hot(v.n, r)


def sample_index(entries: np.ndarray, u: float) -> int:
    """Inverse-CDF lookup of ``u`` in [0, 1); never lands on a zero entry."""
    cdf = np.cumsum(entries)
    x = u * cdf[-1]
    # first index whose cumulative mass strictly exceeds x
    return int(np.searchsorted(cdf, x, side="right"))


def sample_choice(v: ProbabilityVector, rng: RngStream) -> int:
    check_distribution(v.entries)
    u = rng.random()
    if v.stable_at is not None:
        return v.stable_at
    return sample_index(v.entries, u)


def _as_index_array(Z: Iterable[int], n: int) -> np.ndarray:
    idx = np.unique(np.fromiter((int(j) for j in Z), dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"restaurant ids {idx.tolist()} out of range for N={n}")
    return idx


def zero_and_redistribute(v: ProbabilityVector, Z: Iterable[int], *, literal: bool = False) -> ProbabilityVector:
    """Zero the entries in ``Z`` and hand their mass to the other restaurants.

    When the complement carries no mass the removed mass is spread evenly
    over it; otherwise each surviving entry is rescaled in proportion to its
    current value. ``literal=True`` applies the printed quadratic update
    ``p * (1 + P * p / (1 - P))`` and renormalizes instead.
    """
    n = v.n
    idx = _as_index_array(Z, n)
    if idx.size == 0:
        raise ValueError("zero set must be non-empty")
    if idx.size == n:
        raise DegenerateSupportError("cannot zero every restaurant")
    p = v.entries
    keep = np.ones(n, dtype=bool)
    keep[idx] = False
    rest = p[keep]
    out = np.zeros(n)
    rem = float(rest.sum())
    if rem <= 0.0:
        out[keep] = 1.0 / keep.sum()
    elif literal:
        removed = float(p[idx].sum())
        # 1 - P is taken as the surviving mass so the two agree exactly
        out[keep] = rest * (1.0 + removed * rest / rem)
        out /= out.sum()
    else:
        out[keep] = rest / rem
    return ProbabilityVector(out, validate=False)
