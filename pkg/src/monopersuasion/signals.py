"""Signal representations shared by the priors, solvers and oracles.

Discrete states are addressed by 0-based index into the prior's sorted
support; block ranges are inclusive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MalformedSignal


@dataclass(frozen=True)
class MonotonePartition:
    """Consecutive index blocks ``(first, last)`` covering ``0..n-1`` in order."""

    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple((int(i), int(j)) for i, j in self.blocks))

    @property
    def n(self) -> int:
        return self.blocks[-1][1] + 1 if self.blocks else 0

    def validate(self, n: int) -> None:
        expect = 0
        for i, j in self.blocks:
            if i != expect or j < i:
                raise MalformedSignal(f"blocks {self.blocks} are not consecutive ranges covering 0..{n - 1}")
            expect = j + 1
        if expect != n:
            raise MalformedSignal(f"blocks {self.blocks} do not cover all {n} states")

    @classmethod
    def from_cuts(cls, n: int, cuts: Iterable[int]) -> "MonotonePartition":
        """Blocks split after each index in ``cuts`` (a cut ``c`` separates states c and c+1)."""
        edges = sorted(set(int(c) for c in cuts))
        blocks, start = [], 0
        for c in edges:
            if not 0 <= c < n - 1:
                raise MalformedSignal(f"cut {c} outside 0..{n - 2}")
            blocks.append((start, c))
            start = c + 1
        blocks.append((start, n - 1))
        return cls(tuple(blocks))

    @classmethod
    def upper_censorship(cls, n: int, pooled_from: int) -> "MonotonePartition":
        """Singletons below ``pooled_from``, one pooled block from there on."""
        if not 0 <= pooled_from <= n - 1:
            raise MalformedSignal(f"pooled_from={pooled_from} outside 0..{n - 1}")
        return cls(tuple((i, i) for i in range(pooled_from)) + ((pooled_from, n - 1),))

    @classmethod
    def full_disclosure(cls, n: int) -> "MonotonePartition":
        return cls(tuple((i, i) for i in range(n)))

    @classmethod
    def no_disclosure(cls, n: int) -> "MonotonePartition":
        return cls(((0, n - 1),))

    @property
    def cuts(self) -> tuple[int, ...]:
        return tuple(j for _, j in self.blocks[:-1])

    @property
    def pooled_from(self) -> int | None:
        """First index of the terminal block if this is upper censorship, else ``None``."""
        if any(i != j for i, j in self.blocks[:-1]):
            return None
        return self.blocks[-1][0]

    @property
    def is_upper_censorship(self) -> bool:
        return self.pooled_from is not None

    def to_list(self) -> list[list[int]]:
        return [[i, j] for i, j in self.blocks]


@dataclass(frozen=True)
class SetPartition:
    """Disjoint index subsets covering ``0..n-1``; blocks need not be consecutive."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(i) for i in b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)

    def validate(self, n: int) -> None:
        flat = sorted(i for b in self.blocks for i in b)
        if flat != list(range(n)) or any(len(b) == 0 for b in self.blocks):
            raise MalformedSignal(f"blocks {self.blocks} are not a partition of 0..{n - 1}")

    @property
    def is_monotone(self) -> bool:
        return all(b[-1] - b[0] + 1 == len(b) for b in self.blocks)

    def to_monotone(self) -> MonotonePartition:
        if not self.is_monotone:
            raise MalformedSignal(f"blocks {self.blocks} are not consecutive")
        return MonotonePartition(tuple((b[0], b[-1]) for b in self.blocks))

    @classmethod
    def from_monotone(cls, p: MonotonePartition) -> "SetPartition":
        return cls(tuple(tuple(range(i, j + 1)) for i, j in p.blocks))


@dataclass(frozen=True)
class StochasticUpperCensorship:
    """Separate states below the cutoff, pool states above it, and separate
    the cutoff state itself with probability ``q``."""

    cutoff_index: int
    cutoff_state: float
    q: float
    pooled_mean: float
    value: float = float("nan")
    # position on the walk z = w_k + q (w_{k+1} - w_k), and how the optimum was reached
    z: float = float("nan")
    case: str = ""

    @property
    def is_deterministic(self) -> bool:
        return self.q in (0.0, 1.0)


@dataclass(frozen=True)
class PoolingSet:
    """Disjoint open pooling intervals of [0, 1]; states outside them are revealed."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple((float(a), float(b)) for a, b in self.intervals))

    def validate(self) -> None:
        prev = 0.0
        for a, b in self.intervals:
            if not (0.0 <= a < b <= 1.0):
                raise MalformedSignal(f"pooling interval ({a}, {b}) is empty or outside [0, 1]")
            if a < prev:
                raise MalformedSignal(f"pooling intervals {self.intervals} overlap or are unsorted")
            prev = b

    @classmethod
    def interval_disclosure(cls, w_lo: float, w_hi: float) -> "PoolingSet":
        """Pool ``[0, w_lo)`` and ``(w_hi, 1]``, reveal the middle."""
        iv = []
        if w_lo > 0.0:
            iv.append((0.0, w_lo))
        if w_hi < 1.0:
            iv.append((w_hi, 1.0))
        return cls(tuple(iv))

    @classmethod
    def no_disclosure(cls) -> "PoolingSet":
        return cls(((0.0, 1.0),))

    @classmethod
    def full_disclosure(cls) -> "PoolingSet":
        return cls(())


def partition_blocks(p: MonotonePartition | SetPartition) -> Sequence[Sequence[int]]:
    if isinstance(p, MonotonePartition):
        return [range(i, j + 1) for i, j in p.blocks]
    return p.blocks
