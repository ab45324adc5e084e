"""Integers stored as their sorted nonzero bit positions.

A :class:`SparseBin` holds the exponents ``e_0 < e_1 < ...`` of
``n = sum(2**e_i)``.  Arithmetic never materialises a dense bit vector:
products are formed as the multiset of pairwise exponent sums and then
carries are resolved by :func:`normalize`.  Exponents are unbounded Python
ints, so values far beyond 64 bits are exact.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import _kernels

MACHINE_BITS = 64


class DuplicateExponentError(ValueError):
    pass


class MachineRangeError(OverflowError):
    pass


@dataclass(frozen=True)
class ExponentMultiset:
    """Unnormalised multiset of powers of two, as ``(exponent, multiplicity)``."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for e, mult in self.entries:
            if e < 0 or mult < 1:
                raise ValueError(f"bad entry ({e}, {mult})")
            if e in seen:
                raise ValueError(f"exponent {e} listed twice")
            seen.add(e)

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "ExponentMultiset":
        """Build from a flat list where repeats mean multiplicity."""
        counts = Counter(int(e) for e in exponents)
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "ExponentMultiset":
        return cls(tuple(sorted((int(e), int(c)) for e, c in counts.items() if c)))

    def flatten(self) -> list[int]:
        return [e for e, mult in self.entries for _ in range(mult)]

    @property
    def cardinality(self) -> int:
        return sum(mult for _, mult in self.entries)

    def value(self) -> int:
        return sum(mult << e for e, mult in self.entries)

    def __len__(self):
        return self.cardinality


@total_ordering
class SparseBin:
    __slots__ = ("exponents",)

    def __init__(self, exponents: Iterable[int] = ()):
        # trusted constructor: callers guarantee a strictly increasing sequence
        object.__setattr__(self, "exponents", tuple(exponents))

    def __setattr__(self, name, value):
        raise AttributeError("SparseBin is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "SparseBin":
        exps = sorted(int(e) for e in exponents)
        for lo, hi in zip(exps, exps[1:]):
            if lo == hi:
                raise DuplicateExponentError(
                    f"exponent {lo} repeated; use normalize() for multisets"
                )
        if exps and exps[0] < 0:
            raise ValueError("exponents must be nonnegative")
        return cls(exps)

    @classmethod
    def from_int(cls, value: int) -> "SparseBin":
        """Exact conversion from an arbitrary nonnegative Python int."""
        value = int(value)
        if value < 0:
            raise ValueError("negative values have no sparse binary form")
        exps = []
        while value:
            low = value & -value
            exps.append(low.bit_length() - 1)
            value ^= low
        return cls(exps)

    @classmethod
    def from_machine(cls, value: int) -> "SparseBin":
        if not 0 <= int(value) < 1 << MACHINE_BITS:
            raise MachineRangeError(f"{value} is outside the {MACHINE_BITS}-bit machine range")
        return cls.from_int(value)

    @classmethod
    def parse(cls, text: str) -> "SparseBin":
        """Accept either an exponent list ``"0,2,3"`` or a decimal ``"13"``."""
        text = text.strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1] + ","
        if "," in text:
            return cls.from_exponents(int(t) for t in text.split(",") if t.strip())
        if not text.isdigit():
            raise ValueError(f"not a decimal or exponent list: {text!r}")
        return cls.from_int(int(text))

    # conversion ---------------------------------------------------------

    def to_int(self) -> int:
        v = 0
        for e in self.exponents:
            v |= 1 << e
        return v

    def to_machine(self) -> int:
        if self.exponents and self.exponents[-1] >= MACHINE_BITS:
            raise MachineRangeError(
                f"value needs bit {self.exponents[-1]}, beyond {MACHINE_BITS}-bit range"
            )
        return self.to_int()

    def __int__(self):
        return self.to_int()

    def exps_text(self) -> str:
        return ",".join(str(e) for e in self.exponents)

    def __str__(self):
        return str(self.to_int())

    def __repr__(self):
        return f"SparseBin([{self.exps_text()}])"

    # queries ------------------------------------------------------------

    def popcount(self) -> int:
        return len(self.exponents)

    def is_odd(self) -> bool:
        return bool(self.exponents) and self.exponents[0] == 0

    def is_zero(self) -> bool:
        return not self.exponents

    @property
    def top(self) -> int:
        """Highest exponent (``-1`` for zero)."""
        return self.exponents[-1] if self.exponents else -1

    def __len__(self):
        return len(self.exponents)

    def __iter__(self) -> Iterator[int]:
        return iter(self.exponents)

    def __getitem__(self, i):
        return self.exponents[i]

    # ordering -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, SparseBin):
            return self.exponents == other.exponents
        if isinstance(other, int):
            return self.to_int() == other
        return NotImplemented

    def __lt__(self, other):
        if not isinstance(other, SparseBin):
            return NotImplemented
        return compare(self, other) < 0

    def __hash__(self):
        return hash(self.exponents)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __lshift__(self, d):
        return shift(self, d)


def normalize(ms: ExponentMultiset | Mapping[int, int]) -> SparseBin:
    """Resolve carries: two copies of ``e`` become one copy of ``e + 1``.

    Works upward from the lowest exponent, handling all pairs at a level in
    one step, so the cost is linear in the exponent span touched.
    """
    if isinstance(ms, ExponentMultiset):
        counts = dict(ms.entries)
    else:
        counts = {e: c for e, c in ms.items() if c}
    if not counts:
        return SparseBin(())
    out = []
    pending = sorted(counts)
    idx = 0
    carry = 0
    e = pending[0]
    while idx < len(pending) or carry:
        if carry == 0 and pending[idx] > e:
            # nothing in flight: jump straight to the next populated level
            e = pending[idx]
        c = carry
        if idx < len(pending) and pending[idx] == e:
            c += counts[e]
            idx += 1
        if c & 1:
            out.append(e)
        carry = c >> 1
        e += 1
    return SparseBin(out)


def add(x: SparseBin, y: SparseBin) -> SparseBin:
    return normalize(Counter(x.exponents + y.exponents))


def product_multiset(x: SparseBin, y: SparseBin) -> Counter:
    """All ``len(x) * len(y)`` pairwise exponent sums, with multiplicity."""
    ys = y.exponents
    return Counter([ei + ej for ei in x.exponents for ej in ys])


def mul(x: SparseBin, y: SparseBin) -> SparseBin:
    return normalize(product_multiset(x, y))


def popcount(x: SparseBin) -> int:
    return len(x.exponents)


def popcount_machine(value: int) -> int:
    if not 0 <= value < 1 << MACHINE_BITS:
        raise MachineRangeError(f"{value} is outside the {MACHINE_BITS}-bit machine range")
    return int(value).bit_count()


def shift(x: SparseBin, d: int) -> SparseBin:
    if d < 0:
        raise ValueError("shift distance must be nonnegative")
    return SparseBin(e + d for e in x.exponents)


def compare(x: SparseBin, y: SparseBin) -> int:
    """-1, 0 or 1 as ``x`` is less than, equal to or greater than ``y``.

    Compares from the highest exponent down; a proper prefix (from the top)
    is the smaller value.
    """
    for ex, ey in zip(reversed(x.exponents), reversed(y.exponents)):
        if ex != ey:
            return -1 if ex < ey else 1
    lx, ly = len(x.exponents), len(y.exponents)
    return (lx > ly) - (lx < ly)


# batched forms over machine integers (operands below 2**32) --------------

def _check_batch(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.uint64)
    if arr.size and int(arr.max()) >> _kernels.MAX_BATCH_BITS:
        raise MachineRangeError(f"batched operands must be below 2**{_kernels.MAX_BATCH_BITS}")
    return arr


def _bits_to_ints(bits: np.ndarray) -> np.ndarray:
    weights = np.left_shift(np.uint64(1), np.arange(bits.shape[1], dtype=np.uint64))
    # products of two 32-bit operands stay below 2**64
    return (bits[:, :64].astype(np.uint64) * weights[:64]).sum(axis=1, dtype=np.uint64)


def mul_many(avals, bvals, backend=None) -> np.ndarray:
    """Elementwise sparse products of two uint64 arrays (operands < 2**32).

    Same algorithm as :func:`mul` (pairwise exponent sums, then carries),
    run by the compiled kernel.
    """
    impl = backend or _kernels.active
    bits = impl.sparse_mul_batch(_check_batch(avals), _check_batch(bvals))
    return _bits_to_ints(bits)


def add_many(avals, bvals, backend=None) -> np.ndarray:
    impl = backend or _kernels.active
    bits = impl.sparse_add_batch(_check_batch(avals), _check_batch(bvals))
    return _bits_to_ints(bits)


def popcount_many(values, backend=None) -> np.ndarray:
    impl = backend or _kernels.active
    return impl.popcount(np.asarray(values, dtype=np.uint64))
