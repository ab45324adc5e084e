"""Infinite families of solutions, built and then checked digit by digit.

The k=4 family comes from X^9 + 1 = (X^2 - X + 1)(X^7 + X^6 - X^4 - X^3 + X + 1)
evaluated at X = 2^n, with the second factor doubled up as b0 * (2^N + 1).
The k=3 family is a = b = 2^c + 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

from .solver import SolutionRecord, Strategy
from .sparsebin import SparseBin, mul


class FamilyError(ValueError):
    """Parameters outside the range where the construction is valid."""


class VerificationAlarm(AssertionError):
    """A generated instance failed its own digit-sum check."""


def first_factor(n: int) -> SparseBin:
    # 2^(2n) - 2^n + 1 = 1 + 2^n + 2^(n+1) + ... + 2^(2n-1)
    return SparseBin((0,) + tuple(range(n, 2 * n)))


def second_factor(n: int) -> SparseBin:
    value = (1 << 7 * n) + (1 << 6 * n) - (1 << 4 * n) - (1 << 3 * n) + (1 << n) + 1
    return SparseBin.from_int(value)


@dataclass(frozen=True)
class Thm3Instance:
    n: int
    N: int
    a: SparseBin
    b: SparseBin
    l: int
    m: int
    product: SparseBin

    def to_record(self) -> SolutionRecord:
        return SolutionRecord(self.a, self.b, 4, self.l, self.m, self.product, Strategy.CONSTRUCTION, False)

    def to_dict(self) -> dict:
        d = self.to_record().to_dict()
        d.update(family="thm3", n=self.n, N=self.N, s_a=self.a.popcount(), s_b=self.b.popcount(),
                 s_ab=self.product.popcount())
        return d


def admissible(n: int, N: int) -> str | None:
    """Reason (n, N) is rejected, or None.

    N >= 7n+1 keeps the two shifted copies of b0 < 2^(7n+1) apart; N != 9n
    keeps 2^(N+9n), 2^N, 2^(9n) and 1 distinct.
    """
    if n < 1:
        return f"n must be >= 1, got {n}"
    if N < 7 * n + 1:
        return f"N={N} < 7n+1={7 * n + 1}: shifted copies of b0 would overlap"
    if N == 9 * n:
        return f"N={N} equals 9n: 2^N and 2^(9n) would merge"
    return None


def thm3_generate(n: int, N: int) -> Thm3Instance:
    reason = admissible(n, N)
    if reason:
        raise FamilyError(reason)
    a = first_factor(n)
    b0 = second_factor(n)
    twist = SparseBin((0, N))
    b = mul(b0, twist)
    ab = mul(a, b)

    l, m = n + 1, 2 * (3 * n + 2)
    checks = {
        "a0*b0 == 2^(9n)+1": mul(a, b0).exponents == (0, 9 * n),
        "s(a) == n+1": a.popcount() == l,
        "s(b0) == 3n+2": b0.popcount() == 3 * n + 2,
        "s(b) == 2(3n+2)": b.popcount() == m,
        "s(ab) == 4": ab.popcount() == 4,
        "ab == (2^(9n)+1)(2^N+1)": ab.exponents == tuple(sorted({0, N, 9 * n, N + 9 * n})),
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise VerificationAlarm(f"(n={n}, N={N}) failed: {', '.join(failed)}")
    return Thm3Instance(n, N, a, b, l, m, ab)


def admissible_N(n: int) -> Iterator[int]:
    return (N for N in itertools.count(7 * n + 1) if N != 9 * n)


def thm3_scan(L: int) -> tuple[int, Callable[[], Iterator[Thm3Instance]]]:
    """Smallest n with s(a0) = n+1 >= L and s(b0) = 3n+2 >= L, plus an instance stream."""
    if L < 1:
        raise FamilyError("L must be >= 1")
    n = 1
    while n + 1 < L or 3 * n + 2 < L:
        n += 1

    def stream() -> Iterator[Thm3Instance]:
        for N in admissible_N(n):
            yield thm3_generate(n, N)

    return n, stream


def k3_family(c: int) -> SolutionRecord:
    """a = b = 2^c + 1, whose square 2^(2c) + 2^(c+1) + 1 has three ones for c >= 2.

    c = 1 is rejected: 3*3 = 9 = 2^3 + 1 has only two.
    """
    if c < 1:
        raise FamilyError("c must be >= 1")
    a = SparseBin((0, c))
    sq = mul(a, a)
    if sq.popcount() != 3:
        raise FamilyError(f"c={c}: s((2^c+1)^2) = {sq.popcount()}, not 3")
    return SolutionRecord(a, a, 3, 2, 2, sq, Strategy.CONSTRUCTION, False)
