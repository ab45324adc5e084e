"""Carry analysis used in bounding arguments for sparse products.

* :func:`collapse_spread` measures how far apart powers of two can be and
  still sum to a single power of two.
* :func:`xi_set` lists the index pairs ``(i, j) != (0, 0)`` of the
  pre-carry product expansion ``ab = 1 + sum 2**(a_i + b_j)``.
* :func:`power_partitions` splits those pairs into classes that each sum
  to one power of two, one class per nonzero digit of ``ab - 1``.
* :func:`cluster_partition` groups bit positions into windows of width
  ``l*m`` separated by gaps larger than the window.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

from .sparsebin import ExponentMultiset, SparseBin, normalize

DEFAULT_CAP = 64

Pair = tuple[int, int]


class OperandError(ValueError):
    """Operand is even or has fewer than two nonzero bits."""


@dataclass(frozen=True)
class CollapseReport:
    s_value: int
    spread: int
    lemma_holds: bool

    def __iter__(self):
        return iter((self.s_value, self.spread, self.lemma_holds))


def collapse_spread(ms: ExponentMultiset) -> CollapseReport:
    """Popcount of the sum, exponent spread, and whether the spread bound holds.

    The bound only has content when the sum is a single power of two: then
    every two exponents differ by at most ``max(0, size - 2)``, where size
    counts multiplicity.
    """
    if ms.cardinality == 0:
        raise ValueError("collapse_spread needs a nonempty multiset")
    s_value = normalize(ms).popcount()
    exps = [e for e, _ in ms.entries]
    spread = max(exps) - min(exps)
    holds = s_value != 1 or spread <= max(0, ms.cardinality - 2)
    return CollapseReport(s_value, spread, holds)


@dataclass(frozen=True)
class XiSet:
    pairs: tuple[Pair, ...]
    sums: tuple[int, ...]
    a: SparseBin
    b: SparseBin

    def __len__(self):
        return len(self.pairs)

    def total(self) -> int:
        return sum(1 << s for s in self.sums)

    def sum_of(self, pair: Pair) -> int:
        i, j = pair
        return self.a[i] + self.b[j]


def _check_operand(x: SparseBin, name: str) -> None:
    if not x.is_odd():
        raise OperandError(f"{name}={x} must be odd")
    if x.popcount() < 2:
        raise OperandError(f"{name}={x} needs at least two nonzero bits")


def xi_set(a: SparseBin, b: SparseBin) -> XiSet:
    _check_operand(a, "a")
    _check_operand(b, "b")
    pairs = tuple((i, j) for i in range(len(a)) for j in range(len(b)) if (i, j) != (0, 0))
    sums = tuple(a[i] + b[j] for i, j in pairs)
    return XiSet(pairs, sums, a, b)


@dataclass(frozen=True)
class PowerPartition:
    """Classes of Xi, ordered by the power of two each one sums to."""

    parts: tuple[tuple[Pair, ...], ...]
    powers: tuple[int, ...]

    def reconstruct(self) -> int:
        """``1 + sum 2**x_t``; equals ``ab`` for a valid partition."""
        return 1 + sum(1 << x for x in self.powers)


def _single_power(total: int) -> int | None:
    if total > 0 and total & (total - 1) == 0:
        return total.bit_length() - 1
    return None


def _feasible(exps: Sequence[int], pool: Sequence[int], targets: Sequence[int],
              forced_in: frozenset = frozenset(), forced_out: frozenset = frozenset()) -> bool:
    """Can ``pool`` be split into classes summing to ``2**targets[t]`` each?

    ``forced_in`` items must land in class 0 and ``forced_out`` items must
    not.  Items sharing an exponent are interchangeable, so only per-level
    counts matter: the search walks levels upward carrying each open
    class's running sum in units of the current power of two, and memoises
    failed (level, carries) states.
    """
    levels: dict[int, list[int]] = {}
    for t in pool:
        row = levels.setdefault(exps[t], [0, 0, 0])
        row[0 if t in forced_in else 1 if t in forced_out else 2] += 1
    order = sorted(levels)
    if not order:
        return not targets
    ntarg = len(targets)
    dead: set = set()

    def place(idx: int, units: tuple) -> bool:
        # units[t] is class t's sum divided by 2**order[idx]; None once complete
        if idx == len(order):
            return all(u is None for u in units)
        key = (idx, units)
        if key in dead:
            return False
        e = order[idx]
        e_next = order[idx + 1] if idx + 1 < len(order) else None
        fin, fout, free = levels[e]
        for u, x in zip(units, targets):
            if u is not None and x < e:
                dead.add(key)
                return False

        def options(t: int, avail: int):
            # counts c for class t that leave it complete or aligned for the next level
            u, x = units[t], targets[t]
            need = (1 << (x - e)) - u
            if 0 <= need <= avail:
                yield need, None
            if e_next is not None and x >= e_next:
                step = 1 << (e_next - e)
                cap = min(avail, (1 << (x - e)) - u - 1)
                c = (-u) % step
                while c <= cap:
                    yield c, (u + c) >> (e_next - e)
                    c += step

        def distribute(t: int, left: int, acc: list) -> bool:
            if t == ntarg:
                return left == 0 and place(idx + 1, tuple(acc))
            if units[t] is None:
                acc.append(None)
                ok = distribute(t + 1, left, acc)
                acc.pop()
                return ok
            for c, nu in options(t, left):
                acc.append(nu)
                ok = distribute(t + 1, left - c, acc)
                acc.pop()
                if ok:
                    return True
            return False

        # class 0 takes all forced_in plus j of the free items
        if units[0] is None:
            ok = fin == 0 and distribute(1, fout + free, [None])
        else:
            ok = False
            for c0, nu0 in options(0, fin + free):
                if c0 >= fin and distribute(1, fout + free - (c0 - fin), [nu0]):
                    ok = True
                    break
        if not ok:
            dead.add(key)
        return ok

    # units at the lowest level start at zero for every class
    return place(0, tuple(0 for _ in targets))


def _canonical(xi: XiSet, pool: list[int], targets: list[int]) -> Iterator[list[list[int]]]:
    """Partitions of ``pool`` in canonical order, one class per target power.

    The class for the smallest target is grown one pair at a time in
    lexicographic pair order (pre-order, so shorter prefixes first); a
    prefix is expanded only when some completion exists, so the walk never
    enters a dead branch.
    """
    if not targets:
        if not pool:
            yield []
        return
    exps = xi.sums
    goal = 1 << targets[0]
    lex = sorted((t for t in pool if exps[t] <= targets[0]), key=lambda t: xi.pairs[t])

    def ok(chosen: list[int], skipped: list[int]) -> bool:
        return _feasible(exps, pool, targets, frozenset(chosen), frozenset(skipped))

    def grow(chosen: list[int], total: int, last: int, skipped: list[int]):
        if total == goal:
            taken = set(chosen)
            rest = [t for t in pool if t not in taken]
            for tail in _canonical(xi, rest, targets[1:]):
                yield [chosen] + tail
            return
        for nxt in range(last + 1, len(lex)):
            add = 1 << exps[lex[nxt]]
            if total + add > goal:
                continue
            cand = chosen + [lex[nxt]]
            skip = skipped + lex[last + 1:nxt]
            if ok(cand, skip):
                yield from grow(cand, total + add, nxt, skip)

    yield from grow([], 0, -1, [])


def _targets(xi: XiSet, parts: int) -> list[int] | None:
    # distinct powers summing to ab - 1 must be exactly its binary digits
    total = xi.total()
    if total.bit_count() != parts:
        return None
    return list(SparseBin.from_int(total).exponents)


def _check_parts(xi: XiSet, parts: int) -> None:
    if parts < 1 or parts > len(xi):
        raise ValueError(f"parts must lie in 1..{len(xi)}, got {parts}")


def power_partitions(xi: XiSet, parts: int, cap: int = DEFAULT_CAP) -> list[PowerPartition]:
    """All partitions of ``xi`` into ``parts`` power-of-two classes, up to ``cap``.

    The result is the first ``cap`` partitions in canonical order: classes
    taken by increasing power, compared by their sorted pair lists.  They
    are generated in that order, so a small cap stays cheap even when the
    full count is huge.
    """
    _check_parts(xi, parts)
    if cap < 1:
        raise ValueError("cap must be positive")
    targets = _targets(xi, parts)
    if targets is None:
        return []
    out = []
    for classes in itertools.islice(_canonical(xi, list(range(len(xi))), targets), cap):
        out.append(PowerPartition(
            parts=tuple(tuple(sorted(xi.pairs[t] for t in mem)) for mem in classes),
            powers=tuple(targets),
        ))
    return out


def has_power_partition(xi: XiSet, parts: int) -> bool:
    """Existence only; stops at the first partition found."""
    _check_parts(xi, parts)
    targets = _targets(xi, parts)
    return targets is not None and _feasible(xi.sums, range(len(xi)), targets)


def partition_is_valid(xi: XiSet, pp: PowerPartition) -> bool:
    """Every class normalizes to exactly its stated power and the classes tile Xi."""
    seen: Counter = Counter()
    for part, power in zip(pp.parts, pp.powers):
        if not part:
            return False
        seen.update(part)
        if normalize(Counter(xi.sum_of(p) for p in part)).exponents != (power,):
            return False
    return set(seen) == set(xi.pairs) and all(v == 1 for v in seen.values()) and sum(seen.values()) == len(xi)


@dataclass(frozen=True)
class ClusterPartition:
    window: int
    clusters: tuple[tuple[int, ...], ...]
    representatives: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.clusters)


def cluster_partition(exponents: Sequence[int], window: int) -> ClusterPartition:
    """Greedy left-to-right windows.

    The smallest unassigned exponent starts a cluster that takes every
    exponent within ``window`` above it (inclusive).
    """
    exps = list(exponents)
    if not exps:
        raise ValueError("cluster_partition needs a nonempty exponent list")
    if window < 1:
        raise ValueError("window must be positive")
    if any(lo >= hi for lo, hi in zip(exps, exps[1:])):
        raise ValueError("exponents must be strictly increasing")
    clusters = []
    reps = []
    idx = 0
    while idx < len(exps):
        rep = exps[idx]
        group = []
        while idx < len(exps) and exps[idx] <= rep + window:
            group.append(exps[idx])
            idx += 1
        clusters.append(tuple(group))
        reps.append(rep)
    return ClusterPartition(window, tuple(clusters), tuple(reps))


def cluster_signature(a: SparseBin, b: SparseBin) -> tuple[int, int]:
    """Cluster counts of a's and b's positions (bit 0 excluded), window ``s(a)*s(b)``."""
    _check_operand(a, "a")
    _check_operand(b, "b")
    window = a.popcount() * b.popcount()
    ra = cluster_partition(a.exponents[1:], window).count
    rb = cluster_partition(b.exponents[1:], window).count
    return ra, rb


ALLOWED_SIGNATURES = frozenset({(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)})
