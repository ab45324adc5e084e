"""Brute-force reference computations, deliberately naive.

None of these import the package's search or carry code.
"""
from __future__ import annotations

from itertools import product


def s(n: int) -> int:
    return bin(n).count("1")


def naive_pairs(k, l, m, product_exp=None, box_exp=None):
    """All odd (a, b) with the given digit sums, by a plain double loop."""
    out = []
    if product_exp is not None:
        limit = 1 << product_exp
        for a in range(1, limit, 2):
            if s(a) != l:
                continue
            for b in range(1, limit // a + 1, 2):
                if a * b < limit and s(b) == m and s(a * b) == k:
                    out.append((a, b))
    else:
        limit = 1 << box_exp
        for a in range(1, limit, 2):
            if s(a) != l:
                continue
            for b in range(1, limit, 2):
                if s(b) == m and s(a * b) == k:
                    out.append((a, b))
    return sorted(out, key=lambda p: (p[0] * p[1], p[0]))


def naive_squares(k, exp):
    return [a for a in range(1, 1 << exp, 2) if s(a * a) == k]


def set_partitions(items, blocks):
    """Every partition of ``items`` into exactly ``blocks`` nonempty blocks."""
    n = len(items)

    def rec(i, labels, used):
        if i == n:
            if used == blocks:
                yield list(labels)
            return
        if blocks - used > n - i:
            return
        for lab in range(used):
            labels.append(lab)
            yield from rec(i + 1, labels, used)
            labels.pop()
        if used < blocks:
            labels.append(used)
            yield from rec(i + 1, labels, used + 1)
            labels.pop()

    for labels in rec(0, [], 0):
        parts = [[] for _ in range(blocks)]
        for item, lab in zip(items, labels):
            parts[lab].append(item)
        yield parts


def brute_power_partitions(a_exps, b_exps, parts):
    """Canonical (parts, powers) tuples found by checking every set partition."""
    pairs = [(i, j) for i in range(len(a_exps)) for j in range(len(b_exps)) if (i, j) != (0, 0)]
    found = set()
    for blocks in set_partitions(pairs, parts):
        totals = [sum(1 << (a_exps[i] + b_exps[j]) for i, j in blk) for blk in blocks]
        if all(t & (t - 1) == 0 for t in totals):
            powers = [t.bit_length() - 1 for t in totals]
            if len(set(powers)) == parts:
                ranked = sorted(zip(powers, blocks))
                found.add((tuple(tuple(sorted(b)) for _, b in ranked), tuple(p for p, _ in ranked)))
    return sorted(found)


def subset_assignments_two(a_exps, b_exps):
    """Two-class splits by enumerating all 2**n labelings."""
    pairs = [(i, j) for i in range(len(a_exps)) for j in range(len(b_exps)) if (i, j) != (0, 0)]
    out = []
    for mask in product((0, 1), repeat=len(pairs)):
        c0 = [p for p, bit in zip(pairs, mask) if bit == 0]
        c1 = [p for p, bit in zip(pairs, mask) if bit == 1]
        if not c0 or not c1:
            continue
        t0 = sum(1 << (a_exps[i] + b_exps[j]) for i, j in c0)
        t1 = sum(1 << (a_exps[i] + b_exps[j]) for i, j in c1)
        if t0 & (t0 - 1) == 0 and t1 & (t1 - 1) == 0 and t0 < t1:
            out.append((tuple(c0), tuple(c1)))
    return out
