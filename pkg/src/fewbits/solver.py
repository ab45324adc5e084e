"""Search for odd a, b with s(a)=l, s(b)=m and s(ab)=k.

Two independent strategies:

``pair_first``
    walk a ascending over all odd l-bit candidates and, for each, every
    m-bit b that keeps the pair inside the bound; test s(ab) directly.
``product_first`` (k = 2, 3 only)
    enumerate the sparse products ``1 + 2**x`` / ``1 + 2**y + 2**x`` and
    trial-divide them by low-weight candidates.

When the pair products fit in 64 bits the pair-first inner loop runs in
the compiled kernel; otherwise it falls back to exact Python integers.
"""
from __future__ import annotations

import enum
import functools
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from .sparsebin import SparseBin

DEFAULT_CEILING = 40


class Strategy(str, enum.Enum):
    PAIR_FIRST = "pair_first"
    PRODUCT_FIRST = "product_first"
    CONSTRUCTION = "construction"  # family generators, not a search


class BoundKind(str, enum.Enum):
    PRODUCT = "product_bound"  # a*b < 2**E
    MIN = "min_bound"  # min(a, b) < 2**E, not searchable
    BOX = "box_bound"  # a < 2**E and b < 2**E


class BoundSource(str, enum.Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    THEOREM4 = "theorem4"
    USER = "user"


class SolverError(ValueError):
    pass


class InfiniteFamilyError(SolverError):
    pass


class UnsupportedError(SolverError):
    pass


class MissingBoundError(SolverError):
    pass


class ResourceCeilingError(SolverError):
    pass


@dataclass(frozen=True)
class BoundSpec:
    k: int
    l: int
    m: int
    kind: BoundKind
    bound_exponent: int
    source: BoundSource

    @property
    def proves_completeness(self) -> bool:
        return self.kind is BoundKind.PRODUCT and self.source is not BoundSource.USER

    def with_slack(self, slack: int) -> "BoundSpec":
        return BoundSpec(self.k, self.l, self.m, self.kind, self.bound_exponent + slack, BoundSource.USER)


def bound_for(k: int, l: int, m: int) -> BoundSpec:
    """The bound proved for (k, l, m).

    k=2: ab < 2**(2lm-4).  k=3 with max(l, m) >= 3: ab < 2**(4lm-13).
    k=4 with l, m >= 3: min(a, b) < 2**(18lm).
    """
    if k not in (2, 3, 4):
        raise UnsupportedError(f"no bound is known for k={k}; only k in {{2, 3, 4}}")
    if l < 2 or m < 2:
        raise SolverError("l and m must be at least 2")
    if k == 2:
        return BoundSpec(k, l, m, BoundKind.PRODUCT, 2 * l * m - 4, BoundSource.THEOREM1)
    if k == 3:
        if max(l, m) < 3:
            raise InfiniteFamilyError(
                "k=3, l=m=2 has the infinite family a=b=2^c+1 (c>=2); no product bound exists"
            )
        return BoundSpec(k, l, m, BoundKind.PRODUCT, 4 * l * m - 13, BoundSource.THEOREM2)
    if l < 3 or m < 3:
        raise UnsupportedError("the k=4 bound needs l, m >= 3")
    return BoundSpec(k, l, m, BoundKind.MIN, 18 * l * m, BoundSource.THEOREM4)


def user_bound(k: int, l: int, m: int, exponent: int, kind: BoundKind = BoundKind.BOX) -> BoundSpec:
    if exponent < 1:
        raise SolverError("bound exponent must be positive")
    return BoundSpec(k, l, m, kind, exponent, BoundSource.USER)


@dataclass(frozen=True, order=False)
class SolutionRecord:
    a: SparseBin
    b: SparseBin
    k: int
    l: int
    m: int
    product: SparseBin
    strategy: Strategy
    complete: bool

    def sort_key(self):
        return (self.product.to_int(), self.a.to_int())

    def pair(self) -> tuple[int, int]:
        return self.a.to_int(), self.b.to_int()

    def validate(self) -> None:
        if not (self.a.is_odd() and self.b.is_odd()):
            raise AssertionError(f"even operand in {self.pair()}")
        if (self.a.popcount(), self.b.popcount(), self.product.popcount()) != (self.l, self.m, self.k):
            raise AssertionError(f"digit sums do not match for {self.pair()}")
        if self.a.to_int() * self.b.to_int() != self.product.to_int():
            raise AssertionError(f"product mismatch for {self.pair()}")
        if self.k > self.l * self.m:
            raise AssertionError("k exceeds l*m")

    def to_dict(self) -> dict:
        return {
            "a_dec": str(self.a),
            "b_dec": str(self.b),
            "a_exps": list(self.a.exponents),
            "b_exps": list(self.b.exponents),
            "k": self.k,
            "l": self.l,
            "m": self.m,
            "product_dec": str(self.product),
            "product_exps": list(self.product.exponents),
            "strategy": self.strategy.value,
            "complete": self.complete,
        }


# candidate generation -----------------------------------------------------

def enumerate_weighted(l: int, max_exponent: int) -> Iterator[SparseBin]:
    """Odd integers with exactly ``l`` set bits and top bit below ``max_exponent``.

    Bit 0 is fixed; the other ``l - 1`` positions run over ``1..max_exponent-1``
    in colexicographic order, which is increasing numeric order.
    """
    if l < 1 or max_exponent < 1:
        return
    if l == 1:
        yield SparseBin((0,))
        return
    for combo in _colex_combinations(range(1, max_exponent), l - 1):
        yield SparseBin((0,) + combo)


def _colex_combinations(pool: Sequence[int], r: int) -> Iterator[tuple[int, ...]]:
    # colex order of r-subsets == reversed lex order of their reversed tuples
    pool = list(pool)
    n = len(pool)
    if r > n:
        return
    if r == 0:
        yield ()
        return
    for top in range(r - 1, n):
        for rest in _colex_combinations(pool[:top], r - 1):
            yield rest + (pool[top],)


def weighted_values(l: int, max_exponent: int) -> list[int]:
    """Plain ints of :func:`enumerate_weighted`, ascending."""
    return list(_weighted_values(l, max_exponent))


@functools.lru_cache(maxsize=256)
def _weighted_values(l: int, max_exponent: int) -> tuple[int, ...]:
    if l < 1 or max_exponent < 1:
        return ()
    if l == 1:
        return (1,)
    out = [1 + sum(1 << e for e in combo) for combo in itertools.combinations(range(1, max_exponent), l - 1)]
    out.sort()
    return tuple(out)


# options and helpers ------------------------------------------------------

@dataclass
class SolveOptions:
    dedup_symmetric: bool = False
    jobs: int = 1
    ceiling: int = DEFAULT_CEILING
    use_kernel: bool = True


def _resolve_bound(k: int, l: int, m: int, bound) -> BoundSpec:
    if isinstance(bound, BoundSpec):
        spec = bound
    elif bound is None:
        try:
            spec = bound_for(k, l, m)
        except InfiniteFamilyError as exc:
            raise MissingBoundError(f"{exc}; pass a user bound exponent") from exc
        except UnsupportedError as exc:
            raise MissingBoundError(f"{exc}; a user bound exponent is mandatory") from exc
    else:
        spec = user_bound(k, l, m, int(bound))
    if spec.kind is BoundKind.MIN:
        raise MissingBoundError(
            "a bound on min(a, b) alone cannot be searched exhaustively; pass a user bound exponent"
        )
    return spec


def _check_ceiling(spec: BoundSpec, ceiling: int) -> None:
    if spec.bound_exponent > ceiling:
        raise ResourceCeilingError(
            f"bound exponent {spec.bound_exponent} exceeds the safety ceiling {ceiling}; "
            "raise the ceiling explicitly to run this search"
        )


def _finish(pairs: Iterable[tuple[int, int]], k, l, m, strategy, complete, dedup) -> list[SolutionRecord]:
    uniq = set(pairs)
    if dedup and l == m:
        uniq = {(min(a, b), max(a, b)) for a, b in uniq}
    rows = sorted(uniq, key=lambda p: (p[0] * p[1], p[0]))
    return [
        SolutionRecord(
            SparseBin.from_int(a),
            SparseBin.from_int(b),
            k,
            l,
            m,
            SparseBin.from_int(a * b),
            strategy,
            complete,
        )
        for a, b in rows
    ]


def _shards(items: Sequence, jobs: int) -> list:
    # contiguous slices; the merge sorts, so shard layout never shows in output
    jobs = max(1, min(jobs, len(items)))
    size = math.ceil(len(items) / jobs) if items else 0
    return [items[i:i + size] for i in range(0, len(items), size)] if size else []


def _run_sharded(fn, shards: list, jobs: int, *args) -> list:
    if jobs <= 1 or len(shards) <= 1:
        out = []
        for shard in shards:
            out.extend(fn(shard, *args))
        return out
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        try:
            for part in pool.map(fn, shards, *([a] * len(shards) for a in args)):
                out.extend(part)
        except BaseException:
            pool.shutdown(wait=False, cancel_futures=True)
            raise
    return out


# pair-first ---------------------------------------------------------------

def _pair_worker(avals: list[int], bvals: list[int], k: int, spec_kind: str, exponent: int, mod4: bool,
                 use_kernel: bool) -> list[tuple[int, int]]:
    box = spec_kind == BoundKind.BOX.value
    limit = 1 << exponent
    fits = (2 * exponent <= 64) if box else (exponent <= 63)
    if use_kernel and fits and avals and bvals:
        A = np.array(avals, dtype=np.uint64)
        B = np.array(bvals, dtype=np.uint64)
        ia, ib = _kernels.active.pair_search(A, B, k, 0 if box else limit, box, mod4)
        return [(avals[i], bvals[j]) for i, j in zip(ia.tolist(), ib.tolist())]
    out = []
    for a in avals:
        for b in bvals:
            if not box and a * b >= limit:
                break
            if mod4 and (a ^ b) & 3:
                continue
            if (a * b).bit_count() == k:
                out.append((a, b))
    return out


def solve_pair_first(k: int, l: int, m: int, bound=None, options: SolveOptions | None = None) -> list[SolutionRecord]:
    opts = options or SolveOptions()
    spec = _resolve_bound(k, l, m, bound)
    _check_ceiling(spec, opts.ceiling)
    if k > l * m:
        return []
    E = spec.bound_exponent
    if spec.kind is BoundKind.BOX:
        avals = weighted_values(l, E)
        bvals = weighted_values(m, E)
    else:
        # b >= 2**m - 1, so a < 2**E / (2**m - 1); b's top bit lies below E - floor(log2 3)
        bmin = (1 << m) - 1
        avals = [a for a in weighted_values(l, E) if a * bmin < (1 << E)]
        bvals = weighted_values(m, max(E - 1, 1)) if avals else []
    mod4 = k == 2
    shards = _shards(avals, opts.jobs)
    pairs = _run_sharded(_pair_worker, shards, opts.jobs, bvals, k, spec.kind.value, E, mod4, opts.use_kernel)
    return _finish(pairs, k, l, m, Strategy.PAIR_FIRST, spec.proves_completeness, opts.dedup_symmetric)


# product-first ------------------------------------------------------------

def _sparse_products(k: int, exponent: int) -> Iterator[int]:
    """Odd P < 2**exponent with s(P) == k, for k in {2, 3}."""
    for combo in itertools.combinations(range(1, exponent), k - 1):
        yield 1 + sum(1 << e for e in combo)


def _product_worker(products: list[int], k: int, l: int, m: int, box_exp: int) -> list[tuple[int, int]]:
    out = []
    for P in products:
        root = math.isqrt(P)
        # every factor pair has a member <= sqrt(P); scan weight-l and weight-m divisors up there
        top = root.bit_length()
        small = set()
        for w in {l, m}:
            for d in _weighted_values(w, top):
                if d > root:
                    continue
                if P % d == 0:
                    small.add(d)
        for d in small:
            q = P // d
            for a, b in ((d, q), (q, d)):
                if a.bit_count() == l and b.bit_count() == m:
                    if box_exp and (a >> box_exp or b >> box_exp):
                        continue
                    out.append((a, b))
    return out


def solve_product_first(k: int, l: int, m: int, bound=None, options: SolveOptions | None = None) -> list[SolutionRecord]:
    opts = options or SolveOptions()
    if k not in (2, 3):
        raise UnsupportedError("product-first search needs k in {2, 3}")
    spec = _resolve_bound(k, l, m, bound)
    _check_ceiling(spec, opts.ceiling)
    if k > l * m:
        return []
    if spec.kind is BoundKind.BOX:
        # a, b < 2**E  =>  ab < 2**(2E); the box test is reapplied per pair
        prod_exp, box_exp = 2 * spec.bound_exponent, spec.bound_exponent
    else:
        prod_exp, box_exp = spec.bound_exponent, 0
    products = list(_sparse_products(k, prod_exp))
    shards = _shards(products, opts.jobs)
    pairs = _run_sharded(_product_worker, shards, opts.jobs, k, l, m, box_exp)
    return _finish(pairs, k, l, m, Strategy.PRODUCT_FIRST, spec.proves_completeness, opts.dedup_symmetric)


def solve(k: int, l: int, m: int, bound=None, strategy: Strategy | str = Strategy.PAIR_FIRST,
          options: SolveOptions | None = None) -> list[SolutionRecord]:
    """All odd (a, b) with s(a)=l, s(b)=m, s(ab)=k inside ``bound``.

    ``bound`` is ``None`` (use the proved bound), an int (user exponent:
    a, b < 2**E), or a :class:`BoundSpec`.  Records come sorted by
    ``(ab, a)`` and carry ``complete=True`` only under a proved product bound.
    """
    if k < 2 or l < 2 or m < 2:
        raise SolverError("k, l, m must all be at least 2")
    strategy = Strategy(strategy)
    if strategy is Strategy.CONSTRUCTION:
        raise UnsupportedError("'construction' labels family output and is not a search strategy")
    if strategy is Strategy.PRODUCT_FIRST:
        return solve_product_first(k, l, m, bound, options)
    return solve_pair_first(k, l, m, bound, options)


# squares ------------------------------------------------------------------

def solve_square(k: int, bound_exponent: int, options: SolveOptions | None = None) -> list[int]:
    """All odd a < 2**bound_exponent with s(a*a) == k."""
    opts = options or SolveOptions()
    if k < 2:
        raise SolverError("k must be at least 2")
    if bound_exponent > opts.ceiling:
        raise ResourceCeilingError(
            f"bound exponent {bound_exponent} exceeds the safety ceiling {opts.ceiling}"
        )
    stop = 1 << bound_exponent
    if opts.use_kernel and bound_exponent <= 32:
        return [int(v) for v in _kernels.active.square_search(1, stop, k)]
    return [a for a in range(1, stop, 2) if (a * a).bit_count() == k]


# bound verification -------------------------------------------------------

@dataclass
class BoundReport:
    k: int
    l: int
    m: int
    theorem_exponent: int
    searched_exponent: int
    passed: bool
    solution_count: int
    extremal: SolutionRecord | None
    gap_bits: int | None
    violations: list[SolutionRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "m": self.m,
            "theorem_exponent": self.theorem_exponent,
            "searched_exponent": self.searched_exponent,
            "passed": self.passed,
            "solution_count": self.solution_count,
            "extremal": self.extremal.to_dict() if self.extremal else None,
            "gap_bits": self.gap_bits,
            "violations": [v.to_dict() for v in self.violations],
        }


def verify_bound(k: int, l: int, m: int, slack_exponent: int, options: SolveOptions | None = None,
                 strategy: Strategy | str = Strategy.PAIR_FIRST) -> BoundReport:
    """Search past the proved product bound and confirm nothing lives there.

    ``gap_bits`` is the bound exponent minus the bit length of the largest
    product found.
    """
    opts = options or SolveOptions()
    spec = bound_for(k, l, m)
    if spec.kind is not BoundKind.PRODUCT:
        raise UnsupportedError("only product bounds can be verified by search")
    if slack_exponent < 0:
        raise SolverError("slack must be nonnegative")
    widened = spec.with_slack(slack_exponent)
    _check_ceiling(widened, opts.ceiling)
    records = solve(k, l, m, widened, strategy, opts)
    limit = 1 << spec.bound_exponent
    violations = [r for r in records if r.product.to_int() >= limit]
    extremal = records[-1] if records else None
    gap = spec.bound_exponent - extremal.product.to_int().bit_length() if extremal else None
    return BoundReport(k, l, m, spec.bound_exponent, widened.bound_exponent, not violations,
                       len(records), extremal, gap, violations)
