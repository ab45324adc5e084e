import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fewbits.sparsebin import (
    DuplicateExponentError,
    ExponentMultiset,
    MachineRangeError,
    SparseBin,
    add,
    add_many,
    compare,
    mul,
    mul_many,
    normalize,
    popcount,
    popcount_machine,
    popcount_many,
    shift,
)

u64 = st.integers(min_value=0, max_value=2**64 - 1)
u32 = st.integers(min_value=0, max_value=2**32 - 1)


def sb(*exps):
    return SparseBin.from_exponents(exps)


class TestFromExponents:
    def test_empty_is_zero(self):
        assert SparseBin.from_exponents([]).to_int() == 0

    def test_sorts(self):
        x = SparseBin.from_exponents([2, 0])
        assert x.exponents == (0, 2)
        assert x.to_int() == 5

    def test_value(self):
        assert sb(0, 2, 3).to_int() == 13

    def test_duplicate_rejected_with_hint(self):
        with pytest.raises(DuplicateExponentError, match="normalize"):
            SparseBin.from_exponents([1, 1])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            SparseBin.from_exponents([-1, 2])


class TestNormalize:
    @pytest.mark.parametrize(
        "flat, expected",
        [
            ([0, 0], (1,)),
            ([0, 0, 1], (2,)),
            # 1 + 2 + 2 + 8 = 13
            ([0, 1, 1, 3], (0, 2, 3)),
            ([], ()),
            ([5] * 8, (8,)),
        ],
    )
    def test_examples(self, flat, expected):
        assert normalize(ExponentMultiset.from_exponents(flat)).exponents == expected

    def test_accepts_mapping(self):
        assert normalize({0: 3, 2: 1}).to_int() == 7

    @given(st.lists(st.integers(0, 200), max_size=40))
    def test_value_preserved_and_idempotent(self, flat):
        ms = ExponentMultiset.from_exponents(flat)
        once = normalize(ms)
        # independent accumulator: plain big-int sum of the flattened list
        assert once.to_int() == sum(1 << e for e in flat)
        assert list(once.exponents) == sorted(set(once.exponents))
        again = normalize(ExponentMultiset.from_exponents(once.exponents))
        assert again == once

    def test_multiset_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            ExponentMultiset(((0, 0),))
        with pytest.raises(ValueError):
            ExponentMultiset(((1, 1), (1, 2)))


class TestAdd:
    def test_zero_identity(self):
        x = sb(0, 3, 9)
        assert add(SparseBin(), x) == x

    def test_examples(self):
        assert add(sb(0, 1), sb(0, 1)).exponents == (1, 2)
        # 17 + 7 = 24
        assert add(sb(0, 4), sb(0, 1, 2)).exponents == (3, 4)


class TestMul:
    def test_three_squared(self):
        assert mul(sb(0, 1), sb(0, 1)).exponents == (0, 3)

    def test_fermat_factorisation(self):
        assert mul(SparseBin.from_int(13), SparseBin.from_int(20165)).exponents == (0, 18)

    def test_small(self):
        assert mul(sb(0, 2), sb(0, 1, 2)).to_int() == 35

    def test_huge_exponents(self):
        x = sb(0, 10**6)
        assert mul(x, x).exponents == (0, 10**6 + 1, 2 * 10**6)

    def test_operators(self):
        x, y = SparseBin.from_int(11), SparseBin.from_int(6)
        assert (x * y).to_int() == 66
        assert (x + y).to_int() == 17
        assert (x << 2).to_int() == 44


class TestPopcount:
    def test_examples(self):
        assert popcount(SparseBin.from_int(23)) == 4
        assert popcount_machine(23) == 4
        assert popcount_machine(1) == 1
        assert popcount_machine(2**18 + 1) == 2

    def test_machine_range(self):
        with pytest.raises(MachineRangeError):
            popcount_machine(2**64)


class TestShiftCompare:
    def test_shift(self):
        assert shift(sb(0, 1), 3).exponents == (3, 4)
        assert shift(sb(0, 1), 3).to_int() == 24

    def test_compare_examples(self):
        assert compare(SparseBin.from_int(9), SparseBin.from_int(15)) == -1
        assert compare(SparseBin.from_int(15), SparseBin.from_int(9)) == 1
        assert compare(SparseBin.from_int(6), SparseBin.from_int(6)) == 0
        assert SparseBin.from_int(9) < SparseBin.from_int(15)

    @given(st.integers(0, 2**80), st.integers(0, 2**80))
    def test_compare_matches_int_order(self, v, w):
        c = compare(SparseBin.from_int(v), SparseBin.from_int(w))
        assert c == (v > w) - (v < w)

    def test_from_machine_20165(self):
        assert SparseBin.from_machine(20165).to_int() == 2**14 + 2**12 - 2**8 - 2**6 + 2**2 + 1
        assert SparseBin.from_machine(20165).exponents == (0, 2, 6, 7, 9, 10, 11, 14)

    def test_to_machine_overflow(self):
        with pytest.raises(MachineRangeError):
            sb(0, 64).to_machine()
        with pytest.raises(MachineRangeError):
            SparseBin.from_machine(2**64)

    @given(u64)
    def test_round_trip(self, v):
        assert SparseBin.from_machine(v).to_machine() == v


class TestText:
    def test_parse_both_encodings(self):
        assert SparseBin.parse("0,2,3") == SparseBin.parse("13")
        assert SparseBin.parse("[0, 2]").to_int() == 5
        assert SparseBin.from_int(13).exps_text() == "0,2,3"

    def test_parse_garbage(self):
        with pytest.raises(ValueError):
            SparseBin.parse("12x")

    def test_immutable(self):
        x = sb(0, 1)
        with pytest.raises(AttributeError):
            x.exponents = (0,)


@settings(max_examples=300)
@given(u32, u32)
def test_oracle_equivalence(v, w):
    x, y = SparseBin.from_machine(v), SparseBin.from_machine(w)
    assert mul(x, y).to_int() == v * w
    assert add(x, y).to_int() == v + w
    assert popcount(mul(x, y)) <= popcount(x) * popcount(y)


def test_oracle_equivalence_random_sample():
    rng = random.Random(7)
    for _ in range(5000):
        v, w = rng.getrandbits(32), rng.getrandbits(32)
        x, y = SparseBin.from_machine(v), SparseBin.from_machine(w)
        assert mul(x, y).to_machine() == v * w
        assert add(x, y).to_machine() == v + w


def test_batched_forms_agree_with_native(backend):
    rng = np.random.default_rng(3)
    a = rng.integers(0, 2**32, size=4000, dtype=np.uint64)
    b = rng.integers(0, 2**32, size=4000, dtype=np.uint64)
    a[:3] = [0, 2**32 - 1, 1]
    b[:3] = [5, 2**32 - 1, 0]
    assert np.array_equal(mul_many(a, b, backend), a * b)
    assert np.array_equal(add_many(a, b, backend), a + b)
    expected = np.array([bin(int(v)).count("1") for v in a * b])
    assert np.array_equal(popcount_many(a * b, backend), expected)


def test_batched_range_check():
    with pytest.raises(MachineRangeError):
        mul_many([2**32], [1])
