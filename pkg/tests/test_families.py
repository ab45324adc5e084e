import pytest

from fewbits.families import (
    FamilyError,
    admissible,
    admissible_N,
    first_factor,
    k3_family,
    second_factor,
    thm3_generate,
    thm3_scan,
)
from fewbits.solver import Strategy

from oracles import s


def all_admissible(max_n=6, max_N=80):
    for n in range(1, max_n + 1):
        for N in range(7 * n + 1, max_N + 1):
            if N != 9 * n:
                yield n, N


class TestThm3:
    def test_n2_N19(self):
        inst = thm3_generate(2, 19)
        assert inst.a.to_int() == 13 and inst.a.popcount() == 3
        assert inst.b.to_int() == 20165 * ((1 << 19) + 1)
        assert inst.b.popcount() == 16 and inst.product.popcount() == 4
        assert inst.product.exponents == (0, 18, 19, 37)

    def test_n1_N8(self):
        inst = thm3_generate(1, 8)
        assert inst.a.to_int() == 3 and inst.l == 2
        assert inst.b.to_int() == 171 * 257 and inst.m == 10 and s(inst.b.to_int()) == 10
        assert s(171) == 5

    @pytest.mark.parametrize("n, N", [(1, 9), (2, 18), (3, 27)])
    def test_rejects_9n(self, n, N):
        with pytest.raises(FamilyError, match="9n"):
            thm3_generate(n, N)
        # without the guard the digit sum really does drop to three
        assert s(((1 << 9 * n) + 1) * ((1 << N) + 1)) == 3

    @pytest.mark.parametrize("n, N", [(1, 7), (2, 14), (3, 1)])
    def test_rejects_small_N(self, n, N):
        with pytest.raises(FamilyError, match="7n"):
            thm3_generate(n, N)

    def test_rejects_n0(self):
        assert admissible(0, 10) is not None
        with pytest.raises(FamilyError):
            thm3_generate(0, 10)

    def test_all_admissible_small(self):
        count = 0
        for n, N in all_admissible():
            inst = thm3_generate(n, N)
            a, b = inst.a.to_int(), inst.b.to_int()
            assert a == (1 << 2 * n) - (1 << n) + 1
            assert s(a) == n + 1 and s(b) == 2 * (3 * n + 2) and s(a * b) == 4
            assert a * b == ((1 << 9 * n) + 1) * ((1 << N) + 1)
            inst.to_record().validate()
            count += 1
        assert count > 200

    @pytest.mark.parametrize("n", range(1, 9))
    def test_factor_identity(self, n):
        a0, b0 = first_factor(n).to_int(), second_factor(n).to_int()
        assert a0 * b0 == (1 << 9 * n) + 1
        assert s(a0) == n + 1 and s(b0) == 3 * n + 2

    def test_record_fields(self):
        d = thm3_generate(2, 19).to_dict()
        assert d["strategy"] == Strategy.CONSTRUCTION.value and d["complete"] is False
        assert (d["s_a"], d["s_b"], d["s_ab"]) == (3, 16, 4)
        assert d["a_dec"] == "13"


class TestScan:
    @pytest.mark.parametrize("L, n, m", [(1, 1, 10), (4, 3, 22), (10, 9, 58)])
    def test_examples(self, L, n, m):
        got, stream = thm3_scan(L)
        assert got == n
        first = next(stream())
        assert first.l >= L and first.m == m >= L and first.N == 7 * n + 1

    def test_stream_skips_9n(self):
        Ns = [N for _, N in zip(range(5), admissible_N(1))]
        assert Ns == [8, 10, 11, 12, 13]

    def test_bad_L(self):
        with pytest.raises(FamilyError):
            thm3_scan(0)


class TestK3:
    @pytest.mark.parametrize("c, v", [(2, 5), (5, 33), (11, 2049)])
    def test_members(self, c, v):
        rec = k3_family(c)
        assert rec.pair() == (v, v) and s(v * v) == 3
        rec.validate()

    def test_c1_rejected(self):
        assert s(9) == 2
        with pytest.raises(FamilyError):
            k3_family(1)

    def test_c0_rejected(self):
        with pytest.raises(FamilyError):
            k3_family(0)
