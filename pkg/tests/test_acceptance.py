"""Exit criteria: published table cells and the exact property suite.

Each test is one criterion; a PASS/FAIL line per criterion is printed in the
"acceptance criteria" section of the pytest summary.  Runtime budgets are
asserted alongside the values.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from bernden.arith import PrimeSet, PrimeTable, carmichael_lambda, factorize, is_prime
from bernden.denom_sieve import (
    ClassKey,
    SieveConfig,
    class_members,
    iter_blocks,
    residue_statistics,
    s_class_counts,
    u_set_excluding,
)
from bernden.setstats import (
    bernoulli_denominators,
    count_D,
    count_dp_not_in_D,
    count_F,
    d_plus_one_split,
    germain_witnesses,
    is_bernoulli_denominator,
    is_first_subscript,
    partition_counts,
    witness_in_D,
    witness_notin_D,
)
from bernden.staudt_clausen import bernoulli_frac, bernoulli_oracle, d_p, denominator, t_class


@contextmanager
def budget(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.1f}s, budget {seconds}s"


# (first, second, T-set, count <= 1e5, count <= 1e7) from the two class tables
CLASS_TABLE = [
    (2, 14, (2, 3), 7992, 758582),
    (4, 8, (2, 3, 5), 3423, 320500),
    (6, 114, (2, 3, 7), 1371, 125712),
    (10, 50, (2, 3, 11), 1080, 99675),
    (12, 24, (2, 3, 5, 7, 13), 495, 49498),
    (16, 32, (2, 3, 5, 17), 713, 67742),
    (18, 54, (2, 3, 7, 19), 397, 38502),
    (20, 340, (2, 3, 5, 11), 289, 27745),
    (22, 154, (2, 3, 23), 566, 52508),
    (28, 56, (2, 3, 5, 29), 309, 29692),
    (30, 1770, (2, 3, 7, 11, 31), 138, 13615),
    (36, 3924, (2, 3, 5, 7, 13, 19, 37), 72, 7846),
    (40, 6680, (2, 3, 5, 11, 41), 92, 10044),
    (42, 294, (2, 3, 7, 43), 124, 12645),
    (44, 484, (2, 3, 5, 23), 160, 15325),
    (46, 322, (2, 3, 47), 261, 24295),
    (48, 10128, (2, 3, 5, 7, 13, 17), 26, 4572),
    (52, 104, (2, 3, 5, 53), 164, 16638),
    (58, 406, (2, 3, 59), 235, 20607),
    (60, 13620, (2, 3, 5, 7, 11, 13, 31, 61), 21, 2917),
    (66, 3894, (2, 3, 7, 23, 67), 77, 7202),
    (70, 350, (2, 3, 11, 71), 83, 8815),
    (72, 12024, (2, 3, 5, 7, 13, 19, 37, 73), 12, 2137),
    (78, 1014, (2, 3, 7, 79), 71, 6771),
    (80, 160, (2, 3, 5, 11, 17, 41), 39, 5960),
    (82, 574, (2, 3, 83), 150, 13715),
    (84, 168, (2, 3, 5, 7, 13, 29, 43), 16, 2924),
    (88, 968, (2, 3, 5, 23, 89), 53, 5593),
    (90, 14670, (2, 3, 7, 11, 19, 31), 17, 2629),
    (92, 184, (2, 3, 5, 47), 116, 10822),
    (96, 20256, (2, 3, 5, 7, 13, 17, 97), 7, 1645),
    (100, 1700, (2, 3, 5, 11, 101), 34, 4115),
    (102, 1734, (2, 3, 7, 103), 50, 5041),
    (106, 1378, (2, 3, 107), 120, 10794),
    (108, 11772, (2, 3, 5, 7, 13, 19, 37, 109), 14, 1593),
    (110, 550, (2, 3, 11, 23), 72, 6481),
    (112, 224, (2, 3, 5, 17, 29, 113), 41, 4135),
]

# residue table, 2k = 2 and 2k = 4 blocks: modulus -> shown classes 0..7
RESIDUES = {
    2: (77696, {
        8: [0, 0, 38849, 0, 0, 0, 38847, 0],
        3: [0, 31612, 46084],
        5: [0, 18636, 18565, 19097, 21398],
        7: [9179, 11168, 11175, 11080, 11309, 11125, 12660],
        11: [0, 7661, 7671, 7682, 7730, 7726, 7649, 7627],
        13: [5116, 5959, 5980, 5975, 5970, 5972, 6079, 6035],
    }),
    4: (33001, {
        8: [9490, 0, 0, 0, 23511, 0, 0, 0],
        3: [0, 15877, 17124],
        5: [0, 7868, 7244, 9186, 8703],
        7: [0, 5186, 5176, 5328, 5274, 6089, 5948],
        11: [0, 3160, 3198, 3206, 3179, 3191, 3200, 3338],
        13: [0, 2693, 2633, 2679, 2637, 2695, 2682, 2669],
    }),
}


def paper_round(x, digits):
    return f"{x:.{digits}f}".lstrip("0")


def test_ac01_oracle_equivalence():
    with budget(1):
        for n in range(2, 101, 2):
            b = bernoulli_oracle(n)
            assert b.denominator == denominator(n).value, n
            assert b - math.floor(b) == bernoulli_frac(n), n


def test_ac02_class_tables_at_1e5():
    with budget(10):
        reports = s_class_counts(10**5, 112)
    assert len(reports) == 37
    got = [(r.first, r.second, r.t_set.primes, r.count_at(10**5)) for r in reports]
    assert got == [row[:4] for row in CLASS_TABLE]


@pytest.mark.slow
def test_ac03_class_table_at_1e7():
    with budget(300):
        reports = s_class_counts(10**7, 10)
    counts = {r.first: r.count_at(10**7) for r in reports}
    assert counts == {2: 758582, 4: 320500, 6: 125712, 10: 99675}
    # finite-x observation only, not a density claim
    assert Fraction(counts[4], counts[2]) == Fraction(320500, 758582)


def test_ac04_residues_at_1e6():
    with budget(60):
        for first, (total, rows) in RESIDUES.items():
            stats = residue_statistics(first, 10**6, list(rows))
            for m, shown in rows.items():
                assert sum(stats[m]) == total
                assert stats[m][: len(shown)] == shown, (first, m)


def test_ac05_first_subscript_counts():
    with budget(60):
        r5, r6 = count_F([10**5, 10**6])
    assert (r5.count, r6.count) == (24662, 235072)
    assert (paper_round(r5.ratio, 3), paper_round(r6.ratio, 3)) == (".476", ".478")


def test_ac06_denominator_counts():
    with budget(60):
        r5, r6 = count_D(10**5), count_D(10**6)
    assert (r5.count, r6.count) == (513, 3649)
    assert (paper_round(r5.ratio, 3), paper_round(r6.ratio, 3)) == (".053", ".046")


def test_ac07_prime_partition_at_1e5():
    with budget(30):
        got = partition_counts(10**5, [6, 30, 42, 66])
    assert [got[d][0] for d in (6, 30, 42, 66)] == [1135, 600, 480, 275]
    assert [paper_round(got[d][1], 4) for d in (6, 30, 42, 66)] == [".1183", ".0626", ".0500", ".0287"]


def test_ac08_dp_not_in_D():
    with budget(60):
        r5, r6 = count_dp_not_in_D(10**5), count_dp_not_in_D(10**6)
    assert (r5.count, r6.count) == (4183, 34647)
    assert (paper_round(r5.ratio, 3), paper_round(r6.ratio, 3)) == (".436", ".441")


def test_ac09_d_plus_one_split():
    with budget(30):
        got = [d_plus_one_split(x) for x in (10**3, 10**4, 10**5)]
    assert [(s.composite, s.prime) for s in got] == [(4, 10), (56, 28), (361, 152)]


# criterion 10: property suite, < 2 min across the ac10 tests

@pytest.fixture(scope="module")
def table():
    return PrimeTable(10**6 + 1)


def test_ac10a_bijection_D_to_F(table):
    with budget(20):
        ds = bernoulli_denominators(10**5, table)
        lams = [carmichael_lambda(d) for d in ds]
        assert len(set(lams)) == len(ds)
        for d, lam in zip(ds, lams):
            assert is_first_subscript(lam)
            assert denominator(lam, table).value == d


def test_ac10b_lambda_image_in_F(table):
    with budget(20):
        for m in range(3, 10**4 + 1):
            if factorize(m).is_squarefree():
                assert is_first_subscript(carmichael_lambda(m)), m


def test_ac10c_lemma_lambda_dp(table):
    with budget(20):
        for p in table.primes.tolist():
            if p > 10**4:
                break
            if p == 2:
                continue
            dp = d_p(p, table).value
            lam = carmichael_lambda(dp)
            assert (p - 1) % lam == 0
            if p > 3:
                assert (lam < p - 1) == is_bernoulli_denominator(dp, table), p


def test_ac10d_injection_divide_by_r(table):
    with budget(30):
        cache = {}

        def U(n, r):
            if (n, r) not in cache:
                cache[n, r] = u_set_excluding(n, r, 10**5, table)
            return cache[n, r]

        for n, r in [(2, 2), (2, 3), (4, 2), (6, 2), (6, 3)]:
            src = U(n * r, r)
            target = set(U(n, r))
            images = [m // r for m in src]
            assert all(m % r == 0 for m in src)
            assert all(i in target for i in images), (n, r)
            assert len(set(images)) == len(images)
            assert len(src) <= sum(1 for t in target if t <= 10**5 // r)


def test_ac10e_denominator_shape(table):
    with budget(30):
        D = {}
        for n in range(2, 10**5 + 1, 2):
            s = t_class(n, table)
            v = s.product()
            assert v % 6 == 0
            assert len(set(s)) == len(s)
            if n <= 10**4:
                D[n] = v
        for b in D:
            for a in table.divisors(b):
                if a % 2 == 0:
                    assert D[b] % D[a] == 0, (a, b)


def test_ac10f_germain_divisibility():
    with budget(10):
        for p in germain_witnesses(10**4):
            assert is_prime(2 * p + 1)
            assert denominator(2 * p).value % (2 * p + 1) == 0


def test_ac10g_sieve_matches_direct(table):
    with budget(20):
        for block in iter_blocks(SieveConfig(10**5, segment_size=1 << 14)):
            for j, n in enumerate(block.n.tolist()):
                s = t_class(n, table)
                assert block.key(j) == ClassKey.from_primes(s), n
                assert int(block.lam[j]) == math.lcm(*(p - 1 for p in s)), n


def test_ac10h_digest_collision_audit(table):
    with budget(60):
        (block,) = list(iter_blocks(SieveConfig(10**6)))
        keys = np.stack([block.hi, block.lo], axis=1)
        uniq_keys, first_idx = np.unique(keys, axis=0, return_index=True)
        uniq_lams = np.unique(block.lam)
        pairs = np.unique(np.column_stack([keys.view(np.int64), block.lam]), axis=0)
        # digest <-> lambda(D_n) is a bijection over n <= 1e6
        assert len(uniq_keys) == len(uniq_lams) == len(pairs)
        # each class digest equals the digest of the directly computed T-set
        for j in first_idx.tolist():
            lam = int(block.lam[j])
            assert block.key(j) == ClassKey.from_primes(t_class(lam, table)), lam


def test_ac10i_partition_of_even_numbers(table):
    with budget(30):
        firsts = [f for f in range(2, 10**4 + 1, 2) if is_first_subscript(f)]
        by_key = {ClassKey.from_primes(t_class(f, table)): f for f in firsts}
        # distinct T-sets, so the classes S_f are pairwise disjoint
        assert len(by_key) == len(firsts)
        hits = dict.fromkeys(firsts, 0)
        for n in range(2, 10**5 + 1, 2):
            s = t_class(n, table)
            f = math.lcm(*(p - 1 for p in s))
            assert t_class(f, table) == s, n
            if f <= 10**4:
                assert by_key[ClassKey.from_primes(s)] == f
                hits[f] += 1
        assert all(hits.values())
        assert hits[2] == 7992


def test_ac11_witness_families_to_1e5(table):
    with budget(30):
        for p in witness_notin_D(10**5):
            dp = d_p(p, table).value
            assert carmichael_lambda(dp) == p - 1
            assert not is_bernoulli_denominator(dp, table), p
        for p in witness_in_D(10**5):
            assert is_bernoulli_denominator(p - 1, table), p
            r = ((p - 1) // 6 - 1) // 2
            assert carmichael_lambda(p - 1) == 2 * r
            assert denominator(2 * r, table).value == p - 1
