import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nestedcss import enumerators as en
from nestedcss.construct import FamilyInstance, build_instance
from nestedcss.ensemble import BalancedTriple, DegreeProfile, SamplerConfig, row_counts
from nestedcss.gf2 import BitMatrix


def test_outer_examples():
    assert en.outer_enum(4, 2, 4, 1) == Fraction(12, 7)
    assert en.outer_enum(4, 2, 4, 2) == Fraction(114, 35)
    assert en.outer_enum(8, 3, 6, 0) == 1
    assert en.outer_enum(8, 3, 4, 8) == 1


@pytest.mark.parametrize("n,j,k,s", [(4, 2, 4, 1), (4, 2, 4, 2), (4, 2, 4, 3), (6, 2, 3, 2), (3, 2, 2, 1),
                                     (6, 1, 3, 2), (4, 3, 4, 2)])
def test_outer_matches_socket_oracle(n, j, k, s):
    assert en.outer_enum(n, j, k, s) == en.socket_count_outer(n, j, k, s)


@given(st.sampled_from([2, 4, 6]), st.integers(1, 5), st.integers(1, 12))
def test_outer_complement_symmetry(k, j, mult):
    n = k * mult
    for s in range(n + 1):
        assert en.outer_enum(n, j, k, s) == en.outer_enum(n, j, k, n - s)


def test_outer_domain_errors():
    with pytest.raises(en.DomainError):
        en.outer_enum(5, 3, 4, 1)
    with pytest.raises(en.DomainError):
        en.outer_enum(4, 2, 4, 5)


@pytest.mark.parametrize("n,k", [(1, 2), (5, 2), (8, 4), (12, 4), (10, 6), (17, 6), (40, 2)])
def test_transition_rows_sum_to_one(n, k):
    for s in range(n + 1):
        assert sum(en.transition_kernel(n, k, s, l) for l in range(n + 1)) == 1


@pytest.mark.slow
def test_transition_rows_sum_to_one_n40():
    for k in (4, 6):
        for s in range(0, 41, 3):
            assert sum(en.transition_kernel(40, k, s, l) for l in range(41)) == 1


def test_transition_trivial_entries():
    for n, k in [(6, 2), (7, 4)]:
        assert en.transition_kernel(n, k, n, 0) == 1
        assert en.transition_kernel(n, k, 0, 0) == 1
        assert all(en.transition_kernel(n, k, 0, l) == 0 for l in range(1, n + 1))
    assert en.in_lemma_hypothesis(4) and not en.in_lemma_hypothesis(3)


@pytest.mark.parametrize("n,k", [(3, 2), (2, 3), (4, 2)])
def test_transition_matches_permutations(n, k):
    for s in range(n + 1):
        law = en.exhaustive_transition(n, k, s)
        assert law == [en.transition_kernel(n, k, s, l) for l in range(n + 1)]


def test_transition_support_condition():
    n, k = 6, 2
    for s in range(n + 1):
        for l in range(n + 1):
            if not (l <= k * s <= n * k - l):
                assert en.transition_kernel(n, k, s, l) == 0


def test_ha_bound_zero_weight():
    assert en.ha_mean_bound(8, 2, 4, 0) >= 1


@pytest.mark.parametrize("dims", [(2, 2, 4, 4), (2, 4, 4, 2), (3, 1, 4, 4), (2, 0, 4, 6), (1, 2, 3, 3)])
def test_fast_coeff_matches_poly_power(dims):
    jz, jd, k, n = dims
    rng = np.random.default_rng(sum(dims))
    for _ in range(6):
        A = int(rng.integers(0, jz * n + 1))
        Bv = int(rng.integers(0, jd * n + 1)) if jd else 0
        C = int(rng.integers(0, k * n + 1))
        for odd in (False, True):
            fast = en.gpow_coeff(jz, jd, k, n, A, Bv, C, odd)
            assert fast == en.gpow_coeff_poly(jz, jd, k, n, A, Bv, C, odd)


def test_stacked_trivial_and_fold():
    t = BalancedTriple(2, 4, 4)
    assert en.stacked_mean(t, 4, 0, 0, 0) == 1
    p = t.profile(8)
    m_Z, m_D, _ = row_counts(p)
    assert en.stacked_mean(p, None, m_Z, 0, 0) == 1
    for t1 in range(m_Z + 1):
        for td in range(m_D + 1):
            for w in (0, 1, 3):
                v = en.stacked_mean(p, None, t1, td, w)
                assert v == en.stacked_mean(p, None, m_Z - t1, td, w)
                assert v == en.stacked_mean(p, None, t1, m_D - td, w)


def test_stacked_domain_errors():
    t = BalancedTriple(2, 4, 4)
    with pytest.raises(en.DomainError):
        en.stacked_mean(t, 4, 5, 0, 0)
    with pytest.raises(en.DomainError):
        en.stacked_mean(t, 4, 0, 0, 0, syndrome="odd")
    with pytest.raises(en.DomainError):
        en.stacked_mean(t, None, 0, 0, 0)


def test_boundary_profile_drops_delta():
    t = BalancedTriple(2, 2, 4)
    assert en.stacked_mean(t, 4, 1, 0, 1) == en.stacked_mean(t.profile(4), None, 1, 0, 1)
    assert en.n_dep_mean(t, 4, 0, 0) == 1


def _g(jz, jd, k, s, t, r):
    return ((1 + s) ** jz * (1 + t) ** jd * (1 + r) ** k + (1 - s) ** jz * (1 - t) ** jd * (1 - r) ** k) / 2


@settings(max_examples=40)
@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 8),
       st.fractions(Fraction(1, 50), Fraction(1, 2)), st.fractions(Fraction(1, 50), Fraction(1, 2)),
       st.fractions(Fraction(1, 50), Fraction(1, 2)))
def test_trial_point_domination(t1, td, w, a, b, om):
    # [u^A v^B r^C] g^n <= g(s,t,r)^n / (s^A t^B r^C), exact rationals
    jz, jd, k, n = 2, 2, 4, 8
    A, Bv, C = k * t1, k * td, k * w
    s, t, r = a / (1 - a), b / (1 - b), om / (1 - om)
    coef = en.gpow_coeff(jz, jd, k, n, A, Bv, C)
    assert coef <= _g(jz, jd, k, s, t, r) ** n / (s**A * t**Bv * r**C)


def test_support_probability_is_probability():
    t = BalancedTriple(2, 4, 4)
    for q in [(1, 0, 1), (1, 1, 2), (2, 1, 0), (0, 2, 3)]:
        p = en.support_probability(t, 4, *q)
        assert 0 <= p <= 1


@pytest.mark.parametrize("q", [(1, 0, 1), (1, 1, 2), (2, 1, 1), (0, 1, 2), (2, 2, 2)])
def test_mc_oracle_agrees(q):
    t = BalancedTriple(2, 4, 4)
    exact = float(en.support_probability(t, 4, *q))
    est, se = en.mc_support_prob(t, 4, *q, samples=60000, seed=11)
    assert abs(est - exact) <= 4 * se + 1e-12


def test_mc_oracle_trivial_and_domain():
    t = BalancedTriple(2, 4, 4)
    assert en.mc_support_prob(t, 4, 0, 0, 0, samples=1000, seed=0) == (1.0, 0.0)
    with pytest.raises(en.DomainError):
        en.mc_support_prob(t, 4, 1, 0, 1, samples=10, seed=0)


def test_mc_oracle_ones_syndrome():
    t = BalancedTriple(1, 3, 4)
    q = (1, 1, 1)
    exact = float(en.support_probability(t, 4, *q, syndrome="ones"))
    est, se = en.mc_support_prob(t, 4, *q, samples=60000, seed=3, syndrome="ones")
    assert abs(est - exact) <= 4 * se + 1e-12


def test_brute_weight_enum_tables():
    inst = build_instance(BalancedTriple(2, 4, 6).profile(12), SamplerConfig(seed=1))
    tb = en.brute_weight_enum(inst, "KerB")
    assert tb[12] >= 1 and tb[0] == 1
    p = DegreeProfile(1, 6, 0, 0, 2, 6)
    z = FamilyInstance(p, BitMatrix.zeros(1, 6), BitMatrix.zeros(0, 6), BitMatrix.identity(6))
    full = en.brute_weight_enum(z, "KerAZ")
    assert list(full) == [math.comb(6, w) for w in range(7)]
    with pytest.raises(en.DomainError):
        en.brute_weight_enum(inst, "nope")


def test_binom_and_intpoly():
    assert en.binom(10, 3) == 120 and en.binom(3, 5) == 0
    f = en.f_plus(4)
    assert f.coeffs and f(Fraction(1)) == 8
    g = en.column_poly(2, 2, 4)
    assert g(0, 0, 0) == 1
