import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticebm.exactnum import INF, RadicalSum, Relation, compare, p_mean
from latticebm.functions import CubeSpec, PointMassFunction, make_admissible_h
from latticebm.sets import Box, Interval1D, LatticeBasis, SetExpr, count_lattice, translate
from latticebm.verifiers import (
    PreconditionError,
    Verdict,
    VerifyRequest,
    combination,
    hks_derived_instance,
    pull_back_data,
    riemann_limit_demo,
    sumset,
    sumset_size,
    union_volume,
    verify_bbl,
    verify_bm,
    verify_bm_pmean,
    verify_card_sum,
    verify_hks,
    verify_hks_sqrt,
    verify_lemma_ell,
    verify_trivial_card,
)
from oracles import brute_sumset

F = Fraction
chi = PointMassFunction.characteristic
lambdas = st.sampled_from([F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4)])


def equals(value, expected) -> bool:
    return compare(value, F(expected)).relation is Relation.EQUAL


@st.composite
def point_sets(draw, n, reach=3, max_size=6):
    pts = draw(st.lists(st.tuples(*[st.integers(-reach, reach)] * n), min_size=1, max_size=max_size))
    return SetExpr.from_points(pts, n)


@st.composite
def box_sets(draw, n):
    coords = st.fractions(min_value=-3, max_value=3, max_denominator=3)
    bs = []
    for _ in range(draw(st.integers(1, 2))):
        factors = []
        for _ in range(n):
            a, b = sorted((draw(coords), draw(coords)))
            if a == b:
                b = a + 1
            factors.append((a, b, draw(st.booleans()), draw(st.booleans())))
        bs.append(Box(tuple(Interval1D(*f) for f in factors)))
    return SetExpr.from_boxes(bs)


def pairs(n_max=2):
    return st.integers(1, n_max).flatmap(lambda n: st.tuples(
        st.one_of(point_sets(n), box_sets(n)), st.one_of(point_sets(n), box_sets(n))))


# -- geometric forms ---------------------------------------------------------

def test_main_theorem_equality_on_cubes():
    cert = verify_bm(VerifyRequest(SetExpr.cube(0, 3, 2), SetExpr.cube(0, 3, 2), F(1, 2)))
    assert cert.verdict is Verdict.HOLDS_EQUAL
    assert equals(cert.lhs, 4) and equals(cert.rhs, 4)
    assert cert.witness == {"G(M)": "16", "G(K)": "16", "G(L)": "16"}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lambda_third_fails_for_the_closed_unit_corrector(n):
    req = VerifyRequest(SetExpr.cube(0, 1, n), SetExpr.cube(-5, 6, n), F(1, 3), "custom",
                        corrector=CubeSpec.closed_unit())
    cert = verify_bm(req)
    assert cert.verdict is Verdict.VIOLATED and cert.witness is not None
    assert equals(cert.lhs, 5) and equals(cert.rhs, F(16, 3))
    # the combined set is [-5/3, 11/3]^n and holds 5^n integer points
    assert cert.witness["G(M)"] == str(5 ** n)


def test_naive_form_fails():
    m, eps = 3, F(1, 2)
    cert = verify_bm(VerifyRequest(SetExpr.interval(0, m - eps), SetExpr.interval(0, m + eps / 2), F(1, 2), "naive"))
    assert cert.verdict is Verdict.VIOLATED
    assert equals(cert.lhs, 3) and equals(cert.rhs, F(7, 2))


@pytest.mark.parametrize("lam", [F(1, 4), F(1, 3), F(1, 8)])
def test_smaller_interval_corrector_fails(lam):
    corrector = CubeSpec.interval(Interval1D(F(-1, 2), F(1), False, True))
    cert = verify_bm(VerifyRequest(SetExpr.interval(-1, 0), SetExpr.interval(-2, 0), lam, "custom",
                                   corrector=corrector))
    assert cert.verdict is Verdict.VIOLATED
    assert equals(cert.lhs, 2) and equals(cert.rhs, 2 + lam)


@pytest.mark.parametrize("m, n", [(1, 1), (3, 1), (3, 2), (1, 3), (5, 1)])
def test_half_sum_equality_for_odd_m(m, n):
    cert = verify_bm(VerifyRequest(SetExpr.cube(0, m, n), SetExpr.cube(-m, 0, n), F(1, 2), "half_sum"))
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, m + 1)


def test_half_sum_positivity_guard():
    K, L = SetExpr.interval(F(1, 3), F(2, 3)), SetExpr.interval(0, 2)
    with pytest.raises(PreconditionError, match=r"requires G_n\(K\)G_n\(L\)>0"):
        verify_bm(VerifyRequest(K, L, None, "half_sum"))
    cert = verify_bm(VerifyRequest(K, L, None, "half_sum", unguarded=True))
    assert cert.verdict.holds


def test_rational_dilation_guards():
    K = SetExpr.interval(0, 2)
    with pytest.raises(PreconditionError, match="m \\+ p <= q"):
        verify_bm(VerifyRequest(K, K, None, "rational_dilation", mpq=(2, 2, 3)))
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, K, None, "rational_dilation"))
    cert = verify_bm(VerifyRequest(K, K, None, "rational_dilation", mpq=(1, 2, 3)))
    # (1/3 + 2/3)[0,2] + [-2/3, 2/3] holds {0,1,2}
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, 3)


def test_request_errors():
    K = SetExpr.interval(0, 1)
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, K, F(1)))
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, SetExpr.cube(0, 1, 2), F(1, 2)))
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, SetExpr.empty(1), F(1, 2)))
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, K, F(1, 2), "custom"))
    with pytest.raises(PreconditionError):
        verify_bm(VerifyRequest(K, K, F(1, 2), "bogus"))


def test_pmean_examples():
    K = SetExpr.cube(0, 2, 2)
    cert = verify_bm_pmean(VerifyRequest(K, K, F(1, 2), "bm_pmean", p=INF))
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, 9)
    cert = verify_bm_pmean(VerifyRequest(SetExpr.interval(0, 1), SetExpr.interval(0, 3), F(1, 2), "bm_pmean", p=F(0)))
    # (1/2)[0,1] + (1/2)[0,3] + (-1,1) = (-1,3) holds 0, 1, 2
    assert cert.verdict is Verdict.HOLDS_STRICT and equals(cert.lhs, 3)
    assert cert.rhs == RadicalSum.root(8, 2)
    cert = verify_bm_pmean(VerifyRequest(SetExpr.interval(0, 1), SetExpr.interval(0, 5), F(1, 3), "bm_pmean",
                                         p=F(-1)))
    assert cert.verdict.holds and equals(cert.rhs, 2)
    with pytest.raises(PreconditionError):
        verify_bm_pmean(VerifyRequest(K, K, F(1, 2), "bm_pmean", p=F(-1)))


@settings(max_examples=150, deadline=None)
@given(pairs(3), lambdas)
def test_main_forms_never_fail(KL, lam):
    K, L = KL
    assert verify_bm(VerifyRequest(K, L, lam)).verdict.holds
    n = K.dim
    for p in (F(-1, n), F(0), F(1, 2), F(1), F(2), INF):
        assert verify_bm_pmean(VerifyRequest(K, L, lam, "bm_pmean", p=p)).verdict.holds


@settings(max_examples=100, deadline=None)
@given(pairs(2), st.sampled_from([(1, 1, 2), (1, 2, 3), (2, 1, 4), (1, 1, 3)]))
def test_rational_dilation_never_fails(KL, mpq):
    K, L = KL
    try:
        cert = verify_bm(VerifyRequest(K, L, None, "rational_dilation", mpq=mpq))
    except PreconditionError:
        assert count_lattice(K) * count_lattice(L) == 0
        return
    assert cert.verdict.holds


@settings(max_examples=100, deadline=None)
@given(pairs(2))
def test_half_sum_never_fails_when_guarded(KL):
    K, L = KL
    if count_lattice(K) * count_lattice(L) == 0:
        return
    assert verify_bm(VerifyRequest(K, L, None, "half_sum")).verdict.holds
    assert verify_hks_sqrt(K, L).verdict.holds


@settings(max_examples=100, deadline=None)
@given(pairs(2), lambdas)
def test_enlarging_the_corrector_never_lowers_the_count(KL, lam):
    K, L = KL
    small = verify_bm(VerifyRequest(K, L, lam, "custom", corrector=CubeSpec.closed_sym(F(1, 2))))
    big = verify_bm(VerifyRequest(K, L, lam, "custom", corrector=CubeSpec.open_sym(1)))
    assert compare(small.lhs, big.lhs).relation is not Relation.GREATER


@settings(max_examples=100, deadline=None)
@given(pairs(2), lambdas)
def test_max_form_matches_pmean_at_infinity(KL, lam):
    K, L = KL
    if count_lattice(K) * count_lattice(L) == 0:
        return
    a = verify_bm(VerifyRequest(K, L, lam))
    b = verify_bm_pmean(VerifyRequest(K, L, lam, "bm_pmean", p=INF))
    assert a.verdict is b.verdict
    n = K.dim
    assert compare(a.lhs ** n, b.lhs).relation is Relation.EQUAL


@settings(max_examples=100, deadline=None)
@given(pairs(2), lambdas, st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_certificates_are_translation_invariant(KL, lam, shift):
    K, L = KL
    z = shift[:K.dim]
    moved = VerifyRequest(translate(K, z), translate(L, z), lam)
    assert verify_bm(moved) == verify_bm(VerifyRequest(K, L, lam))
    same = VerifyRequest(translate(K, z), translate(L, z), lam, "bm_pmean", p=F(0))
    assert verify_bm_pmean(same) == verify_bm_pmean(VerifyRequest(K, L, lam, "bm_pmean", p=F(0)))


# -- the endpoint-count lemma ---------------------------------------------------

@pytest.mark.parametrize("m", [1, 2, 3])
def test_ell_remark(m):
    K = SetExpr.from_boxes([Box.closed([-2 * m], [-1]), Box.closed([1], [2 * m])])
    L = SetExpr.from_points([(0,)])
    M = SetExpr.from_boxes([Box.closed([-m], [F(-1, 2)]), Box.closed([F(1, 2)], [m])])
    c1 = verify_lemma_ell(K, L, M, F(1, 2))
    c2 = verify_lemma_ell(K, L, SetExpr.interval(-m, m), F(1, 2))
    assert equals(c1.lhs, 2 * m + 2) and equals(c2.lhs, 2 * m + 1)
    assert equals(c1.rhs, 2 * m + F(1, 2))
    assert c1.verdict is c2.verdict is Verdict.HOLDS_STRICT


def test_ell_trivial_equality_and_guards():
    K = SetExpr.interval(0, 5)
    assert verify_lemma_ell(K, K, K, F(2, 7)).verdict is Verdict.HOLDS_EQUAL
    with pytest.raises(PreconditionError, match="contained"):
        verify_lemma_ell(K, K, SetExpr.interval(0, 4), F(1, 2))
    with pytest.raises(PreconditionError, match="compact"):
        verify_lemma_ell(K, K, SetExpr.interval(0, 5, hi_open=True), F(1, 2))


# -- functional form -----------------------------------------------------------

def test_bbl_characteristic_example():
    c = chi(SetExpr.interval(0, 2))
    K = SetExpr.interval(0, 2)
    cert = verify_bbl(c, c, c, K, K, F(1, 2), INF)
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, 3) and equals(cert.rhs, 3)


def test_bbl_admissible_example():
    f = PointMassFunction.from_values({(0,): 1, (1,): 4})
    g = PointMassFunction.from_values({(0,): 2})
    K, L = SetExpr.interval(0, 1), SetExpr.from_points([(0,)])
    h = make_admissible_h(f, g, K, L, F(1, 2), F(0), 8)
    cert = verify_bbl(f, g, h, K, L, F(1, 2), F(0))
    assert cert.verdict is Verdict.HOLDS_STRICT
    assert cert.rhs == RadicalSum.root(10, 2)
    # M = (-1, 3/2); both 0 and 1 see the mass 725/256 at 1/2 through the open cube
    assert cert.lhs == RadicalSum.rational(F(725, 128))


def test_bbl_rejects_a_failed_hypothesis():
    f = PointMassFunction.from_values({(0,): 4})
    g = PointMassFunction.from_values({(0,): 1})
    P = SetExpr.from_points([(0,)])
    with pytest.raises(PreconditionError, match="x=\\(0\\), y=\\(0\\)"):
        verify_bbl(f, g, g, P, P, F(1, 2), F(0))


@settings(max_examples=60, deadline=None)
@given(pairs(2), lambdas, st.sampled_from(["neg", F(0), F(1), INF]))
def test_bbl_on_indicators_matches_pmean_form(KL, lam, p):
    K, L = KL
    n = K.dim
    p = F(-1, n) if p == "neg" else p
    M = combination(K, L, 1 - lam, lam, CubeSpec.none())
    bbl = verify_bbl(chi(K), chi(L), chi(M), K, L, lam, p)
    pm = verify_bm_pmean(VerifyRequest(K, L, lam, "bm_pmean", p=p))
    assert bbl.claim() == pm.claim()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2).flatmap(lambda n: st.tuples(point_sets(n, 4), point_sets(n, 4))), lambdas,
       st.sampled_from([F(0), F(1), INF]), st.data())
def test_bbl_on_a_scaled_lattice_matches_the_pulled_back_problem(KL, lam, p, data):
    K0, L0 = KL
    n = K0.dim
    basis = LatticeBasis.diagonal([2] * n)
    K = SetExpr.from_points([basis.apply(x) for x in K0.points], n)
    L = SetExpr.from_points([basis.apply(x) for x in L0.points], n)
    vals = st.fractions(min_value=F(1, 4), max_value=4, max_denominator=4)
    f = PointMassFunction(n, {x: data.draw(vals) for x in K.points})
    g = PointMassFunction(n, {y: data.draw(vals) for y in L.points})
    h = make_admissible_h(f, g, K, L, lam, p, 8)
    direct = verify_bbl(f, g, h, K, L, lam, p, basis)
    pulled = verify_bbl(*pull_back_data(f, g, h, K, L, basis), lam, p)
    assert direct == pulled
    assert direct.verdict.holds


def test_bbl_on_a_sheared_lattice_matches_the_pulled_back_problem():
    basis = LatticeBasis(((1, 1), (0, 1)))
    K = SetExpr.from_points([(0, 0), (1, 1), (3, 1)])
    L = SetExpr.from_points([(2, 1), (0, 0)])
    f = PointMassFunction(2, {(0, 0): 1, (1, 1): 3, (3, 1): 2})
    g = PointMassFunction(2, {(2, 1): 2, (0, 0): F(1, 2)})
    h = make_admissible_h(f, g, K, L, F(1, 3), F(1), 8)
    direct = verify_bbl(f, g, h, K, L, F(1, 3), F(1), basis)
    assert direct == verify_bbl(*pull_back_data(f, g, h, K, L, basis), F(1, 3), F(1))


# -- floor/ceiling products -------------------------------------------------------

def test_hks_derived_instance_example():
    K = SetExpr.interval(0, 2)
    f, g, h, k, window = hks_derived_instance(K, K)
    cert = verify_hks(f, g, h, k, F(1, 2), window)
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, 9)


@pytest.mark.parametrize("x, closed, opened", [(F(3, 2), 4, 5), (F(2), 6, 5), (F(7, 3), 6, 7), (F(1), 4, 3)])
def test_closed_and_open_corrector_counts_are_not_comparable(x, closed, opened):
    K = SetExpr.interval(-x, x)
    half = F(1, 2)
    assert count_lattice(combination(K, K, half, half, CubeSpec.closed_unit())) == closed
    assert count_lattice(combination(K, K, half, half, CubeSpec.open_sym(1))) == opened
    cert = verify_hks_sqrt(K, K)
    assert cert.verdict.holds and equals(cert.lhs, closed ** 2)


@settings(max_examples=80, deadline=None)
@given(pairs(2))
def test_hks_derived_instances_hold(KL):
    K, L = KL
    f, g, h, k, window = hks_derived_instance(K, L)
    assert verify_hks(f, g, h, k, F(1, 2), window).verdict.holds


def test_hks_rejects_bad_hypothesis():
    one = PointMassFunction.from_values({(0,): 1})
    zero = PointMassFunction(1)
    with pytest.raises(PreconditionError, match="fails at"):
        verify_hks(one, one, zero, one, F(1, 2), SetExpr.interval(-1, 1))


# -- cardinality bounds -----------------------------------------------------------

@pytest.mark.parametrize("pts, total", [([(0, 0), (1, 0), (2, 0), (1, 1)], 18),
                                        ([(0, 0), (0, 1), (1, 1), (4, 1)], 24)])
def test_planar_point_sets(pts, total):
    cert = verify_card_sum(SetExpr.from_points(pts), SetExpr.lattice_cube(0, 1, 2))
    assert cert.verdict is Verdict.HOLDS_STRICT
    assert equals(cert.lhs * cert.lhs, total) and equals(cert.rhs * cert.rhs, 16)


@pytest.mark.parametrize("m1, m2, n", [(0, 0, 1), (2, 2, 2), (1, 3, 2), (1, 2, 3)])
def test_card_sum_equality_on_lattice_cubes(m1, m2, n):
    cert = verify_card_sum(SetExpr.lattice_cube(0, m1, n), SetExpr.lattice_cube(0, m2, n))
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, m1 + m2 + 2)


def test_trivial_card_equality_and_errors():
    cert = verify_trivial_card(SetExpr.from_points([(0,)]), SetExpr.lattice_cube(0, 4, 1))
    assert cert.verdict is Verdict.HOLDS_EQUAL and equals(cert.lhs, 5)
    with pytest.raises(PreconditionError):
        verify_card_sum(SetExpr.from_points([(F(1, 2),)]), SetExpr.from_points([(0,)]))
    with pytest.raises(PreconditionError):
        verify_card_sum(SetExpr.interval(0, 1), SetExpr.from_points([(0,)]))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(point_sets(n, 4, 8), point_sets(n, 4, 8))))
def test_bitmask_sumset_matches_pairwise_sums(AB):
    A, B = ({tuple(int(c) for c in p) for p in S.points} for S in AB)
    n = len(next(iter(A)))
    assert sumset_size(A, B) == len(brute_sumset(A, B)) == len(sumset(A, B))
    cube = set(itertools.product((0, 1), repeat=n))
    assert sumset_size(A, B, unit_cube=True) == len(brute_sumset(brute_sumset(A, B), cube))
    assert verify_card_sum(*AB).verdict.holds
    assert verify_trivial_card(*AB).verdict.holds


# -- lower sums ----------------------------------------------------------------

def test_riemann_third():
    seq = dict(riemann_limit_demo(SetExpr.interval(0, F(1, 3)), SetExpr.interval(-1, 1), 12))
    assert seq[10] == F(341, 1024)
    assert abs(seq[10] - F(1, 3)) <= F(1, 1024)
    assert all(seq[k] <= seq[k + 1] for k in range(12))


def test_riemann_aligned_and_degenerate():
    seq = riemann_limit_demo(SetExpr.interval(0, 1), SetExpr.interval(-1, 1), 6)
    assert [v for _, v in seq] == [1] * 7
    assert all(v == 0 for _, v in riemann_limit_demo(SetExpr.from_points([(0,)]), SetExpr.interval(-1, 1), 5))


def test_riemann_in_two_dimensions_approaches_the_volume():
    S = SetExpr.from_boxes([Box.closed([0, 0], [F(1, 3), F(2, 3)]), Box.closed([F(-1, 2), 0], [0, F(1, 5)])])
    window = SetExpr.cube(-1, 1, 2)
    vol = union_volume(S)
    assert vol == F(2, 9) + F(1, 10)
    seq = riemann_limit_demo(S, window, 6)
    values = [v for _, v in seq]
    assert all(a <= b <= vol for a, b in zip(values, values[1:]))
    assert vol - values[-1] <= 4 * F(1, 2 ** 6)
