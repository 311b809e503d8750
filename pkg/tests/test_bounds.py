from __future__ import annotations

import math

import numpy as np
import pytest

from quadrev.bounds import (
    AXIS_IDS,
    NO_EQUALITY,
    QUADRATIC,
    HolderExponents,
    TheoremId,
    additive_k,
    additive_r,
    band_bound_additive,
    band_bound_multiplicative,
    comb_closed_form,
    comb_identities,
    comb_loop,
    diameter_bound,
    diaz_metcalf,
    eta_bound,
    evaluate,
    fdiff_holder,
    fdiff_l2,
    fdiff_printed_erratum,
    forward_diff_bounds,
    league,
    normalized_rho_bounds,
    quadratic_gap_bound,
    ratio_bounds,
    refinement,
    rho_bound,
    tightest,
    unit_lower_bound,
)
from quadrev.core import VectorFamily, gram_summary
from quadrev.errors import PreconditionError
from quadrev.hypotheses import verify_band
from quadrev.sampling import clustered, collinear, generic, unit_clustered

T = TheoremId
R2 = 1.0 / math.sqrt(2.0)
ORTH = VectorFamily.of([[1.0, 0.0], [0.0, 1.0]])
CANON = VectorFamily.of([[-0.5], [0.5]])


class TestIds:
    def test_count_and_leagues(self):
        assert len(TheoremId) == 22
        assert len(QUADRATIC) == 11
        assert league(T.QUAD_2_2) == "quadratic"
        assert league(T.DM_1_2) == "linear"
        assert T.RATIO_SQRT_3_5 in NO_EQUALITY

    def test_holder_range(self):
        assert HolderExponents(4.0).q == pytest.approx(4.0 / 3.0)
        for bad in (1.0, 0.5, 65.0, float("inf")):
            with pytest.raises(PreconditionError):
                HolderExponents(bad)


class TestClassical:
    def test_axis_pair(self):
        a = np.array([1.0, 0.0])
        rep = diaz_metcalf(VectorFamily.of([a, a]), a)
        assert (rep.lhs, rep.rhs) == (2.0, 2.0)
        assert rep.at_equality and rep.equality_residual_max == 0.0

    def test_single_axis_additive(self):
        a = np.array([0.0, 1.0])
        rep = additive_k(VectorFamily.of([a]), a, [0.0])
        assert rep.slack == 0.0 and rep.at_equality

    def test_orthogonal_on_diagonal(self):
        a = np.array([R2, R2])
        rep = diaz_metcalf(ORTH, a)
        assert rep.lhs == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert rep.rhs == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert rep.equality_residual_max <= 1e-15

    def test_user_r_too_large(self):
        with pytest.raises(PreconditionError):
            diaz_metcalf(ORTH, [R2, R2], 0.9)

    def test_rho_bound_holds(self):
        rng = np.random.default_rng(42)
        from quadrev.sampling import axis
        for _ in range(100):
            fam, a = axis(rng, 4, 3, "complex")
            for rep in (rho_bound(fam, a), additive_k(fam, a), additive_r(fam, a), diaz_metcalf(fam, a)):
                assert rep.slack >= -1e-9 * abs(rep.rhs)

    def test_rho_needs_below_one(self):
        with pytest.raises(PreconditionError):
            rho_bound(ORTH, [1.0, 0.0], 1.0)


class TestQuadratic:
    def test_orthogonal_exact_gap(self):
        rep = quadratic_gap_bound(ORTH, [[0, 1], [0, 0]])
        assert (rep.lhs, rep.rhs) == (4.0, 4.0)
        assert rep.at_equality

    def test_canonical(self):
        rep = quadratic_gap_bound(CANON, [[0, 0.5], [0, 0]])
        assert (rep.lhs, rep.rhs) == (1.0, 1.0)

    def test_exact_gaps_is_identity(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            fam = generic(rng, int(rng.integers(2, 8)), int(rng.integers(1, 6)), "complex")
            rep = quadratic_gap_bound(fam)
            assert abs(rep.slack) <= 1e-10 * rep.lhs

    def test_gap_below_true_rejected(self):
        with pytest.raises(PreconditionError):
            quadratic_gap_bound(ORTH, [[0, 0.5], [0, 0]])

    def test_monotone_in_k(self):
        rng = np.random.default_rng(42)
        fam = generic(rng, 4, 3)
        g = gram_summary(fam).gaps()
        prev = -np.inf
        for extra in (0.0, 0.1, 1.0, 5.0):
            rhs = quadratic_gap_bound(fam, g + extra * np.triu(np.ones((4, 4)), 1)).rhs
            assert rhs >= prev
            prev = rhs

    def test_refinement_between(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            fam = generic(rng, 4, 2)
            g = gram_summary(fam).gaps()
            rep = refinement(fam, 0.5 * g)
            assert rep.slack >= -1e-9 * rep.rhs
            full = refinement(fam, g)
            assert abs(full.slack) <= 1e-10 * full.rhs


class TestDiameter:
    def test_canonical(self):
        rep = diameter_bound(CANON, 1.0)
        assert (rep.lhs, rep.rhs) == (1.0, 1.0)
        assert rep.at_equality

    def test_identical(self):
        v = [1.0, 2.0]
        rep = diameter_bound(VectorFamily.of([v, v]), 0.0)
        assert rep.lhs == pytest.approx(4 * 5.0) and rep.rhs == pytest.approx(20.0)

    def test_orthogonal(self):
        rep = diameter_bound(ORTH, math.sqrt(2.0))
        assert rep.lhs == 4.0 and rep.rhs == pytest.approx(4.0, rel=1e-15)

    def test_r_below_diameter(self):
        with pytest.raises(PreconditionError):
            diameter_bound(ORTH, 1.0)

    def test_monotone_in_r(self):
        r = [math.sqrt(2.0), 2.0, 3.0]
        rhs = [diameter_bound(ORTH, x).rhs for x in r]
        assert rhs == sorted(rhs)


class TestForwardDifference:
    def test_canonical_all_equal(self):
        for rep in forward_diff_bounds(CANON):
            assert (rep.lhs, rep.rhs) == (1.0, 1.0), rep.theorem_id
            assert rep.at_equality

    def test_constant_family(self):
        v = [1.0, -2.0]
        for rep in forward_diff_bounds(VectorFamily.of([v, v, v])):
            assert rep.lhs == pytest.approx(45.0, rel=1e-15)
            assert rep.rhs == pytest.approx(45.0, rel=1e-15)

    def test_erratum_example(self):
        chk = fdiff_printed_erratum(VectorFamily.of([[-2.0], [2.0]]))
        assert chk.lhs == 16.0 and chk.printed_rhs == 4.0 and chk.corrected_rhs == 16.0
        assert not chk.printed_holds and chk.corrected_holds

    def test_l2_matches_holder_p2(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            fam = generic(rng, int(rng.integers(2, 10)), 3)
            assert fdiff_l2(fam).rhs == fdiff_holder(fam, 2.0).rhs

    def test_holder_p_range(self):
        with pytest.raises(PreconditionError):
            fdiff_holder(CANON, 1.0)


class TestBandBounds:
    def test_m_equals_M(self):
        e = [1.0, 0.0]
        fam = VectorFamily.of([e, e, e])
        band = verify_band(fam, 1.0, 1.0)
        rep = band_bound_additive(fam, band)
        assert rep.lhs == rep.rhs == 9.0
        mult, coarse = band_bound_multiplicative(fam, band)
        assert mult.lhs == pytest.approx(9.0) and mult.rhs == pytest.approx(9.0)

    def test_additive_example(self):
        e = [1.0, 0.0]
        fam = VectorFamily.of([e, e])
        rep = band_bound_additive(fam, verify_band(fam, 1.0, 2.0))
        assert rep.slack == pytest.approx(1.0 / 6.0, rel=1e-14)

    def test_multiplicative_example(self):
        fam = VectorFamily.of([[2.0], [1.0]])
        mult, _ = band_bound_multiplicative(fam, verify_band(fam, 1.0, 2.0))
        lhs = 2 * math.sqrt(2) / 3 * 9 + (math.sqrt(2) - 1) ** 2 / 3 * 5
        assert mult.lhs == pytest.approx(lhs, rel=1e-14)
        assert mult.rhs == pytest.approx(9.0)
        assert mult.slack >= 0

    def test_weight_bookkeeping(self):
        from quadrev.bounds import band_weight, band_pair_weight
        sq = np.array([1.0, 2.0, 3.0])
        assert band_weight(sq) == band_pair_weight(sq) == 2.0 + 2 * 3.0

    def test_random_collinear_sound(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            fam = collinear(rng, 5, 3)
            t = np.linalg.norm(fam.vectors, axis=1)
            r = [t[i] / t[j] for i in range(5) for j in range(i + 1, 5)]
            band = verify_band(fam, min(r), max(r))
            for rep in [band_bound_additive(fam, band)] + band_bound_multiplicative(fam, band):
                assert rep.slack >= -1e-9 * abs(rep.rhs)


class TestRatio:
    def test_identical(self):
        e = [0.0, 1.0]
        main = ratio_bounds(VectorFamily.of([e, e, e]), 1.0)[0]
        assert main.lhs == main.rhs == 9.0

    def test_extremal_pair(self):
        fam = VectorFamily.of([[1.0, 0.0], [1.0, 1.0]])
        main = ratio_bounds(fam, math.sqrt(2.0))[0]
        assert main.lhs == pytest.approx(5 * math.sqrt(2.0), rel=1e-14)
        assert main.rhs == pytest.approx(5 * math.sqrt(2.0), rel=1e-14)
        assert main.at_equality

    def test_cbs_at_k1(self):
        e = [1.0]
        cbs = ratio_bounds(VectorFamily.of([e, e]), 1.0)[2]
        assert cbs.rhs == pytest.approx(2.0)

    def test_scale_behaviour(self):
        rng = np.random.default_rng(42)
        fam = clustered(rng, 4, 3)
        base = ratio_bounds(fam)[0]
        lam = 3.7
        scaled = ratio_bounds(fam.scaled(lam))[0]
        assert scaled.params["k"] == pytest.approx(base.params["k"], rel=1e-13)
        assert scaled.slack == pytest.approx(lam * lam * base.slack, rel=1e-9)

    def test_centered_form(self):
        rng = np.random.default_rng(42)
        rep = ratio_bounds(clustered(rng, 4, 2))[0]
        assert rep.extras["centered_lhs"] <= rep.extras["centered_rhs"] * (1 + 1e-12)


class TestNormalizedRho:
    def test_collinear_zero(self):
        main = normalized_rho_bounds(VectorFamily.of([[1.0, 0.0], [2.0, 0.0]]), 0.0)[0]
        assert main.lhs == 9.0 and main.rhs == 9.0

    def test_unit_identical(self):
        e = [1.0, 0.0]
        rep = unit_lower_bound(VectorFamily.of([e, e, e]), 0.0)
        assert rep.lhs == pytest.approx(3.0) and rep.rhs == pytest.approx(3.0)

    def test_coarse_implied_by_main(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            fam = unit_clustered(rng, 4, 3)
            reps = {r.theorem_id: r for r in normalized_rho_bounds(fam)}
            S = gram_summary(fam).norm_sum
            # main: c S^2 + (1 - c) Q <= T^2 implies c S^2 <= T^2
            assert reps[T.NRHO_COARSE_3_16].lhs ** 2 <= reps[T.NRHO_3_9].rhs * (1 + 1e-12)
            assert S > 0


class TestEta:
    def test_identical_limit(self):
        e = [1.0, 0.0]
        rep = eta_bound(VectorFamily.of([e, e]), 0.0)
        assert (rep.lhs, rep.rhs) == (2.0, 2.0)
        assert rep.at_equality

    def test_identical_06(self):
        e = [1.0, 0.0]
        rep = eta_bound(VectorFamily.of([e, e]), 0.6)
        assert rep.lhs == pytest.approx(1.6) and rep.slack == pytest.approx(0.4)

    def test_far_pair(self):
        rep = eta_bound(VectorFamily.of([[10.0, 0.0], [9.0, 0.0]]), 1.0)
        assert rep.lhs == pytest.approx(math.sqrt(99) + math.sqrt(80))
        assert rep.rhs == pytest.approx(19.0)
        assert rep.slack > 0

    def test_monotone_in_eta(self):
        fam = VectorFamily.of([[10.0, 0.0], [9.0, 0.0]])
        lhs = [eta_bound(fam, e).lhs for e in (1.0, 2.0, 5.0)]
        assert lhs == sorted(lhs, reverse=True)

    def test_eta_at_norm_rejected(self):
        with pytest.raises(PreconditionError):
            eta_bound(VectorFamily.of([[1.0, 0.0], [1.0, 0.0]]), 1.0)


class TestComb:
    def test_small(self):
        assert comb_identities(3) == (6, 4)
        assert comb_identities(2) == (1, 1)
        assert comb_loop(10) == comb_closed_form(10)

    def test_rejects_small_n(self):
        with pytest.raises(PreconditionError):
            comb_identities(1)


class TestEvaluateAndRanking:
    def test_every_id_dispatches(self):
        fam = VectorFamily.of([[1.0, 0.1], [1.1, 0.0], [0.9, 0.05]])
        for tid in TheoremId:
            if tid is T.REFINE_2_5:
                rep = evaluate(tid, fam, delta_ij=np.zeros((3, 3)))
            elif tid is T.UNIT_LOWER_3_15:
                with pytest.raises(PreconditionError):
                    evaluate(tid, fam)
                continue
            else:
                rep = evaluate(tid, fam)
            assert rep.theorem_id is tid
            assert rep.holds

    def test_orthogonal_ranking(self):
        rk = tightest(ORTH)
        assert rk.quadratic[0].slack == 0.0
        assert rk.report(T.QUAD_2_2).slack == 0.0
        for tid in (T.RATIO_3_2, T.BAND_ADD_2_19, T.BAND_MULT_3_20):
            assert rk.report(tid) is None and rk.reason(tid)

    def test_identical_vectors_many_equalities(self):
        e = [1.0, 0.0]
        rk = tightest(VectorFamily.of([e, e, e]))
        at_eq = [r for r in rk.quadratic + rk.linear if r.at_equality]
        assert len(at_eq) >= 8
        assert all(abs(r.slack) <= 1e-12 for r in at_eq)

    def test_single_vector_pairwise_vacuous(self):
        rk = tightest(VectorFamily.of([[1.0, 2.0, 2.0]]))
        for tid in TheoremId:
            if tid not in AXIS_IDS and tid is not T.ETA_3_24:
                assert rk.reason(tid) == "vacuous: needs at least two vectors"

    def test_user_param_violation_raises(self):
        with pytest.raises(PreconditionError):
            tightest(ORTH, params={"k_ij": [[0, 0.1], [0, 0]]})

    def test_sorted_by_slack(self):
        rng = np.random.default_rng(42)
        rk = tightest(clustered(rng, 4, 3))
        s = [r.slack for r in rk.quadratic]
        assert s == sorted(s)
