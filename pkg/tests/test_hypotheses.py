from __future__ import annotations

import math

import numpy as np
import pytest

from quadrev.core import VectorFamily, gram_summary, norm, pair_indices
from quadrev.errors import PreconditionError
from quadrev.hypotheses import (
    band_rows,
    detect_axis,
    detect_eta,
    detect_normalized_rho,
    detect_pairwise,
    detect_ratio,
    search_band,
    search_band_rows,
    verify_band,
)
from quadrev.sampling import clustered, collinear, unit_clustered

R2 = 1.0 / math.sqrt(2.0)


class TestDetectAxis:
    def test_orthogonal_pair_on_diagonal(self):
        fam = VectorFamily.of([[1.0, 0.0], [0.0, 1.0]])
        p = detect_axis(fam, [R2, R2])
        assert p.r == pytest.approx(R2, rel=1e-15)
        np.testing.assert_allclose(p.k_list, 1.0 - R2, rtol=1e-14)

    def test_family_equals_axis(self):
        p = detect_axis(VectorFamily.of([[0.6, 0.8]]), [0.6, 0.8])
        assert p.r == pytest.approx(1.0, rel=1e-15)
        assert p.rho == 0.0
        assert p.k_list[0] == 0.0

    def test_scaled_axis(self):
        p = detect_axis(VectorFamily.of([[2.0, 0.0]]), [1.0, 0.0])
        assert p.r == 1.0 and p.k_list[0] == 0.0 and p.r_list[0] == 1.0

    def test_non_unit_axis(self):
        with pytest.raises(PreconditionError):
            detect_axis(VectorFamily.of([[1.0, 0.0]]), [2.0, 0.0])

    def test_zero_vector(self):
        fam = VectorFamily.of([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(PreconditionError):
            detect_axis(fam, [1.0, 0.0])
        assert detect_axis(fam, [1.0, 0.0], require_r=False).r is None

    def test_round_trip_and_tightness(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            fam = clustered(rng, 4, 3, "complex")
            a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            a = a / np.linalg.norm(a)
            p = detect_axis(fam, a)
            X = fam.vectors
            ratios = np.array([np.vdot(a, x).real / np.linalg.norm(x) for x in X])
            assert np.min(ratios) >= p.r_raw - 1e-12
            assert np.min(ratios) <= p.r_raw + 1e-12
            dist = np.array([np.linalg.norm(x - a) for x in X])
            assert np.max(dist) == pytest.approx(p.rho, rel=1e-12)


class TestDetectPairwise:
    def test_canonical_pair(self):
        p = detect_pairwise(VectorFamily.of([[-0.5], [0.5]]))
        assert p.diameter == 1.0
        assert p.gaps[0, 1] == 0.5
        assert p.fdiff_norms[0] == 1.0

    def test_identical(self):
        p = detect_pairwise(VectorFamily.of([[1.0, 2.0], [1.0, 2.0]]))
        assert p.diameter == 0.0
        assert p.gaps[0, 1] == pytest.approx(0.0, abs=1e-14)

    def test_orthogonal(self):
        p = detect_pairwise(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]]))
        assert p.diameter == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert p.gaps[0, 1] == 1.0

    def test_needs_two(self):
        with pytest.raises(PreconditionError):
            detect_pairwise(VectorFamily.of([[1.0]]))

    def test_delta_above_gap_rejected(self):
        fam = VectorFamily.of([[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError, match=r"pair \(1, 2\)"):
            detect_pairwise(fam, [[0, 1.5], [0, 0]])
        p = detect_pairwise(fam, [[0, 0.5], [0, 0]])
        assert p.refinements[0, 1] == 0.5


class TestBand:
    def test_collinear_feasible(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            t = rng.uniform(0.2, 5.0, 4)
            e = rng.standard_normal(3)
            fam = VectorFamily(t[:, None] * e[None, :])
            r = [t[i] / t[j] for i, j in pair_indices(4)]
            band = verify_band(fam, min(r), max(r))
            assert band.feasible
            expected = [(max(r) * t[j] - t[i]) * (t[i] - min(r) * t[j]) * (e @ e)
                        for i, j in pair_indices(4)]
            np.testing.assert_allclose(band.margins, expected, atol=1e-9 * (e @ e) * 25)

    def test_boundary(self):
        band = verify_band(VectorFamily.of([[1.0, 0.0], [1.0, 0.0]]), 1.0, 1.0)
        assert band.feasible
        assert band.margins[0] == 0.0

    def test_infeasible(self):
        band = verify_band(VectorFamily.of([[3.0, 0.0], [1.0, 0.0]]), 0.5, 2.0)
        assert not band.feasible
        assert band.margins[0] == pytest.approx(-2.5)

    def test_order_sensitive(self):
        a = verify_band(VectorFamily.of([[2.0], [1.0]]), 1.0, 2.0)
        b = verify_band(VectorFamily.of([[1.0], [2.0]]), 1.0, 2.0)
        assert a.feasible and not b.feasible

    def test_bad_params(self):
        fam = VectorFamily.of([[1.0], [1.0]])
        with pytest.raises(PreconditionError):
            verify_band(fam, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            verify_band(fam, 2.0, 1.0)

    def test_forms_agree(self):
        rng = np.random.default_rng(42)
        agreed = 0
        for _ in range(2000):
            fam = clustered(rng, 3, 2, "complex", spread=0.5)
            m = rng.uniform(0.2, 1.0)
            M = m + rng.uniform(0.0, 3.0)
            band = verify_band(fam, m, M)
            for inner_m, ball_m in zip(band.margins, band.ball_margins):
                if abs(ball_m) > 1e-9:
                    assert (inner_m >= 0) == (ball_m >= 0)
                    agreed += 1
        assert agreed > 5000


class TestSearchBand:
    def test_identical_vectors(self):
        res = search_band(VectorFamily.of([[1.0, 1.0]] * 3))
        assert res.m == pytest.approx(res.M)
        assert res.coefficient == pytest.approx(1.0)

    def test_orthogonal_none(self):
        assert search_band(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]])) is None

    def test_close_to_finer_grid(self):
        fam = VectorFamily.of([[1.0, 0.0], [2.0, 0.0]])
        rows = band_rows(gram_summary(fam))
        res = search_band_rows(rows)
        fine = search_band_rows(rows, grid=320)
        assert verify_band(fam, res.m, res.M).feasible
        assert res.coefficient <= 1.05 * fine.coefficient

    def test_result_feasible(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            fam = clustered(rng, 4, 2)
            res = search_band(fam)
            if res is not None:
                assert verify_band(fam, res.m, res.M).feasible


class TestRatio:
    def test_identical_unit(self):
        assert detect_ratio(VectorFamily.of([[1.0, 0.0]] * 3)).k == 1.0

    def test_sqrt2(self):
        k = detect_ratio(VectorFamily.of([[1.0, 0.0], [1.0, 1.0]])).k
        assert k == pytest.approx(math.sqrt(2.0), rel=1e-15)

    def test_orthogonal_rejected(self):
        with pytest.raises(PreconditionError):
            detect_ratio(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]]))

    def test_k_one_on_collinear(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            assert detect_ratio(collinear(rng, 4, 3)).k == pytest.approx(1.0, abs=1e-12)

    def test_round_trip_and_tightness(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            fam = clustered(rng, 4, 3, "complex")
            k = detect_ratio(fam).k
            X = fam.vectors
            slack = [k * np.vdot(X[j], X[i]).real - norm(X[i]) * norm(X[j]) for i, j in pair_indices(4)]
            assert min(slack) >= -1e-9
            assert min(slack) <= 1e-9 * max(abs(s) for s in slack) + 1e-12


class TestNormalizedRho:
    def test_zero(self):
        p = detect_normalized_rho(VectorFamily.of([[1.0, 0.0], [2.0, 0.0]]))
        assert p.rho == 0.0 and p.feasible and p.at_zero

    def test_orthogonal(self):
        p = detect_normalized_rho(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]]))
        assert p.rho == pytest.approx(math.sqrt(2.0))
        assert not p.feasible

    def test_single(self):
        assert detect_normalized_rho(VectorFamily.of([[1.0, 0.0]])).rho == 0.0

    def test_zero_second_vector(self):
        with pytest.raises(PreconditionError):
            detect_normalized_rho(VectorFamily.of([[1.0, 0.0], [0.0, 0.0]]))

    def test_unit_family_detects_max_distance(self):
        rng = np.random.default_rng(42)
        fam = unit_clustered(rng, 5, 3)
        X = fam.vectors
        rho = max(np.linalg.norm(X[i] - X[j]) for i, j in pair_indices(5))
        assert detect_normalized_rho(fam).rho == pytest.approx(rho, rel=1e-12)


class TestEta:
    def test_identical_unit(self):
        p = detect_eta(VectorFamily.of([[1.0, 0.0], [1.0, 0.0]]))
        assert (p.eta_min, p.eta_max) == (0.0, 1.0) and p.feasible

    def test_orthogonal(self):
        p = detect_eta(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]]))
        assert p.eta_min == pytest.approx(math.sqrt(2.0)) and p.eta_max == 1.0
        assert not p.feasible

    def test_far_pair(self):
        p = detect_eta(VectorFamily.of([[10.0, 0.0], [9.0, 0.0]]))
        assert (p.eta_min, p.eta_max) == (1.0, 9.0) and p.feasible
