from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadrev.core import (
    VectorFamily,
    as_vector,
    clamp_nonneg,
    defect,
    gram_summary,
    inner,
    midpoint_equiv,
    midpoint_margins,
    norm,
    pair_indices,
    re_gram,
    re_inner,
    schwarz_gap,
    tol,
)
from quadrev.errors import DimensionError, InvalidInputError


def _family(rng, n, d, field="real", scale=10.0):
    X = rng.uniform(-scale, scale, (n, d))
    if field == "complex":
        X = X + 1j * rng.uniform(-scale, scale, (n, d))
    return VectorFamily(X, field)


class TestInnerProduct:
    def test_conjugate_linear_in_second_argument(self):
        u = np.array([1 + 2j, 3 - 1j])
        v = np.array([2 - 1j, 1j])
        assert inner(u, v) == pytest.approx(np.vdot(v, u))
        assert inner(u, 1j * v) == pytest.approx(-1j * inner(u, v))
        assert inner(1j * u, v) == pytest.approx(1j * inner(u, v))

    def test_real_inputs_return_float(self):
        assert isinstance(inner([1.0, 2.0], [3.0, 4.0]), float)
        assert inner([1.0, 2.0], [3.0, 4.0]) == 11.0

    def test_re_inner_matches_numpy(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            np.testing.assert_allclose(re_inner(u, v), np.vdot(v, u).real, rtol=1e-13, atol=1e-13)

    def test_norm(self):
        assert norm([3.0, 4.0]) == 5.0
        assert norm([3j, 4.0]) == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            inner([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(DimensionError):
            re_inner([1.0], [1.0, 2.0])

    def test_schwarz_gap_zero_at_collinear(self):
        assert schwarz_gap([1.0, 2.0], [2.0, 4.0]) == pytest.approx(0.0, abs=1e-14)
        assert schwarz_gap([1.0, 0.0], [0.0, 1.0]) == 1.0
        assert schwarz_gap([1.0, 0.0], [-1.0, 0.0]) == 2.0


class TestVectorFamily:
    def test_infers_field(self):
        assert VectorFamily.of([[1, 2], [3, 4]]).field == "real"
        assert VectorFamily.of([[1j, 2], [3, 4]]).field == "complex"
        assert VectorFamily.of([[1, 2]], "complex").vectors.dtype == np.complex128

    def test_rejects_ragged(self):
        with pytest.raises(DimensionError):
            VectorFamily.of([[1, 2], [3]])

    def test_rejects_nonfinite_and_empty(self):
        with pytest.raises(InvalidInputError):
            VectorFamily.of([[1.0, np.nan]])
        with pytest.raises(InvalidInputError):
            VectorFamily.of([])
        with pytest.raises(InvalidInputError):
            as_vector([])

    def test_immutable(self):
        fam = VectorFamily.of([[1.0, 2.0]])
        with pytest.raises(ValueError):
            fam.vectors[0, 0] = 5.0

    def test_check_same_space(self):
        fam = VectorFamily.of([[1.0, 2.0]])
        with pytest.raises(DimensionError):
            fam.check_same_space(np.zeros(3))


class TestTolerance:
    def test_clamp_only_within_tolerance(self):
        assert clamp_nonneg(-1e-13, 1.0) == 0.0
        assert clamp_nonneg(-1e-3, 1.0) == -1e-3
        assert clamp_nonneg(0.5) == 0.5

    def test_tol_scales(self):
        assert tol(0.0) == 1e-12
        assert tol(1e6) == pytest.approx(1e-12 + 1e-3)


class TestGram:
    def test_symmetric_exactly(self):
        rng = np.random.default_rng(42)
        for field in ("real", "complex"):
            fam = _family(rng, 6, 5, field)
            G = re_gram(fam.vectors)
            assert np.array_equal(G, G.T)

    def test_matches_numpy(self):
        rng = np.random.default_rng(42)
        fam = _family(rng, 5, 3, "complex")
        X = fam.vectors
        expected = (X @ X.conj().T).real
        np.testing.assert_allclose(re_gram(X), expected, rtol=1e-12, atol=1e-10)

    def test_gaps_nonnegative(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            g = gram_summary(_family(rng, 4, 3, "complex"))
            assert np.all(g.gaps() >= 0.0)

    def test_pair_indices(self):
        assert pair_indices(3) == [(0, 1), (0, 2), (1, 2)]
        assert pair_indices(1) == []


class TestDefect:
    def test_orthogonal_pair(self):
        d = defect(VectorFamily.of([[1.0, 0.0], [0.0, 1.0]]))
        assert d.pairwise == 2.0
        assert d.direct == pytest.approx(2.0, rel=1e-15)

    def test_single_vector_has_zero_defect(self):
        d = defect(VectorFamily.of([[1.0, 2.0, 2.0]]))
        assert d.direct == 0.0 and d.pairwise == 0.0

    def test_collinear_has_zero_defect(self):
        d = defect(VectorFamily.of([[1.0, 1.0], [2.0, 2.0], [0.5, 0.5]]))
        assert d.pairwise == pytest.approx(0.0, abs=1e-14)
        assert d.direct == pytest.approx(0.0, abs=1e-14)

    def test_dual_paths_agree(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            fam = _family(rng, int(rng.integers(1, 8)), int(rng.integers(1, 6)), "complex")
            d = defect(fam)
            S = sum(np.linalg.norm(x) for x in fam.vectors)
            assert d.discrepancy <= 1e-10 * S * S

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.floats(-10, 10), min_size=3, max_size=3), min_size=1, max_size=6))
    def test_nonnegative(self, rows):
        d = defect(VectorFamily.of(rows))
        assert d.direct >= 0.0 and d.pairwise >= 0.0

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.lists(st.floats(-5, 5), min_size=2, max_size=2), min_size=2, max_size=5),
           st.floats(0.1, 10.0))
    def test_homogeneous_of_degree_two(self, rows, c):
        fam = VectorFamily.of(rows)
        base = defect(fam).pairwise
        scaled = defect(fam.scaled(c)).pairwise
        S = sum(np.linalg.norm(x) for x in fam.vectors)
        assert abs(scaled - c * c * base) <= 1e-9 * c * c * max(S * S, 1.0)


class TestMidpoint:
    def test_inside_and_outside(self):
        z, Z = np.array([0.0, 0.0]), np.array([2.0, 0.0])
        assert midpoint_equiv(np.array([1.0, 0.5]), z, Z) == (True, True)
        assert midpoint_equiv(np.array([1.0, 1.5]), z, Z) == (False, False)

    def test_margins_share_sign(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            x, z, Z = (rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(3))
            a, b = midpoint_margins(x, z, Z)
            if abs(b) > 1e-9:
                assert math.copysign(1, a) == math.copysign(1, b)
