import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from deniable_fit import (
    CraftedNorm,
    DimensionMismatch,
    EmptyInput,
    InvalidArguments,
    LengthMismatch,
    RejectionExhausted,
    VARIANT_EUCLIDEAN,
    VARIANT_ONE_NORM,
    crafted_matrix_norm,
    crafted_norm_value,
    make_crafted_norm,
    mae_transform,
    nullspace_projector,
    pick_w1,
    seminorm_b,
    standard_metric,
)

from conftest import ForcedRng


def fixed_norm(variant=VARIANT_EUCLIDEAN):
    """The worked example: e = (1, 0), w1 = (1/2, 1/2), alpha = 1/4."""
    return make_crafted_norm([1.0, 0.0], seed=ForcedRng([[1.0, 1.0]]), inner_variant=variant)


class TestWorkedExample:
    def test_alpha_is_half_the_projected_w1(self):
        norm = fixed_norm()
        assert_allclose(norm.w1, [0.5, 0.5])
        assert norm.alpha == pytest.approx(0.25, abs=1e-15)

    @pytest.mark.parametrize("variant", [VARIANT_EUCLIDEAN, VARIANT_ONE_NORM])
    def test_value_at_3_4(self, variant):
        # 1.5 * 4 + 0.125 * 3.5 (the one-row projector makes both variants agree)
        norm = fixed_norm(variant)
        assert crafted_norm_value(norm, [3.0, 4.0]) == pytest.approx(6.4375, abs=1e-15)

    def test_mae_transform_matrix(self):
        C = mae_transform(fixed_norm(VARIANT_ONE_NORM))
        assert_allclose(np.abs(C), [[0.0, 1.5], [0.0625, 0.0625]], atol=1e-15)
        assert np.abs(C @ np.array([3.0, 4.0])).sum() == pytest.approx(6.4375, abs=1e-14)

    def test_mae_transform_requires_one_norm(self):
        from deniable_fit import VariantMismatch

        with pytest.raises(VariantMismatch):
            mae_transform(fixed_norm(VARIANT_EUCLIDEAN))


class TestPickW1:
    def test_deterministic_under_seed(self):
        e = np.array([0.3, -1.2, 4.0])
        pm = nullspace_projector(e)
        assert_allclose(pick_w1(e, pm, seed=11), pick_w1(e, pm, seed=11))

    def test_orthogonal_candidate_rejected_then_resampled(self):
        e = np.array([1.0, 0.0])
        pm = nullspace_projector(e)
        forced = ForcedRng([[0.0, 1.0], [1.0, 1.0]])
        w1 = pick_w1(e, pm, seed=forced)
        assert forced.calls == 2
        assert_allclose(w1, [0.5, 0.5])

    def test_exhaustion(self):
        e = np.array([1.0, 0.0])
        pm = nullspace_projector(e)
        with pytest.raises(RejectionExhausted):
            pick_w1(e, pm, seed=ForcedRng([[0.0, 1.0]]))

    def test_unit_one_norm(self, rng):
        for _ in range(25):
            e = rng.normal(size=6)
            pm = nullspace_projector(e)
            w1 = pick_w1(e, pm, seed=int(rng.integers(0, 2**32)))
            assert np.abs(w1).sum() == pytest.approx(1.0, abs=1e-12)
            assert abs(e @ w1) > 1e-8 * np.linalg.norm(e)
            assert np.linalg.norm(pm.rows @ w1) > 1e-8


@pytest.mark.parametrize("variant", [VARIANT_EUCLIDEAN, VARIANT_ONE_NORM])
class TestNormAxioms:
    def _norm(self, rng, n, variant):
        e = rng.normal(size=n) * (1.0 + 9.0 * rng.random())
        return make_crafted_norm(e, seed=int(rng.integers(0, 2**32)), inner_variant=variant)

    def test_homogeneity_triangle_definiteness(self, rng, variant):
        for _ in range(10):
            n = int(rng.integers(2, 9))
            norm = self._norm(rng, n, variant)
            for _ in range(100):
                x = rng.normal(size=n) * 10.0 ** rng.integers(-2, 3)
                y = rng.normal(size=n) * 10.0 ** rng.integers(-2, 3)
                lam = float(rng.normal() * 10.0 ** rng.integers(-2, 3))
                vx, vy = crafted_norm_value(norm, x), crafted_norm_value(norm, y)
                scale = max(vx, vy, 1.0)
                assert crafted_norm_value(norm, lam * x) == pytest.approx(
                    abs(lam) * vx, rel=1e-10, abs=1e-10 * scale * max(abs(lam), 1.0)
                )
                assert crafted_norm_value(norm, x + y) <= vx + vy + 1e-10 * scale
                if np.linalg.norm(x) > 1e-8:
                    assert vx > 0.0

    def test_kernel_of_b_is_exactly_the_anchor_span(self, rng, variant):
        for _ in range(10):
            n = int(rng.integers(2, 9))
            norm = self._norm(rng, n, variant)
            e = norm.projector.source_error
            e_norm = np.linalg.norm(e)
            for lam in range(-10, 11):
                assert seminorm_b(norm, lam * e) <= 1e-10 * abs(lam) * e_norm + 1e-14
                if lam != 0:
                    # the w1 term keeps the full norm positive on the anchor
                    expected = 0.5 * norm.alpha * abs(lam) * abs(e @ norm.w1)
                    assert crafted_norm_value(norm, lam * e) == pytest.approx(
                        expected, rel=1e-9
                    )
                    assert crafted_norm_value(norm, lam * e) > 0.0

    def test_alpha_strictly_below_b_on_anchor_direction(self, rng, variant):
        # alpha * ||(x.w1) w1||_1 < b(x) for x on span{w1}
        for _ in range(20):
            n = int(rng.integers(2, 9))
            norm = self._norm(rng, n, variant)
            for lam in (-3.0, -1.0, 0.5, 2.0, 10.0):
                x = lam * norm.w1
                proj_len = abs(x @ norm.w1) * np.abs(norm.w1).sum()
                assert norm.alpha * proj_len < seminorm_b(norm, x)


class TestValueEdges:
    def test_dimension_mismatch(self):
        norm = fixed_norm()
        with pytest.raises(DimensionMismatch):
            crafted_norm_value(norm, [1.0, 2.0, 3.0])
        with pytest.raises(DimensionMismatch):
            seminorm_b(norm, [1.0])

    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_homogeneity_exact_scaling(self, lam):
        norm = fixed_norm()
        base = crafted_norm_value(norm, [3.0, 4.0])
        assert crafted_norm_value(norm, [3.0 * lam, 4.0 * lam]) == pytest.approx(
            abs(lam) * base, rel=1e-12, abs=1e-12
        )


class TestMaeReduction:
    def test_matches_crafted_value_on_random_vectors(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 10))
            e = rng.normal(size=n) * 5.0
            norm = make_crafted_norm(e, seed=int(rng.integers(0, 2**32)),
                                     inner_variant=VARIANT_ONE_NORM)
            C = mae_transform(norm)
            assert C.shape == (n, n)
            for _ in range(20):
                x = rng.normal(size=n) * 10.0 ** rng.integers(-2, 3)
                expected = crafted_norm_value(norm, x)
                assert np.abs(C @ x).sum() == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_mae_of_transformed_anchor(self, rng):
        e = rng.normal(size=7)
        norm = make_crafted_norm(e, seed=3, inner_variant=VARIANT_ONE_NORM)
        C = mae_transform(norm)
        mae = standard_metric("mae", C @ e, np.zeros(7))
        assert mae == pytest.approx(crafted_norm_value(norm, e) / 7, rel=1e-12)


class TestMatrixNorm:
    def test_equals_per_column_sum(self, rng):
        norms = []
        E = rng.normal(size=(5, 3)) * 4.0
        for j in range(3):
            anchor = rng.normal(size=5)
            norms.append(make_crafted_norm(anchor, seed=j))
        total = crafted_matrix_norm(norms, E)
        by_hand = sum(crafted_norm_value(norms[j], E[:, j]) for j in range(3))
        assert total == pytest.approx(by_hand, rel=1e-14)

    def test_length_mismatch(self, rng):
        norms = [make_crafted_norm(rng.normal(size=5), seed=0)]
        with pytest.raises(LengthMismatch):
            crafted_matrix_norm(norms, rng.normal(size=(5, 2)))

    def test_column_dimension_mismatch(self, rng):
        norms = [make_crafted_norm(rng.normal(size=4), seed=0)]
        with pytest.raises(DimensionMismatch):
            crafted_matrix_norm(norms, rng.normal(size=(5, 1)))


class TestStandardMetrics:
    def test_textbook_values(self):
        assert standard_metric("mse", [1.0, 2.0], [0.0, 0.0]) == pytest.approx(2.5)
        assert standard_metric("rmse", [1.0, 2.0], [0.0, 0.0]) == pytest.approx(np.sqrt(2.5))
        assert standard_metric("mae", [1.0, 2.0], [0.0, 0.0]) == pytest.approx(1.5)
        assert standard_metric("mae", [3.0, 4.0], [0.0, 0.0]) == pytest.approx(3.5)

    def test_rmse_is_sqrt_mse(self, rng):
        y, y_hat = rng.normal(size=40), rng.normal(size=40)
        assert standard_metric("rmse", y, y_hat) == pytest.approx(
            np.sqrt(standard_metric("mse", y, y_hat)), rel=1e-14
        )

    def test_matches_numpy(self, rng):
        y, y_hat = rng.normal(size=25), rng.normal(size=25)
        assert standard_metric("mse", y, y_hat) == pytest.approx(
            np.mean((y - y_hat) ** 2), rel=1e-14
        )
        assert standard_metric("mae", y, y_hat) == pytest.approx(
            np.mean(np.abs(y - y_hat)), rel=1e-14
        )

    def test_errors(self):
        with pytest.raises(EmptyInput):
            standard_metric("mse", [], [])
        with pytest.raises(DimensionMismatch):
            standard_metric("mae", [1.0], [1.0, 2.0])
        with pytest.raises(InvalidArguments):
            standard_metric("huber", [1.0], [0.0])


class TestSerialization:
    @pytest.mark.parametrize("variant", [VARIANT_EUCLIDEAN, VARIANT_ONE_NORM])
    def test_round_trip_is_exact(self, rng, variant):
        e = rng.normal(size=6) * 3.0
        norm = make_crafted_norm(e, seed=99, inner_variant=variant)
        clone = CraftedNorm.from_dict(norm.to_dict())
        assert np.array_equal(clone.projector.rows, norm.projector.rows)
        assert np.array_equal(clone.projector.source_error, norm.projector.source_error)
        assert np.array_equal(clone.w1, norm.w1)
        assert clone.alpha == norm.alpha
        assert clone.inner_variant == norm.inner_variant
        assert clone.seed == norm.seed

    def test_tampered_w1_rejected(self, rng):
        norm = make_crafted_norm(rng.normal(size=5), seed=1)
        payload = norm.to_dict()
        payload["w1"] = list(np.asarray(payload["b_rows"])[0])  # inside the complement
        with pytest.raises(InvalidArguments):
            CraftedNorm.from_dict(payload)
