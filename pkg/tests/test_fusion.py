import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlcf.errors import DivergenceUndefinedError, InvalidArgumentError
from mlcf.fusion import NormalizedResponse, fuse, kl_divergence, normalize_response


def random_distribution(rng, v, h):
    return normalize_response(rng.standard_normal((v, h)))


class TestNormalizeResponse:
    def test_constant_map_becomes_uniform(self):
        out = normalize_response(np.full((3, 5), 7.0))
        npt.assert_allclose(out.data, np.full((3, 5), 1.0 / 15.0), atol=1e-9)

    def test_two_cell_map(self):
        out = normalize_response(np.array([[1.0, 0.0]]))
        eps = 1e-12
        npt.assert_allclose(out.data, [[(1 + eps) / (1 + 2 * eps), eps / (1 + 2 * eps)]])

    def test_argmax_preserved(self):
        rng = np.random.default_rng(40)
        for _ in range(10):
            r = rng.standard_normal((6, 6))
            out = normalize_response(r)
            assert np.argmax(out.data) == np.argmax(r)

    def test_sums_to_one_and_nonnegative(self):
        rng = np.random.default_rng(41)
        r = rng.uniform(-100.0, 100.0, size=(9, 4))
        out = normalize_response(r)
        assert out.data.sum() == pytest.approx(1.0, abs=1e-9)
        assert (out.data >= 0).all()

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            normalize_response(np.array([[1.0, np.nan]]))


class TestFuse:
    def test_single_map_identity(self):
        rng = np.random.default_rng(42)
        p = random_distribution(rng, 4, 4)
        npt.assert_array_equal(fuse([p]).data, p.data)

    def test_two_map_arithmetic(self):
        a = NormalizedResponse(1, 2, np.array([[0.5, 0.5]]))
        b = NormalizedResponse(1, 2, np.array([[1.0, 0.0]]))
        npt.assert_allclose(fuse([a, b]).data, [[0.75, 0.25]])

    def test_order_invariant(self):
        rng = np.random.default_rng(43)
        maps = [random_distribution(rng, 3, 3) for _ in range(4)]
        npt.assert_allclose(fuse(maps).data, fuse(maps[::-1]).data, atol=1e-15)

    def test_identical_inputs_pass_through(self):
        rng = np.random.default_rng(44)
        p = random_distribution(rng, 5, 2)
        npt.assert_allclose(fuse([p, p, p]).data, p.data, atol=1e-15)

    def test_output_is_a_distribution(self):
        rng = np.random.default_rng(45)
        out = fuse([random_distribution(rng, 4, 6) for _ in range(5)])
        assert out.data.sum() == pytest.approx(1.0, abs=1e-9)

    def test_empty_list_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fuse([])

    def test_shape_mismatch_rejected(self):
        rng = np.random.default_rng(46)
        with pytest.raises(InvalidArgumentError):
            fuse([random_distribution(rng, 3, 3), random_distribution(rng, 3, 4)])

    def test_beats_simplex_neighbors(self):
        # the mean should minimize the summed divergence; nudging mass between
        # any two cells must not improve it
        rng = np.random.default_rng(47)
        maps = [random_distribution(rng, 2, 2) for _ in range(3)]
        q = fuse(maps)
        base = sum(kl_divergence(m, q) for m in maps)
        step = 1e-4
        for i in range(4):
            for j in range(4):
                if i == j:
                    continue
                flat = q.data.ravel().copy()
                if flat[j] < step:
                    continue
                flat[i] += step
                flat[j] -= step
                cand = NormalizedResponse(2, 2, flat.reshape(2, 2))
                total = sum(kl_divergence(m, cand) for m in maps)
                assert total >= base - 1e-12


class TestKlDivergence:
    def test_self_divergence_zero(self):
        rng = np.random.default_rng(48)
        p = random_distribution(rng, 3, 3)
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_point_mass_against_uniform(self):
        r = NormalizedResponse(1, 2, np.array([[1.0, 0.0]]))
        q = NormalizedResponse(1, 2, np.array([[0.5, 0.5]]))
        assert kl_divergence(r, q) == pytest.approx(np.log(2.0))

    def test_matches_elementwise_sum_oracle(self):
        rng = np.random.default_rng(49)
        for _ in range(10):
            r = random_distribution(rng, 3, 3)
            q = random_distribution(rng, 3, 3)
            expect = 0.0
            for i in range(3):
                for j in range(3):
                    if r.data[i, j] > 0:
                        expect += r.data[i, j] * np.log(r.data[i, j] / q.data[i, j])
            assert kl_divergence(r, q) == pytest.approx(expect, abs=1e-12)

    def test_zero_times_log_zero_is_zero(self):
        r = NormalizedResponse(1, 2, np.array([[0.0, 1.0]]))
        q = NormalizedResponse(1, 2, np.array([[0.5, 0.5]]))
        assert np.isfinite(kl_divergence(r, q))

    def test_undefined_when_q_lacks_support(self):
        r = NormalizedResponse(1, 2, np.array([[0.5, 0.5]]))
        q = NormalizedResponse(1, 2, np.array([[1.0, 0.0]]))
        with pytest.raises(DivergenceUndefinedError):
            kl_divergence(r, q)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_gibbs_inequality(self, seed):
        rng = np.random.default_rng(seed)
        r = random_distribution(rng, 3, 4)
        q = random_distribution(rng, 3, 4)
        d = kl_divergence(r, q)
        assert d >= 0.0
        if d < 1e-9:
            npt.assert_allclose(r.data, q.data, atol=1e-4)
