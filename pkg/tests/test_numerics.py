"""
Tests for the differentiable compute core: ops, backward contract and gradient checks.
"""

import numpy as np
import pytest

from src.modules.errors import ArgumentError
from src.modules.numerics import (
    ParamStore,
    Tensor,
    backward,
    bilinear_resize,
    check_store_gradients,
    conv2d,
    entry_error,
    full_attention,
    global_avg_pool,
    grad_check,
    layer_norm,
    mlp,
    neighborhood_attention,
    neighborhood_index,
    run_op_suite,
    softmax,
    sorted_sum,
)


def attention_weights(rng, channels):
    return {
        'wqkv': Tensor(0.3 * rng.normal(size=(channels, 3 * channels))),
        'bqkv': Tensor(0.1 * rng.normal(size=3 * channels)),
        'wp': Tensor(0.3 * rng.normal(size=(channels, channels))),
        'bp': Tensor(0.1 * rng.normal(size=channels)),
    }


class TestOperations:

    def test_softmax_sums_to_one_and_is_shift_invariant(self, rng):
        logits = rng.normal(size=(4, 7))
        probs = softmax(Tensor(logits), axis=1).numpy()
        shifted = softmax(Tensor(logits + 13.5), axis=1).numpy()
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
        np.testing.assert_allclose(probs, shifted, atol=1e-12)

    def test_bilinear_resize_same_shape_is_identity(self, rng):
        x = rng.normal(size=(2, 5, 6, 3))
        np.testing.assert_array_equal(bilinear_resize(Tensor(x), 5, 6).numpy(), x)

    def test_bilinear_resize_constant_stays_constant(self):
        out = bilinear_resize(Tensor(np.full((1, 4, 4, 2), 0.7)), 9, 3).numpy()
        assert out.shape == (1, 9, 3, 2)
        np.testing.assert_allclose(out, 0.7, atol=1e-12)

    def test_layer_norm_statistics(self, rng):
        x = rng.normal(loc=3.0, scale=5.0, size=(3, 4, 4, 16))
        out = layer_norm(Tensor(x)).numpy()
        assert np.abs(out.mean(axis=-1)).max() <= 1e-6
        np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-5)

    def test_conv2d_output_shape(self, rng):
        x = Tensor(rng.normal(size=(2, 8, 8, 3)))
        w = Tensor(rng.normal(size=(3, 3, 3, 5)))
        assert conv2d(x, w, stride=2, padding=1).shape == (2, 4, 4, 5)

    def test_conv2d_identity_kernel(self, rng):
        x = rng.normal(size=(1, 5, 5, 2))
        w = np.zeros((3, 3, 2, 2))
        w[1, 1] = np.eye(2)
        out = conv2d(Tensor(x), Tensor(w), stride=1, padding=1).numpy()
        np.testing.assert_allclose(out, x, atol=1e-12)

    def test_global_avg_pool(self, rng):
        x = rng.normal(size=(2, 3, 4, 5))
        np.testing.assert_allclose(global_avg_pool(Tensor(x)).numpy(), x.mean(axis=(1, 2)), atol=1e-12)

    def test_mlp_shape(self, rng):
        out = mlp(Tensor(rng.normal(size=(3, 4))), Tensor(rng.normal(size=(4, 6))), None,
                  Tensor(rng.normal(size=(6, 2))), None)
        assert out.shape == (3, 2)

    def test_sorted_sum_ignores_order(self, rng):
        x = rng.normal(size=(6, 3))
        permuted = x[rng.permutation(6)]
        assert np.array_equal(sorted_sum(Tensor(x), axis=0).numpy(), sorted_sum(Tensor(permuted), axis=0).numpy())

    def test_pow_with_tensor_exponent_raises(self):
        with pytest.raises(ArgumentError):
            Tensor(np.ones(3)) ** Tensor(np.ones(3))


class TestNeighborhoodAttention:

    def test_every_query_has_k_squared_keys(self):
        index = neighborhood_index(6, 7, 3)
        assert index.shape == (42, 9)
        # corner query shifted inward: still 9 distinct keys
        assert len(set(index[0].tolist())) == 9

    def test_kernel_clamped_per_axis(self):
        assert neighborhood_index(3, 8, 5).shape == (24, 15)

    def test_large_kernel_equals_full_attention(self, rng):
        x = Tensor(rng.normal(size=(1, 4, 5, 8)))
        weights = attention_weights(rng, 8)
        local = neighborhood_attention(x, weights['wqkv'], weights['bqkv'], weights['wp'], weights['bp'],
                                       kernel=9, heads=2).numpy()
        full = full_attention(x, weights['wqkv'], weights['bqkv'], weights['wp'], weights['bp'], heads=2).numpy()
        assert np.array_equal(local, full)

    def test_constant_input_gives_constant_output(self, rng):
        x = Tensor(np.broadcast_to(rng.normal(size=8), (1, 5, 5, 8)).copy())
        weights = attention_weights(rng, 8)
        out = neighborhood_attention(x, weights['wqkv'], weights['bqkv'], weights['wp'], weights['bp'],
                                     kernel=3, heads=4).numpy()
        np.testing.assert_allclose(out, np.broadcast_to(out[:, :1, :1], out.shape), atol=1e-12)

    def test_even_kernel_raises(self, rng):
        weights = attention_weights(rng, 4)
        with pytest.raises(ArgumentError):
            neighborhood_attention(Tensor(rng.normal(size=(1, 4, 4, 4))), weights['wqkv'], weights['bqkv'],
                                   weights['wp'], weights['bp'], kernel=4, heads=1)

    def test_shape_mismatch_raises(self, rng):
        weights = attention_weights(rng, 4)
        with pytest.raises(ArgumentError):
            neighborhood_attention(Tensor(rng.normal(size=(1, 4, 4, 6))), weights['wqkv'], weights['bqkv'],
                                   weights['wp'], weights['bp'], kernel=3, heads=1)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        projection = rng.normal(size=(1, 6, 6, 8))
        inputs = {
            'x': rng.normal(size=(1, 6, 6, 8)),
            'wqkv': 0.3 * rng.normal(size=(8, 24)),
            'bqkv': 0.1 * rng.normal(size=24),
            'wp': 0.3 * rng.normal(size=(8, 8)),
            'bp': 0.1 * rng.normal(size=8),
        }

        def fn(t):
            out = neighborhood_attention(t['x'], t['wqkv'], t['bqkv'], t['wp'], t['bp'], kernel=3, heads=2)
            return (out * Tensor(projection)).sum()

        result = grad_check('neighborhood_attention', fn, inputs, tolerance=1e-6, max_entries=None)
        assert result.passed, result.errors


class TestBackward:

    def test_sum_gives_all_ones(self):
        x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        backward(x.sum())
        np.testing.assert_array_equal(x.grad, np.ones((2, 3)))

    def test_non_scalar_loss_raises(self):
        x = Tensor(np.ones((2, 2)), requires_grad=True)
        with pytest.raises(ArgumentError):
            backward(x * 2.0)

    def test_second_backward_accumulates(self):
        x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        backward((x * 3.0).sum())
        backward((x * 3.0).sum())
        np.testing.assert_array_equal(x.grad, [6.0, 6.0])

    def test_unreachable_parameters_get_zero(self):
        store = ParamStore(np.float64)
        used = store.add('used', np.ones(3))
        store.add('unused', np.ones(2))
        backward((used * used).sum(), store)
        np.testing.assert_array_equal(store['used'].grad, [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(store['unused'].grad, [0.0, 0.0])

    def test_composite_graph_gradient(self):
        rng = np.random.default_rng(11)
        projection = rng.normal(size=(1, 2))
        inputs = {
            'x': rng.normal(size=(1, 6, 6, 3)),
            'conv': 0.4 * rng.normal(size=(3, 3, 3, 4)),
            'wqkv': 0.3 * rng.normal(size=(4, 12)),
            'wp': 0.3 * rng.normal(size=(4, 4)),
            'w1': rng.normal(size=(4, 5)),
            'w2': rng.normal(size=(5, 2)),
        }

        def fn(t):
            h = conv2d(t['x'], t['conv'], stride=1, padding=1)
            h = layer_norm(h)
            h = neighborhood_attention(h, t['wqkv'], None, t['wp'], None, kernel=3, heads=2)
            pooled = global_avg_pool(h)
            return (mlp(pooled, t['w1'], None, t['w2'], None) * Tensor(projection)).sum()

        result = grad_check('composite', fn, inputs, tolerance=1e-6, max_entries=24)
        assert result.passed, result.errors


class TestParamStore:

    def test_duplicate_name_raises(self):
        store = ParamStore()
        store.add('w', np.zeros(2))
        with pytest.raises(ArgumentError):
            store.add('w', np.zeros(2))

    def test_default_precision_is_single(self):
        store = ParamStore()
        assert store.add('w', np.zeros(2)).dtype == np.float32

    def test_store_gradient_check_requires_double(self):
        store = ParamStore(np.float32)
        w = store.add('w', np.ones(2))
        with pytest.raises(ArgumentError):
            check_store_gradients('single', lambda: (w * w).sum(), store)

    def test_store_gradient_check_passes(self):
        store = ParamStore(np.float64)
        w = store.add('w', np.array([0.5, -1.0, 2.0]))
        result = check_store_gradients('quadratic', lambda: (w * w * w).sum(), store, entries_per_tensor=None)
        assert result.passed
        assert result.n_checked == 3

    def test_wrong_backward_is_not_masked_by_large_gradients(self):
        store = ParamStore(np.float64)
        big = store.add('big', np.array([1.0, -2.0, 3.0]))
        small = store.add('small', np.array([0.1, -0.2]))

        def bad_square(t):
            # backward off by 50%
            return Tensor.make(t.data ** 2, (t,), lambda g: (g * 3.0 * t.data,), 'bad_square')

        def loss():
            return (big * big).sum() * 1e4 + bad_square(small).sum()

        result = check_store_gradients('masked', loss, store, entries_per_tensor=None)
        assert not result.passed
        assert result.errors['small'] > 1e-6
        assert result.errors['big'] <= 1e-6
        assert result.max_rel_error == result.errors['small']

    def test_near_zero_gradient_is_judged_absolutely(self):
        store = ParamStore(np.float64)
        w = store.add('w', np.array([1e-4, -3e-5]))
        result = check_store_gradients('tiny', lambda: (w * w * w).sum(), store, entries_per_tensor=None)
        assert result.passed

    def test_entry_error_uses_worst_entry(self):
        assert entry_error(np.array([100.0, 0.5]), np.array([100.0, 0.6])) == pytest.approx(0.1)
        assert entry_error(np.array([200.0]), np.array([202.0])) == pytest.approx(2.0 / 202.0)
        assert entry_error(np.array([]), np.array([])) == 0.0


class TestOpSuite:

    def test_all_ops_pass_over_seeds(self):
        results = run_op_suite(tolerance=1e-6, seeds=3)
        failed = [r.name for r in results if not r.passed]
        assert not failed
        assert {r.name for r in results} >= {'conv2d', 'conv1x1', 'bilinear_resize', 'layer_norm', 'softmax',
                                             'mlp', 'global_avg_pool', 'neighborhood_attention'}

    @pytest.mark.slow
    def test_all_ops_pass_over_twenty_seeds(self):
        results = run_op_suite(tolerance=1e-6, seeds=20)
        assert all(r.passed for r in results)
