"""Layer/network forward against loop oracles; gradients against finite differences."""

import numpy as np
import pytest

from kanlab.network import (
    KanLayer,
    KanNetwork,
    build_network,
    flatten_grads,
    flatten_params,
    input_derivatives,
    layer_forward,
    load_network,
    network_forward,
    normalized_basis_values,
    parameter_gradients,
    run_backward,
    run_forward,
    save_network,
    set_flat_params,
    silu,
    silu_prime,
)
from kanlab.optim import mse_loss_and_grad
from kanlab.spline import basis_values, build_knot_vector


def make_random_net(widths, G=5, k=3, seed=0, normalized=False, scale=0.4):
    net = build_network(widths, G=G, k=k, normalized_basis=normalized)
    rng = np.random.default_rng(seed)
    for l in net.layers:
        l.r[...] = scale * rng.standard_normal(l.r.shape)
        l.c[...] = 1.0 + 0.3 * rng.standard_normal(l.c.shape)
        l.b[...] = scale * rng.standard_normal(l.b.shape)
    return net


def loop_layer_oracle(layer, x):
    """Naive triple-loop evaluation of the layer map (raw basis only)."""
    n, _ = x.shape
    out = np.zeros((n, layer.n_out))
    for nn in range(n):
        for j in range(layer.n_out):
            acc = 0.0
            for i in range(layer.n_in):
                xi = x[nn, i]
                bvals = basis_values(xi, layer.kv)
                spl = sum(
                    layer.b[j, i, m] * bvals[m] for m in range(layer.kv.n_basis)
                )
                acc += layer.r[j, i] * silu(xi) + layer.c[j, i] * spl
            out[nn, j] = acc
    return out


class TestSilu:
    def test_values_at_zero(self):
        assert silu(0.0) == 0.0
        assert silu_prime(0.0) == pytest.approx(0.5)

    def test_prime_is_derivative(self):
        h = 1e-5
        for x in [3.0, -2.0, 0.7]:
            fd = (silu(x + h) - silu(x - h)) / (2 * h)
            assert silu_prime(x) == pytest.approx(fd, abs=1e-8)

    def test_stable_for_large_inputs(self):
        assert np.isfinite(silu(np.array([-500.0, 500.0]))).all()


class TestLayerForward:
    def test_zero_weights_give_zero(self):
        net = build_network([3, 4], G=5)
        x = np.random.default_rng(0).uniform(-1, 1, (6, 3))
        np.testing.assert_array_equal(layer_forward(net.layers[0], x), 0.0)

    def test_residual_only_path(self):
        net = build_network([1, 1], G=5)
        net.layers[0].r[...] = 2.0
        net.layers[0].c[...] = 0.7  # irrelevant: b is zero
        x = np.linspace(-1, 1, 9)[:, None]
        np.testing.assert_allclose(
            layer_forward(net.layers[0], x), 2.0 * silu(x), atol=1e-15
        )

    def test_matches_loop_oracle(self):
        net = make_random_net([3, 5], seed=3)
        x = np.random.default_rng(5).uniform(-1, 1, (8, 3))
        got = layer_forward(net.layers[0], x)
        np.testing.assert_allclose(got, loop_layer_oracle(net.layers[0], x), atol=1e-12)

    def test_empty_batch_rejected(self):
        net = build_network([2, 2], G=5)
        with pytest.raises(ValueError, match="empty"):
            layer_forward(net.layers[0], np.zeros((0, 2)))

    def test_nonfinite_input_rejected(self):
        net = build_network([2, 2], G=5)
        with pytest.raises(ValueError, match="non-finite"):
            layer_forward(net.layers[0], np.array([[0.0, np.inf]]))

    def test_scaling_linearity_in_r_and_b(self):
        # Exact with a power-of-two factor.
        net = make_random_net([2, 3], seed=9)
        x = np.random.default_rng(1).uniform(-1, 1, (5, 2))
        base = layer_forward(net.layers[0], x)
        net.layers[0].r *= 2.0
        net.layers[0].b *= 2.0
        np.testing.assert_array_equal(layer_forward(net.layers[0], x), 2.0 * base)

    def test_r_only_and_b_only_scaling(self):
        for zero_attr in ("r", "b"):
            net = make_random_net([2, 3], seed=11)
            getattr(net.layers[0], zero_attr)[...] = 0.0
            x = np.random.default_rng(2).uniform(-1, 1, (5, 2))
            base = layer_forward(net.layers[0], x)
            net.layers[0].r *= 2.0
            net.layers[0].b *= 2.0
            np.testing.assert_array_equal(layer_forward(net.layers[0], x), 2.0 * base)


class TestNormalizedBasis:
    def test_constant_column_maps_to_zero(self):
        raw = np.full((16, 2, 4), 0.7)
        out = normalized_basis_values(raw, eps=1e-5)
        # Zero numerator over sqrt(eps); only mean-roundoff survives.
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_two_point_column(self):
        raw = np.array([[-1.0], [1.0]])[:, :, None]
        out = normalized_basis_values(raw, eps=1e-12)
        np.testing.assert_allclose(out[:, 0, 0], [-1.0, 1.0], atol=1e-9)

    def test_standardizes_high_variance_column(self):
        # eps = 1e-5 biases the output variance by eps/(var+eps), so use
        # a column whose variance dwarfs eps.
        rng = np.random.default_rng(3)
        raw = rng.normal(0.0, 6.0, (100, 1, 1))
        out = normalized_basis_values(raw, eps=1e-5)
        assert abs(out.mean()) < 1e-10
        assert abs(out.var() - 1.0) < 1e-6

    def test_batch_too_small(self):
        with pytest.raises(ValueError, match="batch too small"):
            normalized_basis_values(np.zeros((1, 2, 3)), eps=1e-5)

    def test_frozen_unit_stats_match_raw_forward(self):
        net_raw = make_random_net([2, 4], seed=21)
        net_norm = make_random_net([2, 4], seed=21, normalized=True)
        m = net_norm.layers[0].kv.n_basis
        net_norm.layers[0].frozen_stats = (np.zeros((2, m)), np.ones((2, m)))
        x = np.random.default_rng(4).uniform(-1, 1, (7, 2))
        np.testing.assert_array_equal(
            layer_forward(net_norm.layers[0], x), layer_forward(net_raw.layers[0], x)
        )

    def test_normalized_layer_matches_explicit_normalization(self):
        net = make_random_net([2, 3], seed=31, normalized=True)
        layer = net.layers[0]
        x = np.random.default_rng(6).uniform(-1, 1, (32, 2))
        got = layer_forward(layer, x)
        raw = basis_values(x, layer.kv)
        tnorm = normalized_basis_values(raw, eps=layer.norm_eps)
        want = silu(x) @ layer.r.T + np.einsum(
            "jim,nim->nj", layer.c[:, :, None] * layer.b, tnorm
        )
        np.testing.assert_allclose(got, want, atol=1e-12)


class TestNetworkForward:
    def test_single_layer_equals_layer_forward(self):
        net = make_random_net([2, 3], seed=41)
        x = np.random.default_rng(7).uniform(-1, 1, (6, 2))
        np.testing.assert_array_equal(
            network_forward(net, x), layer_forward(net.layers[0], x)
        )

    def test_absorbing_zero_second_layer(self):
        net = make_random_net([2, 3, 2], seed=43)
        for name in ("r", "c", "b"):
            getattr(net.layers[1], name)[...] = 0.0
        x = np.random.default_rng(8).uniform(-1, 1, (6, 2))
        np.testing.assert_array_equal(network_forward(net, x), 0.0)

    def test_two_layer_composition_vs_oracle(self):
        net = make_random_net([2, 4, 3], seed=47)
        x = np.random.default_rng(9).uniform(-1, 1, (8, 2))
        mid = loop_layer_oracle(net.layers[0], x)
        want = loop_layer_oracle(net.layers[1], mid)
        np.testing.assert_allclose(network_forward(net, x), want, atol=1e-12)

    def test_dimension_mismatch(self):
        net = make_random_net([2, 3], seed=1)
        with pytest.raises(ValueError, match="dimension mismatch"):
            network_forward(net, np.zeros((4, 5)))

    def test_deterministic(self):
        net = make_random_net([2, 8, 1], seed=2)
        x = np.random.default_rng(10).uniform(-1, 1, (64, 2))
        np.testing.assert_array_equal(network_forward(net, x), network_forward(net, x))


def fd_param_gradient(net, x, loss_fn, idx, h=1e-5):
    flat = flatten_params(net)
    out = []
    for i in idx:
        bumped = flat.copy()
        bumped[i] = flat[i] + h
        set_flat_params(net, bumped)
        up = loss_fn(network_forward(net, x))[0]
        bumped[i] = flat[i] - h
        set_flat_params(net, bumped)
        down = loss_fn(network_forward(net, x))[0]
        out.append((up - down) / (2 * h))
    set_flat_params(net, flat)
    return np.array(out)


class TestParameterGradients:
    def test_zero_loss_gives_zero_gradients(self):
        net = make_random_net([2, 4, 1], seed=51)
        x = np.random.default_rng(11).uniform(-1, 1, (10, 2))
        grads = parameter_gradients(net, x, lambda y: (0.0, np.zeros_like(y)))
        assert np.all(flatten_grads(grads) == 0.0)

    def test_single_layer_closed_form_b_gradient(self):
        net = make_random_net([2, 3], seed=53)
        layer = net.layers[0]
        rng = np.random.default_rng(12)
        x = rng.uniform(-1, 1, (16, 2))
        t = rng.uniform(-1, 1, (16, 3))
        grads = parameter_gradients(net, x, mse_loss_and_grad(t))
        y = network_forward(net, x)
        bvals = basis_values(x, layer.kv)  # (N, I, M)
        want = (2.0 / t.size) * np.einsum(
            "nj,ji,nim->jim", y - t, layer.c, bvals
        )
        np.testing.assert_allclose(grads[0].b, want, atol=1e-10)

    @pytest.mark.parametrize("normalized", [False, True])
    def test_three_layer_mse_finite_difference(self, normalized):
        net = make_random_net([2, 4, 4, 1], seed=57, normalized=normalized)
        rng = np.random.default_rng(13)
        x = rng.uniform(-1, 1, (12, 2))
        t = rng.uniform(-1, 1, (12, 1))
        loss_fn = mse_loss_and_grad(t)
        grads = flatten_grads(parameter_gradients(net, x, loss_fn))
        idx = rng.choice(grads.size, size=50, replace=False)
        fd = fd_param_gradient(net, x, loss_fn, idx)
        denom = np.maximum(np.abs(fd), 1e-7)
        assert np.max(np.abs(grads[idx] - fd) / denom) < 1e-4

    def test_nonfinite_loss_raises(self):
        net = make_random_net([2, 2], seed=59)
        x = np.zeros((4, 2))
        with pytest.raises(ValueError, match="non-finite"):
            parameter_gradients(net, x, lambda y: (float("nan"), np.zeros_like(y)))


class TestInputDerivatives:
    def test_residual_only_chain_rule(self):
        net = build_network([2, 3], G=5)
        rng = np.random.default_rng(14)
        net.layers[0].r[...] = rng.standard_normal((3, 2))
        x = rng.uniform(-1, 1, (6, 2))
        derivs = input_derivatives(net, x, {0: 1, 1: 1})
        for d in (0, 1):
            want = net.layers[0].r[None, :, d] * silu_prime(x[:, d])[:, None]
            np.testing.assert_allclose(derivs[(d, 1)], want, atol=1e-14)

    def test_second_derivative_near_linear_regime(self):
        # With b = 0 and r only, outputs are sums of silu(x_i); at x = 0
        # the silu second derivative is exactly 0.5, scaled by r.
        net = build_network([1, 1], G=5)
        net.layers[0].r[...] = 1.0
        x = np.zeros((1, 1))
        derivs = input_derivatives(net, x, {0: 2})
        assert derivs[(0, 2)][0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_finite_difference_two_layer(self):
        net = make_random_net([2, 6, 2], seed=61)
        rng = np.random.default_rng(15)
        x = rng.uniform(-0.9, 0.9, (20, 2))
        derivs = input_derivatives(net, x, {0: 2, 1: 2})
        # Steps are a decade tighter than the contract tolerances need:
        # at coarser steps the FD truncation error itself (third
        # derivatives kink at spline knots) exceeds the tolerance.
        for d in (0, 1):
            e = np.zeros((1, 2))
            e[0, d] = 1.0
            h1 = 1e-5
            fd1 = (network_forward(net, x + h1 * e) - network_forward(net, x - h1 * e)) / (2 * h1)
            np.testing.assert_allclose(
                derivs[(d, 1)], fd1, rtol=1e-5, atol=1e-7
            )
            h2 = 1e-4
            fd2 = (
                network_forward(net, x + h2 * e)
                - 2 * network_forward(net, x)
                + network_forward(net, x - h2 * e)
            ) / h2**2
            np.testing.assert_allclose(
                derivs[(d, 2)], fd2, rtol=1e-3, atol=1e-5
            )

    def test_order_validation(self):
        net = make_random_net([2, 2], seed=63)
        x = np.zeros((3, 2))
        with pytest.raises(ValueError, match="unsupported order"):
            input_derivatives(net, x, {0: 3})
        net_k1 = make_random_net([2, 2], G=5, k=1, seed=63)
        with pytest.raises(ValueError, match="unsupported order"):
            input_derivatives(net_k1, x, {0: 2})


class TestPimlStyleGradients:
    """FD check of gradients that flow through propagated input derivatives."""

    def test_gradient_of_second_derivative_loss(self):
        net = make_random_net([2, 4, 1], seed=67, scale=0.3)
        rng = np.random.default_rng(16)
        x = rng.uniform(-0.9, 0.9, (10, 2))

        def scalar(netobj):
            _, derivs, _ = run_forward(netobj, x, wanted={0: 2, 1: 1})
            return float(
                np.mean(derivs[(0, 2)] ** 2) + np.mean(derivs[(0, 1)] * derivs[(1, 1)])
            )

        y, derivs, tapes = run_forward(net, x, wanted={0: 2, 1: 1}, with_tapes=True)
        n = x.shape[0]
        gd2y = {0: (2.0 / n) * derivs[(0, 2)]}
        gdy = {
            0: derivs[(1, 1)] / n,
            1: derivs[(0, 1)] / n,
        }
        grads = flatten_grads(run_backward(net, tapes, np.zeros_like(y), gdy, gd2y))

        flat = flatten_params(net)
        idx = rng.choice(flat.size, size=40, replace=False)
        h = 1e-5
        fd = []
        for i in idx:
            bumped = flat.copy()
            bumped[i] = flat[i] + h
            set_flat_params(net, bumped)
            up = scalar(net)
            bumped[i] = flat[i] - h
            set_flat_params(net, bumped)
            down = scalar(net)
            fd.append((up - down) / (2 * h))
        set_flat_params(net, flat)
        fd = np.array(fd)
        denom = np.maximum(np.abs(fd), 1e-7)
        assert np.max(np.abs(grads[idx] - fd) / denom) < 1e-4


class TestCheckpointIO:
    def test_roundtrip(self, tmp_path):
        net = make_random_net([2, 5, 1], seed=71, normalized=True)
        path = tmp_path / "net.json"
        save_network(net, str(path))
        back = load_network(str(path))
        x = np.random.default_rng(17).uniform(-1, 1, (6, 2))
        np.testing.assert_array_equal(network_forward(back, x), network_forward(net, x))
        assert back.layers[0].normalized_basis is True

    def test_rejects_foreign_json(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(ValueError, match="checkpoint"):
            load_network(str(path))
