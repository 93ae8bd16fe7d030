"""Adam, losses, and the supervised training loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kanlab.initschemes import InitScheme, apply_scheme
from kanlab.network import build_network
from kanlab.optim import (
    AdamState,
    adam_step,
    mse_loss,
    relative_l2,
    train_fit,
)
from kanlab.targets import make_task


def scalar_adam_reference(grad_fn, w0, steps, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
    """Independent scalar Adam, transcribed from the update equations."""
    w, m, v = w0, 0.0, 0.0
    history = [w]
    for t in range(1, steps + 1):
        g = grad_fn(w)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        w = w - lr * mhat / (np.sqrt(vhat) + eps)
        history.append(w)
    return history


class TestAdamStep:
    def test_zero_gradient_keeps_params(self):
        p = [np.array([1.0, -2.0])]
        g = [np.zeros(2)]
        state = AdamState.for_params(p)
        adam_step(p, g, state)
        np.testing.assert_array_equal(p[0], [1.0, -2.0])
        assert state.t == 1

    def test_first_step_magnitude(self):
        p = [np.array([0.0])]
        state = AdamState.for_params(p, lr=1e-3)
        adam_step(p, [np.array([1.0])], state)
        # bias-corrected mhat = vhat = 1 -> step = lr / (1 + eps)
        assert p[0][0] == pytest.approx(-1e-3, rel=1e-6)

    def test_matches_scalar_reference_on_quadratic(self):
        p = [np.array([1.0])]
        state = AdamState.for_params(p, lr=1e-3)
        mine = [p[0][0]]
        for _ in range(10):
            adam_step(p, [np.array([2.0 * p[0][0]])], state)
            mine.append(p[0][0])
        ref = scalar_adam_reference(lambda w: 2.0 * w, 1.0, 10, lr=1e-3)
        np.testing.assert_allclose(mine, ref, atol=1e-15)
        assert all(abs(a) > abs(b) for a, b in zip(mine, mine[1:]))

    def test_zero_lr_is_identity(self):
        p = [np.array([3.0, 4.0])]
        state = AdamState.for_params(p, lr=0.0)
        adam_step(p, [np.array([5.0, -1.0])], state)
        np.testing.assert_array_equal(p[0], [3.0, 4.0])

    def test_shape_mismatch(self):
        p = [np.zeros(2)]
        state = AdamState.for_params(p)
        with pytest.raises(ValueError, match="shape mismatch"):
            adam_step(p, [np.zeros(3)], state)

    def test_nonfinite_gradient(self):
        p = [np.zeros(2)]
        state = AdamState.for_params(p)
        with pytest.raises(ValueError, match="non-finite"):
            adam_step(p, [np.array([1.0, np.nan])], state)


class TestLosses:
    def test_mse_identical_is_zero(self):
        x = np.random.default_rng(0).normal(size=(5, 2))
        assert mse_loss(x, x) == 0.0

    def test_mse_constant_offset(self):
        a = np.zeros((3, 4))
        assert mse_loss(a + 2.0, a) == pytest.approx(4.0)

    def test_mse_matches_loop(self):
        rng = np.random.default_rng(1)
        a, b = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        want = sum(
            (a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(3)
        ) / 18.0
        assert mse_loss(a, b) == pytest.approx(want, abs=1e-14)

    def test_mse_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            mse_loss(np.zeros(3), np.zeros(4))

    def test_relative_l2_identities(self):
        ref = np.array([3.0, 4.0])
        assert relative_l2(ref, ref) == 0.0
        assert relative_l2(np.zeros(2), ref) == 1.0
        assert relative_l2(2 * ref, ref) == pytest.approx(1.0)

    def test_relative_l2_zero_reference(self):
        with pytest.raises(ValueError, match="zero reference"):
            relative_l2(np.ones(3), np.zeros(3))

    @settings(max_examples=80, deadline=None)
    @given(
        st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=16),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_property_relative_l2_scale_invariance(self, ref, scale):
        ref = np.array(ref)
        if np.linalg.norm(ref) == 0:
            return
        pred = 2.0 * ref
        # scaling both arguments leaves the ratio unchanged
        a = relative_l2(pred, ref)
        b = relative_l2(scale * pred, scale * ref)
        assert a == pytest.approx(b, rel=1e-9)
        assert a == pytest.approx(1.0, rel=1e-12)


class _ZeroTask:
    """Stub task: target identically zero on [-1,1]^2."""

    input_dim = 2
    n_train = 256

    def fingerprint(self, seed, epochs):
        return f"zero-{seed}-{epochs}"

    def sample_inputs(self, seed):
        return np.random.default_rng(seed).uniform(-1, 1, (self.n_train, 2))

    def eval_target(self, points):
        return np.zeros(len(points))

    def eval_grid_points(self):
        ax = np.linspace(-1, 1, 20)
        gx, gy = np.meshgrid(ax, ax)
        return np.stack([gx.ravel(), gy.ravel()], axis=1)


class TestTrainFit:
    def test_zero_epochs(self):
        net = build_network([2, 4, 1], G=5)
        apply_scheme(net, InitScheme("baseline"), seed=0)
        task = make_task("f1", n_train=64)
        rec = train_fit(net, task, epochs=0, seed=0)
        assert rec.loss_history == []
        assert np.isfinite(rec.final_loss)
        assert np.isfinite(rec.rel_l2)

    def test_descends_on_zero_target(self):
        net = build_network([2, 4, 1], G=5)
        apply_scheme(net, InitScheme("baseline"), seed=1)
        task = _ZeroTask()
        init = train_fit(net, task, epochs=0, seed=2).final_loss
        net2 = build_network([2, 4, 1], G=5)
        apply_scheme(net2, InitScheme("baseline"), seed=1)
        rec = train_fit(net2, task, epochs=100, seed=2)
        assert rec.final_loss <= init
        assert len(rec.loss_history) == 100
        assert all(np.isfinite(v) for v in rec.loss_history)

    def test_full_batch_determinism(self):
        task = make_task("f1", n_train=128)
        records = []
        for _ in range(2):
            net = build_network([2, 4, 1], G=5)
            apply_scheme(net, InitScheme("power-law", 0.25, 1.75), seed=3)
            records.append(train_fit(net, task, epochs=20, seed=3))
        assert records[0].loss_history == records[1].loss_history
        assert records[0].rel_l2 == records[1].rel_l2
