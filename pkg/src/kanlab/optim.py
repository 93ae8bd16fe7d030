"""Adam optimizer, loss/metric functions, and the supervised training loop."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from .network import (
    KanNetwork,
    network_forward,
    run_backward,
    run_forward,
)


@dataclass
class AdamState:
    """First/second moment accumulators; one entry per parameter array."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: list[np.ndarray], lr: float = 1e-3, **kw) -> "AdamState":
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            lr=lr,
            **kw,
        )


def adam_step(
    params: list[np.ndarray], grads: list[np.ndarray], state: AdamState
) -> tuple[list[np.ndarray], AdamState]:
    """One in-place Adam update with bias correction.

    Raises:
        ValueError: on shape mismatch or non-finite gradients.
    """
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
        if not np.isfinite(g).all():
            raise ValueError("non-finite gradient")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over all entries."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def mse_loss_and_grad(target: np.ndarray):
    """Loss closure for :func:`kanlab.network.parameter_gradients`."""
    target = np.asarray(target, dtype=float)

    def fn(y: np.ndarray):
        diff = y - target
        return float(np.mean(diff * diff)), (2.0 / diff.size) * diff

    return fn


def relative_l2(pred: np.ndarray, ref: np.ndarray) -> float:
    """||pred - ref||_2 / ||ref||_2.

    Raises:
        ValueError: if the reference has zero norm.
    """
    pred = np.asarray(pred, dtype=float).ravel()
    ref = np.asarray(ref, dtype=float).ravel()
    denom = float(np.linalg.norm(ref))
    if denom == 0.0:
        raise ValueError("zero reference: relative L2 undefined")
    return float(np.linalg.norm(pred - ref) / denom)


def config_fingerprint(**fields) -> str:
    """Short stable hash of a run configuration, for filenames and resume."""
    canon = ",".join(f"{k}={fields[k]}" for k in sorted(fields))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class TrainRecord:
    """Outcome of one training run."""

    fingerprint: str
    loss_history: list[float] = field(default_factory=list)
    final_loss: float = float("nan")
    rel_l2: float = float("nan")
    seed: int = 0
    diverged: bool = False
    wall_time_s: float = 0.0


def fit_arrays(
    net: KanNetwork,
    x: np.ndarray,
    target: np.ndarray,
    epochs: int,
    lr: float = 1e-3,
    snapshot_iters: tuple[int, ...] = (),
    on_snapshot=None,
) -> tuple[list[float], float, bool]:
    """Full-batch Adam on the MSE between net(x) and target.

    Returns (per-epoch loss history, last loss value, diverged flag);
    the recorded loss at epoch ``e`` reflects the parameters after that
    epoch's update.  ``on_snapshot(iteration, net)`` fires at the
    requested iteration counts (0 = before any update).
    """
    from .network import grad_arrays, param_arrays

    params = param_arrays(net)
    state = AdamState.for_params(params, lr=lr)
    loss_fn = mse_loss_and_grad(target)
    history: list[float] = []
    marks = set(snapshot_iters)

    if on_snapshot is not None and 0 in marks:
        on_snapshot(0, net)
    y, _, tapes = run_forward(net, x, with_tapes=True)
    loss, gy = loss_fn(y)
    for it in range(1, epochs + 1):
        flat = grad_arrays(run_backward(net, tapes, gy))
        if not all(np.isfinite(g).all() for g in flat):
            return history, loss, True
        adam_step(params, flat, state)
        y, _, tapes = run_forward(net, x, with_tapes=True)
        loss, gy = loss_fn(y)
        if not np.isfinite(loss):
            return history, loss, True
        history.append(loss)
        if on_snapshot is not None and it in marks:
            on_snapshot(it, net)
    return history, loss, False


def train_fit(net: KanNetwork, task, epochs: int, seed: int, lr: float = 1e-3) -> TrainRecord:
    """Full-batch supervised training against a fit task.

    One epoch = one Adam step on the fixed sample set.  Divergence
    (non-finite loss) truncates the history and is flagged rather than
    raised.
    """
    t0 = time.perf_counter()
    x = task.sample_inputs(seed)
    target = task.eval_target(x)[:, None]
    record = TrainRecord(fingerprint=task.fingerprint(seed, epochs), seed=seed)
    record.loss_history, loss, record.diverged = fit_arrays(
        net, x, target, epochs, lr=lr
    )

    record.final_loss = record.loss_history[-1] if record.loss_history else float(loss)
    if not record.diverged:
        grid = task.eval_grid_points()
        pred = network_forward(net, grid)
        try:
            record.rel_l2 = relative_l2(pred[:, 0], task.eval_target(grid))
        except ValueError:  # zero reference: metric undefined, loss still stands
            record.rel_l2 = float("nan")
    record.wall_time_s = time.perf_counter() - t0
    return record
