"""Residual Jacobians, plain and attention-weighted tangent-kernel
blocks, and eigenvalue spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import (
    KanNetwork,
    flatten_grads,
    run_backward,
    run_forward,
)
from .pde import PdeProblem, RbaState, _pde_backward, _pde_forward


@dataclass
class NtkSpectrum:
    """Descending eigenvalues of one kernel block at one iteration."""

    eigenvalues: np.ndarray
    iteration: int
    block_id: str  # "fit" | "pde" | "bc"


class FitResidual:
    """r_i = y(x_i) - t_i for a supervised batch (single-output nets)."""

    def __init__(self, targets=None):
        self.targets = targets

    def values_and_aux(self, net, points):
        y, _, tapes = run_forward(net, points, with_tapes=True)
        res = y[:, 0] - (0.0 if self.targets is None else self.targets)
        return res, {"tapes": tapes}

    def backward(self, net, aux, gres):
        return run_backward(net, aux["tapes"], gres[:, None])


class PdeResidualFn:
    """Equation residual of a PDE problem at given collocation points."""

    def __init__(self, problem: PdeProblem):
        self.problem = problem

    def values_and_aux(self, net, points):
        return _pde_forward(self.problem, net, points, with_tapes=True)

    def backward(self, net, aux, gres):
        return _pde_backward(self.problem, net, aux, gres)


class BcResidualFn:
    """Boundary/initial residual u(x) - u_target over given points."""

    def __init__(self, problem: PdeProblem, targets=None):
        self.problem = problem
        self.targets = targets

    def values_and_aux(self, net, points):
        targets = self.targets
        if targets is None:
            targets = self.problem.bc_values
        y, _, tapes = run_forward(
            net, self.problem.map_points(points), with_tapes=True
        )
        return y[:, 0] - targets, {"tapes": tapes}

    def backward(self, net, aux, gres):
        return run_backward(net, aux["tapes"], gres[:, None])


def residual_jacobian(net: KanNetwork, residual_fn, points) -> np.ndarray:
    """Rows are d r_i / d theta over all parameters.

    The flattening order is fixed: per layer, r then c then b, row-major
    each.  One reverse pass per residual over a shared forward tape.

    Raises:
        ValueError: non-finite residuals.
    """
    res, aux = residual_fn.values_and_aux(net, points)
    if not np.isfinite(res).all():
        raise ValueError("non-finite residual")
    n = len(res)
    jac = np.empty((n, net.parameter_count()))
    onehot = np.zeros(n)
    for i in range(n):
        onehot[i] = 1.0
        jac[i] = flatten_grads(residual_fn.backward(net, aux, onehot))
        onehot[i] = 0.0
    return jac


def weighted_ntk_blocks(
    j_pde: np.ndarray, j_bc: np.ndarray, rba: RbaState
) -> dict[tuple[str, str], np.ndarray]:
    """Kernel blocks (A^xi J^xi)(A^zeta J^zeta)^T for xi, zeta in {pde, bc}."""
    if j_pde.shape[1] != j_bc.shape[1]:
        raise ValueError("Jacobians disagree on parameter dimension")
    weighted = {
        "pde": rba.alpha_pde[:, None] * j_pde,
        "bc": rba.alpha_bc[:, None] * j_bc,
    }
    blocks = {}
    for xi in ("pde", "bc"):
        for zeta in ("pde", "bc"):
            blocks[(xi, zeta)] = weighted[xi] @ weighted[zeta].T
    return blocks


def fit_ntk(net: KanNetwork, points) -> np.ndarray:
    """Plain tangent kernel J J^T over the given inputs."""
    jac = residual_jacobian(net, FitResidual(), points)
    return jac @ jac.T


def subsample_indices(total: int, n: int, seed: int) -> np.ndarray:
    """Seed-deterministic sorted row indices (all rows if n >= total)."""
    if n >= total:
        return np.arange(total)
    idx = np.random.default_rng(seed).choice(total, size=n, replace=False)
    return np.sort(idx)


def subsample_rows(x: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Seed-deterministic row subsample (all rows if n >= len(x))."""
    if n >= len(x):
        return x
    return x[subsample_indices(len(x), n, seed)]


def eigen_spectrum(
    K: np.ndarray, iteration: int = 0, block_id: str = "fit"
) -> NtkSpectrum:
    """Descending real eigenvalues of a (symmetrized) kernel matrix.

    The input is symmetrized as (K + K^T)/2 before decomposition; the
    reconstruction Q diag(w) Q^T is verified to 1e-8 relative in
    Frobenius norm.

    Raises:
        np.linalg.LinAlgError: eigensolver non-convergence or a failed
            reconstruction check.
    """
    K = np.asarray(K, dtype=float)
    sym = 0.5 * (K + K.T)
    w, q = np.linalg.eigh(sym)
    norm = np.linalg.norm(sym)
    if norm > 0:
        recon = (q * w) @ q.T
        if np.linalg.norm(recon - sym) / norm > 1e-8:
            raise np.linalg.LinAlgError("eigendecomposition failed reconstruction")
    return NtkSpectrum(
        eigenvalues=w[::-1].copy(), iteration=iteration, block_id=block_id
    )


def snapshot_iterations(epochs: int) -> tuple[int, ...]:
    """Logging cadence: start, quarter points, and the final iteration."""
    marks = {0, epochs // 4, epochs // 2, (3 * epochs) // 4, epochs}
    return tuple(sorted(marks))
