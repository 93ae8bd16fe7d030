"""Forward PDE benchmarks: residual operators, boundary/initial
conditions, residual-based attention weighting, and the physics-informed
training loop.

Three problems are supported on two-dimensional domains:

- allen-cahn:  u_t - D u_xx - c (u - u^3) = 0         on [0,1] x [-1,1]
- burgers:     u_t + u u_x - nu u_xx = 0              on [0,1] x [-1,1]
- helmholtz:   u_xx + u_yy + u - f = 0                on [-1,1]^2

Network inputs always live in [-1,1]^2 (the spline grids are anchored
there); problems whose first axis is time map it affinely and chain the
constant Jacobian through the residual derivatives.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .network import (
    KanNetwork,
    grad_arrays,
    network_forward,
    run_backward,
    run_forward,
)
from .optim import AdamState, TrainRecord, adam_step, config_fingerprint, relative_l2

PDE_KINDS = ("allen-cahn", "burgers", "helmholtz")


@dataclass
class RbaState:
    """Residual-based attention weights, one per collocation/condition point."""

    gamma: float
    eta: float
    alpha_pde: np.ndarray
    alpha_bc: np.ndarray

    @property
    def ceiling(self) -> float:
        return max(1.0, self.eta / (1.0 - self.gamma))


@dataclass
class PdeProblem:
    """One governing equation with its collocation layout."""

    kind: str
    coeffs: dict[str, float]
    x_pde: np.ndarray  # (N_pde, 2) physical coordinates
    x_bc: np.ndarray  # (N_bc, 2)
    bc_values: np.ndarray  # (N_bc,)
    map_scale: np.ndarray  # physical -> network affine map, per axis
    map_offset: np.ndarray
    gamma: float = 0.999
    eta: float = 0.01
    seed: int = 0

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        return pts * self.map_scale + self.map_offset

    def fresh_rba(self) -> RbaState:
        return RbaState(
            gamma=self.gamma,
            eta=self.eta,
            alpha_pde=np.ones(len(self.x_pde)),
            alpha_bc=np.ones(len(self.x_bc)),
        )

    def fingerprint(self, seed: int, epochs: int) -> str:
        return config_fingerprint(
            task=self.kind,
            seed=seed,
            epochs=epochs,
            n_pde=len(self.x_pde),
            n_bc=len(self.x_bc),
        )


_DEFAULT_COEFFS = {
    "allen-cahn": {"D": 1e-4, "c": 5.0},
    "burgers": {"nu": 0.01 / np.pi},
    "helmholtz": {"a1": 1.0, "a2": 4.0},
}


def _domain(kind: str) -> tuple[tuple[float, float], tuple[float, float]]:
    if kind == "helmholtz":
        return (-1.0, 1.0), (-1.0, 1.0)
    return (0.0, 1.0), (-1.0, 1.0)  # (t, x)


def make_problem(
    kind: str,
    seed: int = 0,
    n_grid_side: int = 64,
    n_pde: int | None = None,
    n_bc_each: int = 64,
    coeffs: dict[str, float] | None = None,
    gamma: float = 0.999,
    eta: float = 0.01,
) -> PdeProblem:
    """Build a problem with seed-deterministic collocation sets.

    PDE collocation points are drawn without replacement from an
    ``n_grid_side`` x ``n_grid_side`` tensor grid (by default all 4096
    nodes, shuffled); each boundary/initial condition gets
    ``n_bc_each`` points sampled uniformly along its axis.
    """
    if kind not in PDE_KINDS:
        raise ValueError(f"unknown PDE kind: {kind!r}")
    cf = dict(_DEFAULT_COEFFS[kind])
    cf.update(coeffs or {})
    rng = np.random.default_rng(seed)
    (a_lo, a_hi), (b_lo, b_hi) = _domain(kind)

    ax0 = np.linspace(a_lo, a_hi, n_grid_side)
    ax1 = np.linspace(b_lo, b_hi, n_grid_side)
    g0, g1 = np.meshgrid(ax0, ax1, indexing="ij")
    nodes = np.stack([g0.ravel(), g1.ravel()], axis=1)
    if n_pde is None:
        n_pde = len(nodes)
    if n_pde > len(nodes):
        raise ValueError("n_pde exceeds the collocation grid size")
    x_pde = nodes[rng.permutation(len(nodes))[:n_pde]]

    if kind == "helmholtz":
        edges = []
        for x_fixed in (b_lo, b_hi):
            ys = rng.uniform(b_lo, b_hi, n_bc_each)
            edges.append(np.stack([np.full(n_bc_each, x_fixed), ys], axis=1))
        for y_fixed in (b_lo, b_hi):
            xs = rng.uniform(b_lo, b_hi, n_bc_each)
            edges.append(np.stack([xs, np.full(n_bc_each, y_fixed)], axis=1))
        x_bc = np.concatenate(edges)
        bc_values = np.zeros(len(x_bc))
    else:
        x_ic = rng.uniform(b_lo, b_hi, n_bc_each)
        ic_pts = np.stack([np.zeros(n_bc_each), x_ic], axis=1)
        if kind == "allen-cahn":
            ic_vals = x_ic**2 * np.cos(np.pi * x_ic)
            wall = -1.0
        else:
            ic_vals = -np.sin(np.pi * x_ic)
            wall = 0.0
        walls = []
        for x_fixed in (b_lo, b_hi):
            ts = rng.uniform(a_lo, a_hi, n_bc_each)
            walls.append(np.stack([ts, np.full(n_bc_each, x_fixed)], axis=1))
        x_bc = np.concatenate([ic_pts] + walls)
        bc_values = np.concatenate([ic_vals, np.full(2 * n_bc_each, wall)])

    scale = np.array([2.0 / (a_hi - a_lo), 2.0 / (b_hi - b_lo)])
    offset = np.array(
        [-(a_hi + a_lo) / (a_hi - a_lo), -(b_hi + b_lo) / (b_hi - b_lo)]
    )
    return PdeProblem(
        kind=kind,
        coeffs=cf,
        x_pde=x_pde,
        x_bc=x_bc,
        bc_values=bc_values,
        map_scale=scale,
        map_offset=offset,
        gamma=gamma,
        eta=eta,
        seed=seed,
    )


def helmholtz_source(problem: PdeProblem, points: np.ndarray) -> np.ndarray:
    a1, a2 = problem.coeffs["a1"], problem.coeffs["a2"]
    return (
        (1.0 - np.pi**2 * (a1**2 + a2**2))
        * np.sin(np.pi * a1 * points[:, 0])
        * np.sin(np.pi * a2 * points[:, 1])
    )


def helmholtz_reference(points: np.ndarray, a1: float = 1.0, a2: float = 4.0) -> np.ndarray:
    """Closed-form solution sin(pi a1 x) sin(pi a2 y)."""
    points = np.asarray(points, dtype=float)
    return np.sin(np.pi * a1 * points[:, 0]) * np.sin(np.pi * a2 * points[:, 1])


def _wanted(kind: str) -> dict[int, int]:
    if kind == "helmholtz":
        return {0: 2, 1: 2}
    return {0: 1, 1: 2}


def _residual_from_parts(problem, points, u, derivs):
    s0, s1 = problem.map_scale
    if problem.kind == "allen-cahn":
        D, c = problem.coeffs["D"], problem.coeffs["c"]
        return s0 * derivs[(0, 1)] - D * s1**2 * derivs[(1, 2)] - c * (u - u**3)
    if problem.kind == "burgers":
        nu = problem.coeffs["nu"]
        return s0 * derivs[(0, 1)] + u * (s1 * derivs[(1, 1)]) - nu * s1**2 * derivs[(1, 2)]
    f = helmholtz_source(problem, points)[:, None]
    return s0**2 * derivs[(0, 2)] + s1**2 * derivs[(1, 2)] + u - f


def _pde_forward(problem: PdeProblem, net: KanNetwork, points, with_tapes=False):
    """Residual plus everything needed to backpropagate through it."""
    mapped = problem.map_points(np.asarray(points, dtype=float))
    u, derivs, tapes = run_forward(net, mapped, _wanted(problem.kind), with_tapes)
    res = _residual_from_parts(problem, points, u, derivs)
    aux = {"u": u, "derivs": derivs, "tapes": tapes}
    return res[:, 0], aux


def _pde_backward(problem: PdeProblem, net: KanNetwork, aux, gres: np.ndarray):
    """Parameter gradients of sum(gres * residual)."""
    g = gres[:, None]
    u = aux["u"]
    derivs = aux["derivs"]
    s0, s1 = problem.map_scale
    if problem.kind == "allen-cahn":
        D, c = problem.coeffs["D"], problem.coeffs["c"]
        gy = g * (-c * (1.0 - 3.0 * u**2))
        gdy = {0: g * s0}
        gd2y = {1: g * (-D * s1**2)}
    elif problem.kind == "burgers":
        nu = problem.coeffs["nu"]
        gy = g * (s1 * derivs[(1, 1)])
        gdy = {0: g * s0, 1: g * (u * s1)}
        gd2y = {1: g * (-nu * s1**2)}
    else:
        gy = g.copy()
        gdy = {}
        gd2y = {0: g * s0**2, 1: g * s1**2}
    return run_backward(net, aux["tapes"], gy, gdy, gd2y)


def pde_residual(problem: PdeProblem, net: KanNetwork, points) -> np.ndarray:
    """Equation residual at the given physical points.

    Raises:
        ValueError: if the network splines cannot support second
            derivatives (k < 2).
    """
    res, _ = _pde_forward(problem, net, points)
    return res


def _bc_forward(problem: PdeProblem, net: KanNetwork, with_tapes=False):
    mapped = problem.map_points(problem.x_bc)
    u, _, tapes = run_forward(net, mapped, with_tapes=with_tapes)
    return u[:, 0] - problem.bc_values, {"tapes": tapes}


def bc_residuals(problem: PdeProblem, net: KanNetwork) -> np.ndarray:
    """u_pred - u_target over the stacked initial + boundary points."""
    res, _ = _bc_forward(problem, net)
    return res


def rba_update(state: RbaState, res_pde: np.ndarray, res_bc: np.ndarray) -> RbaState:
    """alpha <- gamma alpha + eta |r| / max|r|, per group, in place.

    An all-zero residual group simply decays by gamma (the normalized
    ratio is taken as 0).
    """
    for alpha, res in ((state.alpha_pde, res_pde), (state.alpha_bc, res_bc)):
        mx = np.max(np.abs(res)) if len(res) else 0.0
        ratio = np.abs(res) / mx if mx > 0 else np.zeros_like(res)
        alpha *= state.gamma
        alpha += state.eta * ratio
    return state


def piml_loss(
    problem: PdeProblem, net: KanNetwork, state: RbaState
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Weighted residual loss and the raw residuals for the next RBA update."""
    res_pde, _ = _pde_forward(problem, net, problem.x_pde)
    res_bc, _ = _bc_forward(problem, net)
    loss = _loss_value(state, res_pde, res_bc)
    if not np.isfinite(loss):
        raise ValueError("non-finite residual loss")
    return loss, (res_pde, res_bc)


def _loss_value(state: RbaState, res_pde: np.ndarray, res_bc: np.ndarray) -> float:
    wp = state.alpha_pde * res_pde
    wb = state.alpha_bc * res_bc
    return float(np.mean(wp * wp) + np.mean(wb * wb))


@dataclass
class ReferenceSolution:
    """Gridded reference values: row coordinate is t (or y), column is x."""

    row_coords: np.ndarray
    col_coords: np.ndarray
    values: np.ndarray

    def points(self) -> np.ndarray:
        r, c = np.meshgrid(self.row_coords, self.col_coords, indexing="ij")
        return np.stack([r.ravel(), c.ravel()], axis=1)


def load_reference_solution(path: str) -> ReferenceSolution:
    """Parse the CSV grid format (header row of x values, then t rows).

    Raises:
        FileNotFoundError: missing file.
        ValueError: malformed contents or non-monotone coordinates.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise ValueError("malformed reference file: need a header and data rows")
    try:
        col_coords = np.array([float(v) for v in lines[0].split(",")[1:]])
        rows, vals = [], []
        for ln in lines[1:]:
            cells = ln.split(",")
            rows.append(float(cells[0]))
            vals.append([float(v) for v in cells[1:]])
        row_coords = np.array(rows)
        values = np.array(vals)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"malformed reference file: {exc}") from exc
    if values.shape != (len(row_coords), len(col_coords)):
        raise ValueError("malformed reference file: ragged rows")
    if np.any(np.diff(col_coords) <= 0) or np.any(np.diff(row_coords) <= 0):
        raise ValueError("non-monotone coordinates in reference file")
    return ReferenceSolution(row_coords, col_coords, values)


def _rel_l2_vs_reference(problem, net, reference: ReferenceSolution | None) -> float:
    if problem.kind == "helmholtz":
        ax = np.linspace(-1, 1, 512)
        gx, gy = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        ref = helmholtz_reference(pts, problem.coeffs["a1"], problem.coeffs["a2"])
    elif reference is not None:
        pts = reference.points()
        ref = reference.values.ravel()
    else:
        return float("nan")
    pred = network_forward(net, problem.map_points(pts))[:, 0]
    return relative_l2(pred, ref)


def train_pde(
    net: KanNetwork,
    problem: PdeProblem,
    epochs: int,
    seed: int,
    lr: float = 1e-3,
    reference: ReferenceSolution | None = None,
    snapshot_iters: tuple[int, ...] = (),
    on_snapshot=None,
) -> TrainRecord:
    """Full-batch physics-informed training with RBA weighting.

    Per iteration: evaluate the weighted loss, take an Adam step on its
    exact gradient (attention weights held constant within the step),
    then update the attention weights from that iteration's residuals.
    ``on_snapshot(iteration, net, rba_state)`` fires at the requested
    iteration counts (0 = at initialization).
    """
    from .network import param_arrays

    t0 = time.perf_counter()
    record = TrainRecord(fingerprint=problem.fingerprint(seed, epochs), seed=seed)
    state = problem.fresh_rba()
    params = param_arrays(net)
    adam = AdamState.for_params(params, lr=lr)
    snapshot_iters = set(snapshot_iters)

    def maybe_snapshot(it):
        if on_snapshot is not None and it in snapshot_iters:
            on_snapshot(it, net, state)

    maybe_snapshot(0)
    res_pde, aux_pde = _pde_forward(problem, net, problem.x_pde, with_tapes=True)
    res_bc, aux_bc = _bc_forward(problem, net, with_tapes=True)
    loss = _loss_value(state, res_pde, res_bc)
    for it in range(1, epochs + 1):
        n_pde, n_bc = len(res_pde), len(res_bc)
        gres_pde = (2.0 / n_pde) * state.alpha_pde**2 * res_pde
        gres_bc = (2.0 / n_bc) * state.alpha_bc**2 * res_bc
        grads_pde = _pde_backward(problem, net, aux_pde, gres_pde)
        gy_bc = gres_bc[:, None]
        grads_bc = run_backward(net, aux_bc["tapes"], gy_bc)
        flat = [
            gp + gb
            for gp, gb in zip(grad_arrays(grads_pde), grad_arrays(grads_bc))
        ]
        if not all(np.isfinite(g).all() for g in flat):
            record.diverged = True
            break
        adam_step(params, flat, adam)
        rba_update(state, res_pde, res_bc)

        res_pde, aux_pde = _pde_forward(problem, net, problem.x_pde, with_tapes=True)
        res_bc, aux_bc = _bc_forward(problem, net, with_tapes=True)
        loss = _loss_value(state, res_pde, res_bc)
        if not np.isfinite(loss):
            record.diverged = True
            break
        record.loss_history.append(loss)
        maybe_snapshot(it)

    record.final_loss = record.loss_history[-1] if record.loss_history else float(loss)
    if not record.diverged:
        record.rel_l2 = _rel_l2_vs_reference(problem, net, reference)
    record.wall_time_s = time.perf_counter() - t0
    return record
