"""Target-function suites: five composite 2-d benchmarks and the
dimensionless Feynman subset, with their sampling domains and
evaluation grids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optim import config_fingerprint
from .special import bessel_i1, erf, erfinv, fresnel_c, fresnel_s, sgn_half_minus


def _f1(x, y):
    return x * y


def _f2(x, y):
    return np.exp(np.sin(np.pi * x) + y * y)


def _f3(x, y):
    return (
        bessel_i1(x)
        + np.exp(np.exp(-np.abs(y)) * bessel_i1(y))
        + np.sin(x * y)
    )


def _f4(x, y):
    arg = _f3(x, y) + erfinv(y)
    return fresnel_s(arg) * fresnel_c(arg)


def _min_xy_inv(x, y):
    """min(xy, 1/(xy)) with the xy -> 0 limit taken along the xy branch."""
    p = x * y
    with np.errstate(divide="ignore"):
        inv = np.where(p == 0.0, np.inf, 1.0 / p)
    return np.where(p == 0.0, 0.0, np.minimum(p, inv))


def _f5(x, y):
    return y * sgn_half_minus(x) + erf(x) * _min_xy_inv(x, y)


_FIT_FUNCTIONS = {"f1": _f1, "f2": _f2, "f3": _f3, "f4": _f4, "f5": _f5}

# Feynman subset: id -> (arity, formula over columns x1, x2[, x3]).
_FEYNMAN = {
    "I.6.2": (2, lambda x1, x2: np.exp(-(x1**2) / (2 * x2**2)) / np.sqrt(2 * np.pi * x2**2)),
    "I.6.2b": (3, lambda x1, x2, x3: np.exp(-((x1 - x2) ** 2) / (2 * x3**2)) / np.sqrt(2 * np.pi * x3**2)),
    "I.12.11": (2, lambda x1, x2: 1 + x1 * np.sin(x2)),
    "I.13.12": (2, lambda x1, x2: x1 * (1 / x2 - 1)),
    "I.16.6": (2, lambda x1, x2: (x1 + x2) / (1 + x1 * x2)),
    "I.18.4": (2, lambda x1, x2: (1 + x1 * x2) / (1 + x1)),
    "I.26.2": (2, lambda x1, x2: np.arcsin(x1 * np.sin(x2))),
    "I.27.6": (2, lambda x1, x2: 1 / (1 + x1 * x2)),
    "I.29.16": (3, lambda x1, x2, x3: np.sqrt(1 + x1**2 - 2 * x1 * np.cos(x2 - x3))),
    "I.30.3": (2, lambda x1, x2: np.sin(x1 * x2 / 2) ** 2 / np.sin(x2 / 2) ** 2),
    "I.40.1": (2, lambda x1, x2: x1 * np.exp(-x2)),
    "I.50.26": (2, lambda x1, x2: np.cos(x1) + x2 * np.cos(x1) ** 2),
    "II.2.42": (2, lambda x1, x2: (x1 - 1) * x2),
    "II.6.15a": (3, lambda x1, x2, x3: x3 / (4 * np.pi) * np.sqrt(x1**2 + x2**2)),
    "II.11.7": (3, lambda x1, x2, x3: x1 * (1 + x2 * np.cos(x3))),
    "II.11.27": (2, lambda x1, x2: (x1 * x2) / (1 - x1 * x2 / 3)),
    "II.35.18": (2, lambda x1, x2: x1 / (np.exp(x2) + np.exp(-x2))),
    "II.36.38": (3, lambda x1, x2, x3: x1 + x2 * x3),
    "III.10.19": (2, lambda x1, x2: np.sqrt(1 + x1**2 + x2**2)),
    "III.17.37": (3, lambda x1, x2, x3: x2 * (1 + x1 * np.cos(x3))),
}

FIT_IDS = tuple(_FIT_FUNCTIONS)
FEYNMAN_IDS = tuple(_FEYNMAN)
ALL_TARGET_IDS = FIT_IDS + FEYNMAN_IDS

#: Margin and exclusion radius for the punctured Feynman domain.
_FEYNMAN_EXCLUSION = 1e-9
_FEYNMAN_GRID_MARGIN = 1e-3


@dataclass(frozen=True)
class FitTask:
    """One supervised fitting benchmark."""

    function_id: str
    input_dim: int
    n_train: int = 4000
    punctured: bool = False  # Feynman: domain (-1,0) u (0,1) per coordinate

    def fingerprint(self, seed: int, epochs: int) -> str:
        return config_fingerprint(
            task=self.function_id, seed=seed, epochs=epochs, n_train=self.n_train
        )

    def eval_target(self, points: np.ndarray) -> np.ndarray:
        """Evaluate the target formula at a batch of points."""
        points = np.asarray(points, dtype=float)
        if points.shape[1] != self.input_dim:
            raise ValueError(
                f"{self.function_id} takes {self.input_dim} inputs, got {points.shape[1]}"
            )
        if self.function_id in _FIT_FUNCTIONS:
            return np.asarray(
                _FIT_FUNCTIONS[self.function_id](points[:, 0], points[:, 1]), dtype=float
            )
        _, fn = _FEYNMAN[self.function_id]
        cols = [points[:, i] for i in range(self.input_dim)]
        if self.punctured:
            excluded = (np.abs(points) < _FEYNMAN_EXCLUSION) | (
                np.abs(np.abs(points) - 1.0) < _FEYNMAN_EXCLUSION
            )
            if excluded.any():
                raise ValueError("singular input: coordinate at an excluded point")
        return np.asarray(fn(*cols), dtype=float)

    def sample_inputs(self, seed: int) -> np.ndarray:
        """Uniform training samples; Feynman redraws near {-1, 0, 1}."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1, 1, size=(self.n_train, self.input_dim))
        if self.punctured:
            for _ in range(100):
                bad = (np.abs(x) < _FEYNMAN_EXCLUSION) | (
                    np.abs(np.abs(x) - 1.0) < _FEYNMAN_EXCLUSION
                )
                if not bad.any():
                    break
                x[bad] = rng.uniform(-1, 1, size=int(bad.sum()))
        return x

    def eval_grid_points(self) -> np.ndarray:
        """Tensor-product evaluation grid over the task domain.

        Plain tasks use an inclusive 200-per-axis grid; punctured tasks
        use cell centers of [-1+delta, 1-delta] (200 or 30 per axis) so
        no coordinate can hit an excluded point.
        """
        if self.input_dim == 2:
            n = 200
        else:
            n = 30
        if self.punctured:
            lo, hi = -1.0 + _FEYNMAN_GRID_MARGIN, 1.0 - _FEYNMAN_GRID_MARGIN
            step = (hi - lo) / n
            axis = lo + step * (np.arange(n) + 0.5)
        else:
            axis = np.linspace(-1.0, 1.0, n)
        grids = np.meshgrid(*([axis] * self.input_dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


def make_task(function_id: str, n_train: int = 4000) -> FitTask:
    """Look up a task by id (f1..f5 or a Feynman index such as I.6.2)."""
    if function_id in _FIT_FUNCTIONS:
        return FitTask(function_id, input_dim=2, n_train=n_train)
    if function_id in _FEYNMAN:
        arity, _ = _FEYNMAN[function_id]
        return FitTask(function_id, input_dim=arity, n_train=n_train, punctured=True)
    raise ValueError(f"unknown target function: {function_id!r}")


def eval_target(task: FitTask, points) -> np.ndarray:
    return task.eval_target(np.asarray(points, dtype=float))


def sample_inputs(task: FitTask, seed: int) -> np.ndarray:
    return task.sample_inputs(seed)


def eval_grid_points(task: FitTask) -> np.ndarray:
    return task.eval_grid_points()
