"""Scikit-learn style regressor wrapping the spline network engine,
so the model composes with pipelines, grid search, and scoring."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .initschemes import SCHEME_KINDS, InitScheme, apply_scheme
from .network import build_network, network_forward
from .optim import fit_arrays


class KanRegressor(RegressorMixin, BaseEstimator):
    """Spline-network regressor with selectable initialization scheme.

    Parameters
    ----------
    hidden_layers : tuple of int
        Hidden widths, e.g. ``(8, 8)`` for two hidden layers of 8.
    grid_size : int
        Spline grid intervals per input (G).
    spline_order : int
        B-spline order (k); the grids are anchored on [-1, 1].
    init : str
        One of baseline, lecun-numerical, lecun-normalized, glorot,
        power-law.
    alpha, beta : float
        Power-law exponents (ignored by the other schemes).
    epochs : int
        Full-batch Adam steps.
    learning_rate : float
        Adam step size.
    random_state : int
        Seed for the weight draws.
    """

    def __init__(
        self,
        hidden_layers: tuple[int, ...] = (8, 8),
        grid_size: int = 5,
        spline_order: int = 3,
        init: str = "power-law",
        alpha: float = 0.25,
        beta: float = 1.75,
        epochs: int = 2000,
        learning_rate: float = 1e-3,
        random_state: int = 0,
    ):
        self.hidden_layers = hidden_layers
        self.grid_size = grid_size
        self.spline_order = spline_order
        self.init = init
        self.alpha = alpha
        self.beta = beta
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.init not in SCHEME_KINDS:
            raise ValueError(f"unknown init scheme: {self.init!r}")
        scheme = InitScheme(self.init, self.alpha, self.beta)
        net = build_network(
            [X.shape[1], *self.hidden_layers, 1],
            G=self.grid_size,
            k=self.spline_order,
        )
        apply_scheme(net, scheme, seed=self.random_state)
        history, last, diverged = fit_arrays(
            net,
            X.astype(float),
            np.asarray(y, dtype=float)[:, None],
            epochs=self.epochs,
            lr=self.learning_rate,
        )
        self.network_ = net
        self.loss_history_ = history
        self.final_loss_ = history[-1] if history else float(last)
        self.diverged_ = diverged
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features; expected {self.n_features_in_}"
            )
        return network_forward(self.network_, X.astype(float))[:, 0]
