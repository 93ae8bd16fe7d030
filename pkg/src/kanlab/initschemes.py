"""The five weight-initialization schemes and their moment estimators.

Every scheme sets the scaling weights ``c`` to exactly 1 and draws ``r``
and ``b`` from zero-mean normal distributions; they differ only in how
the two standard deviations are chosen:

- baseline:          classical Glorot for ``r`` (var 2/(n_in+n_out)),
                     sigma = 0.1 for ``b``.
- lecun-numerical:   forward variance preservation, with the basis
                     second moment estimated by Monte Carlo sampling.
- lecun-normalized:  same principle, but the basis second moment is
                     forced to 1 by switching the layer to
                     batch-normalized basis values.
- glorot:            balances forward and backward variance using both
                     the zeroth and first derivative moments.
- power-law:         sigma = (1 / (n_in (G+k+1)))^exponent with tunable
                     exponents for the residual and basis weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import KanNetwork, _silu_table
from .spline import KnotVector, basis_value_table

SCHEME_KINDS = (
    "baseline",
    "lecun-numerical",
    "lecun-normalized",
    "glorot",
    "power-law",
)

#: Default exponent grid searched over by the benchmark harness.
POWER_LAW_EXPONENT_SET = tuple(i * 0.25 for i in range(9))  # 0.0 .. 2.0


@dataclass(frozen=True)
class InitScheme:
    """Tagged choice of initialization; exponents apply to power-law only."""

    kind: str
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind: {self.kind!r}")
        if self.kind == "power-law":
            if not (
                math.isfinite(self.alpha)
                and math.isfinite(self.beta)
                and self.alpha >= 0
                and self.beta >= 0
            ):
                raise ValueError("power-law exponents must be finite and >= 0")

    def label(self) -> str:
        if self.kind == "power-law":
            return f"power-law({self.alpha},{self.beta})"
        return self.kind


@dataclass(frozen=True)
class Moments:
    """Second moments of the residual function and basis values/derivatives."""

    mu_R0: float
    mu_R1: float
    mu_B0: float
    mu_B1: float
    n_samples: int
    input_dist: tuple[float, float]


def estimate_moments(
    kv: KnotVector,
    input_dist: tuple[float, float] = (-1.0, 1.0),
    n_samples: int = 100_000,
    seed: int = 0,
) -> Moments:
    """Monte-Carlo second moments under a uniform input distribution.

    ``mu_B0``/``mu_B1`` average over both the samples and all basis
    indices; derivatives are analytic, not finite differences.

    Raises:
        ValueError: if ``n_samples`` < 1000 (estimates too noisy to use).
    """
    if n_samples < 1000:
        raise ValueError(f"bad sample count: need >= 1000, got {n_samples}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(input_dist[0], input_dist[1], size=n_samples)
    btab = basis_value_table(x, kv, max_order=min(1, kv.order_k))
    rtab = _silu_table(x, max_order=1)
    b1 = btab[1] if kv.order_k >= 1 else np.zeros_like(btab[0])
    return Moments(
        mu_R0=float(np.mean(rtab[0] ** 2)),
        mu_R1=float(np.mean(rtab[1] ** 2)),
        mu_B0=float(np.mean(btab[0] ** 2)),
        mu_B1=float(np.mean(b1**2)),
        n_samples=n_samples,
        input_dist=(float(input_dist[0]), float(input_dist[1])),
    )


def lecun_sigma(var_x: float, n_in: int, n_terms: int, mu0: float) -> float:
    """Forward-preserving sigma = sqrt(Var(x) / (n_in (G+k+1) mu))."""
    if mu0 <= 0.0:
        raise ValueError("zero moment: cannot derive a LeCun sigma")
    return math.sqrt(var_x / (n_in * n_terms * mu0))


def glorot_sigma(n_terms: int, n_in: int, n_out: int, mu0: float, mu1: float) -> float:
    """Forward/backward-balanced sigma.

    ``sqrt((1/(G+k+1)) * 2 / (n_in mu0 + n_out mu1))``; with a single
    term and unit moments this is the classical ``sqrt(2/(n_in+n_out))``.
    """
    if mu0 <= 0.0 or mu1 <= 0.0:
        raise ValueError("zero moment: cannot derive a Glorot sigma")
    return math.sqrt((1.0 / n_terms) * (2.0 / (n_in * mu0 + n_out * mu1)))


def power_law_sigma(n_in: int, n_terms: int, exponent: float) -> float:
    """sigma = (1 / (n_in (G+k+1)))^exponent."""
    return (1.0 / (n_in * n_terms)) ** exponent


def _draw(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return np.zeros(shape)
    return rng.normal(0.0, sigma, size=shape)


def apply_baseline(net: KanNetwork, seed: int) -> KanNetwork:
    """c = 1, r ~ N(0, 2/(n_in+n_out)), b ~ N(0, 0.1^2)."""
    rng = np.random.default_rng(seed)
    for l in net.layers:
        l.c[...] = 1.0
        l.r[...] = _draw(rng, l.r.shape, math.sqrt(2.0 / (l.n_in + l.n_out)))
        l.b[...] = _draw(rng, l.b.shape, 0.1)
    return net


def apply_lecun(
    net: KanNetwork,
    moments_per_layer: list[Moments],
    variant: str,
    input_var: float,
    seed: int,
) -> KanNetwork:
    """Forward variance preservation; ``variant`` is numerical or normalized.

    The normalized variant assumes a unit basis second moment and turns
    on each layer's batch-normalized basis.
    """
    if variant not in ("numerical", "normalized"):
        raise ValueError(f"unknown LeCun variant: {variant!r}")
    rng = np.random.default_rng(seed)
    for l, mom in zip(net.layers, moments_per_layer):
        n_terms = l.kv.n_basis + 1
        if input_var == 0.0:
            sigma_r = sigma_b = 0.0
        else:
            sigma_r = lecun_sigma(input_var, l.n_in, n_terms, mom.mu_R0)
            mu_b0 = 1.0 if variant == "normalized" else mom.mu_B0
            sigma_b = lecun_sigma(input_var, l.n_in, n_terms, mu_b0)
        l.c[...] = 1.0
        l.r[...] = _draw(rng, l.r.shape, sigma_r)
        l.b[...] = _draw(rng, l.b.shape, sigma_b)
        if variant == "normalized":
            l.normalized_basis = True
    return net


def apply_glorot(
    net: KanNetwork, moments_per_layer: list[Moments], seed: int
) -> KanNetwork:
    """Balance forward- and backward-pass variance per layer."""
    rng = np.random.default_rng(seed)
    for l, mom in zip(net.layers, moments_per_layer):
        n_terms = l.kv.n_basis + 1
        sigma_r = glorot_sigma(n_terms, l.n_in, l.n_out, mom.mu_R0, mom.mu_R1)
        sigma_b = glorot_sigma(n_terms, l.n_in, l.n_out, mom.mu_B0, mom.mu_B1)
        l.c[...] = 1.0
        l.r[...] = _draw(rng, l.r.shape, sigma_r)
        l.b[...] = _draw(rng, l.b.shape, sigma_b)
    return net


def apply_power_law(net: KanNetwork, alpha: float, beta: float, seed: int) -> KanNetwork:
    """sigma_r/sigma_b from the architectural power law."""
    if alpha < 0 or beta < 0:
        raise ValueError("power-law exponents must be >= 0")
    rng = np.random.default_rng(seed)
    for l in net.layers:
        n_terms = l.kv.n_basis + 1
        l.c[...] = 1.0
        l.r[...] = _draw(rng, l.r.shape, power_law_sigma(l.n_in, n_terms, alpha))
        l.b[...] = _draw(rng, l.b.shape, power_law_sigma(l.n_in, n_terms, beta))
    return net


def apply_scheme(
    net: KanNetwork,
    scheme: InitScheme,
    seed: int,
    input_dist: tuple[float, float] = (-1.0, 1.0),
    moment_samples: int = 100_000,
) -> KanNetwork:
    """Initialize a network under any scheme.

    Moment-based schemes estimate moments per layer under the assumed
    first-layer input distribution (hidden layers reuse it: the
    variance-preservation premise makes their input variance match).
    """
    lo, hi = input_dist
    input_var = (hi - lo) ** 2 / 12.0
    if scheme.kind == "baseline":
        return apply_baseline(net, seed)
    if scheme.kind == "power-law":
        return apply_power_law(net, scheme.alpha, scheme.beta, seed)

    moments: dict[int, Moments] = {}
    per_layer = []
    for l in net.layers:
        key = id(l.kv)
        if key not in moments:
            moments[key] = estimate_moments(
                l.kv, input_dist, n_samples=moment_samples, seed=seed
            )
        per_layer.append(moments[key])
    if scheme.kind == "lecun-numerical":
        return apply_lecun(net, per_layer, "numerical", input_var, seed)
    if scheme.kind == "lecun-normalized":
        return apply_lecun(net, per_layer, "normalized", input_var, seed)
    return apply_glorot(net, per_layer, seed)
