"""Spline-plus-residual network layers, composition, and differentiation.

A layer maps a batch ``x`` of shape ``(N, n_in)`` to ``(N, n_out)`` via

    y[n, j] = sum_i ( r[j, i] * silu(x[n, i])
                      + c[j, i] * sum_m b[j, i, m] * B_m(x[n, i]) )

where ``B_m`` are the ``G + k`` spline basis functions of the layer's
knot vector, optionally standardized over the current batch per
``(i, m)`` pair (``normalized_basis``).

Differentiation is hand-rolled reverse mode at layer granularity.  The
forward pass can simultaneously propagate first and second derivatives
of the outputs with respect to selected network inputs (needed by the
PDE residual operators); the backward pass produces exact parameter
gradients of any scalar built from the outputs and those derivatives.
Gradient correctness is pinned by finite-difference tests rather than
by construction.

Derivative semantics with ``normalized_basis``: batch statistics are
treated as constants of the forward pass when propagating input
derivatives (the per-sample chain rule), while parameter gradients
differentiate through the statistics exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .spline import KnotVector, basis_value_table, build_knot_vector


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def silu(x):
    """SiLU residual path: x * sigmoid(x)."""
    x = np.asarray(x, dtype=float)
    return x * _sigmoid(x)


def silu_prime(x):
    """Exact first derivative of silu."""
    x = np.asarray(x, dtype=float)
    s = _sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


def _silu_table(x: np.ndarray, max_order: int) -> list[np.ndarray]:
    """[silu, silu', ..., silu^(max_order)] up to order 3."""
    s = _sigmoid(x)
    s1 = s * (1.0 - s)
    table = [x * s]
    if max_order >= 1:
        table.append(s + x * s1)
    if max_order >= 2:
        s2 = s1 * (1.0 - 2.0 * s)
        table.append(2.0 * s1 + x * s2)
    if max_order >= 3:
        s2 = s1 * (1.0 - 2.0 * s)
        s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1
        table.append(3.0 * s2 + x * s3)
    return table


@dataclass
class KanLayer:
    """One spline layer; value-semantic, mutated only by init/optimizer."""

    n_in: int
    n_out: int
    kv: KnotVector
    r: np.ndarray
    c: np.ndarray
    b: np.ndarray
    normalized_basis: bool = False
    norm_eps: float = 1e-5
    # Test hook: (mu, sigma) overriding batch statistics; sigma used as-is.
    frozen_stats: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False
    )

    def __post_init__(self):
        m = self.kv.n_basis
        if self.r.shape != (self.n_out, self.n_in):
            raise ValueError(f"r shape {self.r.shape} != {(self.n_out, self.n_in)}")
        if self.c.shape != (self.n_out, self.n_in):
            raise ValueError(f"c shape {self.c.shape} != {(self.n_out, self.n_in)}")
        if self.b.shape != (self.n_out, self.n_in, m):
            raise ValueError(
                f"b shape {self.b.shape} != {(self.n_out, self.n_in, m)}"
            )
        for name in ("r", "c", "b"):
            if not np.isfinite(getattr(self, name)).all():
                raise ValueError(f"non-finite weights in {name}")


@dataclass
class KanNetwork:
    layers: list[KanLayer]

    def __post_init__(self):
        for a, bnext in zip(self.layers, self.layers[1:]):
            if a.n_out != bnext.n_in:
                raise ValueError(
                    f"layer width mismatch: {a.n_out} -> {bnext.n_in}"
                )

    @property
    def n_in(self) -> int:
        return self.layers[0].n_in

    @property
    def n_out(self) -> int:
        return self.layers[-1].n_out

    def parameter_count(self) -> int:
        return sum(l.r.size + l.c.size + l.b.size for l in self.layers)


def build_network(
    widths: list[int],
    G: int,
    k: int = 3,
    domain: tuple[float, float] = (-1.0, 1.0),
    normalized_basis: bool = False,
    norm_eps: float = 1e-5,
) -> KanNetwork:
    """Zero-initialized network with the given layer widths.

    ``widths`` includes input and output dims, e.g. ``[2, 8, 8, 1]``.
    """
    if len(widths) < 2:
        raise ValueError("need at least input and output widths")
    kv = build_knot_vector(domain[0], domain[1], G, k)
    layers = []
    for n_in, n_out in zip(widths, widths[1:]):
        layers.append(
            KanLayer(
                n_in=n_in,
                n_out=n_out,
                kv=kv,
                r=np.zeros((n_out, n_in)),
                c=np.zeros((n_out, n_in)),
                b=np.zeros((n_out, n_in, kv.n_basis)),
                normalized_basis=normalized_basis,
                norm_eps=norm_eps,
            )
        )
    return KanNetwork(layers)


def normalized_basis_values(raw: np.ndarray, eps: float) -> np.ndarray:
    """Standardize basis values over the batch axis per (input, basis) pair.

    ``raw`` has shape ``(N, n_in, n_basis)`` (or ``(N, n_basis)``); the
    batch must contain at least two samples for the variance to be
    defined.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape[0] < 2:
        raise ValueError("batch too small: need at least 2 samples")
    mu = raw.mean(axis=0)
    var = raw.var(axis=0)
    return (raw - mu) / np.sqrt(var + eps)


@dataclass
class _Tape:
    """Everything a layer's backward pass needs from its forward pass."""

    x: np.ndarray
    R: list[np.ndarray]
    S: list[np.ndarray]
    T: list[np.ndarray]
    W: np.ndarray  # c[:, :, None] * b, shape (J, I, M)
    mu: np.ndarray | None = None
    sdev: np.ndarray | None = None  # sqrt(var + eps), or frozen sigma
    dev: np.ndarray | None = None  # S[0] - mu
    stats_are_frozen: bool = False
    dx: dict[int, np.ndarray] = field(default_factory=dict)
    d2x: dict[int, np.ndarray] = field(default_factory=dict)
    # Forward intermediates reused by the backward pass.
    r1dx: dict[int, np.ndarray] = field(default_factory=dict)
    t1dx: dict[int, np.ndarray] = field(default_factory=dict)
    coef_r: dict[int, np.ndarray] = field(default_factory=dict)
    coef_t: dict[int, np.ndarray] = field(default_factory=dict)


@dataclass
class LayerGrads:
    r: np.ndarray
    c: np.ndarray
    b: np.ndarray


def _layer_run(
    layer: KanLayer,
    x: np.ndarray,
    dx: dict[int, np.ndarray],
    d2x: dict[int, np.ndarray],
    table_order: int,
):
    """Forward one layer, propagating any requested input derivatives.

    Returns (y, dy, d2y, tape) where dy/d2y map source input dims to
    ``(N, n_out)`` arrays.
    """
    fwd_order = 0
    if dx:
        fwd_order = 1
    if d2x:
        fwd_order = 2
    S = basis_value_table(x, layer.kv, max_order=max(table_order, fwd_order))
    R = _silu_table(x, max_order=max(table_order, fwd_order))

    if layer.normalized_basis:
        if layer.frozen_stats is not None:
            mu, sdev = layer.frozen_stats
            mu = np.broadcast_to(np.asarray(mu, float), S[0].shape[1:])
            sdev = np.broadcast_to(np.asarray(sdev, float), S[0].shape[1:])
            frozen = True
        else:
            mu = S[0].mean(axis=0)
            sdev = np.sqrt(S[0].var(axis=0) + layer.norm_eps)
            frozen = False
        dev = S[0] - mu
        T = [dev / sdev] + [Sp / sdev for Sp in S[1:]]
        tape = _Tape(x, R, S, T, layer.c[:, :, None] * layer.b,
                     mu=mu, sdev=sdev, dev=dev, stats_are_frozen=frozen)
    else:
        T = S
        tape = _Tape(x, R, S, T, layer.c[:, :, None] * layer.b)

    N = x.shape[0]
    Wf = tape.W.reshape(layer.n_out, -1).T  # (I*M, J)
    y = R[0] @ layer.r.T + T[0].reshape(N, -1) @ Wf

    dy: dict[int, np.ndarray] = {}
    d2y: dict[int, np.ndarray] = {}
    for d, dxd in dx.items():
        r1dx = R[1] * dxd
        t1dx = T[1] * dxd[:, :, None]
        tape.r1dx[d] = r1dx
        tape.t1dx[d] = t1dx
        dy[d] = r1dx @ layer.r.T + t1dx.reshape(N, -1) @ Wf
    for d, d2xd in d2x.items():
        dxd = dx[d]
        coef_r = R[2] * (dxd * dxd) + R[1] * d2xd
        coef_t = T[2] * (dxd * dxd)[:, :, None] + T[1] * d2xd[:, :, None]
        tape.coef_r[d] = coef_r
        tape.coef_t[d] = coef_t
        d2y[d] = coef_r @ layer.r.T + coef_t.reshape(N, -1) @ Wf
    tape.dx = dx
    tape.d2x = d2x
    return y, dy, d2y, tape


def _layer_backward(
    layer: KanLayer,
    tape: _Tape,
    gy: np.ndarray,
    gdy: dict[int, np.ndarray],
    gd2y: dict[int, np.ndarray],
):
    """Exact reverse-mode step for one layer.

    Takes cotangents of (y, dy, d2y) and returns parameter gradients
    plus cotangents of (x, dx, d2x) to pass to the layer below.
    """
    N, I = tape.x.shape
    J = layer.n_out
    M = layer.kv.n_basis
    R, S, T = tape.R, tape.S, tape.T
    Wf = tape.W.reshape(J, -1)  # (J, I*M)

    max_p = 0
    if gdy:
        max_p = 1
    if gd2y:
        max_p = 2

    def rowdot(a, b):
        return np.einsum("nim,nim->ni", a, b)

    rbar_acc = gy.T @ R[0]
    wbar = gy.T @ T[0].reshape(N, -1)
    a0 = (gy @ Wf).reshape(N, I, M)
    rbar_by_order = [gy @ layer.r, None, None]

    def _acc(slot, lst, value):
        lst[slot] = value if lst[slot] is None else lst[slot] + value

    dxbar: dict[int, np.ndarray] = {}
    d2xbar: dict[int, np.ndarray] = {}
    gemms: list[tuple] = []  # (kind, d, (N,I,M) cotangent factor pieces)
    for d, gd in gdy.items():
        dxd = tape.dx[d]
        rbar_acc += gd.T @ tape.r1dx[d]
        wbar += gd.T @ tape.t1dx[d].reshape(N, -1)
        ad = (gd @ Wf).reshape(N, I, M)
        gemms.append(("first", d, ad))
        _acc(1, rbar_by_order, (gd @ layer.r) * dxd)
        dxbar[d] = (gd @ layer.r) * R[1] + rowdot(ad, T[1])
    for d, hd in gd2y.items():
        dxd = tape.dx[d]
        d2xd = tape.d2x[d]
        dx2 = dxd * dxd
        rbar_acc += hd.T @ tape.coef_r[d]
        wbar += hd.T @ tape.coef_t[d].reshape(N, -1)
        bd = (hd @ Wf).reshape(N, I, M)
        gemms.append(("second", d, bd))
        hr = hd @ layer.r
        _acc(2, rbar_by_order, hr * dx2)
        _acc(1, rbar_by_order, hr * d2xd)
        phi2_dot = hr * R[2] + rowdot(bd, T[2])
        phi1_dot = hr * R[1] + rowdot(bd, T[1])
        dxbar[d] = dxbar.get(d, 0.0) + 2.0 * phi2_dot * dxd
        d2xbar[d] = phi1_dot
    for p in range(max_p + 1):
        if rbar_by_order[p] is None:
            rbar_by_order[p] = np.zeros((N, I))
    rbar_by_order = rbar_by_order[: max_p + 1]

    wbar = wbar.reshape(J, I, M)
    cbar = (wbar * layer.b).sum(-1)
    bbar = wbar * layer.c[:, :, None]

    xbar = np.zeros((N, I))
    for p in range(max_p + 1):
        xbar += rbar_by_order[p] * R[p + 1]

    if layer.normalized_basis:
        # Materialize the basis cotangents and chain through the batch
        # statistics (only normalized layers pay for this path).
        tbar = [a0, None, None]
        for kind, d, mat in gemms:
            if kind == "first":
                _acc(1, tbar, mat * tape.dx[d][:, :, None])
            else:
                dxd = tape.dx[d]
                _acc(2, tbar, mat * (dxd * dxd)[:, :, None])
                _acc(1, tbar, mat * tape.d2x[d][:, :, None])
        for p in range(max_p + 1):
            if tbar[p] is None:
                tbar[p] = np.zeros((N, I, M))
        tbar = tbar[: max_p + 1]
        sdev = tape.sdev
        sbar = np.zeros((I, M))
        for p in range(max_p + 1):
            sbar -= (tbar[p] * T[p]).sum(0)
        sbar /= sdev
        sbar_list = [tbar[p] / sdev for p in range(max_p + 1)]
        devbar = sbar_list[0]
        if not tape.stats_are_frozen:
            vbar = sbar / (2.0 * sdev)
            devbar = devbar + (2.0 / N) * vbar * tape.dev
            mubar = -devbar.sum(0)
            sbar_list[0] = devbar + mubar / N
        else:
            sbar_list[0] = devbar
        for p in range(max_p + 1):
            xbar += (sbar_list[p] * S[p + 1]).sum(-1)
    else:
        # Raw basis: the cotangent tensors are only ever consumed by
        # row-dots against higher-order tables, so contract directly
        # (single-pass reductions, no (N, I, M) temporaries).
        xbar += rowdot(a0, S[1])
        for kind, d, mat in gemms:
            if kind == "first":
                xbar += rowdot(mat, S[2]) * tape.dx[d]
            else:
                dxd = tape.dx[d]
                xbar += rowdot(mat, S[3]) * (dxd * dxd)
                xbar += rowdot(mat, S[2]) * tape.d2x[d]

    return LayerGrads(rbar_acc, cbar, bbar), xbar, dxbar, d2xbar


def _check_batch(x: np.ndarray, n_in: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected 2-d batch, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if x.shape[1] != n_in:
        raise ValueError(f"dimension mismatch: batch width {x.shape[1]} != {n_in}")
    if not np.isfinite(x).all():
        raise ValueError("non-finite input")
    return x


def layer_forward(layer: KanLayer, x) -> np.ndarray:
    """Single-layer forward map on a batch ``(N, n_in) -> (N, n_out)``."""
    x = _check_batch(x, layer.n_in)
    y, _, _, _ = _layer_run(layer, x, {}, {}, table_order=0)
    return y


def run_forward(
    net: KanNetwork,
    x: np.ndarray,
    wanted: dict[int, int] | None = None,
    with_tapes: bool = False,
):
    """Network forward, optionally propagating input derivatives.

    ``wanted`` maps input dims to derivative order (1 or 2).  Returns
    ``(y, derivs, tapes)`` where ``derivs[(d, p)]`` is the p-th
    derivative of every output w.r.t. input dim d, per sample.  Pass
    ``with_tapes=True`` when a backward pass will follow (caches one
    extra derivative order per layer).
    """
    x = _check_batch(x, net.n_in)
    wanted = dict(wanted or {})
    for d, order in wanted.items():
        if order not in (1, 2):
            raise ValueError(f"unsupported order: {order}")
        if not 0 <= d < net.n_in:
            raise ValueError(f"input dim {d} out of range")
        if order == 2 and any(l.kv.order_k < 2 for l in net.layers):
            raise ValueError("unsupported order: second derivatives need k >= 2")

    fwd_order = max(wanted.values(), default=0)
    table_order = min(fwd_order + 1, 3) if with_tapes else fwd_order

    N = x.shape[0]
    dx = {
        d: np.repeat((np.arange(net.n_in) == d)[None, :].astype(float), N, axis=0)
        for d in wanted
    }
    d2x = {d: np.zeros((N, net.n_in)) for d, order in wanted.items() if order == 2}

    tapes = []
    cur = x
    for layer in net.layers:
        y, dy, d2y, tape = _layer_run(layer, cur, dx, d2x, table_order)
        if with_tapes:
            tapes.append(tape)
        cur, dx, d2x = y, dy, d2y

    derivs = {}
    for d, order in wanted.items():
        derivs[(d, 1)] = dx[d]
        if order == 2:
            derivs[(d, 2)] = d2x[d]
    return cur, derivs, tapes


def run_backward(
    net: KanNetwork,
    tapes: list[_Tape],
    gy: np.ndarray,
    gdy: dict[int, np.ndarray] | None = None,
    gd2y: dict[int, np.ndarray] | None = None,
) -> list[LayerGrads]:
    """Reverse pass over cached tapes; pure (tapes are not mutated).

    ``gy`` is the cotangent of the network output; ``gdy``/``gd2y`` are
    cotangents of the propagated first/second input derivatives.
    """
    gdy = dict(gdy or {})
    gd2y = dict(gd2y or {})
    grads: list[LayerGrads] = []
    for layer, tape in zip(reversed(net.layers), reversed(tapes)):
        g, gy, gdy, gd2y = _layer_backward(layer, tape, gy, gdy, gd2y)
        grads.append(g)
    grads.reverse()
    return grads


def network_forward(net: KanNetwork, x) -> np.ndarray:
    """Sequential application of every layer."""
    y, _, _ = run_forward(net, x)
    return y


def input_derivatives(
    net: KanNetwork, x, wanted: dict[int, int]
) -> dict[tuple[int, int], np.ndarray]:
    """Per-sample derivatives of each output w.r.t. selected input dims.

    ``wanted`` maps dim -> highest order (1 or 2); the result contains
    every order up to the requested one, keyed ``(dim, order)``.
    """
    _, derivs, _ = run_forward(net, x, wanted=wanted)
    return derivs


def parameter_gradients(net: KanNetwork, x, loss_and_grad) -> list[LayerGrads]:
    """Exact gradients of a scalar loss of the network outputs.

    ``loss_and_grad(y)`` must return ``(value, dvalue/dy)``.  Raises
    ValueError if the loss comes back non-finite.
    """
    y, _, tapes = run_forward(net, x, with_tapes=True)
    value, gy = loss_and_grad(y)
    if not np.isfinite(value):
        raise ValueError("non-finite loss")
    return run_backward(net, tapes, np.asarray(gy, dtype=float))


# --- parameter flattening (documented order: per layer r, c, b; row-major) ---


def param_arrays(net: KanNetwork) -> list[np.ndarray]:
    """Live views of all trainable arrays, layer by layer: r, c, b."""
    out = []
    for l in net.layers:
        out.extend([l.r, l.c, l.b])
    return out


def grad_arrays(grads: list[LayerGrads]) -> list[np.ndarray]:
    out = []
    for g in grads:
        out.extend([g.r, g.c, g.b])
    return out


def flatten_params(net: KanNetwork) -> np.ndarray:
    return np.concatenate([a.ravel() for a in param_arrays(net)])


def set_flat_params(net: KanNetwork, flat: np.ndarray) -> None:
    pos = 0
    for a in param_arrays(net):
        a[...] = flat[pos : pos + a.size].reshape(a.shape)
        pos += a.size
    if pos != flat.size:
        raise ValueError("flat parameter vector has wrong length")


def flatten_grads(grads: list[LayerGrads]) -> np.ndarray:
    return np.concatenate([a.ravel() for a in grad_arrays(grads)])


# --- checkpoint io (format documented in the README) ---


def save_network(net: KanNetwork, path: str) -> None:
    doc = {"format": "kanlab-network", "version": 1, "layers": []}
    for l in net.layers:
        doc["layers"].append(
            {
                "n_in": l.n_in,
                "n_out": l.n_out,
                "grid": {
                    "domain_lo": l.kv.domain_lo,
                    "domain_hi": l.kv.domain_hi,
                    "intervals": l.kv.intervals_G,
                    "order": l.kv.order_k,
                },
                "normalized_basis": l.normalized_basis,
                "norm_eps": l.norm_eps,
                "r": l.r.tolist(),
                "c": l.c.tolist(),
                "b": l.b.tolist(),
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_network(path: str) -> KanNetwork:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "kanlab-network":
        raise ValueError("not a kanlab network checkpoint")
    layers = []
    for entry in doc["layers"]:
        g = entry["grid"]
        kv = build_knot_vector(
            g["domain_lo"], g["domain_hi"], g["intervals"], g["order"]
        )
        layers.append(
            KanLayer(
                n_in=entry["n_in"],
                n_out=entry["n_out"],
                kv=kv,
                r=np.asarray(entry["r"], dtype=float),
                c=np.asarray(entry["c"], dtype=float),
                b=np.asarray(entry["b"], dtype=float),
                normalized_basis=entry["normalized_basis"],
                norm_eps=entry["norm_eps"],
            )
        )
    return KanNetwork(layers)
