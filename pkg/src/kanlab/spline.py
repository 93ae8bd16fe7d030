"""Uniform B-spline knot construction and basis evaluation.

The basis lives on an augmented uniform grid: ``G`` intervals covering
``[domain_lo, domain_hi]`` plus ``k`` extra knots continuing the same
spacing beyond each end.  This yields exactly ``G + k`` basis functions
of order ``k``, each supported on ``k + 1`` consecutive intervals.

Because the grid is uniform everywhere (no repeated end knots), the
derivative of an order-``k`` basis function collapses to a plain
difference of order-``(k-1)`` functions divided by the spacing ``h``,
which is what :func:`basis_derivatives` exploits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np


@dataclass(frozen=True)
class KnotVector:
    """Augmented uniform knot sequence for order-``k`` B-splines.

    ``knots`` has length ``G + 2k + 1`` with ``knots[k] == domain_lo``
    and ``knots[G + k] == domain_hi``.  Instances are immutable and safe
    to share between threads.
    """

    knots: np.ndarray
    order_k: int
    intervals_G: int
    domain_lo: float
    domain_hi: float
    spacing: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "knots", np.asarray(self.knots, dtype=float))
        object.__setattr__(
            self, "spacing", (self.domain_hi - self.domain_lo) / self.intervals_G
        )

    @property
    def n_basis(self) -> int:
        """Number of basis functions, ``G + k``."""
        return self.intervals_G + self.order_k


def build_knot_vector(
    domain_lo: float, domain_hi: float, G: int, k: int
) -> KnotVector:
    """Build the augmented uniform knot vector on ``[domain_lo, domain_hi]``.

    Raises:
        ValueError: if ``domain_lo >= domain_hi`` (invalid domain) or
            ``G < 1`` / ``k < 0`` (invalid size).
    """
    if not domain_lo < domain_hi:
        raise ValueError(
            f"invalid domain: need domain_lo < domain_hi, got [{domain_lo}, {domain_hi}]"
        )
    if G < 1:
        raise ValueError(f"invalid size: need G >= 1, got G={G}")
    if k < 0:
        raise ValueError(f"invalid size: need k >= 0, got k={k}")
    h = (domain_hi - domain_lo) / G
    knots = domain_lo + h * np.arange(-k, G + k + 1, dtype=float)
    return KnotVector(
        knots=knots, order_k=k, intervals_G=G, domain_lo=domain_lo, domain_hi=domain_hi
    )


def _raw_basis_levels(x: np.ndarray, kv: KnotVector, lowest: int) -> list[np.ndarray]:
    """Cox-de Boor recursion, keeping every level from ``lowest`` up to ``k``.

    Returns ``[B_lowest, ..., B_k]`` where ``B_d`` has ``G + 2k - d``
    columns along the last axis.  Points outside the augmented knot span
    simply produce zeros, so evaluation is total on the reals.
    """
    t = kv.knots
    k = kv.order_k
    x = np.asarray(x, dtype=float)[..., None]
    # Half-open indicator per interval; right-continuous at every knot.
    bases = ((x >= t[:-1]) & (x < t[1:])).astype(float)
    levels = []
    if lowest == 0:
        levels.append(bases)
    for d in range(1, k + 1):
        left = (x - t[: -(d + 1)]) / (t[d:-1] - t[: -(d + 1)]) * bases[..., :-1]
        right = (t[d + 1 :] - x) / (t[d + 1 :] - t[1:-d]) * bases[..., 1:]
        bases = left + right
        if d >= lowest:
            levels.append(bases)
    return levels


def _derivative_from_level(level: np.ndarray, p: int, h: float) -> np.ndarray:
    """p-th derivative via the alternating binomial difference over order k-p."""
    out = np.zeros(level.shape[:-1] + (level.shape[-1] - p,), dtype=float)
    coeff = 1.0
    for j in range(p + 1):
        sign = -1.0 if j % 2 else 1.0
        out += sign * coeff * level[..., j : level.shape[-1] - p + j]
        coeff = coeff * (p - j) / (j + 1)
    return out / h**p


def basis_value_table_reference(x, kv: KnotVector, max_order: int) -> list[np.ndarray]:
    """Reference table via the dense full-width recursion (slow path)."""
    k = kv.order_k
    deepest = max(k - min(max_order, k), 0)
    levels = _raw_basis_levels(x, kv, deepest)
    table = [levels[-1]]
    for p in range(1, max_order + 1):
        if p > k:
            table.append(np.zeros_like(table[0]))
        else:
            table.append(_derivative_from_level(levels[-1 - p], p, kv.spacing))
    return table


def _binomial_row(p: int) -> list[float]:
    row = [1.0]
    for j in range(p):
        row.append(row[-1] * (p - j) / (j + 1))
    return row


@nb.njit(cache=True, nogil=True)
def _banded_table_kernel(xf, knots, h, k, n_basis, max_order, out):
    """Local de Boor triangle per sample, scattered into ``out``.

    ``xf`` is the flattened sample array; ``out`` has shape
    ``(max_order + 1, len(xf), n_basis)`` and must arrive zeroed.
    """
    n_knots = knots.shape[0]
    n_spans = n_knots - 1
    vals = np.empty(k + 1)
    lower = np.empty((k + 1, k + 1))
    dloc = np.empty(k + 1)
    coeffs = np.empty(k + 2)
    for n in range(xf.shape[0]):
        x = xf[n]
        # searchsorted(knots, x, side='right') - 1
        lo, hi = 0, n_knots
        while lo < hi:
            mid = (lo + hi) // 2
            if x >= knots[mid]:
                lo = mid + 1
            else:
                hi = mid
        s = lo - 1
        if s < 0 or s >= n_spans:
            continue
        w = (x - knots[s]) / h
        vals[0] = 1.0
        lower[0, 0] = 1.0
        for j in range(1, k + 1):
            saved = 0.0
            for r in range(j):
                temp = vals[r] / j
                vals[r] = saved + (r + 1 - w) * temp
                saved = (w + j - r - 1) * temp
            vals[j] = saved
            if j < k:
                for r in range(j + 1):
                    lower[j, r] = vals[r]
        for a in range(k + 1):
            m = s - k + a
            if 0 <= m < n_basis:
                out[0, n, m] = vals[a]
        top = max_order if max_order < k else k
        for p in range(1, top + 1):
            q = k - p
            scale = h**-p
            coeffs[0] = 1.0
            for j in range(p):
                coeffs[j + 1] = coeffs[j] * (p - j) / (j + 1)
            for a in range(k + 1):
                acc = 0.0
                for i in range(p + 1):
                    ridx = a + i - p
                    if 0 <= ridx <= q:
                        v = lower[q, ridx] if q < k else vals[ridx]
                        if i % 2 == 1:
                            acc -= coeffs[i] * v
                        else:
                            acc += coeffs[i] * v
                dloc[a] = acc * scale
            for a in range(k + 1):
                m = s - k + a
                if 0 <= m < n_basis:
                    out[p, n, m] = dloc[a]


def basis_value_table(x, kv: KnotVector, max_order: int) -> list[np.ndarray]:
    """Basis values and derivatives ``[B, B', ..., B^(max_order)]``.

    Banded local evaluation (identical outputs to the dense recursion):
    on a uniform grid every sample has at most ``k + 1`` nonzero basis
    functions whose values depend only on the fractional position within
    the knot span.  Orders above ``k`` come back as zeros.
    """
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.reshape(-1))
    out = np.zeros((max_order + 1, flat.size, kv.n_basis))
    _banded_table_kernel(
        flat, kv.knots, kv.spacing, kv.order_k, kv.n_basis, max_order, out
    )
    return [out[p].reshape(x.shape + (kv.n_basis,)) for p in range(max_order + 1)]


def basis_values(x, kv: KnotVector) -> np.ndarray:
    """Evaluate all ``G + k`` order-``k`` basis functions at ``x``.

    ``x`` may be a scalar or an array; one basis axis is appended.
    Values are non-negative and sum to 1 for ``x`` inside the domain.
    """
    return basis_value_table(x, kv, 0)[0]


def basis_derivatives(x, kv: KnotVector, order: int) -> np.ndarray:
    """First or second derivative of every basis function at ``x``.

    Raises:
        ValueError: unsupported order (``order`` not in {1, 2} or > ``k``).
    """
    if order not in (1, 2):
        raise ValueError(f"unsupported order: {order} (only 1 and 2)")
    if order > kv.order_k:
        raise ValueError(
            f"unsupported order: {order} exceeds spline order k={kv.order_k}"
        )
    return basis_value_table(x, kv, order)[order]
