"""Special functions needed by the target-function suites.

Everything here is double precision on the ranges the targets actually
produce: erf/erfinv on the real line (tail handled through erfc), the
order-1 modified Bessel function by power series, and the Fresnel
integrals by Taylor series below |x| = 1.5 and a complex continued
fraction for erfc above it (the series suffers catastrophic cancellation
for larger arguments, which the composed targets do reach).
"""

from __future__ import annotations

import math

import numpy as np

_SQRT_PI = math.sqrt(math.pi)
_erf_vec = np.vectorize(math.erf, otypes=[float])
_erfc_vec = np.vectorize(math.erfc, otypes=[float])


def erf(x) -> np.ndarray:
    """Error function, elementwise (stdlib erf under the hood)."""
    return _erf_vec(x)


def erfinv(y) -> np.ndarray:
    """Inverse error function on (-1, 1), elementwise; +/-inf at y = +/-1.

    Winitzki's closed-form start followed by four Newton iterations;
    the iteration switches to an erfc formulation for |y| > 0.9 where
    erf itself saturates in double precision.
    """
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        a = 0.147
        w = np.log1p(-y * y)
        t = 2.0 / (math.pi * a) + w / 2.0
        x = np.sign(y) * np.sqrt(np.sqrt(t * t - w / a) - t)
        tail = np.abs(y) > 0.9
        hit_one = np.abs(y) == 1.0
        x = np.where(hit_one, np.sign(y) * np.inf, x)
        for _ in range(4):
            x_core = x - (_erf_vec(x) - y) * (_SQRT_PI / 2.0) * np.exp(x * x)
            xa = np.abs(x)
            resid = _erfc_vec(np.where(np.isfinite(xa), xa, 0.0)) - (1.0 - np.abs(y))
            x_tail = np.sign(y) * (xa + resid * (_SQRT_PI / 2.0) * np.exp(xa * xa))
            x = np.where(hit_one, x, np.where(tail, x_tail, x_core))
    return x


def bessel_i1(x) -> np.ndarray:
    """Modified Bessel function of the first kind, order 1 (power series).

    All series terms are positive for the even part, so there is no
    cancellation; 25 terms cover |x| up to ~10 at machine precision.
    """
    x = np.asarray(x, dtype=float)
    q = x * x / 4.0
    term = x / 2.0
    total = np.array(term, copy=True)
    for m in range(1, 25):
        term = term * q / (m * (m + 1))
        total += term
    return total


def _fresnel_taylor(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hp = math.pi / 2.0
    x2 = x * x
    ratio = -(hp * hp) * x2 * x2
    ts = hp * x2 * x
    tc = np.array(x, dtype=float, copy=True)
    s = ts / 3.0
    c = tc.copy()
    for n in range(1, 22):
        ts = ts * ratio / ((2 * n) * (2 * n + 1))
        tc = tc * ratio / ((2 * n - 1) * (2 * n))
        s += ts / (4 * n + 3)
        c += tc / (4 * n + 1)
    return s, c


def _fresnel_cf(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fresnel S, C for x > 1.5 via erfc of z = sqrt(pi)/2 (1-i) x.

    C + iS = (1+i)/2 (1 - erfc(z)); the Laplace continued fraction for
    erfc is evaluated with the modified Lentz algorithm.  Note
    exp(-z^2) = exp(i pi x^2 / 2) has unit modulus, so nothing
    overflows.
    """
    z = _SQRT_PI / 2.0 * x * (1 - 1j)
    tiny = 1e-290
    f = z.astype(complex)
    f[f == 0] = tiny
    C = f.copy()
    D = np.zeros_like(f)
    for n in range(1, 150):
        a = n / 2.0
        D = z + a * D
        D[D == 0] = tiny
        C = z + a / C
        C[C == 0] = tiny
        D = 1.0 / D
        delta = C * D
        f = f * delta
        if np.all(np.abs(delta - 1.0) < 1e-17):
            break
    erfc_z = np.exp(1j * math.pi * x * x / 2.0) / _SQRT_PI / f
    w = (1 + 1j) / 2.0 * (1.0 - erfc_z)
    return w.imag, w.real


def _fresnel_pair(x) -> tuple[np.ndarray, np.ndarray]:
    shape = np.shape(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ax = np.abs(x)
    s = np.empty_like(x)
    c = np.empty_like(x)
    inf = np.isinf(x)
    small = (ax <= 1.5) & ~inf
    big = ~small & ~inf
    if small.any():
        s[small], c[small] = _fresnel_taylor(x[small])
    if big.any():
        sb, cb = _fresnel_cf(ax[big])
        sgn = np.sign(x[big])
        s[big] = sgn * sb
        c[big] = sgn * cb
    s[inf] = 0.5 * np.sign(x[inf])
    c[inf] = 0.5 * np.sign(x[inf])
    return s.reshape(shape), c.reshape(shape)


def fresnel_s(x) -> np.ndarray:
    """Fresnel sine integral of x, elementwise."""
    return _fresnel_pair(x)[0]


def fresnel_c(x) -> np.ndarray:
    """Fresnel cosine integral of x, elementwise."""
    return _fresnel_pair(x)[1]


def sign(x) -> np.ndarray:
    return np.sign(np.asarray(x, dtype=float))


def sgn_half_minus(x) -> np.ndarray:
    """sign(0.5 - x); the switch used by the piecewise fit target."""
    return np.sign(0.5 - np.asarray(x, dtype=float))


_BY_NAME = {
    "erf": erf,
    "erfinv": erfinv,
    "bessel_I1": bessel_i1,
    "fresnel_S": fresnel_s,
    "fresnel_C": fresnel_c,
    "sign": sign,
    "sgn_half_minus": sgn_half_minus,
}


def special(name: str, x: float) -> float:
    """Scalar entry point with domain checking.

    Raises:
        ValueError: unknown name, or ``|x| >= 1`` for erfinv.
    """
    if name not in _BY_NAME:
        raise ValueError(f"unknown special function: {name!r}")
    if name == "erfinv" and abs(x) >= 1.0:
        raise ValueError(f"erfinv domain error: need |x| < 1, got {x}")
    return float(_BY_NAME[name](x))
