"""Small numerical kernels reused across modules.

Gauss-Legendre rules, limit extrapolation of sampled sequences and the
Wynn epsilon accelerator for slowly converging alternating series.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special


@lru_cache(maxsize=64)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_gauss_legendre(
    edges: Sequence[float], n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate n-point rules over consecutive panels given by ``edges``."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(a, b, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def power_basis(order: int, log_terms: bool = False) -> list[Callable]:
    """Basis for extrapolation: 1, h, h^2, ... or 1, h^2 ln h, h^2, h^4 ln h, ...

    The log variant models expansions with even powers and logarithmic
    companions, e.g. the small-mass expansion of Bessel K_1.
    """
    if not log_terms:
        return [lambda h, k=k: h**k for k in range(order + 1)]
    basis: list[Callable] = [lambda h: np.ones_like(h)]
    k = 1
    while len(basis) < order + 1:
        basis.append(lambda h, k=k: h ** (2 * k) * np.log(h))
        if len(basis) < order + 1:
            basis.append(lambda h, k=k: h ** (2 * k))
        k += 1
    return basis


def _fit_at_zero(h: np.ndarray, v: np.ndarray, basis: list[Callable]) -> complex:
    mat = np.column_stack([f(h) for f in basis]).astype(complex)
    coeffs = np.linalg.lstsq(mat, v.astype(complex), rcond=None)[0]
    return coeffs[0]


def extrapolate_to_zero(
    h: Sequence[float],
    values: Sequence[complex],
    order: int = 2,
    log_terms: bool = False,
) -> tuple[complex, float, list[float]]:
    """Extrapolate samples v(h) to h = 0.

    Fits the basis exactly through the ``order + 1`` smallest-h samples.
    Returns the limit, an error estimate (change against the window shifted
    one step coarser) and the sequence of successive extrapolation residuals,
    finest last, used for convergence verdicts.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(values, dtype=complex)
    if h.size != v.size:
        raise ValueError("h and values differ in length")
    idx = np.argsort(-h)
    h, v = h[idx], v[idx]
    basis = power_basis(order, log_terms)
    k = len(basis)
    if h.size < k:
        raise ValueError(f"need at least {k} samples for order {order}")
    if h.size == k:
        return complex(_fit_at_zero(h, v, basis)), float("nan"), []
    estimates = [
        _fit_at_zero(h[j : j + k], v[j : j + k], basis) for j in range(h.size - k + 1)
    ]
    residuals = [float(abs(b - a)) for a, b in zip(estimates[:-1], estimates[1:])]
    return complex(estimates[-1]), residuals[-1], residuals


def wynn_epsilon(partial_sums: Sequence[complex]) -> tuple[complex, float]:
    """Accelerate a sequence of partial sums with Wynn's epsilon algorithm.

    Returns the best even-column estimate and the difference between its last
    two entries as error estimate.
    """
    cur = np.asarray(partial_sums, dtype=complex)
    if cur.size < 3:
        return complex(cur[-1]), float("inf")
    best = complex(cur[-1])
    best_err = float(abs(cur[-1] - cur[-2]))
    prev = np.zeros(cur.size + 1, dtype=complex)
    col = 0
    while cur.size > 2:
        d = np.diff(cur)
        if np.any(d == 0):
            break
        new = prev[1 : cur.size] + 1.0 / d
        if not np.all(np.isfinite(new)):
            break
        prev, cur = cur, new
        col += 1
        if col % 2 == 0:
            err = float(abs(cur[-1] - cur[-2]))
            if err < best_err:
                best, best_err = complex(cur[-1]), err
    return best, best_err


def geometric_grid(start: float, stop: float, ratio: float) -> np.ndarray:
    """Geometric sequence start, start*ratio, ... down to >= stop (ratio in (0,1))."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    if not start > stop > 0.0:
        raise ValueError("need start > stop > 0")
    n = int(np.floor(np.log(stop / start) / np.log(ratio) + 1e-9)) + 1
    return start * ratio ** np.arange(n)
