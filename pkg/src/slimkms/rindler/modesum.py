"""Independent slow path: thermal two-point function from Fulling modes.

With rho_m(w) = sinh(pi w) F_m(w) / (2 pi^3) and

    F_m(w) = int_0^inf k dk J_0(k d) K_{iw}(mu xi) K_{iw}(mu xi'),  mu = sqrt(k^2 + m^2),

the boost-stationary two-point function at inverse temperature beta is
int_0^inf rho_m(w) [coth(beta w / 2) cos(w s) - i sin(w s)] dw. The vacuum
(beta = 2 pi) piece is taken from the K_1 closed form and only the thermal
difference int rho_m (coth(beta w / 2) - coth(pi w)) cos(w s) dw is summed over
modes, which converges quickly because the difference decays like e^{-min(beta, 2pi) w}.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..errors import InputError
from ..numerics import gauss_legendre
from .fields import vacuum_massive
from .kinematics import WedgePairGeometry


def macdonald_imag(omega, x, nodes: int = 256) -> np.ndarray:
    """K_{i w}(x) = int_0^inf exp(-x cosh t) cos(w t) dt for arrays w (W,) and x (K,) -> (W, K)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise InputError("K_{iw}(x) needs x > 0")
    T = math.acosh(max(60.0 / float(np.min(x)), 1.0)) + 0.5
    t, w = gauss_legendre(0.0, T, nodes)
    e = np.exp(-np.multiply.outer(x, np.cosh(t)))
    c = np.cos(np.multiply.outer(omega, t))
    return np.einsum("kt,wt,t->wk", e, c, w)


def spectral_density(omega, geom: WedgePairGeometry, k_nodes: int = 300) -> np.ndarray:
    """rho_m(w) for the orbit pair."""
    k, wk = gauss_legendre(0.0, 40.0 / (geom.xi + geom.xi_prime), k_nodes)
    mu = np.sqrt(k * k + geom.mass**2)
    mu = np.where(mu == 0, 1e-300, mu)
    k1 = macdonald_imag(omega, mu * geom.xi)
    k2 = macdonald_imag(omega, mu * geom.xi_prime)
    F = np.einsum("wk,wk,k->w", k1, k2, wk * k * special.j0(k * geom.d_perp))
    return np.sinh(np.pi * np.asarray(omega)) * F / (2 * math.pi**3)


def thermal_difference(geom: WedgePairGeometry, s, omega_nodes: int = 300) -> np.ndarray:
    """W_beta(s) - W_{2 pi}(s) by the mode integral (real s)."""
    beta = geom.beta
    top = 40.0 / min(beta, 2 * math.pi)
    w, ww = gauss_legendre(1e-6, top, omega_nodes)
    rho = spectral_density(w, geom)
    diff = 1.0 / np.tanh(beta * w / 2) - 1.0 / np.tanh(math.pi * w)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.cos(np.outer(s, w)) @ (ww * rho * diff)


def wightman_modesum(geom: WedgePairGeometry, s) -> np.ndarray:
    """W_beta(s) = vacuum (K_1 form) + mode-sum thermal difference, for real spacelike s."""
    if geom.mass <= 0:
        raise InputError("the mode-sum path needs m > 0")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(np.abs(s) >= geom.gamma):
        raise InputError("mode-sum path is restricted to spacelike s")
    return vacuum_massive(geom, s) + thermal_difference(geom, s)
