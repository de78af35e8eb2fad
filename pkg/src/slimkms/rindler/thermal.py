"""beta-KMS two-point functions for boost time evolution on the wedge.

The coth form of the Bose reconstruction applied to the orbit commutator
gives, for the light-cone deltas alone,

    W_{beta,0}(s) = kappa / (2 beta) [coth(pi (gamma - s) / beta) + coth(pi (gamma + s) / beta)],

(s -> s - i eps), kappa = 1 / (4 pi xi xi' sinh gamma). At beta = 2 pi this is
-1 / (8 pi^2 xi xi' (cosh s - cosh gamma)), the massless vacuum restricted to
the orbits. For m > 0 the Bessel tail adds

    -(1 / 2 beta) int_gamma^inf [coth(pi (u - s) / beta) + coth(pi (u + s) / beta)] T(u) du.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InputError
from ..kms import CorrelationFunction, coth_point
from ..numerics import geometric_grid
from .fields import BoostCommutator, commutator_massive
from .kinematics import WedgePairGeometry

RINDLER_EPS = geometric_grid(1e-2, 1e-5, 0.5)
NEAR_AXIS = 0.05


def dowker_massless(geom: WedgePairGeometry, s, eps: float = 0.0) -> np.ndarray:
    """Massless beta-KMS two-point function on the orbits (closed form)."""
    beta = geom.beta
    if math.isinf(beta):
        raise InputError("beta = inf is the ground state; use ground_state_massless")
    sc = np.asarray(s) - 1j * eps
    if not np.iscomplexobj(sc):
        sc = sc.astype(float)
    g = geom.gamma
    k = geom.kappa
    return k / (2 * beta) * (1.0 / np.tanh(np.pi * (g - sc) / beta) + 1.0 / np.tanh(np.pi * (g + sc) / beta))


def ground_state_massless(geom: WedgePairGeometry, s, eps: float = 0.0) -> np.ndarray:
    """beta -> inf limit of the massless orbit function: (kappa / pi) gamma / (gamma^2 - s^2)."""
    sc = np.asarray(s) - 1j * eps
    g = geom.gamma
    return geom.kappa / math.pi * g / (g * g - sc * sc)


class ThermalWightman(CorrelationFunction):
    """W_{beta,m}(s) on a pair of orbits, evaluated through the coth kernel.

    Complex s in the strip -beta < Im s <= 0 (and, off the timelike axis, its
    continuation above it) is accepted. Evaluation routes: fixed-node
    vectorized sums away from the real timelike axis, adaptive quadrature
    near it, and the eps-extrapolated coth integral on it.
    """

    def __init__(self, geom: WedgePairGeometry, eps_sequence=None, gate: bool = True):
        self.geom = geom
        self.commutator: BoostCommutator = commutator_massive(geom, gate=gate)
        self.eps_sequence = RINDLER_EPS if eps_sequence is None else np.asarray(eps_sequence)
        super().__init__(
            self._evaluate, (), None, ((-math.inf, math.inf),), (-geom.gamma, geom.gamma),
            geom.beta, geom.mass, f"W(beta={geom.beta:.6g}, m={geom.mass:g})",
            ("reconstructed by the coth kernel from the orbit commutator",),
            {"geometry": geom.as_dict()},
        )

    def _tail_kernel(self, s: np.ndarray):
        beta = self.geom.beta
        return lambda u: 1.0 / np.tanh(np.pi * (np.asarray(u)[None, :] - s[:, None]) / beta)

    def _evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        geo = self.geom
        beta, g = geo.beta, geo.gamma
        im = np.imag(flat)
        re = np.real(flat)
        if np.any(im < -beta) or np.any(im > beta):
            raise InputError("evaluation point outside the strip |Im s| < beta")
        on_axis = (im == 0) & (np.abs(re) > g)
        if np.any((im == 0) & (np.abs(re) == g)):
            raise InputError("evaluation point on the light cone")
        dist = np.minimum(np.abs(im), beta - np.abs(im))
        near = ~on_axis & (im != 0) & (dist < NEAR_AXIS) & (np.abs(re) > g - NEAR_AXIS)
        fast = ~on_axis & ~near
        out[fast | near] = dowker_massless(geo, flat[fast | near])
        if geo.mass > 0 and np.any(fast):
            pts = flat[fast]
            cplx = np.imag(pts) != 0
            md = float(np.min(dist[fast][cplx])) if np.any(cplx) else 0.5
            val = self.commutator.integrate(self._tail_kernel(pts), min_distance=max(md, NEAR_AXIS))
            out[fast] += 1j / (2 * beta) * np.asarray(val)
        for i in np.nonzero(near)[0]:
            z = flat[i]
            if geo.mass > 0:
                k = lambda u, z=z: 1.0 / np.tanh(np.pi * (np.asarray(u) - z) / beta)
                out[i] += 1j / (2 * beta) * self.commutator.integrate(k)
        for i in np.nonzero(on_axis)[0]:
            out[i] = coth_point(self.commutator, beta, float(re[i]), self.eps_sequence).value
        return out.reshape(s.shape)

    def antisymmetric_part(self, s) -> np.ndarray:
        """W(s) - conj(W(s)) = 2i Im W(s - i0) on the real axis (the commutator off the cone)."""
        w = self(np.asarray(s, dtype=float))
        return w - np.conj(w)


def wightman_beta(geom: WedgePairGeometry, eps_sequence=None, gate: bool = True) -> ThermalWightman:
    """The (L1, beta)-KMS two-point function along the orbits of ``geom``."""
    if math.isinf(geom.beta):
        raise InputError("beta must be finite; the ground state uses the indicator kernel")
    return ThermalWightman(geom, eps_sequence, gate)
