"""Wedge points and the boost-invariant reduction of two-point kinematics.

Points of W_r = {x^1 > |x^0|} are written (x^0, x^1, x_perp) =
(xi sinh eta, xi cosh eta, x_perp). Two points on boost orbits through
(xi, x_perp) and (xi', x_perp') at rapidity difference s = eta - eta' have
interval

    tau^2(s) = (dx^0)^2 - |dx|^2 = 2 xi xi' (cosh s - cosh gamma),
    cosh gamma = (xi^2 + xi'^2 + d_perp^2) / (2 xi xi'),

so they are spacelike for |s| < gamma and light-like at s = +-gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import CoincidentOrbitError, InputError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RindlerPoint:
    eta: float
    xi: float
    x_perp: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.xi > 0:
            raise InputError("xi must be positive")
        object.__setattr__(self, "x_perp", tuple(float(c) for c in self.x_perp))

    def minkowski(self) -> np.ndarray:
        return np.array([self.xi * math.sinh(self.eta), self.xi * math.cosh(self.eta), *self.x_perp])

    @classmethod
    def from_minkowski(cls, x) -> "RindlerPoint":
        x = np.asarray(x, dtype=float)
        if not x[1] > abs(x[0]):
            raise InputError(f"{x.tolist()} is not in the wedge x^1 > |x^0|")
        return cls(math.atanh(x[0] / x[1]), math.sqrt(x[1] ** 2 - x[0] ** 2), tuple(x[2:]))

    def boosted(self, t: float) -> "RindlerPoint":
        """Boost time evolution eta -> eta + t."""
        return replace(self, eta=self.eta + t)


def minkowski_interval(x, y) -> np.ndarray:
    """(dx^0)^2 - |dx|^2 for arrays of 4-vectors."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return d[..., 0] ** 2 - np.sum(d[..., 1:] ** 2, axis=-1)


def wedge_coordinates(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(eta, xi, x_perp) for an array of wedge points (..., 4)."""
    x = np.asarray(x, dtype=float)
    if np.any(x[..., 1] <= np.abs(x[..., 0])):
        raise InputError("points outside the wedge")
    return np.arctanh(x[..., 0] / x[..., 1]), np.sqrt(x[..., 1] ** 2 - x[..., 0] ** 2), x[..., 2:]


@dataclass(frozen=True)
class WedgePairGeometry:
    """Boost invariants of a pair of wedge orbits, with the field and state data."""

    xi: float
    xi_prime: float
    d_perp: float = 0.0
    mass: float = 0.0
    beta: float = TWO_PI

    def __post_init__(self):
        if not (self.xi > 0 and self.xi_prime > 0):
            raise InputError("xi and xi' must be positive")
        if self.d_perp < 0:
            raise InputError("transverse separation must be non-negative")
        if self.mass < 0:
            raise InputError("mass must be non-negative")
        if not self.beta > 0:
            raise InputError("beta must be positive")
        if self.cosh_gamma - 1.0 <= 1e-14:
            raise CoincidentOrbitError("both points lie on the same boost orbit (gamma = 0)")

    @classmethod
    def from_points(cls, x: RindlerPoint, y: RindlerPoint, mass=0.0, beta=TWO_PI) -> "WedgePairGeometry":
        d = math.dist(x.x_perp, y.x_perp)
        return cls(x.xi, y.xi, d, mass, beta)

    @property
    def cosh_gamma(self) -> float:
        return (self.xi**2 + self.xi_prime**2 + self.d_perp**2) / (2 * self.xi * self.xi_prime)

    @property
    def gamma(self) -> float:
        return math.acosh(self.cosh_gamma)

    @property
    def sinh_gamma(self) -> float:
        c = self.cosh_gamma
        return math.sqrt((c - 1) * (c + 1))

    @property
    def kappa(self) -> float:
        """Light-cone weight 1 / (4 pi xi xi' sinh gamma)."""
        return 1.0 / (4 * math.pi * self.xi * self.xi_prime * self.sinh_gamma)

    def tau2(self, s) -> np.ndarray:
        """Interval along the orbits; complex s gives the analytic continuation."""
        s = np.asarray(s)
        pq = self.xi * self.xi_prime
        # cosh s - cosh g = 2 sinh((s+g)/2) sinh((s-g)/2) avoids cancellation near the light cone
        g = self.gamma
        return 4 * pq * np.sinh((s + g) / 2) * np.sinh((s - g) / 2)

    def scaled(self, lam: float) -> "WedgePairGeometry":
        """Dilation about the wedge edge: xi, xi', d_perp -> lam * (.); gamma and s are invariant."""
        if not lam > 0:
            raise InputError("scale must be positive")
        return replace(self, xi=lam * self.xi, xi_prime=lam * self.xi_prime, d_perp=lam * self.d_perp)

    def with_(self, **kw) -> "WedgePairGeometry":
        return replace(self, **kw)

    def points(self, s: float, eta_prime: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """Minkowski representatives at rapidity difference s."""
        x = RindlerPoint(eta_prime + s, self.xi, (0.0, 0.0)).minkowski()
        y = RindlerPoint(eta_prime, self.xi_prime, (self.d_perp, 0.0)).minkowski()
        return x, y

    def is_spacelike(self, s) -> np.ndarray:
        return np.abs(np.real(np.asarray(s))) < self.gamma

    def as_dict(self) -> dict:
        return {"xi": self.xi, "xi_prime": self.xi_prime, "d_perp": self.d_perp,
                "mass": self.mass, "beta": self.beta}
