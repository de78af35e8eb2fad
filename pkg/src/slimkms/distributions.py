"""Test functions, singular distributions and their pairing.

Test functions are mollifier bumps ``A * P(y) * exp(-1/(1-|y|^2))`` with
``y = (x - c)/r``; their supports and peaks are closed-form, which keeps the
contractibility logic exact. Distributions are finite sums of explicitly
declared terms (smooth densities, power singularities, principal values,
point deltas and their derivatives), each paired by a quadrature adapted to
its singularity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np
from scipy import integrate

from .errors import InputError, QuadratureError
from .numerics import gauss_legendre

DEFAULT_TOL = 1e-10


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1:
        return x[..., None]
    if x.shape[-1] != dim:
        raise InputError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x


@runtime_checkable
class TestFunction(Protocol):
    """Anything with a dimension, a pointwise value and a bounding box."""

    dim: int

    def __call__(self, x) -> np.ndarray: ...

    def support_box(self) -> tuple[np.ndarray, np.ndarray]: ...

    def scale(self, lam: float) -> "TestFunction": ...


def _check_scale(lam: float) -> None:
    if not (np.isfinite(lam) and lam > 0):
        raise InputError(f"scale factor must be positive, got {lam}")


@dataclass(frozen=True)
class BumpFunction:
    """Mollifier bump on R^n, optionally modulated by a polynomial in y.

    ``poly`` is a tuple of ``(multi_index, coefficient)`` monomials in the
    rescaled coordinate y; the empty tuple means P = 1.
    """

    center: tuple[float, ...]
    radius: float
    amplitude: float = 1.0
    poly: tuple[tuple[tuple[int, ...], float], ...] = ()

    __test__ = False

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise InputError("bump radius must be positive")
        for idx, _ in self.poly:
            if len(idx) != len(self.center):
                raise InputError("polynomial multi-index has wrong length")

    @classmethod
    def standard(cls, center=0.0, radius: float = 1.0, peak: float = 1.0, poly=()):
        """Bump whose unmodulated value at the center equals ``peak``."""
        return cls(tuple(np.atleast_1d(center)), radius, peak * math.e, tuple(poly))

    @property
    def dim(self) -> int:
        return len(self.center)

    def _poly(self, y: np.ndarray) -> np.ndarray:
        if not self.poly:
            return np.ones(y.shape[:-1], dtype=y.dtype)
        out = np.zeros(y.shape[:-1], dtype=y.dtype)
        for idx, coef in self.poly:
            term = np.full(y.shape[:-1], coef, dtype=y.dtype)
            for j, p in enumerate(idx):
                if p:
                    term = term * y[..., j] ** p
            out = out + term
        return out

    def __call__(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        y = (pts - np.asarray(self.center)) / self.radius
        r2 = np.sum(y * y, axis=-1)
        inside = r2 < 1.0
        out = np.zeros(r2.shape)
        if np.any(inside):
            yi = y[inside]
            out[inside] = (
                self.amplitude * self._poly(yi) * np.exp(-1.0 / (1.0 - r2[inside]))
            )
        return out

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def in_support(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.sum((pts - np.asarray(self.center)) ** 2, axis=-1) < self.radius**2

    def scale(self, lam: float) -> "BumpFunction":
        _check_scale(lam)
        return replace(
            self, center=tuple(lam * c for c in self.center), radius=lam * self.radius
        )

    def dilate(self, mu: float) -> "BumpFunction":
        """Alias of :meth:`scale`, used when talking about probe dilates."""
        return self.scale(mu)

    def support_cloud(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Points filling the closed support: interior samples plus the sphere."""
        d = self.dim
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = rng.random(n) ** (1.0 / d)
        rad[: n // 4] = 1.0 - 1e-12
        return np.asarray(self.center) + self.radius * rad[:, None] * g

    def _complex_value(self, z: np.ndarray) -> np.ndarray:
        y = (z - np.asarray(self.center)) / self.radius
        s = np.sum(y * y, axis=-1)
        return self.amplitude * self._poly(y) * np.exp(-1.0 / (1.0 - s))

    def derivative(self, alpha: Sequence[int], x0) -> float:
        """Partial derivative d^alpha phi at x0 by Cauchy integrals on circles."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim:
            raise InputError("multi-index length does not match dimension")
        x0 = np.asarray(_as_points(x0, self.dim), dtype=float).reshape(self.dim)
        if sum(alpha) == 0:
            return float(self(x0 if self.dim > 1 else x0[0]))
        y0 = (x0 - np.asarray(self.center)) / self.radius
        gap = 1.0 - float(np.linalg.norm(y0))
        if gap <= 0:
            return 0.0
        active = [j for j, a in enumerate(alpha) if a > 0]
        rho = 0.25 * gap / math.sqrt(len(active)) * self.radius
        m = 96
        theta = 2 * np.pi * np.arange(m) / m
        grids = np.meshgrid(*([theta] * len(active)), indexing="ij")
        z = np.broadcast_to(x0.astype(complex), grids[0].shape + (self.dim,)).copy()
        weight = np.ones(grids[0].shape, dtype=complex)
        for g, j in zip(grids, active):
            z[..., j] = x0[j] + rho * np.exp(1j * g)
            weight *= np.exp(-1j * alpha[j] * g)
        vals = self._complex_value(z)
        avg = np.mean(vals * weight)
        fact = np.prod([math.factorial(alpha[j]) / rho ** alpha[j] for j in active])
        return float((avg * fact).real)


@dataclass(frozen=True)
class TensorTestFunction:
    """Product test function (f (x) g)(x, y) = f(x) g(y) on R^(n+m)."""

    f: TestFunction
    g: TestFunction

    __test__ = False

    @property
    def dim(self) -> int:
        return self.f.dim + self.g.dim

    def __call__(self, x) -> np.ndarray:
        xf, xg = self._split(_as_points(x, self.dim))
        return self.f(xf) * self.g(xg)

    def _split(self, pts):
        nf = self.f.dim
        xf = pts[..., :nf] if nf > 1 else pts[..., 0]
        xg = pts[..., nf:] if self.g.dim > 1 else pts[..., nf]
        return xf, xg

    def support_box(self):
        lf, hf = self.f.support_box()
        lg, hg = self.g.support_box()
        return np.concatenate([lf, lg]), np.concatenate([hf, hg])

    def in_support(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        xf, xg = self._split(pts)
        return self.f.in_support(xf) & self.g.in_support(xg)

    def scale(self, lam: float) -> "TensorTestFunction":
        _check_scale(lam)
        return TensorTestFunction(self.f.scale(lam), self.g.scale(lam))


def tensor(f: TestFunction, g: TestFunction) -> TensorTestFunction:
    """Tensor product f (x) g on the product space."""
    return TensorTestFunction(f, g)


def scale(phi: TestFunction, lam: float) -> TestFunction:
    """The dilated test function x -> phi(x / lam)."""
    return phi.scale(lam)


@dataclass(frozen=True)
class PushforwardTestFunction:
    """Phi_* f = f o Phi^{-1}, for an invertible chart ``Phi`` (1-D or n-D)."""

    base: TestFunction
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]

    __test__ = False

    @property
    def dim(self) -> int:
        return self.base.dim

    def __call__(self, q) -> np.ndarray:
        pts = _as_points(q, self.dim)
        arg = pts[..., 0] if self.dim == 1 else pts
        with np.errstate(invalid="ignore"):
            pre = self.inverse(arg)
        pre = np.asarray(pre, dtype=float)
        out = np.zeros(pre.shape if self.dim == 1 else pre.shape[:-1])
        ok = np.isfinite(pre) if self.dim == 1 else np.all(np.isfinite(pre), axis=-1)
        if np.any(ok):
            out[ok] = self.base(pre[ok])
        return out

    def support_box(self):
        lo, hi = self.base.support_box()
        if self.dim == 1:
            ends = np.asarray(self.forward(np.array([lo[0], hi[0]])), dtype=float)
            return np.array([ends.min()]), np.array([ends.max()])
        axes = [np.linspace(a, b, 9) for a, b in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        img = np.asarray(self.forward(pts), dtype=float)
        pad = 0.05 * (img.max(axis=0) - img.min(axis=0))
        return img.min(axis=0) - pad, img.max(axis=0) + pad

    def scale(self, lam: float) -> "PushforwardTestFunction":
        return replace(self, base=self.base.scale(lam))


# ---------------------------------------------------------------------------
# Distribution terms
# ---------------------------------------------------------------------------


def _quad_complex(f, a, b, tol, points=None, limit=400, label="quadrature", rel=1e-12):
    """Adaptive quadrature of a complex integrand.

    Accepts the result when the error estimate is below ``tol`` absolute or
    ``rel`` relative; tiny integrals over shrunken supports are thus judged
    by relative accuracy.
    """
    pts = None
    if points is not None:
        pts = sorted(p for p in points if a < p < b) or None

    def part(fun):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(
                fun, a, b, epsabs=tol / 4, epsrel=rel, limit=limit, points=pts
            )

    re, er = part(lambda t: float(np.real(f(t))))
    im, ei = part(lambda t: float(np.imag(f(t))))
    err = math.hypot(er, ei)
    if not (math.isfinite(re) and math.isfinite(im) and math.isfinite(err)):
        raise QuadratureError(f"{label} on [{a:.3g}, {b:.3g}] produced a non-finite value", math.inf)
    if err > max(tol, 10 * rel * math.hypot(re, im)):
        raise QuadratureError(f"{label} on [{a:.3g}, {b:.3g}] did not converge", err)
    return complex(re, im), err


def _box_quadrature(fun, lo, hi, tol, max_points=2_000_000):
    """Tensor Gauss-Legendre over a box, doubling nodes until stable."""
    dim = len(lo)
    prev = None
    n = 24
    while True:
        rules = [gauss_legendre(a, b, n) for a, b in zip(lo, hi)]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wts = np.ones_like(grids[0])
        for j, r in enumerate(rules):
            shape = [1] * dim
            shape[j] = n
            wts = wts * r[1].reshape(shape)
        pts = np.stack(grids, axis=-1).reshape(-1, dim)
        val = complex(np.sum(wts.reshape(-1) * fun(pts)))
        if prev is not None and abs(val - prev) <= tol:
            return val
        if prev is not None and (2 * n) ** dim > max_points:
            raise QuadratureError("box quadrature did not settle", abs(val - prev))
        prev = val
        n *= 2


@dataclass(frozen=True)
class SmoothDensity:
    """Locally integrable density paired by ordinary quadrature."""

    func: Callable[[np.ndarray], np.ndarray]
    coef: complex = 1.0
    breakpoints: tuple[float, ...] = ()

    def pair(self, phi: TestFunction, tol: float) -> complex:
        lo, hi = phi.support_box()
        if phi.dim == 1:
            val, _ = _quad_complex(
                lambda t: self.func(t) * phi(t),
                lo[0], hi[0], tol / max(abs(self.coef), 1e-300),
                points=self.breakpoints, label="smooth density",
            )
            return self.coef * val
        val = _box_quadrature(
            lambda p: self.func(p) * phi(p), lo, hi, tol / max(abs(self.coef), 1e-300)
        )
        return self.coef * val

    def scaled_coef(self, c: complex) -> "SmoothDensity":
        return replace(self, coef=c * self.coef)


def _sphere_average_factory(phi: TestFunction, x0: np.ndarray):
    """Return r -> integral over unit directions theta of phi(x0 + r theta)."""
    dim = phi.dim
    if dim == 1:
        return lambda r: float(phi(x0[0] + r) + phi(x0[0] - r))
    bump = phi if isinstance(phi, BumpFunction) else None
    if dim == 2:
        if bump is not None:
            c = np.asarray(bump.center)
            dvec = c - x0
            dist = float(np.linalg.norm(dvec))
            base = math.atan2(dvec[1], dvec[0]) if dist > 0 else 0.0

            def avg(r):
                if dist == 0:
                    half = math.pi
                else:
                    cosa = (r * r + dist * dist - bump.radius**2) / (2 * r * dist)
                    if cosa >= 1:
                        return 0.0
                    half = math.pi if cosa <= -1 else math.acos(cosa)
                th, w = gauss_legendre(base - half, base + half, 96)
                pts = x0 + r * np.stack([np.cos(th), np.sin(th)], axis=-1)
                return float(np.sum(w * phi(pts)))

            return avg
        th = 2 * np.pi * np.arange(512) / 512

        def avg(r):
            pts = x0 + r * np.stack([np.cos(th), np.sin(th)], axis=-1)
            return float(np.mean(phi(pts)) * 2 * np.pi)

        return avg
    if dim == 3:
        if bump is not None:
            c = np.asarray(bump.center)
            dvec = c - x0
            dist = float(np.linalg.norm(dvec))
            axis = dvec / dist if dist > 0 else np.array([0.0, 0.0, 1.0])
            helper = np.array([1.0, 0, 0]) if abs(axis[0]) < 0.9 else np.array([0, 1.0, 0])
            e1 = np.cross(axis, helper)
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(axis, e1)
            az = 2 * np.pi * np.arange(64) / 64

            def avg(r):
                if dist == 0:
                    half = math.pi
                else:
                    cosa = (r * r + dist * dist - bump.radius**2) / (2 * r * dist)
                    if cosa >= 1:
                        return 0.0
                    half = math.pi if cosa <= -1 else math.acos(cosa)
                pol, w = gauss_legendre(0.0, half, 64)
                st, ct = np.sin(pol), np.cos(pol)
                dirs = (
                    ct[:, None, None] * axis
                    + (st[:, None] * np.cos(az)[None, :])[..., None] * e1
                    + (st[:, None] * np.sin(az)[None, :])[..., None] * e2
                )
                vals = phi(x0 + r * dirs)
                return float(np.sum(w * st * vals.mean(axis=1)) * 2 * np.pi)

            return avg
    raise InputError(f"power singularities are supported for n <= 3 (bumps), got n={dim}")


@dataclass(frozen=True)
class PowerSingularity:
    """coef * |x - x0|^(-a), integrable (a < n)."""

    exponent: float
    location: tuple[float, ...] = (0.0,)
    coef: complex = 1.0

    def pair(self, phi: TestFunction, tol: float) -> complex:
        dim = phi.dim
        x0 = np.asarray(self.location, dtype=float).reshape(-1)
        if x0.size != dim:
            raise InputError("singularity location has wrong dimension")
        a = self.exponent
        if not a < dim:
            raise InputError(f"|x|^-{a} is not locally integrable in n={dim}")
        lo, hi = phi.support_box()
        corners = np.stack(np.meshgrid(*zip(lo, hi), indexing="ij"), -1).reshape(-1, dim)
        R = float(np.max(np.linalg.norm(corners - x0, axis=1)))
        shell = _sphere_average_factory(phi, x0)
        s0 = shell(0.0) if dim == 1 else _sphere_measure(dim) * float(phi(x0[None, :] if dim > 1 else x0)[0])
        points = []
        if isinstance(phi, BumpFunction):
            dist = float(np.linalg.norm(np.asarray(phi.center) - x0))
            points = [abs(dist - phi.radius), dist + phi.radius]
            R = min(R, dist + phi.radius)

        def integrand(r):
            if r == 0.0:
                return 0.0
            return r ** (dim - 1 - a) * (shell(r) - s0)

        val, _ = _quad_complex(
            integrand, 0.0, R, tol / max(abs(self.coef), 1e-300),
            points=points, label="power singularity",
        )
        val += s0 * R ** (dim - a) / (dim - a)
        return self.coef * val

    def scaled_coef(self, c: complex) -> "PowerSingularity":
        return replace(self, coef=c * self.coef)


def _sphere_measure(dim: int) -> float:
    return 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def _inverse_kernel(x):
    return 1.0 / x


@dataclass(frozen=True)
class PrincipalValue:
    """coef * vp k(x - x0) for an odd kernel k (default 1/x), n = 1 only."""

    kernel: Callable[[np.ndarray], np.ndarray] = _inverse_kernel
    location: float = 0.0
    coef: complex = 1.0

    def pair(self, phi: TestFunction, tol: float) -> complex:
        if phi.dim != 1:
            raise InputError("principal values are one-dimensional")
        lo, hi = phi.support_box()
        x0 = float(self.location)
        R = max(abs(hi[0] - x0), abs(lo[0] - x0))

        def folded(r):
            if r == 0.0:
                return 0.0
            return self.kernel(r) * (phi(x0 + r) - phi(x0 - r))

        points = [abs(lo[0] - x0), abs(hi[0] - x0)]
        val, _ = _quad_complex(
            folded, 0.0, R, tol / max(abs(self.coef), 1e-300),
            points=points, label="principal value",
        )
        return self.coef * val

    def scaled_coef(self, c: complex) -> "PrincipalValue":
        return replace(self, coef=c * self.coef)


@dataclass(frozen=True)
class PointDelta:
    weight: complex = 1.0
    location: tuple[float, ...] = (0.0,)

    def pair(self, phi: TestFunction, tol: float) -> complex:
        x0 = np.asarray(self.location, dtype=float).reshape(-1)
        if x0.size != phi.dim:
            raise InputError("delta location has wrong dimension")
        arg = x0 if phi.dim > 1 else x0[0]
        return self.weight * float(np.asarray(phi(arg)).reshape(-1)[0])

    def scaled_coef(self, c: complex) -> "PointDelta":
        return replace(self, weight=c * self.weight)


@dataclass(frozen=True)
class DerivativeOfDelta:
    """weight * d^alpha delta_{x0}; pairs to weight * (-1)^|alpha| d^alpha phi(x0)."""

    order: tuple[int, ...] = (1,)
    weight: complex = 1.0
    location: tuple[float, ...] = (0.0,)

    def pair(self, phi: TestFunction, tol: float) -> complex:
        order = tuple(np.atleast_1d(self.order).astype(int))
        if len(order) != phi.dim:
            raise InputError("derivative order has wrong dimension")
        if not isinstance(phi, BumpFunction):
            raise InputError("derivatives of deltas need a bump test function")
        sign = -1.0 if sum(order) % 2 else 1.0
        return self.weight * sign * phi.derivative(order, self.location)

    def scaled_coef(self, c: complex) -> "DerivativeOfDelta":
        return replace(self, weight=c * self.weight)


Term = SmoothDensity | PowerSingularity | PrincipalValue | PointDelta | DerivativeOfDelta


@dataclass(frozen=True)
class GeneralizedFunction:
    """Finite sum of explicitly declared singular-structure terms on R^n."""

    dim: int
    terms: tuple[Term, ...] = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.dim < 1:
            raise InputError("dimension must be positive")

    def __add__(self, other: "GeneralizedFunction") -> "GeneralizedFunction":
        if not isinstance(other, GeneralizedFunction):
            return NotImplemented
        if other.dim != self.dim:
            raise InputError("cannot add distributions of different dimension")
        return GeneralizedFunction(self.dim, self.terms + other.terms)

    def __mul__(self, c: complex) -> "GeneralizedFunction":
        return GeneralizedFunction(self.dim, tuple(t.scaled_coef(c) for t in self.terms))

    __rmul__ = __mul__

    def __sub__(self, other: "GeneralizedFunction") -> "GeneralizedFunction":
        return self + (-1.0) * other

    def pair(self, phi: TestFunction, tol: float = DEFAULT_TOL) -> complex:
        return pair(self, phi, tol)


def pair(u: GeneralizedFunction, phi: TestFunction, tol: float = DEFAULT_TOL) -> complex:
    """<u, phi> summed term by term, each within ``tol / len(terms)``."""
    if phi.dim != u.dim:
        raise InputError(f"distribution is {u.dim}-dimensional, test function {phi.dim}")
    if not u.terms:
        return 0j
    per_term = tol / len(u.terms)
    total = 0j
    for term in u.terms:
        total += term.pair(phi, per_term)
    return complex(total)


# convenience constructors used by the corpus, tests and CLI


def delta(weight: complex = 1.0, at=0.0, dim: int = 1) -> GeneralizedFunction:
    loc = tuple(np.broadcast_to(np.asarray(at, float), (dim,)))
    return GeneralizedFunction(dim, (PointDelta(weight, loc),), name="delta")


def pv_inverse(coef: complex = 1.0, at: float = 0.0) -> GeneralizedFunction:
    return GeneralizedFunction(1, (PrincipalValue(location=at, coef=coef),), name="pv-inverse")


def power(exponent: float, dim: int = 1, coef: complex = 1.0, at=None) -> GeneralizedFunction:
    loc = (0.0,) * dim if at is None else tuple(np.atleast_1d(at).astype(float))
    return GeneralizedFunction(dim, (PowerSingularity(exponent, loc, coef),), name="power")


def density(func, dim: int = 1, coef: complex = 1.0, breakpoints=()) -> GeneralizedFunction:
    return GeneralizedFunction(dim, (SmoothDensity(func, coef, tuple(breakpoints)),), name="density")


def lorentzian(mass: float = 1.0) -> GeneralizedFunction:
    """Density 1/(x^2 + m^2): regular at 0, scaling degree 1 in n = 1."""
    m2 = mass * mass
    return density(lambda x: 1.0 / (np.asarray(x) ** 2 + m2))
