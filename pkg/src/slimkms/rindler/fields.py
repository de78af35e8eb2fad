"""Free scalar field data on boost orbits: commutator and vacuum two-point function.

The Minkowski commutator of a free field of mass m is <[phi(x), phi(y)]> = i D(x - y)
with the Pauli-Jordan function

    D(x) = -(1/2 pi) sgn(x^0) [delta(tau^2) - theta(tau^2) m J_1(m tau) / (2 tau)],

tau^2 = (x^0)^2 - |x|^2. The form is not trusted: ``pauli_jordan_gate``
checks the Klein-Gordon equation for the smeared distribution, the
canonical normalization dD/dt = -delta^3 at t = 0 and the pointwise equation
inside the cone before any orbit commutator is built.

Along a pair of boost orbits D becomes, with kappa = 1/(4 pi xi xi' sinh gamma),

    C(s) = -i kappa [delta(s - gamma) - delta(s + gamma)] + i sgn(s) T(s) theta(|s| - gamma),
    T(s) = m J_1(m tau(s)) / (4 pi tau(s)).
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from ..errors import InputError, OracleGateError
from ..kms import CorrelationFunction, DeltaTerm, Envelope, _quad
from ..numerics import composite_gauss_legendre, gauss_legendre, wynn_epsilon
from .kinematics import WedgePairGeometry

J11 = float(special.jn_zeros(1, 1)[0])
N_ZERO_PANELS = 400
WYNN_TERMS = 40


# ---------------------------------------------------------------------------
# Minkowski closed forms
# ---------------------------------------------------------------------------


def _t_of_tau(m: float, tau) -> np.ndarray:
    """m J_1(m tau) / (4 pi tau), regular at tau = 0."""
    tau = np.asarray(tau, dtype=float)
    y = m * tau
    small = y < 1e-4
    safe = np.where(small, 1.0, tau)
    big = m * special.j1(m * safe) / (4 * math.pi * safe)
    series = m * m / (8 * math.pi) * (1 - y * y / 8)
    return np.where(small, series, big)


def pauli_jordan_timelike(x, mass: float) -> np.ndarray:
    """Inside-the-cone part of D: sgn(x^0) m J_1(m tau)/(4 pi tau); zero at spacelike x."""
    x = np.asarray(x, dtype=float)
    tau2 = x[..., 0] ** 2 - np.sum(x[..., 1:] ** 2, axis=-1)
    inside = tau2 > 0
    tau = np.sqrt(np.where(inside, tau2, 0.0))
    return np.where(inside, np.sign(x[..., 0]) * _t_of_tau(mass, tau), 0.0)


def pauli_jordan_smeared(t: float, mass: float, g) -> float:
    """int D(t, x) g(|x|) d^3x for a radial test function g.

    The light-cone part gives -t g(|t|); the timelike part is a radial
    integral over the ball |x| < |t|.
    """
    if t == 0:
        return 0.0
    a = abs(t)

    def inner(r):
        tau = math.sqrt(max(a * a - r * r, 0.0))
        return float(_t_of_tau(mass, tau)) * g(r) * 4 * math.pi * r * r

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail, _ = integrate.quad(inner, 0.0, a, epsabs=1e-15, epsrel=1e-13, limit=200)
    return -t * g(a) + (tail if t > 0 else -tail)


def vacuum_massive(geom: WedgePairGeometry, s, eps: float = 0.0) -> np.ndarray:
    """(m / 4 pi^2) K_1(m z) / z with z = sqrt(-tau^2(s - i eps)) on the orbits.

    Real timelike s (with eps = 0) takes the boundary value from below,
    z = i sgn(s) tau.
    """
    m = geom.mass
    if m <= 0:
        return vacuum_massless(geom, s, eps)
    s = np.asarray(s)
    sc = s - 1j * eps
    if np.iscomplexobj(sc) and np.any(np.imag(sc) != 0):
        minus = -geom.tau2(sc.astype(complex))
        z = np.sqrt(minus)
    else:
        t2 = geom.tau2(np.real(sc))
        z = np.where(t2 < 0, np.sqrt(np.abs(t2)) + 0j, 1j * np.sign(np.real(sc)) * np.sqrt(np.abs(t2)))
    return m / (4 * math.pi**2) * special.kv(1, m * z) / z


def vacuum_massless(geom: WedgePairGeometry, s, eps: float = 0.0) -> np.ndarray:
    """-1 / (4 pi^2 tau^2(s - i eps))."""
    sc = np.asarray(s) - 1j * eps
    return -1.0 / (4 * math.pi**2 * geom.tau2(sc))


# ---------------------------------------------------------------------------
# oracle gate for the Pauli-Jordan form
# ---------------------------------------------------------------------------


def _radial_gaussian(width: float):
    def g(r):
        return math.exp(-0.5 * (r / width) ** 2)

    def lap(r):
        return g(r) * (r * r / width**4 - 3 / width**2)

    return g, lap


def kg_residual_smeared(mass: float, t: float, width: float = 0.7, h: float = 1e-2) -> float:
    """Relative residual of d^2F/dt^2 + <D(t), (-lap + m^2) g> for a radial Gaussian g."""
    g, lap = _radial_gaussian(width)
    kg = lambda r: -lap(r) + mass * mass * g(r)
    F = lambda tt: pauli_jordan_smeared(tt, mass, g)
    d2 = (-F(t + 2 * h) + 16 * F(t + h) - 30 * F(t) + 16 * F(t - h) - F(t - 2 * h)) / (12 * h * h)
    rhs = pauli_jordan_smeared(t, mass, kg)
    return abs(d2 + rhs) / max(abs(d2), abs(rhs), 1e-300)


def canonical_residual(mass: float, width: float = 0.7, h: float = 1e-4) -> float:
    """|dF/dt(0) + g(0)| for F(t) = <D(t), g>, g a radial Gaussian with g(0) = 1."""
    g, _ = _radial_gaussian(width)
    d1 = (pauli_jordan_smeared(h, mass, g) - pauli_jordan_smeared(-h, mass, g)) / (2 * h)
    return abs(d1 + 1.0)


def kg_residual_pointwise(mass: float, points, h: float = 1e-3) -> np.ndarray:
    """Relative residual of (d_t^2 - lap + m^2) applied to the timelike part at interior points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    f = lambda x: pauli_jordan_timelike(x, mass)
    acc = mass * mass * f(pts)
    scale = np.abs(mass * mass * f(pts))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        d2 = (-f(pts + 2 * e) + 16 * f(pts + e) - 30 * f(pts) + 16 * f(pts - e) - f(pts - 2 * e)) / (12 * h * h)
        acc = acc + (d2 if k == 0 else -d2)
        scale = scale + np.abs(d2)
    return np.abs(acc) / np.maximum(scale, 1e-300)


@lru_cache(maxsize=32)
def pauli_jordan_gate(mass: float, tol: float = 1e-6) -> dict:
    """Validate the commutator closed form; raise OracleGateError on failure."""
    if mass < 0:
        raise InputError("mass must be non-negative")
    report = {
        "canonical": canonical_residual(mass),
        "kg_smeared": max(kg_residual_smeared(mass, t) for t in (0.4, 1.1, 2.3)),
        "spacelike_zero": float(np.max(np.abs(pauli_jordan_timelike([[0.3, 1.0, 0.2, 0.0], [-0.5, 0.1, 0.9, 0.4]], mass)))),
    }
    if mass > 0:
        pts = [[1.5, 0.3, 0.2, 0.1], [-2.0, 0.5, -0.4, 0.7], [3.1, 1.0, 0.0, 0.0]]
        report["kg_pointwise"] = float(np.max(kg_residual_pointwise(mass, pts)))
    failed = {
        k: v for k, v in report.items()
        if (k == "canonical" and v > 1e-6) or (k.startswith("kg") and v > tol) or (k == "spacelike_zero" and v != 0)
    }
    if failed:
        raise OracleGateError(f"Pauli-Jordan closed form failed its checks: {failed}")
    return report


# ---------------------------------------------------------------------------
# commutator along boost orbits
# ---------------------------------------------------------------------------


def _mcmahon_zeros(k: np.ndarray) -> np.ndarray:
    b = (k + 0.25) * math.pi
    return b - 3.0 / (8.0 * b)


class BoostCommutator(CorrelationFunction):
    """Orbit commutator with a Bessel-tail quadrature tuned to its oscillations.

    Integrals against a kernel K split into the branches s > gamma and
    s < -gamma. On each, the segment up to the first J_1 zero is integrated
    in s; beyond it the variable y = m tau(s) turns the tail into
    J_1(y) / (4 pi xi xi' sinh s(y)) dy, integrated panel by panel between
    zeros and summed with Wynn's epsilon algorithm.
    """

    def __init__(self, geom: WedgePairGeometry):
        self.geom = geom
        self._cache: dict = {}
        g, k, m = geom.gamma, geom.kappa, geom.mass
        deltas = (DeltaTerm(g, -1j * k), DeltaTerm(-g, 1j * k))
        smooth = None
        envelope = None
        if m > 0:
            smooth = self._smooth
            env_scale = self._envelope_scale()
            envelope = Envelope("exponential", env_scale, 0.75)
        super().__init__(
            smooth, deltas, envelope, ((-math.inf, -g), (g, math.inf)), (-g, g), None, m,
            f"orbit-commutator(m={m:g})",
            () if m > 0 else ("massless: light-cone deltas only, a distributional correlator",),
            {"geometry": geom.as_dict()},
        )

    # -- pointwise -----------------------------------------------------------

    def tail(self, v) -> np.ndarray:
        """T(v) = m J_1(m tau(v)) / (4 pi tau(v)) for v >= gamma."""
        v = np.asarray(v, dtype=float)
        t2 = np.maximum(self.geom.tau2(v), 0.0)
        return _t_of_tau(self.geom.mass, np.sqrt(t2))

    def _smooth(self, s) -> np.ndarray:
        s = np.asarray(s)
        sr = np.real(s)
        a = np.abs(sr)
        out = 1j * np.sign(sr) * self.tail(np.maximum(a, self.geom.gamma))
        return np.where(a > self.geom.gamma, out, 0.0)

    def _envelope_scale(self) -> float:
        s = np.linspace(self.geom.gamma, self.geom.gamma + 40, 20001)
        return 1.5 * float(np.max(np.abs(self.tail(s)) * np.exp(0.75 * s)))

    def cutoff(self) -> float:
        return self.geom.gamma + 40.0

    # -- tail geometry ----------------------------------------------------------

    def _v_of_y(self, y):
        geo = self.geom
        pq = geo.xi * geo.xi_prime
        c = geo.cosh_gamma + (np.asarray(y) / geo.mass) ** 2 / (2 * pq)
        return np.arccosh(c), np.sqrt((c - 1) * (c + 1))

    def _y_of_v(self, v: float) -> float:
        return self.geom.mass * math.sqrt(max(float(self.geom.tau2(v)), 0.0))

    def switch_point(self) -> float:
        """s where m tau(s) reaches the first zero of J_1."""
        return float(self._v_of_y(J11)[0])

    def _y_panels(self, y_start: float, max_dv: float, n_panels: int = N_ZERO_PANELS):
        """Nodes in s and weights (with the Jacobian and 1/(4 pi xi xi' sinh)) for each y-panel."""
        key = ("y", y_start, max_dv, n_panels)
        if key not in self._cache:
            self._cache[key] = self._build_y_panels(y_start, max_dv, n_panels)
        return self._cache[key]

    def _build_y_panels(self, y_start, max_dv, n_panels):
        geo = self.geom
        pq = geo.xi * geo.xi_prime
        k0 = int(max(0, math.floor(y_start / math.pi)))
        ks = np.arange(k0, k0 + n_panels + 2)
        zs = _mcmahon_zeros(ks)
        if ks[0] < 400:
            exact = special.jn_zeros(1, int(ks[-1]) + 1)
            zs = exact[ks]
        zs = zs[zs > y_start]
        edges = np.concatenate([[y_start], zs])[: n_panels + 1]
        nodes, weights, owner = [], [], []
        for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            va = self._v_of_y(a)[0]
            vb = self._v_of_y(b)[0]
            sub = max(1, int(math.ceil((vb - va) / max_dv)))
            sub_edges = np.linspace(a, b, sub + 1)
            y, w = composite_gauss_legendre(sub_edges, 24)
            v, sh = self._v_of_y(y)
            nodes.append(v)
            weights.append(w * special.j1(y) / (4 * math.pi * pq * sh))
            owner.append(np.full(y.size, i))
        return np.concatenate(nodes), np.concatenate(weights), np.concatenate(owner), edges.size - 1

    def _head_nodes(self, max_dv: float):
        key = ("head", max_dv)
        if key not in self._cache:
            self._cache[key] = self._build_head_nodes(max_dv)
        return self._cache[key]

    def _build_head_nodes(self, max_dv):
        g = self.geom.gamma
        v1 = self.switch_point()
        graded = g + (v1 - g) * np.concatenate([[0.0], np.geomspace(1e-9, 0.05, 20)])
        uni = np.linspace(g + 0.05 * (v1 - g), v1, int(math.ceil((v1 - g) / max_dv)) + 2)
        edges = np.unique(np.concatenate([graded, uni]))
        v, w = composite_gauss_legendre(edges, 24)
        return v, w * self.tail(v)

    # -- integration -----------------------------------------------------------

    def integrate(self, kernel, exclude=None, tol: float = 1e-13, min_distance: float | None = None):
        """int kernel(s) C_smooth(s) ds over |s| > gamma.

        With ``exclude`` (or ``min_distance`` is None and a scalar kernel) the
        segment before the switch point uses adaptive quadrature; otherwise
        fixed nodes whose spacing is half of ``min_distance``, the distance of
        the kernel's nearest singularity from the real axis. Vectorized
        kernels may return shape (M, N) for N nodes.
        """
        if self.smooth is None:
            return 0j
        if min_distance is not None and exclude is None:
            return self._integrate_fixed(kernel, min_distance)
        return self._integrate_adaptive(kernel, exclude, tol)

    def _branch_kernel(self, kernel, sign):
        return lambda v: kernel(sign * np.asarray(v)) * (sign * 1j)

    def _integrate_fixed(self, kernel, min_distance):
        max_dv = min(0.25, 0.5 * min_distance)
        max_dv = 2.0 ** math.floor(math.log2(max_dv))
        hv, hw = self._head_nodes(max_dv)
        yv, yw, owner, npan = self._y_panels(J11, max_dv)
        total = 0
        for sign in (1, -1):
            K = self._branch_kernel(kernel, sign)
            head = np.asarray(K(hv)) @ hw
            vals = np.asarray(K(yv)) * yw
            if vals.ndim == 1:
                vals = vals[None, :]
                head = np.atleast_1d(head)
            sums = np.zeros((vals.shape[0], npan), dtype=complex)
            for j in range(vals.shape[0]):
                sums[j] = np.bincount(owner, weights=vals[j].real, minlength=npan) + 1j * np.bincount(
                    owner, weights=vals[j].imag, minlength=npan)
            partial = np.cumsum(sums, axis=1)
            acc = np.array([wynn_epsilon(p[-WYNN_TERMS:])[0] for p in partial])
            total = total + head + acc
        return total if np.ndim(total) and np.size(total) > 1 else complex(np.ravel(total)[0])

    def _integrate_adaptive(self, kernel, exclude, tol):
        g = self.geom.gamma
        v1 = self.switch_point()
        total = 0j
        for sign in (1, -1):
            K = self._branch_kernel(kernel, sign)
            f = lambda v: K(v) * self.tail(v)
            win = None
            if exclude is not None:
                lo, hi = sorted((sign * exclude[0], sign * exclude[1]))
                if hi > g:
                    win = (max(lo, g), hi)
            v_switch = v1 if win is None else max(v1, win[1] + 1.0)
            pieces = [(g, v_switch)] if win is None else [(g, win[0]), (win[1], v_switch)]
            for a, b in pieces:
                if b > a:
                    total += _quad(f, a, b, tol, limit=2000)
            y_start = self._y_of_v(v_switch)
            yv, yw, owner, npan = self._y_panels(y_start, 0.25)
            vals = np.asarray(K(yv)) * yw
            sums = np.bincount(owner, weights=vals.real, minlength=npan) + 1j * np.bincount(
                owner, weights=vals.imag, minlength=npan)
            total += wynn_epsilon(np.cumsum(sums)[-WYNN_TERMS:])[0]
        return total


def commutator_massive(geom: WedgePairGeometry, gate: bool = True) -> BoostCommutator:
    """The orbit commutator C(s), after the Pauli-Jordan oracle gate for this mass."""
    if geom.mass < 0:
        raise InputError("mass must be non-negative")
    if gate:
        pauli_jordan_gate(float(geom.mass))
    return BoostCommutator(geom)
