"""Thermal two-point functions from commutators and their KMS diagnostics.

Conventions. For a commutator-type correlation function C(t) with Fourier
transform C^(w) = int C(t) e^{iwt} dt the reconstructed two-point function is

    W(t) = (1/2 pi) vp int C^(w) / (1 - e^{-beta w}) e^{-iwt} dw,

equivalently (i / 2 beta) lim_{eps -> 0} int coth(pi (u - t + i eps) / beta) C(u) du.
Its partner H(t) = W(t - i beta) satisfies W - H = C and detailed balance
W^(w) = e^{beta w} H^(w). Complex arguments with -beta < Im t < 0 evaluate
the analytic continuation into the KMS strip.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import InputError, NotL1Error, QuadratureError, RegularizationError
from .numerics import composite_gauss_legendre, extrapolate_to_zero, gauss_legendre, geometric_grid

SQRT3 = math.sqrt(3.0)
DEFAULT_EPS = geometric_grid(1e-1, 1e-4, 0.5)
PV_HALVINGS = 4
ROUNDOFF_MARGIN = 1e6


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaTerm:
    location: float
    weight: complex


@dataclass(frozen=True)
class Envelope:
    """Declared decay bound |g(t)| <= scale / (1 + |t|^rate), scale e^{-rate |t|}, or compact."""

    kind: str = "exponential"
    scale: float = 1.0
    rate: float = 1.0
    extent: float = math.inf

    def __post_init__(self):
        if self.kind not in ("power", "exponential", "gaussian", "compact"):
            raise InputError(f"unknown envelope kind {self.kind!r}")

    def __call__(self, t) -> np.ndarray:
        a = np.abs(np.asarray(t, dtype=float))
        if self.kind == "power":
            return self.scale / (1.0 + a**self.rate)
        if self.kind == "exponential":
            return self.scale * np.exp(-self.rate * a)
        if self.kind == "gaussian":
            return self.scale * np.exp(-0.5 * (a / self.rate) ** 2)
        return np.where(a <= self.extent, self.scale, 0.0)

    def cutoff(self, tol: float = 1e-16) -> float:
        """|t| beyond which the bound falls under tol * scale."""
        if self.kind == "power":
            return (1.0 / tol) ** (1.0 / self.rate)
        if self.kind == "exponential":
            return -math.log(tol) / self.rate
        if self.kind == "gaussian":
            return self.rate * math.sqrt(-2.0 * math.log(tol))
        return self.extent

    def integrable(self) -> bool:
        return self.kind != "power" or self.rate > 1.0


@dataclass
class CorrelationFunction:
    """A function of boost time: smooth part plus point deltas.

    ``smooth`` maps real (or complex, for continued two-point functions)
    arrays to complex arrays; it is set to zero outside ``support``.
    """

    smooth: Callable[[np.ndarray], np.ndarray] | None = None
    deltas: tuple[DeltaTerm, ...] = ()
    envelope: Envelope | None = None
    support: tuple[tuple[float, float], ...] = ((-math.inf, math.inf),)
    breakpoints: tuple[float, ...] = ()
    beta: float | None = None
    mass: float | None = None
    name: str = "correlator"
    notes: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t)
        if self.smooth is None:
            return np.zeros(t.shape, dtype=complex)
        out = np.asarray(self.smooth(t), dtype=complex)
        if np.iscomplexobj(t) and np.any(np.imag(t) != 0):
            return out
        tr = np.real(t)
        mask = np.zeros(tr.shape, dtype=bool)
        for a, b in self.support:
            mask |= (tr >= a) & (tr <= b)
        return np.where(mask, out, 0.0)

    # -- integration windows -------------------------------------------------

    def cutoff(self) -> float:
        if self.envelope is None:
            finite = [abs(x) for iv in self.support for x in iv if math.isfinite(x)]
            if len(finite) < 2 * len(self.support):
                raise NotL1Error(f"{self.name}: unbounded support without a decay envelope")
            return max(finite)
        return self.envelope.cutoff()

    def windows(self) -> list[tuple[float, float]]:
        if self.smooth is None:
            return []
        T = self.cutoff()
        out = []
        for a, b in self.support:
            lo, hi = max(a, -T), min(b, T)
            if hi > lo:
                out.append((lo, hi))
        return out

    def integrate(
        self,
        kernel: Callable[[np.ndarray], np.ndarray],
        exclude: tuple[float, float] | None = None,
        tol: float = 1e-13,
    ) -> complex:
        """int kernel(t) * smooth(t) dt over the support, minus an excluded window."""
        pieces = []
        for lo, hi in self.windows():
            if exclude is None or exclude[1] <= lo or exclude[0] >= hi:
                pieces.append((lo, hi))
            else:
                if exclude[0] > lo:
                    pieces.append((lo, exclude[0]))
                if exclude[1] < hi:
                    pieces.append((exclude[1], hi))
        total = 0j
        for lo, hi in pieces:
            pts = [p for p in self.breakpoints if lo < p < hi]
            total += _quad(lambda t: kernel(t) * self(t), lo, hi, tol, pts)
        return total

    # -- Fourier transform ---------------------------------------------------

    def fourier(self, omega, max_omega: float | None = None) -> np.ndarray:
        """C^(w) = int C(t) e^{iwt} dt; deltas exactly, smooth part by panel Gauss-Legendre.

        Panels are sized so that each resolves the highest requested frequency.
        """
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        out = np.zeros(w.shape, dtype=complex)
        for d in self.deltas:
            out += d.weight * np.exp(1j * w * d.location)
        if self.smooth is None:
            return out
        wmax = max(float(np.max(np.abs(w))) if max_omega is None else max_omega, 1.0)
        for lo, hi in self.windows():
            edges = _panel_edges(lo, hi, min(1.0, 2.0 / wmax), self.breakpoints)
            t, wt = composite_gauss_legendre(edges, 16)
            vals = self(t) * wt
            for i0 in range(0, w.size, 512):
                sl = slice(i0, i0 + 512)
                out[sl] += np.exp(1j * np.outer(w[sl], t)) @ vals
        return out

    # -- invariants ------------------------------------------------------------

    def check_antisymmetry(self, samples=None, tol: float = 1e-12) -> bool:
        """g(-t) = -g(t), deltas in +- pairs with opposite weights."""
        locs = {round(d.location, 12): d.weight for d in self.deltas}
        for x, wgt in locs.items():
            partner = locs.get(round(-x, 12))
            if partner is None or abs(partner + wgt) > tol * max(1.0, abs(wgt)):
                return False
        if self.smooth is None:
            return True
        t = np.linspace(0.0, min(self.cutoff(), 50.0), 2001)[1:] if samples is None else np.asarray(samples)
        a, b = self(t), self(-t)
        return bool(np.all(np.abs(a + b) <= tol * np.maximum(1.0, np.abs(a))))

    def check_envelope(self, n: int = 4000, slack: float = 1.0 + 1e-9) -> bool:
        if self.envelope is None or self.smooth is None:
            return True
        T = self.envelope.cutoff(1e-8)
        t = np.linspace(-T, T, n)
        return bool(np.all(np.abs(self(t)) <= slack * self.envelope(t) + 1e-300))

    def reflected(self) -> "CorrelationFunction":
        """t -> -t."""
        sm = None if self.smooth is None else (lambda t, f=self.smooth: f(-np.asarray(t)))
        return CorrelationFunction(
            sm,
            tuple(DeltaTerm(-d.location, d.weight) for d in self.deltas),
            self.envelope,
            tuple((-b, -a) for a, b in reversed(self.support)),
            tuple(-p for p in self.breakpoints),
            self.beta, self.mass, f"{self.name}-reflected", self.notes, dict(self.meta),
        )


def _panel_edges(lo, hi, h, breakpoints=()) -> np.ndarray:
    n = max(1, int(math.ceil((hi - lo) / h)))
    edges = np.linspace(lo, hi, n + 1)
    extra = [p for p in breakpoints if lo < p < hi]
    return np.unique(np.concatenate([edges, extra]))


def _quad(f, a, b, tol, points=(), limit=400) -> complex:
    """Adaptive quadrature of a complex integrand, real and imaginary parts separately."""
    kw = dict(epsabs=tol, epsrel=1e-12, limit=limit)
    if points and math.isfinite(a) and math.isfinite(b):
        kw["points"] = sorted(points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, e1 = integrate.quad(lambda x: float(np.real(f(np.array(x)))), a, b, **kw)
        im, e2 = integrate.quad(lambda x: float(np.imag(f(np.array(x)))), a, b, **kw)
    err = math.hypot(e1, e2)
    val = complex(re, im)
    if err > max(100 * tol, 1e-10 * abs(val)):
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge", err)
    return val


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThermalKernel:
    """Bose factor 1/(1 - e^{-beta w}) or its time-domain coth form."""

    beta: float
    kind: str = "bose"

    def __post_init__(self):
        if not self.beta > 0:
            raise InputError("beta must be positive (use math.inf for the ground state)")
        if self.kind not in ("bose", "coth"):
            raise InputError("kernel kind is 'bose' or 'coth'")

    @property
    def ground_state(self) -> bool:
        return math.isinf(self.beta)

    def bose(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        if self.ground_state:
            return np.where(w > 0, 1.0, 0.0)
        with np.errstate(divide="ignore", over="ignore"):
            return -1.0 / np.expm1(-self.beta * w)

    def occupation(self, omega) -> np.ndarray:
        """n(w) = 1/(e^{beta w} - 1) for w > 0."""
        if self.ground_state:
            return np.zeros_like(np.asarray(omega, dtype=float))
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(self.beta * np.asarray(omega, dtype=float))

    def coth(self, x, eps: float = 0.0) -> np.ndarray:
        z = np.pi * (np.asarray(x) + 1j * eps) / self.beta
        return 1.0 / np.tanh(z)


def coth_window(beta: float, half_width: float, eps: float) -> complex:
    """int_{-a}^{a} coth(pi (x + i eps) / beta) dx in closed form."""
    return -2j * (beta / math.pi) * math.atan(
        math.tanh(math.pi * half_width / beta) / math.tan(math.pi * eps / beta)
    )


# ---------------------------------------------------------------------------
# Bose-factor reconstruction
# ---------------------------------------------------------------------------


@dataclass
class _BoseSmooth:
    theta_nodes: np.ndarray
    theta_vals: np.ndarray
    n_common: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    n_small: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]
    deltas_h: list[float]


def _resolve_band(C: CorrelationFunction, start: float = 4.0, limit: float = 4096.0) -> float:
    """Frequency beyond which |C^(+-w)| stays below 1e-15 of its maximum."""
    wmax = start
    while True:
        w = np.linspace(0.0, wmax, 801)
        f = np.abs(C.fourier(np.concatenate([w, -w]), max_omega=wmax))
        f_pos, f_neg = f[: w.size], f[w.size :]
        peak = max(f.max(), 1e-300)
        live = np.nonzero((f_pos > 1e-15 * peak) | (f_neg > 1e-15 * peak))[0]
        last = w[live[-1]] if live.size else 0.0
        if last < 0.9 * wmax:
            return max(1.2 * last, 1.0)
        if wmax >= limit:
            raise QuadratureError(f"{C.name}: Fourier transform does not decay by w = {limit}", f_pos[-1])
        wmax *= 2


def _delta_bose(weight: complex, loc: float, t0: complex, kernel: ThermalKernel) -> complex:
    """(w/2pi) int e^{iw(loc - t0)} B(w) dw for one delta term.

    The positive-frequency part is exactly i/x. The occupation part expands
    1/(e^{beta w} - 1) = sum_n e^{-n beta w} and integrates term by term,
    int_0^inf 2i sin(w x) e^{-n beta w} dw = 2i x / (x^2 + n^2 beta^2), with
    the tail beyond N closed by the Euler-Maclaurin midpoint rule.
    """
    x = loc - t0
    if x == 0:
        raise InputError("evaluation point coincides with a delta location")
    val = 1j / x
    if not kernel.ground_state:
        beta = kernel.beta
        if abs(np.imag(x)) >= beta:
            raise InputError("imaginary shift outside the KMS strip")
        N = int(max(128, 40 * abs(x) / beta))
        n = np.arange(1, N + 1)
        s = np.sum(x / (x * x + (n * beta) ** 2))
        M = N + 0.5
        tail = np.arctan(x / (beta * M)) / beta
        tail -= 2 * x * beta**2 * M / (x * x + (beta * M) ** 2) ** 2 / 24
        val += 2j * (s + tail)
    return weight * val / (2 * math.pi)


def bose_transform(
    C: CorrelationFunction,
    beta: float,
    omega_max: float | None = None,
    pv_window: float | None = None,
    check_l1: bool = True,
) -> CorrelationFunction:
    """Two-point function from a commutator by the Bose-factor integral.

    The w = 0 pole is handled by excising [-delta, delta] symmetrically and
    extrapolating delta -> 0 over ``PV_HALVINGS`` halvings. ``beta = inf``
    applies the positive-frequency indicator.
    """
    kernel = ThermalKernel(beta, "bose")
    if check_l1 and C.smooth is not None:
        if C.envelope is None or not C.envelope.integrable():
            raise NotL1Error(f"{C.name}: declared envelope is not integrable")
    smooth_data = None
    if C.smooth is not None:
        top = omega_max or _resolve_band(C)
        width = max(sum(b - a for a, b in C.windows()), 1.0)
        h = min(0.5 / width * 2 * math.pi, top / 64)
        edges = np.linspace(0.0, top, int(math.ceil(top / h)) + 1)
        th_w, th_ww = composite_gauss_legendre(edges, 16)
        th_c = C.fourier(th_w, top) * th_ww
        delta0 = min(0.05, 0.05 / beta) if not kernel.ground_state else 0.05
        common = small = None
        deltas_h: list[float] = []
        if not kernel.ground_state:
            e2 = np.concatenate([[delta0], edges[edges > delta0]])
            nw, nww = composite_gauss_legendre(e2, 16)
            common = (nw, nww * kernel.occupation(nw), C.fourier(nw, top), C.fourier(-nw, top))
            d_pv = pv_window or 1e-3 * delta0
            small = []
            for k in range(PV_HALVINGS + 1):
                dk = d_pv * 2.0**-k
                ge = np.geomspace(dk, delta0, 24)
                sw, sww = composite_gauss_legendre(ge, 16)
                small.append((sw, sww * kernel.occupation(sw), C.fourier(sw, top), C.fourier(-sw, top)))
                deltas_h.append(dk)
        smooth_data = _BoseSmooth(th_w, th_c, common, small, deltas_h)

    def evaluate(t) -> np.ndarray:
        t = np.asarray(t, dtype=complex)
        out = np.zeros(t.shape, dtype=complex)
        for idx in np.ndindex(t.shape):
            out[idx] = _bose_point(C, kernel, smooth_data, complex(t[idx]))
        return out

    return CorrelationFunction(
        evaluate, (), None, ((-math.inf, math.inf),), C.breakpoints, beta, C.mass,
        f"bose[{C.name}]", C.notes + ("reconstructed by the Bose-factor integral",),
    )


def _bose_point(C, kernel, data: _BoseSmooth | None, t0: complex) -> complex:
    if np.imag(t0) > 0 or (not kernel.ground_state and -np.imag(t0) >= kernel.beta):
        raise InputError("evaluation point outside the closed KMS strip -beta < Im t <= 0")
    val = sum(_delta_bose(d.weight, d.location, t0, kernel) for d in C.deltas)
    if data is None:
        return complex(val)
    smooth = np.sum(data.theta_vals * np.exp(-1j * data.theta_nodes * t0))
    if not kernel.ground_state:
        def n_part(pack):
            w, wn, cp, cm = pack
            return np.sum(wn * (cp * np.exp(-1j * w * t0) - cm * np.exp(1j * w * t0)))

        common = n_part(data.n_common)
        seq = [common + n_part(p) for p in data.n_small]
        lim, _, _ = extrapolate_to_zero(data.deltas_h, seq, order=2)
        smooth += lim
    return complex(val + smooth / (2 * math.pi))


# ---------------------------------------------------------------------------
# coth-kernel form
# ---------------------------------------------------------------------------


@dataclass
class CothResult:
    value: complex
    error: float
    eps: np.ndarray | None = None
    sequence: np.ndarray | None = None


def _in_support(C: CorrelationFunction, t: float) -> bool:
    return any(a <= t <= b for a, b in C.support)


def coth_point(
    C: CorrelationFunction,
    beta: float,
    t0: complex,
    eps_sequence: Sequence[float] | None = None,
    order: int = 2,
    tol: float = 1e-7,
) -> CothResult:
    """(i / 2 beta) lim_{eps->0} int coth(pi (u - t0 + i eps) / beta) C(u) du at one point.

    Off the real axis (-beta < Im t0 < 0) the integral is regular and is taken
    at eps = 0. On the real axis the pole's neighbourhood [t0 - a, t0 + a] is
    handled by subtracting C(t0) (whose coth integral is known in closed form)
    and extrapolating the eps sequence; the far part is regular.
    """
    kernel = ThermalKernel(beta, "coth")
    if kernel.ground_state:
        raise InputError("the coth form needs finite beta; use bose_transform for the ground state")
    eps = np.asarray(DEFAULT_EPS if eps_sequence is None else eps_sequence, dtype=float)
    im = float(np.imag(t0))
    if im > 0 or -im >= beta:
        raise InputError("evaluation point outside the KMS strip -beta < Im t <= 0")
    pref = 1j / (2 * beta)
    delta_part = lambda e: sum(d.weight * kernel.coth(d.location - t0, e) for d in C.deltas)
    if im < 0:
        val = delta_part(0.0)
        if C.smooth is not None:
            val += C.integrate(lambda u: kernel.coth(u - t0))
        return CothResult(complex(pref * val), 0.0)
    t0 = float(np.real(t0))
    if any(d.location == t0 for d in C.deltas):
        raise InputError("evaluation point coincides with a delta location")
    if C.smooth is None or not _in_support(C, t0):
        val = delta_part(0.0)
        if C.smooth is not None:
            val += C.integrate(lambda u: kernel.coth(u - t0))
        return CothResult(complex(pref * val), 0.0)
    a = min(0.25 * beta, 0.5)
    for lo, hi in C.support:
        if lo <= t0 <= hi:
            a = min(a, 0.9 * (t0 - lo), 0.9 * (hi - t0))
    for p in C.breakpoints:
        if p != t0:
            a = min(a, 0.9 * abs(p - t0))
    if a <= 0:
        raise RegularizationError("evaluation point sits on a support edge or breakpoint")
    c0 = complex(C(np.array(t0)))
    far = C.integrate(lambda u: kernel.coth(u - t0), exclude=(t0 - a, t0 + a))
    seq = []
    for e in eps:
        near = _quad(
            lambda u: kernel.coth(u - t0, e) * (C(u) - c0), t0 - a, t0 + a, 1e-14, [t0], limit=800
        )
        seq.append(near + c0 * coth_window(beta, a, e) + delta_part(e))
    lim, err, _ = extrapolate_to_zero(eps, seq, order=order)
    if not err <= tol * max(1.0, abs(lim)):
        raise RegularizationError(f"eps -> 0 extrapolation unsettled (change {err:.3e})")
    return CothResult(complex(pref * (lim + far)), float(abs(pref) * err), eps, pref * (np.array(seq) + far))


def coth_transform(
    C: CorrelationFunction,
    beta: float,
    eps_sequence: Sequence[float] | None = None,
    order: int = 2,
) -> CorrelationFunction:
    """Two-point function from a commutator by the coth kernel (pointwise evaluator)."""
    ThermalKernel(beta, "coth")

    def evaluate(t) -> np.ndarray:
        t = np.asarray(t, dtype=complex)
        out = np.zeros(t.shape, dtype=complex)
        for idx in np.ndindex(t.shape):
            out[idx] = coth_point(C, beta, complex(t[idx]), eps_sequence, order).value
        return out

    return CorrelationFunction(
        evaluate, (), None, ((-math.inf, math.inf),), C.breakpoints, beta, C.mass,
        f"coth[{C.name}]", C.notes + ("reconstructed by the coth kernel",),
    )


def recover_commutator(W: CorrelationFunction, t) -> np.ndarray:
    """W(t) - conj(W(t)): the commutator of a hermitian pair (real t off singularities)."""
    w = W(np.asarray(t, dtype=float))
    return w - np.conj(w)


# ---------------------------------------------------------------------------
# detailed balance
# ---------------------------------------------------------------------------


@dataclass
class KMSReport:
    beta: float
    omega: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray
    max_residual: float
    floor: float
    passed: bool
    tol: float

    def rows(self) -> list[dict]:
        return [
            {"omega": float(w), "lhs_re": l.real, "lhs_im": l.imag, "rhs_re": r.real, "rhs_im": r.imag,
             "residual": float(e)}
            for w, l, r, e in zip(self.omega, self.lhs, self.rhs, self.residual)
        ]


def kms_check(
    w_plus: Callable,
    w_minus: Callable,
    beta: float,
    omega_grid=None,
    sigma: float | None = None,
    centers: Sequence[float] = (0.0,),
    tol: float = 1e-6,
    floor: float = 1e-6,
    nodes: int = 4000,
) -> KMSReport:
    """Detailed balance in Gaussian-tested form.

    For f(t) = exp(i w t - (t - c)^2 / 2 sigma^2), which is entire, the KMS
    condition H(t) = W(t - i beta) is equivalent to

        int f(t) H(t) dt = int f(t + i beta) W(t) dt,

    the w-localized (Fourier) version of detailed balance
    W^(w) = e^{beta w} H^(w). For beta = inf the check is that the
    left side vanishes for w > 0 (ground state). Residuals are relative,
    with entries where both sides fall under ``floor`` times the peak
    magnitude ignored.
    """
    if not beta > 0:
        raise InputError("beta must be positive")
    if omega_grid is None:
        # the shifted test function grows like e^{beta |w|}; keep that moderate
        wmax = 4.0 if math.isinf(beta) else min(4.0, 12.0 / beta)
        omega = np.linspace(-wmax, wmax, 33)
    else:
        omega = np.asarray(omega_grid, float)
    if sigma is None:
        sigma = 4.0 if math.isinf(beta) else max(4.0, 2.0 * beta)
    lhs_all, rhs_all, ws, noise = [], [], [], []
    for c in centers:
        t, wt = gauss_legendre(c - 12 * sigma, c + 12 * sigma, nodes)
        hm = np.asarray(w_minus(t), dtype=complex)
        hp = np.asarray(w_plus(t), dtype=complex)
        g = np.exp(-0.5 * ((t - c) / sigma) ** 2)
        for w in omega:
            f = np.exp(1j * w * t) * g
            lhs = np.sum(wt * f * hm)
            nz = np.sum(np.abs(wt * f * hm))
            if math.isinf(beta):
                rhs = 0j if w > 0 else np.nan
            else:
                fs = np.exp(1j * w * (t + 1j * beta) - 0.5 * ((t + 1j * beta - c) / sigma) ** 2)
                rhs = np.sum(wt * fs * hp)
                nz = max(nz, np.sum(np.abs(wt * fs * hp)))
            noise.append(ROUNDOFF_MARGIN * np.finfo(float).eps * nz)
            lhs_all.append(lhs)
            rhs_all.append(rhs)
            ws.append(w)
    lhs_all = np.array(lhs_all)
    rhs_all = np.array(rhs_all)
    if math.isinf(beta):
        scale = max(np.max(np.abs(lhs_all)), 1e-300)
        pos = np.array(ws) * sigma > 6.0
        res = np.where(pos, np.abs(lhs_all) / scale, 0.0)
        cut = floor * scale
    else:
        mag = np.maximum(np.abs(lhs_all), np.abs(rhs_all))
        cut = floor * max(np.max(mag), 1e-300)
        # entries dominated by cancellation round-off are not decidable
        cuts = np.maximum(cut, np.array(noise))
        res = np.where(mag > cuts, np.abs(lhs_all - rhs_all) / np.maximum(mag, cuts), 0.0)
    mx = float(np.max(res)) if res.size else 0.0
    return KMSReport(beta, np.array(ws), lhs_all, rhs_all, res, mx, float(cut), mx < tol, tol)


def thermal_pair(W: CorrelationFunction, beta: float, shift: float | None = None):
    """(W(t - i a), W(t - i (beta - a))): a detailed-balance pair with effective beta - 2a.

    Shifting into the strip turns boundary-value distributions into smooth
    functions; ``shift`` defaults to beta / 4.
    """
    a = beta / 4 if shift is None else shift
    if not 0 <= a < beta / 2:
        raise InputError("shift must lie in [0, beta/2)")
    return (lambda t: W(np.asarray(t) - 1j * a)), (lambda t: W(np.asarray(t) - 1j * (beta - a))), beta - 2 * a


# ---------------------------------------------------------------------------
# integrability and decay
# ---------------------------------------------------------------------------


@dataclass
class TailFit:
    model: str
    rate: float
    scale: float
    rms: float

    def remainder(self, T: float) -> float:
        """Bound on int_T^inf of the fitted tail (inf if not integrable)."""
        if self.model == "exponential":
            # a rate too small to decay across the sampled range is not evidence of decay
            if self.rate * T < 1.0:
                return math.inf
            return self.scale * math.exp(-self.rate * T) / self.rate
        if self.rate <= 1.0:
            return math.inf
        return self.scale * T ** (1 - self.rate) / (self.rate - 1)


def _upper_envelope(y: np.ndarray) -> np.ndarray:
    """Running maximum from the far end: sup_{t' >= t} y(t')."""
    return np.maximum.accumulate(y[::-1])[::-1]


def fit_tail(t: np.ndarray, y: np.ndarray) -> TailFit:
    """Fit the monotone envelope of y on t > 0 to power and exponential laws; keep the better."""
    env = _upper_envelope(np.abs(y))
    ok = env > 1e-300
    t, env = t[ok], env[ok]
    if t.size < 4:
        return TailFit("exponential", math.inf, 0.0, 0.0)
    ly = np.log(env)
    fits = []
    A = np.column_stack([np.ones_like(t), -np.log(t)])
    c, *_ = np.linalg.lstsq(A, ly, rcond=None)
    rms = float(np.sqrt(np.mean((A @ c - ly) ** 2)))
    with np.errstate(over="ignore"):
        fits.append(TailFit("power", float(c[1]), float(np.exp(c[0])), rms))
    A = np.column_stack([np.ones_like(t), -t])
    c, *_ = np.linalg.lstsq(A, ly, rcond=None)
    rms = float(np.sqrt(np.mean((A @ c - ly) ** 2)))
    fits.append(TailFit("exponential", float(c[1]), float(np.exp(c[0])), rms))
    return min(fits, key=lambda f: f.rms)


def _sample_grid(T: float, n: int) -> np.ndarray:
    inner = np.linspace(0.0, min(T, 20.0), n)
    outer = np.geomspace(1.0, T, n // 2) if T > 20 else np.empty(0)
    return np.unique(np.concatenate([inner, outer]))


def _side_values(g, tpos: np.ndarray, sign: int) -> np.ndarray:
    vals = g(sign * tpos) if callable(g) else None
    return np.abs(np.asarray(vals))


@dataclass
class L1Verdict:
    integrable: bool
    bound: float
    fits: dict
    T_max: float
    reason: str = ""


def l1_clustering_check(g: CorrelationFunction | Callable, T_max: float = 1000.0, n: int = 4001) -> L1Verdict:
    """Integrate |g| on [-T_max, T_max] and close each side with a fitted tail.

    Delta terms contribute their weights; a power tail with rate <= 1 + 0.05
    is declared non-integrable.
    """
    t = _sample_grid(T_max, n)
    bound = 0.0
    fits = {}
    reasons = []
    f = g if not isinstance(g, CorrelationFunction) else (lambda x: g(x))
    if isinstance(g, CorrelationFunction):
        bound += sum(abs(d.weight) for d in g.deltas)
        if g.smooth is None:
            return L1Verdict(True, bound, {}, T_max, "delta terms only (distributional case)")
    for sign, label in ((1, "+"), (-1, "-")):
        y = _side_values(f, t, sign)
        bound += float(np.trapezoid(y, t))
        tail = t >= T_max / 8
        fit = fit_tail(t[tail], y[tail])
        fits[label] = fit
        if fit.model == "power" and fit.rate <= 1.05:
            reasons.append(f"side {label}: power tail with rate {fit.rate:.3f} (log or worse divergence)")
            continue
        bound += fit.remainder(T_max)
    integrable = not reasons
    return L1Verdict(integrable, bound if integrable else math.inf, fits, T_max, "; ".join(reasons))


@dataclass
class DecayFlags:
    condition_a: dict
    condition_b: bool
    alpha: float
    fit: TailFit
    threshold: float = SQRT3


def decay_condition_check(
    g: CorrelationFunction | Callable,
    step: float = 1e-4,
    T_max: float = 1000.0,
    n: int = 4001,
) -> DecayFlags:
    """Tail decay classifiers.

    condition_b: |g(t)| <= C / (1 + |t|^alpha) with alpha > sqrt(3) (exponential
    tails count as alpha = inf). condition_a: the monotone envelope M of |g'|
    (central differences) is integrable and tends to zero, tested on each
    side separately.
    """
    f = g if not isinstance(g, CorrelationFunction) else (lambda x: g(x))
    t = _sample_grid(T_max, n)
    tail = t >= T_max / 8
    side_a = {}
    worst = None
    for sign, label in ((1, "+"), (-1, "-")):
        y = _side_values(f, t, sign)
        fit = fit_tail(t[tail], y[tail])
        if worst is None or (fit.model == "power" and (worst.model != "power" or fit.rate < worst.rate)):
            worst = fit
        tp = sign * t
        dg = np.abs((np.asarray(f(tp + step)) - np.asarray(f(tp - step))) / (2 * step))
        M = _upper_envelope(dg)
        mfit = fit_tail(t[tail], M[tail])
        integral = float(np.trapezoid(M, t)) + mfit.remainder(T_max)
        # M must fall off across the fitted tail, not just relative to its peak
        start = M[tail][0]
        vanishing = bool(M[-1] <= 0.5 * start or M[-1] <= 1e-12 * max(M[0], 1e-300))
        side_a[label] = {"integrable": math.isfinite(integral) and mfit.remainder(T_max) < math.inf,
                         "vanishing": vanishing, "integral": integral}
        side_a[label]["holds"] = side_a[label]["integrable"] and vanishing
    alpha = math.inf if worst.model == "exponential" else worst.rate
    return DecayFlags(side_a, bool(alpha > SQRT3), alpha, worst)


# ---------------------------------------------------------------------------
# model correlators
# ---------------------------------------------------------------------------


def delta_pair(location: float = 1.0, weight: complex = 1.0) -> CorrelationFunction:
    """w delta(t - a) - w delta(t + a)."""
    return CorrelationFunction(
        None, (DeltaTerm(location, weight), DeltaTerm(-location, -weight)), name="delta-pair"
    )


def windowed_oscillator(omega0: float = 1.0, width: float = 8.0) -> CorrelationFunction:
    """-i sin(w0 t)/w0 times exp(-t^2 / 2 L^2): an integrable stand-in for the oscillator commutator.

    The Gaussian cutoff is a harness device; comparisons with the exact
    oscillator belong well inside |t| << L.
    """
    def smooth(t):
        t = np.asarray(t)
        return -1j * np.sin(omega0 * t) / omega0 * np.exp(-0.5 * (t / width) ** 2)

    return CorrelationFunction(
        smooth, (), Envelope("gaussian", 1.0 / omega0, width), name="windowed-oscillator",
        notes=(f"Gaussian cutoff of width {width} applied to an oscillator commutator",),
        meta={"omega0": omega0, "width": width},
    )


def oscillator_two_point(omega0: float, beta: float, t) -> np.ndarray:
    """Thermal oscillator: (coth(beta w0 / 2) cos w0 t - i sin w0 t) / (2 w0)."""
    t = np.asarray(t)
    c = 1.0 if math.isinf(beta) else 1.0 / math.tanh(beta * omega0 / 2)
    return (c * np.cos(omega0 * t) - 1j * np.sin(omega0 * t)) / (2 * omega0)
