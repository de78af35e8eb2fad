"""Scaling-limit estimation: degree fitting, lam -> 0 extrapolation, checks.

The estimator evaluates ``N(lam) * <u, phi_lam>`` along a geometric grid of
scales and extrapolates to ``lam = 0`` with a polynomial (optionally with
logarithmic companions) through the finest samples.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .distributions import (
    DEFAULT_TOL,
    GeneralizedFunction,
    PushforwardTestFunction,
    TestFunction,
    pair,
)
from .errors import (
    DegenerateInputError,
    DomainError,
    InputError,
    NoScalingLimitError,
    NotScaledError,
)
from .numerics import extrapolate_to_zero, geometric_grid

FIT_RMS_THRESHOLD = 0.05
DEFAULT_LAMBDA_GRID = geometric_grid(1.0, 1e-4, 0.5)


@dataclass(frozen=True)
class ScalingFunction:
    """Power-law normalization N(lam) = coef * lam^(-exponent)."""

    coef: float = 1.0
    exponent: float = 0.0

    def __post_init__(self):
        if not self.coef > 0:
            raise InputError("scaling function coefficient must be positive")

    def __call__(self, lam):
        return self.coef * np.asarray(lam, dtype=float) ** (-self.exponent)

    def __mul__(self, c: float) -> "ScalingFunction":
        return ScalingFunction(self.coef * c, self.exponent)

    __rmul__ = __mul__

    @classmethod
    def parse(cls, text: str) -> "ScalingFunction":
        """Parse forms like ``lambda^-2``, ``3*lambda^-1``, ``1``."""
        t = text.replace(" ", "").replace("**", "^")
        m = re.fullmatch(r"(?:([0-9.eE+-]+)\*?)?(?:lambda|lam)(?:\^\(?([0-9.eE+-]+)\)?)?", t)
        if m:
            coef = float(m.group(1)) if m.group(1) else 1.0
            power = float(m.group(2)) if m.group(2) else 1.0
            return cls(coef, -power)
        try:
            return cls(float(t), 0.0)
        except ValueError:
            raise InputError(f"cannot parse scaling function {text!r}") from None

    def __str__(self) -> str:
        return f"{self.coef:g}*lambda^{-self.exponent:g}"


def equivalence_scale(N: ScalingFunction, S: ScalingFunction) -> float | None:
    """alpha = lim S/N if it is finite and positive, else None."""
    if math.isclose(N.exponent, S.exponent, rel_tol=0.0, abs_tol=1e-12):
        return S.coef / N.coef
    return None


@dataclass
class DegreeFit:
    slope: float
    rms: float
    per_probe: list[float]

    def __float__(self) -> float:
        return self.slope

    @property
    def scaling_function(self) -> ScalingFunction:
        return ScalingFunction(1.0, self.slope)


def estimate_degree(
    u: GeneralizedFunction,
    probes: Sequence[TestFunction],
    lam_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    tail: int = 6,
    tol: float = DEFAULT_TOL,
    rms_threshold: float = FIT_RMS_THRESHOLD,
) -> DegreeFit:
    """Slope of log|<u, phi_lam>| against log lam over the finest ``tail`` scales.

    The matching scaling function is ``N(lam) = lam^(-slope)``.
    """
    lam = np.sort(np.asarray(lam_grid, dtype=float))[::-1]
    if lam.size < 6 or tail < 6:
        raise InputError("degree fitting needs at least 6 grid points")
    ratios = lam[1:] / lam[:-1]
    if not (np.allclose(ratios, ratios[0], rtol=1e-9) and 0 < ratios[0] < 1):
        raise InputError("lambda grid must be geometric with ratio in (0, 1)")
    fine = lam[-tail:]
    slopes, worst = [], 0.0
    for phi in probes:
        vals = np.array([abs(pair(u, phi.scale(l), tol)) for l in fine])
        if np.all(vals <= 1e3 * tol):
            continue
        if np.any(vals <= 0):
            raise NotScaledError("pairing vanishes at some scales", float("inf"))
        x, y = np.log(fine), np.log(vals)
        slope, icpt = np.polyfit(x, y, 1)
        rms = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        worst = max(worst, rms)
        if rms > rms_threshold:
            raise NotScaledError(f"log-log fit RMS {rms:.3g} exceeds {rms_threshold}", rms)
        slopes.append(float(slope))
    if not slopes:
        raise DegenerateInputError("zero against all probes")
    return DegreeFit(float(np.mean(slopes)), worst, slopes)


@dataclass
class SlimEstimate:
    """Outcome of one lam -> 0 extrapolation of N(lam) <u, phi_lam>."""

    lam: np.ndarray
    sequence: np.ndarray
    limit: complex
    error: float
    residuals: list[float]
    order: int
    scaling: ScalingFunction
    verdict: str
    degree: float | None = None
    fit_rms: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.verdict == "converged"

    def rows(self) -> list[dict]:
        return [
            {"lambda": float(l), "re": float(v.real), "im": float(v.imag)}
            for l, v in zip(self.lam, self.sequence)
        ]


def _diverging(seq: np.ndarray, floor: float) -> bool:
    tail = np.abs(seq[-4:])
    if tail.size < 4 or tail[-1] <= floor:
        return False
    growing = np.all(np.diff(tail) > 0)
    steps = np.abs(np.diff(seq[-4:]))
    not_settling = np.all(steps[1:] >= steps[:-1] * (1 - 1e-9)) and steps[-1] > floor
    return bool(growing and not_settling)


def _verdict(residuals: list[float], floor: float) -> str:
    last = residuals[-3:]
    if len(last) < 3:
        return "insufficient grid"
    if all(r <= floor for r in last):
        return "converged"
    clipped = [max(r, floor) for r in last]
    if all(b <= a for a, b in zip(clipped[:-1], clipped[1:])):
        return "converged"
    return "not converged"


def _check_domain(phi: TestFunction, lam_grid, region, rng_seed: int = 0) -> None:
    if region is None:
        return
    rng = np.random.default_rng(rng_seed)
    if not hasattr(phi, "support_cloud"):
        raise InputError("domain checks need a test function with support_cloud()")
    cloud = phi.support_cloud(2000, rng)
    for l in lam_grid:
        pts = l * cloud
        inside = region.contains(pts if phi.dim > 1 else pts[:, 0:1])
        if not np.all(inside):
            bad = pts[np.argmin(inside)]
            raise DomainError(
                f"support of phi_lam leaves the region at lambda={l:g} (point {bad})", lam=float(l)
            )


def slim(
    u: GeneralizedFunction,
    N: ScalingFunction,
    phi: TestFunction,
    lam_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    order: int = 2,
    region=None,
    tol: float = DEFAULT_TOL,
    log_terms: bool = False,
    pairing: Callable[[TestFunction, float], complex] | None = None,
) -> SlimEstimate:
    """Extrapolate N(lam) <u, phi_lam> to lam = 0.

    ``region`` (anything with ``contains``) restricts the scaled supports, the
    boundary-point situation; ``pairing`` overrides how ``<u, phi_lam>`` is
    evaluated (used for charts).
    """
    lam = np.sort(np.asarray(lam_grid, dtype=float))[::-1]
    _check_domain(phi, lam, region)
    pairer = pairing or (lambda p, t: pair(u, p, t))
    seq = np.array(
        [N(l) * pairer(phi.scale(l), tol / max(float(N(l)), 1.0)) for l in lam], dtype=complex
    )
    floor = 10 * tol * max(1.0, float(np.max(np.abs(seq))))
    if _diverging(seq, floor):
        raise NoScalingLimitError(
            f"N(lam)<u, phi_lam> grows without bound (last values {np.abs(seq[-3:])})"
        )
    limit, err, residuals = extrapolate_to_zero(lam, seq, order, log_terms)
    return SlimEstimate(
        lam=lam,
        sequence=seq,
        limit=limit,
        error=err,
        residuals=residuals,
        order=order,
        scaling=N,
        verdict=_verdict(residuals, floor),
    )


@dataclass
class HomogeneityReport:
    degree: float
    total_exponent: float
    max_deviation: float
    rows: list[dict]

    @property
    def passed(self) -> bool:
        return self.max_deviation < 1e-5


def check_homogeneity(
    limit: Callable[[TestFunction], complex],
    probes: Iterable[TestFunction],
    total_exponent: float,
    mus: Sequence[float] = (0.5, 1.0 / 3.0, 2.0),
) -> HomogeneityReport:
    """Check v(phi_mu) = mu^(n + a) v(phi) for a limit functional v.

    ``limit`` maps a test function to the scaling-limit value (typically via
    :func:`slim`); ``total_exponent`` is n + a, which equals the exponent of
    the scaling function used.
    """
    rows, worst, dim = [], 0.0, None
    for k, phi in enumerate(probes):
        dim = phi.dim
        base = limit(phi)
        for mu in mus:
            v = limit(phi.scale(mu))
            expect = mu**total_exponent * base
            scale_ref = max(abs(expect), 1e-300)
            dev = abs(v - expect) / scale_ref if abs(expect) > 1e-14 else abs(v - expect)
            worst = max(worst, dev)
            rows.append({"probe": k, "mu": mu, "value": v, "expected": expect, "deviation": dev})
    degree = total_exponent - (dim or 0)
    return HomogeneityReport(degree, total_exponent, worst, rows)


def homogeneity_of(u, N, probes, mus=(0.5, 1.0 / 3.0, 2.0), **slim_kwargs) -> HomogeneityReport:
    """Convenience wrapper: homogeneity of slim(u; N) over probes and dilates."""

    def limit(phi):
        est = slim(u, N, phi, **slim_kwargs)
        if not est.converged:
            raise NoScalingLimitError(f"limit did not converge for probe {phi}")
        return est.limit

    return check_homogeneity(limit, probes, N.exponent, mus)


# ---------------------------------------------------------------------------
# equivalence classes (positive rescalings) of scaling limits
# ---------------------------------------------------------------------------


def canonical_representative(values: Sequence[complex], reference: int = 0) -> np.ndarray:
    """Representative of the class {alpha v : alpha > 0} of a sampled limit.

    Divides by the modulus of the pairing with the reference probe, so that
    pairing has unit modulus. Only a positive factor is removed; the phase of
    the reference pairing is a class invariant.
    """
    v = np.asarray(values, dtype=complex)
    ref = abs(v[reference])
    if ref == 0:
        raise DegenerateInputError("reference probe pairs to zero")
    return v / ref


def same_class(a: Sequence[complex], b: Sequence[complex], tol: float = 1e-8, reference: int = 0) -> bool:
    ca, cb = canonical_representative(a, reference), canonical_representative(b, reference)
    return bool(np.max(np.abs(ca - cb)) <= tol)


# ---------------------------------------------------------------------------
# identification maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentificationMap:
    """Chart Phi from a neighbourhood of 0 in T_qM onto one of q, Phi'(0) = id."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    base: tuple[float, ...] = (0.0,)
    sample_radius: float = 0.1
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(np.atleast_1d(self.base).astype(float)))
        dim = len(self.base)
        q = np.asarray(self.base)
        zero = np.zeros(dim)
        at0 = np.asarray(self._fwd(zero), dtype=float)
        if not np.allclose(at0, q, rtol=0, atol=1e-15 * max(1.0, float(np.max(np.abs(q))))):
            raise InputError(f"chart does not send 0 to the base point: {at0} vs {q}")
        h = 1e-5
        jac = np.empty((dim, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h
            jac[:, j] = (np.asarray(self._fwd(e)) - np.asarray(self._fwd(-e))) / (2 * h)
        if np.max(np.abs(jac - np.eye(dim))) > 1e-6:
            raise InputError(f"chart differential at 0 is not the identity: {jac.tolist()}")
        rng = np.random.default_rng(12345)
        pts = self.sample_radius * (2 * rng.random((64, dim)) - 1)
        back = np.array([self._inv(self._fwd(p)) for p in pts])
        if np.max(np.abs(back - pts)) > 1e-10:
            raise InputError("forward and inverse charts do not compose to the identity")

    @property
    def dim(self) -> int:
        return len(self.base)

    def _fwd(self, x):
        x = np.asarray(x, dtype=float)
        return np.atleast_1d(self.forward(x[0] if self.dim == 1 else x))

    def _inv(self, y):
        y = np.asarray(y, dtype=float)
        return np.atleast_1d(self.inverse(y[0] if self.dim == 1 else y))

    def pushforward(self, phi: TestFunction) -> PushforwardTestFunction:
        return PushforwardTestFunction(phi, self.forward, self.inverse)

    @classmethod
    def identity(cls, dim: int = 1) -> "IdentificationMap":
        return cls(lambda x: x, lambda y: y, (0.0,) * dim, name="identity")


def _check_chart_on_support(chart: IdentificationMap, phi: TestFunction, lam: float) -> None:
    rng = np.random.default_rng(7)
    cloud = phi.support_cloud(512, rng) if hasattr(phi, "support_cloud") else None
    if cloud is None:
        return
    arg = cloud[:, 0] if chart.dim == 1 else cloud
    with np.errstate(all="ignore"):
        img = np.asarray(chart.forward(arg), dtype=float)
        back = np.asarray(chart.inverse(img), dtype=float)
    if not (np.all(np.isfinite(img)) and np.all(np.isfinite(back))):
        raise DomainError(f"chart not invertible on the support at lambda={lam:g}", lam=lam)
    if np.max(np.abs(back - arg)) > 1e-8 * max(1.0, float(np.max(np.abs(arg)))):
        raise DomainError(f"chart inverse inaccurate on the support at lambda={lam:g}", lam=lam)


def slim_via_chart(
    u: GeneralizedFunction,
    chart: IdentificationMap,
    N: ScalingFunction,
    phi: TestFunction,
    lam_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    order: int = 2,
    tol: float = DEFAULT_TOL,
) -> SlimEstimate:
    """lim N(lam) <u, Phi_* phi_lam> for a distribution written in chart coordinates."""
    if chart.dim != phi.dim or u.dim != phi.dim:
        raise InputError("chart, distribution and test function dimensions differ")

    def pairing(phi_lam, t):
        lam = float(phi_lam.radius / phi.radius) if hasattr(phi_lam, "radius") else float("nan")
        _check_chart_on_support(chart, phi_lam, lam)
        return pair(u, chart.pushforward(phi_lam), t)

    return slim(u, N, phi, lam_grid, order, tol=tol, pairing=pairing)


@dataclass
class ChartComparison:
    lam: np.ndarray
    differences: np.ndarray
    extrapolated_difference: float
    monotone: bool

    @property
    def final_difference(self) -> float:
        return float(self.differences[-1])


def chart_independence(
    u: GeneralizedFunction,
    charts: tuple[IdentificationMap, IdentificationMap],
    N: ScalingFunction,
    phi: TestFunction,
    lam_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    order: int = 2,
) -> ChartComparison:
    """Compare chart-wise sequences; they must merge as lam -> 0."""
    a = slim_via_chart(u, charts[0], N, phi, lam_grid, order)
    b = slim_via_chart(u, charts[1], N, phi, lam_grid, order)
    diff = np.abs(a.sequence - b.sequence)
    monotone = bool(np.all(np.diff(diff) <= 1e-13))
    return ChartComparison(a.lam, diff, float(abs(a.limit - b.limit)), monotone)
