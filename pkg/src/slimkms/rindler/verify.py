"""Verification reports for the wedge: vacuum gate, horizon scaling limits,
the vacuum-form condition on limits, beta-independence of the commutator part
and integrability of the thermal family."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..distributions import BumpFunction
from ..errors import InputError, OracleGateError
from ..kms import decay_condition_check, l1_clustering_check
from ..numerics import extrapolate_to_zero, geometric_grid
from .fields import commutator_massive, vacuum_massive, vacuum_massless
from .kinematics import TWO_PI, WedgePairGeometry, wedge_coordinates
from .thermal import dowker_massless, wightman_beta

DEFAULT_LAMBDA = geometric_grid(0.5, 2.0**-7, 0.5)


@dataclass(frozen=True)
class Probe:
    """Orbit pair (xi, xi', d_perp) and rapidity differences s (spacelike unless stated)."""

    xi: float
    xi_prime: float
    d_perp: float
    s: tuple[float, ...]

    def geometry(self, mass: float, beta: float) -> WedgePairGeometry:
        return WedgePairGeometry(self.xi, self.xi_prime, self.d_perp, mass, beta)

    def as_dict(self) -> dict:
        return {"xi": self.xi, "xi_prime": self.xi_prime, "d_perp": self.d_perp, "s": list(self.s)}


def spacelike_probes(fractions=(0.0, 0.4, -0.6, 0.85)) -> list[Probe]:
    """A spread of orbit pairs with s at fixed fractions of gamma."""
    pairs = [(1.0, 1.3, 0.7), (1.0, 1.0, 1.0), (0.5, 2.0, 0.3), (2.0, 2.0, 0.5), (1.0, 3.0, 0.0),
             (0.3, 0.4, 0.2)]
    out = []
    for xi, xp, d in pairs:
        g = WedgePairGeometry(xi, xp, d).gamma
        out.append(Probe(xi, xp, d, tuple(f * g for f in fractions)))
    return out


def _count(probes) -> int:
    return sum(len(p.s) for p in probes)


# ---------------------------------------------------------------------------
# Bisognano-Wichmann gate
# ---------------------------------------------------------------------------


@dataclass
class GateReport:
    mass: float
    rows: list[dict]
    max_rel_massive: float
    max_rel_massless: float
    tol_massive: float
    tol_massless: float

    @property
    def passed(self) -> bool:
        return self.max_rel_massive < self.tol_massive and self.max_rel_massless < self.tol_massless


def bisognano_wichmann_gate(
    mass: float = 1.0,
    probes: list[Probe] | None = None,
    tol_massive: float = 1e-5,
    tol_massless: float = 1e-8,
    raise_on_fail: bool = False,
) -> GateReport:
    """Compare the beta = 2 pi pipeline with the Minkowski vacuum on the orbits."""
    probes = probes or spacelike_probes()
    rows = []
    worst_m = worst_0 = 0.0
    for p in probes:
        s = np.asarray(p.s)
        geo = p.geometry(mass, TWO_PI)
        w = wightman_beta(geo)(s)
        v = vacuum_massive(geo, s)
        geo0 = geo.with_(mass=0.0)
        w0 = wightman_beta(geo0)(s)
        v0 = vacuum_massless(geo0, s)
        for si, a, b, a0, b0 in zip(s, w, v, w0, v0):
            rm = abs(a - b) / abs(b)
            r0 = abs(a0 - b0) / abs(b0)
            worst_m, worst_0 = max(worst_m, rm), max(worst_0, r0)
            rows.append({**p.as_dict(), "s": float(si), "W": a.real, "vacuum": b.real, "rel_massive": rm,
                         "W0": a0.real, "vacuum0": b0.real, "rel_massless": r0})
    rep = GateReport(mass, rows, worst_m, worst_0, tol_massive, tol_massless)
    if raise_on_fail and not rep.passed:
        raise OracleGateError(
            f"beta = 2 pi pipeline differs from the vacuum: massive {worst_m:.3e}, massless {worst_0:.3e}"
        )
    return rep


# ---------------------------------------------------------------------------
# horizon scaling limit
# ---------------------------------------------------------------------------


@dataclass
class ProbeLimit:
    probe: dict
    s: float
    lam: np.ndarray
    sequence: np.ndarray
    limit: complex
    error: float
    target: complex
    deviation: float
    raw_deviation: np.ndarray

    def as_row(self) -> dict:
        return {**self.probe, "s": self.s, "limit": self.limit.real, "target": self.target.real,
                "deviation": self.deviation, "extrapolation_error": self.error,
                "finest_raw_deviation": float(self.raw_deviation[-1])}


@dataclass
class ScalingReport:
    beta: float
    mass: float
    probes: list[ProbeLimit]
    tol: float
    smeared: dict | None = None

    @property
    def max_deviation(self) -> float:
        return max(p.deviation for p in self.probes)

    @property
    def passed(self) -> bool:
        ok = self.max_deviation < self.tol
        if self.smeared is not None:
            ok = ok and self.smeared["consistent"]
        return ok

    def plot_rows(self) -> list[dict]:
        rows = []
        for i, p in enumerate(self.probes):
            for l, d in zip(p.lam, p.raw_deviation):
                rows.append({"probe": i, "lambda": float(l), "deviation": float(d)})
        return rows


def scaled_sequence(geom: WedgePairGeometry, s: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """lam^2 W_{beta,m}(lam geom)(s) for every lam (rows) and s (columns)."""
    return np.array([l * l * wightman_beta(geom.scaled(l))(s) for l in lam])


def scaling_limit_horizon(
    beta: float,
    mass: float,
    probes: list[Probe] | None = None,
    lam_grid=None,
    order: int = 3,
    tol: float = 1e-4,
    smeared: bool = False,
    smeared_kw: dict | None = None,
) -> ScalingReport:
    """Extrapolate lam^2 W_{beta,m}(lam geom)(s) to lam -> 0 and compare with W_{beta,0}.

    The small-lam expansion of the massive function has even powers of lam m
    with logarithmic companions, so the fit uses 1, lam^2 ln lam, lam^2, ...
    Deviations are relative to |W_{beta,0}|.
    """
    probes = probes or spacelike_probes()
    lam = np.asarray(DEFAULT_LAMBDA if lam_grid is None else lam_grid, dtype=float)
    out = []
    for p in probes:
        geo = p.geometry(mass, beta)
        s = np.asarray(p.s, dtype=float)
        seq = scaled_sequence(geo, s, lam)
        target = dowker_massless(geo.with_(mass=0.0), s)
        for j, sj in enumerate(s):
            col = seq[:, j]
            if mass == 0:
                lim, err = col[-1], float(np.max(np.abs(col - col[-1])))
            else:
                lim, err, _ = extrapolate_to_zero(lam, col, order=order, log_terms=True)
            dev = abs(lim - target[j]) / abs(target[j])
            raw = np.abs(col - target[j]) / abs(target[j])
            out.append(ProbeLimit(p.as_dict(), float(sj), lam, col, complex(lim), float(err),
                                  complex(target[j]), float(dev), raw))
    rep = ScalingReport(beta, mass, out, tol)
    if smeared:
        rep.smeared = smeared_scaling_check(beta, mass, **(smeared_kw or {}))
    return rep


def _ball_uniform(center, radius, n, rng) -> np.ndarray:
    g = rng.standard_normal((n, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** 0.25
    return np.asarray(center) + r[:, None] * g


def _pair_values(x: np.ndarray, y: np.ndarray, mass: float, beta: float) -> np.ndarray:
    eta, xi, xp = wedge_coordinates(x)
    eta2, xi2, xp2 = wedge_coordinates(y)
    out = np.empty(len(x), dtype=complex)
    for i in range(len(x)):
        geo = WedgePairGeometry(xi[i], xi2[i], float(np.linalg.norm(xp[i] - xp2[i])), mass, beta)
        out[i] = wightman_beta(geo, gate=False)(np.array([eta[i] - eta2[i]]))[0]
    return out


def smeared_scaling_check(
    beta: float,
    mass: float,
    lam: float = 1e-2,
    n: int = 200,
    seed: int = 7,
    f_center=(0.0, 1.0, 0.0, 0.0),
    g_center=(0.0, 1.0, 2.0, 0.0),
    radius: float = 0.3,
) -> dict:
    """Monte Carlo comparison of lam^-6 <W_{beta,m}, (f x g)(./lam)> with <W_{beta,0}, f x g>.

    Supports are spacelike separated, so both pairings are ordinary
    integrals. The two estimates use independent samples; consistency is
    |difference| < 3 sigma.
    """
    if not lam > 0:
        raise InputError("lam must be positive")
    if mass > 0:
        commutator_massive(WedgePairGeometry(1.0, 1.3, 0.7, mass, beta))  # runs the oracle gate once
    f = BumpFunction.standard(f_center, radius, 1.0)
    g = BumpFunction.standard(g_center, radius, 1.0)
    rng = np.random.default_rng(seed)
    vol = math.pi**2 / 2 * radius**4

    def estimate(m, scale):
        x = _ball_uniform(f_center, radius, n, rng)
        y = _ball_uniform(g_center, radius, n, rng)
        w = _pair_values(scale * x, scale * y, m, beta) * scale**2
        vals = (w * f(x) * g(y)).real * vol * vol
        return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n))

    est, sig = estimate(mass, lam)
    ref, sig_ref = estimate(0.0, 1.0)
    sigma = math.hypot(sig, sig_ref)
    diff = est - ref
    return {"lam": lam, "n": n, "seed": seed, "scaled": est, "scaled_sigma": sig, "limit": ref,
            "limit_sigma": sig_ref, "difference": diff, "sigma": sigma,
            "consistent": bool(abs(diff) < 3 * sigma)}


# ---------------------------------------------------------------------------
# vacuum-form condition on the limit
# ---------------------------------------------------------------------------


@dataclass
class SLCReport:
    beta: float
    ratios: np.ndarray
    rows: list[dict]
    max_dev: float
    variation: float
    tol: float

    @property
    def satisfied(self) -> bool:
        return self.max_dev < self.tol


def slc_probes() -> list[Probe]:
    out = []
    for xi, xp, d in [(1.0, 1.0, 0.5), (1.0, 1.5, 1.0), (1.0, 2.0, 2.0), (0.5, 3.0, 1.0), (1.0, 1.0, 4.0)]:
        g = WedgePairGeometry(xi, xp, d).gamma
        out.append(Probe(xi, xp, d, tuple(f * g for f in (0.0, 0.5, 0.9))))
    return out


def slc_check(beta: float, probes: list[Probe] | None = None, tol: float = 1e-6) -> SLCReport:
    """R = W_{beta,0} / (-(2 pi)^-2 tau^-2) over a probe grid; satisfied iff R = 1 within tol."""
    probes = probes or slc_probes()
    rows, ratios = [], []
    for p in probes:
        geo = p.geometry(0.0, beta)
        s = np.asarray(p.s)
        r = (dowker_massless(geo, s) / vacuum_massless(geo, s)).real
        for si, ri in zip(s, r):
            rows.append({**p.as_dict(), "s": float(si), "gamma": geo.gamma, "R": float(ri)})
        ratios.extend(r)
    ratios = np.array(ratios)
    max_dev = float(np.max(np.abs(ratios - 1)))
    variation = float((ratios.max() - ratios.min()) / abs(ratios.mean()))
    return SLCReport(beta, ratios, rows, max_dev, variation, tol)


# ---------------------------------------------------------------------------
# beta-independence of the commutator part of the limit
# ---------------------------------------------------------------------------


def contour_residue(f, center: complex, radius: float, nodes: int = 64) -> complex:
    """(1 / 2 pi i) times the circle integral of f around center (trapezoid, nodes off the real axis)."""
    th = 2 * math.pi * (np.arange(nodes) + 0.5) / nodes
    z = center + radius * np.exp(1j * th)
    vals = np.asarray(f(z))
    return complex(np.mean(vals * radius * np.exp(1j * th)))


@dataclass
class BetaIndependenceReport:
    betas: list[float]
    rows: list[dict]
    max_pairwise_antisym: float
    max_closed_form_dev: float
    min_pairwise_symmetric: float
    tol: float
    sym_threshold: float

    @property
    def passed(self) -> bool:
        return (self.max_pairwise_antisym < self.tol and self.max_closed_form_dev < self.tol
                and self.min_pairwise_symmetric > self.sym_threshold)


def limit_jump_weights(
    beta: float, mass: float, probe: Probe, lam_grid=None, order: int = 3, nodes: int = 64
) -> dict:
    """Jump weights 2 pi i Res of the scaling limit at s = +-gamma, extrapolated in lam.

    The jump of W(s - i0) across the real axis at a light-cone crossing is
    the delta weight of the commutator there.
    """
    lam = np.asarray(geometric_grid(0.5, 2.0**-6, 0.5) if lam_grid is None else lam_grid)
    geo = probe.geometry(mass, beta)
    g = geo.gamma
    r = 0.5 * min(g, beta / 2)
    out = {}
    for label, c in (("+", g), ("-", -g)):
        seq = []
        for l in lam:
            W = wightman_beta(geo.scaled(l))
            seq.append(2j * math.pi * l * l * contour_residue(W, c, r, nodes))
        seq = np.array(seq)
        if mass == 0:
            lim, err = seq[-1], float(np.max(np.abs(seq - seq[-1])))
        else:
            lim, err, _ = extrapolate_to_zero(lam, seq, order=order, log_terms=True)
        out[label] = (complex(lim), float(err))
    return out


def antisymmetric_part_beta_independence(
    betas=(math.pi, TWO_PI, 4 * math.pi),
    probes: list[Probe] | None = None,
    mass: float = 1.0,
    lam_grid=None,
    tol: float = 1e-5,
    sym_threshold: float = 0.10,
    timelike_offset: float = 1.0,
) -> BetaIndependenceReport:
    """Antisymmetric (commutator) parts of the scaling limits across beta.

    The commutator part of W_lim consists of the jump weights at s = +-gamma
    and of 2i Im W_lim at timelike points off the cone. Both are compared
    pairwise across beta and with the massless commutator (-i kappa, +i kappa, 0).
    Symmetric parts (W_lim at spacelike s) must differ: at each probe the
    largest pairwise relative difference across beta exceeds sym_threshold.
    Weights are relative to kappa.
    """
    probes = probes or [Probe(1.0, 1.0, 1.0, (0.3,)), Probe(1.0, 2.0, 2.0, (0.7,))]
    lam = np.asarray(geometric_grid(0.5, 2.0**-6, 0.5) if lam_grid is None else lam_grid)
    rows = []
    per_beta = {}
    for beta in betas:
        for i, p in enumerate(probes):
            geo = p.geometry(mass, beta)
            jumps = limit_jump_weights(beta, mass, p, lam)
            st = geo.gamma + timelike_offset
            seq = np.array([l * l * wightman_beta(geo.scaled(l)).antisymmetric_part(np.array([st]))[0] for l in lam])
            if mass == 0:
                anti = seq[-1]
            else:
                anti, _, _ = extrapolate_to_zero(lam, seq, order=3, log_terms=True)
            sym = scaling_limit_horizon(beta, mass, [p], lam, tol=math.inf).probes
            per_beta[(beta, i)] = {
                "jump+": jumps["+"][0] / geo.kappa,
                "jump-": jumps["-"][0] / geo.kappa,
                "timelike": complex(anti) / geo.kappa,
                "symmetric": [q.limit for q in sym],
            }
            rows.append({"beta": beta, "probe": i, **p.as_dict(),
                         "jump_plus_re": jumps["+"][0].real / geo.kappa, "jump_plus_im": jumps["+"][0].imag / geo.kappa,
                         "jump_minus_re": jumps["-"][0].real / geo.kappa, "jump_minus_im": jumps["-"][0].imag / geo.kappa,
                         "timelike_antisym_abs": abs(anti) / geo.kappa,
                         "symmetric_limit": sym[0].limit.real})
    max_pair = 0.0
    min_sym = math.inf
    closed = 0.0
    for i in range(len(probes)):
        for b in betas:
            d = per_beta[(b, i)]
            closed = max(closed, abs(d["jump+"] - (-1j)), abs(d["jump-"] - 1j), abs(d["timelike"]))
        spread = 0.0
        for b1, b2 in itertools.combinations(betas, 2):
            d1, d2 = per_beta[(b1, i)], per_beta[(b2, i)]
            max_pair = max(max_pair, *(abs(d1[k] - d2[k]) for k in ("jump+", "jump-", "timelike")))
            spread = max(spread, *(abs(a - b) / max(abs(a), abs(b)) for a, b in zip(d1["symmetric"], d2["symmetric"])))
        # every probe must show a beta-dependent symmetric part
        min_sym = min(min_sym, spread)
    return BetaIndependenceReport(list(betas), rows, max_pair, closed, min_sym, tol, sym_threshold)


# ---------------------------------------------------------------------------
# integrability of the thermal family
# ---------------------------------------------------------------------------


@dataclass
class FamilyEntry:
    beta: float
    mass: float
    l1: bool
    bound: float
    condition_a: bool
    condition_b: bool
    alpha: float
    tail_model: str
    tail_rate: float
    commutator_l1: bool
    commutator_note: str
    distributional: bool


@dataclass
class FamilyReport:
    entries: list[FamilyEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.l1 and e.condition_a and e.condition_b and e.commutator_l1 for e in self.entries)


def _auto_horizon(g, start=10.0, stop=80.0) -> float:
    t = np.linspace(0.0, stop, 161)
    a = np.abs(g(t))
    b = np.abs(g(-t))
    env = np.maximum.accumulate(np.maximum(a, b)[::-1])[::-1]
    peak = env[0]
    below = np.nonzero(env < 1e-12 * peak)[0]
    T = t[below[0]] if below.size else stop
    return float(min(max(T, start), stop))


def l1_family_report(betas=(TWO_PI, 8 * math.pi), mass: float = 1.0, geom: WedgePairGeometry | None = None,
                     n: int = 401) -> FamilyReport:
    """L1 and decay classifiers on the boost correlator of each thermal state.

    The correlator studied is t -> W_beta(t - i beta / 4), a smooth stand-in
    for smeared field correlations (the shift moves the light-cone
    singularities into the complex plane without changing the tails).
    """
    base = geom or WedgePairGeometry(1.0, 1.0, 1.0)
    rep = FamilyReport()
    for beta in betas:
        geo = base.with_(mass=mass, beta=beta)
        C = commutator_massive(geo)
        cv = l1_clustering_check(C, T_max=min(C.cutoff(), 40.0))
        if mass == 0:
            W = lambda t, geo=geo: dowker_massless(geo, np.asarray(t) - 0.25j * beta)
        else:
            Wf = wightman_beta(geo)
            W = lambda t, Wf=Wf: Wf(np.asarray(t, dtype=float) - 0.25j * beta)
        T = _auto_horizon(W)
        v = l1_clustering_check(W, T_max=T, n=n)
        d = decay_condition_check(W, step=1e-3, T_max=T, n=n)
        rep.entries.append(FamilyEntry(
            beta, mass, v.integrable, v.bound, all(x["holds"] for x in d.condition_a.values()), d.condition_b,
            d.alpha, d.fit.model, d.fit.rate, cv.integrable, cv.reason or "smooth Bessel tail",
            mass == 0,
        ))
    return rep
