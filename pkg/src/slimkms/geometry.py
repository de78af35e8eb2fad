"""Cones, conical regularity, contractibility and maximal contractible regions.

Regions are membership oracles; every verdict here is a sampling verdict
("certified at density d"), with a fixed seed so results are reproducible.
Scaling is always about the point ``p`` under study (the origin by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import InputError, NotConicallyRegularError

DEFAULT_SEED = 20240601
DEFAULT_CERT_SAMPLES = 100_000


def _pts(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise InputError(f"points must have {dim} coordinates, got shape {x.shape}")
    return x


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------


def _orthonormal_complement(axis: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of a unit vector."""
    n = axis.size
    basis = np.eye(n) - np.outer(axis, axis)
    q, r = np.linalg.qr(basis)
    keep = np.abs(np.diag(r)) > 1e-9
    comp = q[:, keep].T
    return comp[: n - 1]


@dataclass(frozen=True)
class Cone:
    """Open cone {r_perp < slope * h_par, 0 < h_par < height} with apex ``apex``.

    In one dimension this is the open interval between the apex and
    ``apex + height * axis``.
    """

    apex: tuple[float, ...]
    axis: tuple[float, ...]
    slope: float
    height: float

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise InputError("cone axis must be nonzero")
        object.__setattr__(self, "axis", tuple(a / nrm))
        object.__setattr__(self, "apex", tuple(np.asarray(self.apex, dtype=float)))
        if len(self.apex) != len(self.axis):
            raise InputError("apex and axis dimensions differ")
        if not (self.slope > 0 and self.height > 0):
            raise InputError("cone slope and height must be positive")

    @property
    def dim(self) -> int:
        return len(self.axis)

    def contains(self, x) -> np.ndarray:
        v = _pts(x, self.dim) - np.asarray(self.apex)
        a = np.asarray(self.axis)
        hp = v @ a
        perp = v - hp[..., None] * a
        rp = np.sqrt(np.sum(perp * perp, axis=-1))
        return (rp < self.slope * hp) & (hp < self.height)

    def with_(self, slope: float | None = None, height: float | None = None) -> "Cone":
        return Cone(self.apex, self.axis, slope or self.slope, height or self.height)

    def sample(self, n: int, rng: np.random.Generator, shell: float = 1e-9) -> np.ndarray:
        """Interior, lateral-boundary, base and near-apex samples of the cone.

        Boundary samples sit a relative ``shell`` inside the open cone.
        """
        d = self.dim
        a = np.asarray(self.axis)
        apex = np.asarray(self.apex)
        n_int = n // 2
        n_lat = n // 4
        n_apex = n - n_int - n_lat
        h_int = self.height * rng.random(n_int) ** (1.0 / d)
        frac_int = rng.random(n_int) ** (1.0 / max(d - 1, 1))
        h_lat = self.height * (1 - shell) * np.sqrt(rng.random(n_lat))
        frac_lat = np.full(n_lat, 1 - shell)
        k = rng.random(n_apex) * 12.0
        h_apex = self.height * 10.0 ** (-k)
        frac_apex = np.where(rng.random(n_apex) < 0.5, 1 - shell, rng.random(n_apex))
        h = np.concatenate([h_int, h_lat, h_apex])
        frac = np.concatenate([frac_int, frac_lat, frac_apex])
        pts = apex + h[:, None] * a
        if d > 1:
            comp = _orthonormal_complement(a)
            g = rng.standard_normal((h.size, d - 1))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            pts = pts + (self.slope * h * frac)[:, None] * (g @ comp)
        # near-apex points can round onto the apex when it is far from the origin
        return pts[self.contains(pts)]


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Open set in R^n given by a membership oracle.

    ``halfspaces`` (rows ``(a, b)`` meaning ``a . x < b``) marks a polytope,
    in which case membership is exactly the half-space intersection.
    ``bounds`` is a sampling box.
    """

    dim: int
    oracle: Callable[[np.ndarray], np.ndarray]
    name: str = "region"
    convex: bool = False
    halfspaces: tuple[tuple[tuple[float, ...], float], ...] | None = None
    bounds: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    params: dict = field(default_factory=dict, compare=False)
    closure: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def contains(self, x) -> np.ndarray:
        p = _pts(x, self.dim)
        if self.halfspaces is not None:
            A = np.array([h[0] for h in self.halfspaces], dtype=float)
            b = np.array([h[1] for h in self.halfspaces], dtype=float)
            return np.all(p @ A.T < b, axis=-1)
        return np.asarray(self.oracle(p), dtype=bool)

    def sampling_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.bounds is None:
            return -2.0 * np.ones(self.dim), 2.0 * np.ones(self.dim)
        return np.asarray(self.bounds[0], float), np.asarray(self.bounds[1], float)

    def sample_members(self, n: int, rng: np.random.Generator, max_tries: int = 200) -> np.ndarray:
        lo, hi = self.sampling_box()
        out = []
        got = 0
        for _ in range(max_tries):
            cand = lo + (hi - lo) * rng.random((4 * n, self.dim))
            cand = cand[self.contains(cand)]
            out.append(cand)
            got += len(cand)
            if got >= n:
                break
        pts = np.concatenate(out)[:n]
        if len(pts) < n:
            raise InputError(f"could not sample {n} members of {self.name}")
        return pts

    def validate_convexity(self, n: int = 10_000, seed: int = DEFAULT_SEED) -> bool:
        """Randomized midpoint test: x, y in the region implies (x+y)/2 in it."""
        rng = np.random.default_rng(seed)
        x = self.sample_members(n, rng)
        y = self.sample_members(n, rng)
        return bool(np.all(self.contains(0.5 * (x + y))))


def polytope(halfspaces: Sequence[tuple[Sequence[float], float]], name: str = "polytope",
             bounds=None) -> Region:
    hs = tuple((tuple(float(c) for c in a), float(b)) for a, b in halfspaces)
    dim = len(hs[0][0])
    return Region(dim, lambda p: np.ones(p.shape[:-1], bool), name, True, hs, bounds,
                  {"kind": "polytope", "halfspaces": [[*a, b] for a, b in hs]})


def ball(center: Sequence[float] = (0.0, 0.0), radius: float = 1.0) -> Region:
    c = np.asarray(center, dtype=float)

    def oracle(p):
        return np.sum((p - c) ** 2, axis=-1) < radius**2

    return Region(c.size, oracle, "ball", True, None, (tuple(c - radius), tuple(c + radius)),
                  {"kind": "ball", "center": c.tolist(), "radius": radius})


def quadrant(dim: int = 2) -> Region:
    """Open positive orthant in R^dim."""
    hs = [(tuple(-1.0 if i == j else 0.0 for i in range(dim)), 0.0) for j in range(dim)]
    r = polytope(hs, "quadrant", (tuple([-1.0] * dim), tuple([2.0] * dim)))
    return Region(r.dim, r.oracle, "quadrant", True, r.halfspaces, r.bounds,
                  {"kind": "quadrant", "dim": dim})


def rindler_wedge(dim: int = 4) -> Region:
    """W_r = {x^1 > |x^0|} in R^dim, coordinates (x^0, x^1, x_perp)."""

    def oracle(p):
        return p[..., 1] > np.abs(p[..., 0])

    lo = (-2.0,) * dim
    hi = (2.0,) * dim
    return Region(dim, oracle, "wedge", True, None, (lo, hi), {"kind": "wedge", "dim": dim})


def cusp() -> Region:
    """{(x, y): x > 0, 0 < y < exp(-1/x^2)}: zero is not conically regular."""

    def oracle(p):
        x, y = p[..., 0], p[..., 1]
        with np.errstate(divide="ignore", over="ignore"):
            lid = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x * x, 1.0)), 0.0)
        return (x > 0) & (y > 0) & (y < lid)

    def closed(p):
        x, y = p[..., 0], p[..., 1]
        lid = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x * x, 1.0)), 0.0)
        return (x >= 0) & (y >= 0) & (y <= lid)

    return Region(2, oracle, "cusp", False, None, ((0.0, 0.0), (2.0, 1.0)), {"kind": "cusp"},
                  closure=closed)


def slit_ball() -> Region:
    """Unit disc minus the segment {(t, 0): 0 <= t < 1}."""

    def oracle(p):
        inside = np.sum(p * p, axis=-1) < 1.0
        on_slit = (p[..., 1] == 0.0) & (p[..., 0] >= 0.0) & (p[..., 0] < 1.0)
        return inside & ~on_slit

    return Region(2, oracle, "slit-ball", False, None, ((-1.0, -1.0), (1.0, 1.0)), {"kind": "slit-ball"})


def half_ball(dim: int = 2) -> Region:
    """Right half of the unit ball, {|x| < 1, x_0 > 0}."""

    def oracle(p):
        return (np.sum(p * p, axis=-1) < 1.0) & (p[..., 0] > 0)

    lo = (0.0,) + (-1.0,) * (dim - 1)
    return Region(dim, oracle, "half-ball", True, None, (lo, (1.0,) * dim), {"kind": "half-ball", "dim": dim})


def half_line() -> Region:
    """(0, inf) in R."""
    return Region(1, lambda p: p[..., 0] > 0, "half-line", True, None, ((0.0,), (4.0,)),
                  {"kind": "half-line"})


def interval(a: float, b: float) -> Region:
    return Region(1, lambda p: (p[..., 0] > a) & (p[..., 0] < b), "interval", True, None,
                  ((a,), (b,)), {"kind": "interval", "a": a, "b": b})


def product(left: Region, right: Region) -> Region:
    """Omega x Omega' in R^(n+m)."""
    n = left.dim

    def oracle(p):
        return left.contains(p[..., :n]) & right.contains(p[..., n:])

    lb, hb = left.sampling_box()
    lr, hr = right.sampling_box()
    bounds = (tuple(np.concatenate([lb, lr])), tuple(np.concatenate([hb, hr])))
    closed = None
    if left.closure is not None or right.closure is not None:
        # closure of a product is the product of closures
        def factor_closure(region, q):
            if region.closure is not None:
                return region.closure(q)
            return np.array([in_closure(x, region) for x in q.reshape(-1, region.dim)]).reshape(q.shape[:-1])

        def closed(p):
            return factor_closure(left, p[..., :n]) & factor_closure(right, p[..., n:])

    return Region(n + right.dim, oracle, f"{left.name}x{right.name}", left.convex and right.convex,
                  None, bounds, {"kind": "product", "left": left.params, "right": right.params},
                  closure=closed)


BUILTIN_REGIONS: dict[str, Callable[..., Region]] = {
    "ball": ball,
    "quadrant": quadrant,
    "wedge": rindler_wedge,
    "wedge4d": lambda: rindler_wedge(4),
    "cusp": cusp,
    "slit-ball": slit_ball,
    "half-ball": half_ball,
    "half-line": half_line,
    "interval": interval,
}


def region_from_spec(spec: dict) -> Region:
    """Build a region from a description mapping (the region file format)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "polytope":
        rows = spec["halfspaces"]
        return polytope([(r[:-1], r[-1]) for r in rows], bounds=spec.get("bounds"))
    if kind == "product":
        return product(region_from_spec(spec["left"]), region_from_spec(spec["right"]))
    if kind not in BUILTIN_REGIONS:
        raise InputError(f"unknown region kind {kind!r}")
    return BUILTIN_REGIONS[kind](**spec)


# ---------------------------------------------------------------------------
# direction sets
# ---------------------------------------------------------------------------


def sphere_directions(dim: int, count: int = 2048, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Low-discrepancy unit vectors: circle grid, Fibonacci sphere or Sobol normals."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if dim == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5**0.5) * k
        r = np.sqrt(1 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
    from scipy.special import ndtri

    sob = qmc.Sobol(dim, scramble=True, seed=seed).random(count)
    g = ndtri(np.clip(sob, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# point classification
# ---------------------------------------------------------------------------


def _ball_samples(p: np.ndarray, radius: float, n: int, rng) -> np.ndarray:
    d = p.size
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return p + r[:, None] * g


def in_closure(p, omega: Region, seed: int = DEFAULT_SEED, n: int = 4000) -> bool:
    """p is in the closure if every shrinking ball around it meets the region."""
    p = np.asarray(p, dtype=float).reshape(omega.dim)
    if omega.closure is not None:
        return bool(omega.closure(p[None, :])[0])
    rng = np.random.default_rng(seed)
    for k in range(1, 31):
        if not np.any(omega.contains(_ball_samples(p, 2.0**-k, n, rng))):
            return False
    return True


def is_interior(p, omega: Region, seed: int = DEFAULT_SEED, n: int = 4000) -> bool:
    p = np.asarray(p, dtype=float).reshape(omega.dim)
    if not bool(omega.contains(p[None, :])[0]):
        return False
    rng = np.random.default_rng(seed)
    for k in range(2, 30, 3):
        if np.all(omega.contains(_ball_samples(p, 10.0 ** (-k / 3), n, rng))):
            return True
    return False


# ---------------------------------------------------------------------------
# conical regularity
# ---------------------------------------------------------------------------


@dataclass
class ConeSearchConfig:
    directions: int = 2048
    height_cap: float = 1.0
    search_samples: int = 1024
    cert_samples: int = DEFAULT_CERT_SAMPLES
    slope_cap: float = 64.0
    bisection_steps: int = 24
    seed: int = DEFAULT_SEED


@dataclass
class ConeVerdict:
    point: tuple[float, ...]
    cone: Cone | None
    certified_samples: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def regular(self) -> bool:
        return self.cone is not None


def _ray_depth(p, dirs, omega: Region, cap: float, levels: int = 48) -> np.ndarray:
    """Largest t <= cap (on a dyadic scan) with p + s d inside for all sampled s <= t.

    Zero when the ray leaves the region arbitrarily close to p.
    """
    t = cap * 2.0 ** -np.arange(levels)[::-1]
    fine = np.linspace(0, cap, 257)[1:]
    ts = np.unique(np.concatenate([t, fine]))
    pts = p + ts[None, :, None] * dirs[:, None, :]
    ok = omega.contains(pts.reshape(-1, p.size)).reshape(len(dirs), ts.size)
    depth = np.zeros(len(dirs))
    for i in range(len(dirs)):
        bad = np.nonzero(~ok[i])[0]
        if bad.size == 0:
            depth[i] = cap
        elif bad[0] >= len(t) // 2:
            depth[i] = ts[bad[0] - 1]
    return depth


def _certify(cone: Cone, omega: Region, n: int, rng) -> bool:
    return bool(np.all(omega.contains(cone.sample(n, rng))))


def _max_slope(p, axis, height, omega, cfg: ConeSearchConfig, rng) -> float:
    """Bisection for the largest certified slope at a given height (0 if none)."""
    lo, hi = 0.0, cfg.slope_cap
    if _certify(Cone(tuple(p), tuple(axis), hi, height), omega, cfg.search_samples, rng):
        return hi
    tiny = 1e-6
    if not _certify(Cone(tuple(p), tuple(axis), tiny, height), omega, cfg.search_samples, rng):
        return 0.0
    lo = tiny
    for _ in range(cfg.bisection_steps):
        mid = math.sqrt(lo * hi)
        if _certify(Cone(tuple(p), tuple(axis), mid, height), omega, cfg.search_samples, rng):
            lo = mid
        else:
            hi = mid
    return lo


def conical_regularity(
    p, omega: Region, config: ConeSearchConfig | None = None
) -> ConeVerdict:
    """Search for an open cone with apex p inside the region.

    Returns a verdict whose ``cone`` is certified by ``cert_samples`` random
    points (interior, lateral shell and near-apex), or ``None`` when no
    direction admits one within the search budget.
    """
    cfg = config or ConeSearchConfig()
    p = np.asarray(p, dtype=float).reshape(omega.dim)
    if not in_closure(p, omega, cfg.seed):
        raise InputError(f"point {p.tolist()} is not in the closure of {omega.name}")
    rng = np.random.default_rng(cfg.seed)
    dirs = sphere_directions(omega.dim, cfg.directions if omega.dim > 1 else 2, cfg.seed)
    if omega.convex:
        anchor = omega.sample_members(256, rng).mean(axis=0)
        if omega.contains(anchor[None, :])[0] and np.linalg.norm(anchor - p) > 0:
            a = (anchor - p) / np.linalg.norm(anchor - p)
            dirs = np.vstack([a[None, :], dirs])
    depth = _ray_depth(p, dirs, omega, cfg.height_cap)
    candidates = np.nonzero(depth > 0)[0]
    diag = {"directions": len(dirs), "ray_candidates": int(candidates.size)}
    if candidates.size == 0:
        diag["reason"] = "every sampled ray leaves the region arbitrarily close to the apex"
        return ConeVerdict(tuple(p), None, 0, diag)
    order = candidates[:: max(1, candidates.size // 64)]
    best_axis, best_slope, best_h = None, 0.0, 0.0
    for i in order:
        h = 0.5 * depth[i]
        s = _max_slope(p, dirs[i], h, omega, cfg, rng)
        if s > best_slope:
            best_axis, best_slope, best_h = dirs[i], s, h
    if best_axis is not None and omega.dim > 1:
        step = 0.2
        for _ in range(12):
            trial = best_axis + step * rng.standard_normal(omega.dim)
            trial /= np.linalg.norm(trial)
            d = _ray_depth(p, trial[None, :], omega, cfg.height_cap)[0]
            if d > 0:
                s = _max_slope(p, trial, 0.5 * d, omega, cfg, rng)
                if s > best_slope:
                    best_axis, best_slope, best_h = trial, s, 0.5 * d
                    continue
            step *= 0.6
    diag["near_misses"] = int(candidates.size)
    if best_axis is None or best_slope <= 0:
        diag["reason"] = "rays stay inside but no cone of positive opening certifies"
        return ConeVerdict(tuple(p), None, 0, diag)
    cone = Cone(tuple(p), tuple(best_axis), 0.9 * best_slope, best_h)
    for _ in range(40):
        if _certify(cone, omega, cfg.cert_samples, rng):
            return ConeVerdict(tuple(p), cone, cfg.cert_samples, diag)
        cone = cone.with_(slope=0.5 * cone.slope, height=0.9 * cone.height)
    diag["reason"] = "final certification failed after shrinking"
    return ConeVerdict(tuple(p), None, 0, diag)


# ---------------------------------------------------------------------------
# contractibility
# ---------------------------------------------------------------------------


@dataclass
class ContractibilityVerdict:
    contractible: bool
    lambda0: float | None
    witness: tuple[float, ...] | None = None
    witness_lambda: float | None = None
    tested: str = ""


def is_contractible(
    V: Region,
    omega: Region,
    compacta: Sequence[np.ndarray],
    p=None,
    levels: int = 40,
) -> ContractibilityVerdict:
    """Sampled check that each point cloud K in V satisfies lam K in Omega for small lam.

    Dilations are about ``p`` (the origin by default) on the sub-grid
    ``lam = 2^-j``, ``j < levels``; lam0 is refined by bisection.
    """
    p0 = np.zeros(V.dim) if p is None else np.asarray(p, dtype=float).reshape(V.dim)
    lams = 2.0 ** -np.arange(levels)
    worst_l0 = math.inf
    for K in compacta:
        K = _pts(K, V.dim)
        if not np.all(V.contains(K)):
            raise InputError("sample compact set is not contained in V")
        ok = np.array([np.all(omega.contains(p0 + l * (K - p0))) for l in lams])
        if not ok[-1]:
            inside = omega.contains(p0 + lams[-1] * (K - p0))
            j = int(np.argmin(inside))
            return ContractibilityVerdict(
                False, None, tuple(K[j]), float(lams[-1]),
                f"{len(compacta)} point clouds, lambda = 2^-j for j < {levels}",
            )
        bad = np.nonzero(~ok)[0]
        if bad.size == 0:
            l0 = float(lams[0])
        else:
            j = bad[-1]
            lo, hi = lams[j + 1], lams[j]
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                if np.all(omega.contains(p0 + mid * (K - p0))):
                    lo = mid
                else:
                    hi = mid
            l0 = float(lo)
        worst_l0 = min(worst_l0, l0)
    return ContractibilityVerdict(
        True, worst_l0, tested=f"{len(compacta)} point clouds, lambda = 2^-j for j < {levels}"
    )


# ---------------------------------------------------------------------------
# maximal contractible region
# ---------------------------------------------------------------------------


@dataclass
class MaximalRegion:
    """Sampled inner approximation of the union of cones at p inside Omega."""

    point: tuple[float, ...]
    all_space: bool
    directions: np.ndarray | None = None
    slopes: np.ndarray | None = None
    heights: np.ndarray | None = None

    def contains(self, x) -> np.ndarray:
        dim = len(self.point)
        v = _pts(x, dim) - np.asarray(self.point)
        if self.all_space:
            return np.ones(v.shape[:-1], dtype=bool)
        nrm = np.linalg.norm(v, axis=-1)
        keep = self.slopes > 0
        d, s, h = self.directions[keep], self.slopes[keep], self.heights[keep]
        hp = v @ d.T
        rp = np.sqrt(np.maximum(nrm[..., None] ** 2 - hp**2, 0.0))
        inside = (rp < s * hp) & (hp < h)
        return np.any(inside, axis=-1)

    def table(self) -> list[dict]:
        if self.all_space:
            return []
        return [
            {**{f"d{j}": float(c) for j, c in enumerate(d)}, "max_slope": float(s), "max_height": float(h)}
            for d, s, h in zip(self.directions, self.slopes, self.heights)
        ]


def maximal_contractible_region(
    omega: Region,
    p=None,
    directions: np.ndarray | None = None,
    config: ConeSearchConfig | None = None,
) -> MaximalRegion:
    """Direction-wise supremum slopes and heights of certified cones at p.

    Interior points give all of R^n. Slopes are probed at a small height,
    heights with a thin cone; both are capped by the configuration.
    """
    cfg = config or ConeSearchConfig()
    p0 = np.zeros(omega.dim) if p is None else np.asarray(p, dtype=float).reshape(omega.dim)
    if is_interior(p0, omega, cfg.seed):
        return MaximalRegion(tuple(p0), True)
    verdict = conical_regularity(p0, omega, ConeSearchConfig(**{**cfg.__dict__, "cert_samples": 20_000}))
    if not verdict.regular:
        raise NotConicallyRegularError(
            f"{omega.name} admits no cone at {p0.tolist()}; no contractible region exists"
        )
    dirs = sphere_directions(omega.dim, cfg.directions, cfg.seed) if directions is None else np.asarray(directions, float)
    rng = np.random.default_rng(cfg.seed)
    depth = _ray_depth(p0, dirs, omega, cfg.height_cap)
    slopes = np.zeros(len(dirs))
    heights = np.zeros(len(dirs))
    small = 1e-3 * cfg.height_cap
    for i in np.nonzero(depth > 0)[0]:
        h = min(small, 0.5 * depth[i])
        slopes[i] = _max_slope(p0, dirs[i], h, omega, cfg, rng)
        if slopes[i] > 0:
            thin = Cone(tuple(p0), tuple(dirs[i]), 1e-6, depth[i])
            heights[i] = depth[i] if _certify(thin, omega, cfg.search_samples, rng) else 0.5 * depth[i]
    return MaximalRegion(tuple(p0), False, dirs, slopes, heights)


@dataclass
class ProductVerdict:
    regular: bool
    factor: ConeVerdict
    product: ConeVerdict | None
    factor_region: MaximalRegion | None = None

    def product_contains(self, x) -> np.ndarray:
        """Membership in M_p(Omega) x M_p(Omega)."""
        if self.factor_region is None:
            raise NotConicallyRegularError("no maximal region for a non-regular point")
        n = len(self.factor.point)
        x = np.asarray(x, dtype=float)
        return self.factor_region.contains(x[..., :n]) & self.factor_region.contains(x[..., n:])


def product_point_regularity(
    p, omega: Region, config: ConeSearchConfig | None = None, with_table: bool = False
) -> ProductVerdict:
    """Regularity of (p, p) for Omega x Omega, cross-checked in the product space."""
    cfg = config or ConeSearchConfig()
    factor = conical_regularity(p, omega, cfg)
    pp = np.concatenate([np.ravel(p), np.ravel(p)]).astype(float)
    prod_cfg = ConeSearchConfig(**{**cfg.__dict__, "directions": min(cfg.directions, 1024)})
    prod = conical_regularity(pp, product(omega, omega), prod_cfg)
    if factor.regular != prod.regular:
        raise NotConicallyRegularError(
            "factor and product regularity verdicts disagree; increase the search budget"
        )
    table = None
    if with_table and factor.regular:
        table = maximal_contractible_region(omega, p, config=cfg)
    return ProductVerdict(factor.regular, factor, prod, table)
