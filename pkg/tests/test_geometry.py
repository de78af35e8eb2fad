import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slimkms.errors import InputError, NotConicallyRegularError
from slimkms.geometry import (
    BUILTIN_REGIONS,
    Cone,
    ConeSearchConfig,
    Region,
    ball,
    conical_regularity,
    cusp,
    half_ball,
    in_closure,
    is_contractible,
    is_interior,
    maximal_contractible_region,
    polytope,
    product_point_regularity,
    quadrant,
    region_from_spec,
    rindler_wedge,
    slit_ball,
    sphere_directions,
)

FAST = ConeSearchConfig(directions=256)


def cone_region(cone: Cone) -> Region:
    return Region(cone.dim, cone.contains, "cone")


def uniform_in_cone(cone: Cone, n: int, rng) -> np.ndarray:
    """Rejection sampling from the bounding ball; independent of Cone.sample."""
    R = cone.height * math.hypot(1.0, cone.slope)
    out, got = [], 0
    while got < n:
        g = rng.standard_normal((4 * n, cone.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts = np.asarray(cone.apex) + R * g * rng.random((4 * n, 1)) ** (1 / cone.dim)
        pts = pts[cone.contains(pts)]
        out.append(pts)
        got += len(pts)
    return np.concatenate(out)[:n]


class TestCone:
    cone = Cone((0.0, 0.0), (1.0, 0.0), 0.5, 2.0)

    def test_open_membership(self):
        c = self.cone
        assert not c.contains(np.array([0.0, 0.0]))
        assert not c.contains(np.array([1.0, 0.5]))  # lateral boundary
        assert not c.contains(np.array([2.0, 0.0]))  # base
        assert c.contains(np.array([1.0, 0.49]))

    def test_axis_normalized(self):
        c = Cone((0.0, 0.0), (3.0, 4.0), 1.0, 1.0)
        np.testing.assert_allclose(c.axis, (0.6, 0.8), rtol=1e-15)

    @pytest.mark.parametrize("kw", [dict(slope=0.0), dict(height=-1.0)])
    def test_invalid(self, kw):
        args = dict(apex=(0.0, 0.0), axis=(1.0, 0.0), slope=1.0, height=1.0) | kw
        with pytest.raises(InputError):
            Cone(**args)

    def test_one_dimensional_is_interval(self):
        c = Cone((1.0,), (-1.0,), 1.0, 0.5)
        np.testing.assert_array_equal(c.contains(np.array([[0.75], [0.5], [1.0], [1.1]])), [True, False, False, False])

    @given(st.integers(2, 5), st.integers(0, 2**31))
    def test_samples_are_members(self, dim, seed):
        rng = np.random.default_rng(seed)
        axis = rng.standard_normal(dim)
        c = Cone(tuple(rng.standard_normal(dim)), tuple(axis), 0.3 + rng.random(), 0.5 + rng.random())
        assert np.all(c.contains(c.sample(500, rng)))


class TestRegions:
    def test_polytope_membership_is_halfspace_intersection(self, rng):
        hs = [((1.0, 1.0), 1.0), ((-1.0, 0.0), 0.0), ((0.0, -1.0), 0.0)]
        P = polytope(hs)
        x = rng.uniform(-1, 2, (20_000, 2))
        expect = (x[:, 0] + x[:, 1] < 1) & (x[:, 0] > 0) & (x[:, 1] > 0)
        np.testing.assert_array_equal(P.contains(x), expect)
        assert not P.contains(np.array([0.5, 0.5]))  # on a facet

    @pytest.mark.parametrize("R", [ball(), quadrant(2), rindler_wedge(4), half_ball(3)])
    def test_convex_flags_pass_midpoint_test(self, R):
        assert R.convex and R.validate_convexity(10_000)

    def test_nonconvex_fails_midpoint_test(self):
        two = Region(2, lambda p: ball((-2, 0), 1).contains(p) | ball((2, 0), 1).contains(p), "two balls",
                     bounds=((-3.0, -1.0), (3.0, 1.0)))
        assert not two.validate_convexity(2_000)

    def test_region_from_spec(self):
        assert region_from_spec({"kind": "ball", "center": [0, 0, 0], "radius": 2}).dim == 3
        P = region_from_spec({"kind": "polytope", "halfspaces": [[-1, 0, 0], [0, -1, 0]]})
        assert P.contains(np.array([0.1, 0.1])) and not P.contains(np.array([-0.1, 0.1]))
        with pytest.raises(InputError):
            region_from_spec({"kind": "torus"})

    def test_builtins_construct(self):
        for name in ("ball", "quadrant", "wedge4d", "cusp", "slit-ball", "half-ball", "half-line"):
            assert BUILTIN_REGIONS[name]().dim >= 1

    def test_closure_and_interior(self):
        assert in_closure(np.zeros(2), quadrant(2)) and not is_interior(np.zeros(2), quadrant(2))
        assert is_interior(np.zeros(2), ball())
        assert in_closure(np.zeros(2), cusp())
        assert not in_closure(np.array([2.0, 2.0]), ball())

    def test_sphere_directions_unit(self):
        for d in (2, 3, 4):
            np.testing.assert_allclose(np.linalg.norm(sphere_directions(d, 64), axis=1), 1.0, rtol=1e-14)


class TestConicalRegularity:
    @pytest.mark.parametrize(
        "region,p",
        [(rindler_wedge(4), np.zeros(4)), (quadrant(2), np.zeros(2)), (ball(), np.array([1.0, 0.0]))],
    )
    def test_regular_corpus(self, region, p):
        v = conical_regularity(p, region, FAST)
        assert v.regular and v.certified_samples == 100_000

    def test_wedge_axis(self):
        v = conical_regularity(np.zeros(4), rindler_wedge(4))
        assert v.cone.axis[1] > 0.95

    def test_cusp_not_regular(self):
        v = conical_regularity(np.zeros(2), cusp())
        assert not v.regular and "reason" in v.diagnostics

    def test_point_outside_closure(self):
        with pytest.raises(InputError):
            conical_regularity(np.array([2.0, 2.0]), ball())

    @settings(max_examples=8)
    @given(st.floats(0, 2 * math.pi))
    def test_convex_boundary_points(self, theta):
        # Convex regions: every boundary point is conically regular
        p = np.array([math.cos(theta), math.sin(theta)])
        v = conical_regularity(p, ball(), ConeSearchConfig(directions=64))
        assert v.regular
        assert np.dot(v.cone.axis, -p) > 0

    @pytest.mark.parametrize("region,p", [(rindler_wedge(4), np.zeros(4)), (quadrant(2), np.zeros(2))])
    def test_certified_cone_survives_independent_samples(self, region, p, rng):
        cone = conical_regularity(p, region, FAST).cone
        pts = uniform_in_cone(cone, 100_000, rng)
        assert np.all(region.contains(pts))

    def test_monotone_under_shrinking(self, rng):
        region = quadrant(2)
        cone = conical_regularity(np.zeros(2), region, FAST).cone
        for s, h in ((0.5, 1.0), (1.0, 0.5), (0.1, 0.1)):
            smaller = cone.with_(slope=s * cone.slope, height=h * cone.height)
            assert np.all(region.contains(uniform_in_cone(smaller, 20_000, rng)))


class TestContractibility:
    def test_ball_star_shaped(self, rng):
        B = ball()
        v = is_contractible(B, B, [B.sample_members(500, rng)])
        assert v.contractible and v.lambda0 == 1.0

    def test_quadrant_is_a_cone(self, rng):
        Q = quadrant(2)
        v = is_contractible(Q, Q, [rng.uniform(0.01, 5.0, (500, 2))])
        assert v.contractible

    def test_slit_violation(self):
        K = np.array([[0.5, 0.0], [0.3, 0.2], [0.6, -0.4]])
        v = is_contractible(half_ball(2), slit_ball(), [K])
        assert not v.contractible
        assert v.witness == (0.5, 0.0)

    def test_cloud_outside_V(self):
        with pytest.raises(InputError):
            is_contractible(quadrant(2), quadrant(2), [np.array([[-1.0, 1.0]])])

    def test_lambda0_bisection(self):
        # K = {(1.5, 0)} leaves the unit ball for lam >= 2/3
        v = is_contractible(quadrant(2), ball(), [np.array([[1.5, 1e-3]])])
        assert v.contractible and abs(v.lambda0 - 2 / 3) < 1e-6

    @pytest.mark.parametrize("region", [rindler_wedge(4), quadrant(2)])
    def test_regular_cone_is_contractible(self, region, rng):
        cone = conical_regularity(np.zeros(region.dim), region, FAST).cone
        clouds = [cone.sample(2000, rng), uniform_in_cone(cone, 2000, rng)]
        assert is_contractible(cone_region(cone), region, clouds).contractible

    @pytest.mark.parametrize("axis", [(1.0, 0.0), (1.0, 0.1), (0.5, 0.5), (1.0, -0.2)])
    def test_cusp_rejects_every_cone(self, axis, rng):
        cone = Cone((0.0, 0.0), axis, 0.05, 0.5)
        v = is_contractible(cone_region(cone), cusp(), [uniform_in_cone(cone, 500, rng)])
        assert not v.contractible


class TestMaximalRegion:
    def test_quadrant_table_matches_sector(self):
        M = maximal_contractible_region(quadrant(2), config=FAST)
        d = M.directions
        th = np.arctan2(d[:, 1], d[:, 0])
        exact = np.where((th > 0) & (th < np.pi / 2), np.minimum(th, np.pi / 2 - th), 0.0)
        assert np.max(np.abs(np.arctan(M.slopes) - exact)) < 2 * np.pi / len(d)
        rows = M.table()
        assert set(rows[0]) == {"d0", "d1", "max_slope", "max_height"}

    def test_wedge_table_matches_wedge(self, rng):
        M = maximal_contractible_region(rindler_wedge(4), config=ConeSearchConfig(directions=512))
        d = M.directions
        exact = np.arcsin(np.clip((d[:, 1] - np.abs(d[:, 0])) / math.sqrt(2), 0, 1))
        # one grid cell in 4D: mean angular spacing of 512 directions on S^3
        cell = (2 * math.pi**2 / 512) ** (1 / 3)
        assert np.max(np.abs(np.arctan(M.slopes) - exact)) < cell
        x = rng.uniform(-1e-4, 1e-4, (20_000, 4))
        assert not np.any(M.contains(x) & ~rindler_wedge(4).contains(x))

    def test_interior_point_gives_all_space(self):
        M = maximal_contractible_region(ball(), config=FAST)
        assert M.all_space and M.table() == []
        assert np.all(M.contains(np.random.default_rng(0).normal(size=(100, 2)) * 100))

    def test_cusp_raises(self):
        with pytest.raises(NotConicallyRegularError):
            maximal_contractible_region(cusp(), config=FAST)


class TestProducts:
    def test_quadrant_product(self, rng):
        v = product_point_regularity(np.zeros(2), quadrant(2), FAST, with_table=True)
        assert v.regular and v.product.regular and len(v.product.point) == 4
        x = rng.uniform(-1e-4, 1e-4, (5_000, 4))
        both = v.product_contains(x)
        assert np.all(quadrant(4).contains(x[both]))
        assert both.sum() > 0

    def test_ball_interior_product(self):
        v = product_point_regularity(np.zeros(2), ball(), FAST)
        assert v.regular and v.product.regular

    def test_cusp_product(self):
        v = product_point_regularity(np.zeros(2), cusp(), FAST)
        assert not v.regular and not v.product.regular
        with pytest.raises(NotConicallyRegularError):
            v.product_contains(np.zeros(4))
