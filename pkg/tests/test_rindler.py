import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from slimkms.errors import CoincidentOrbitError, InputError
from slimkms.kms import kms_check, l1_clustering_check, thermal_pair
from slimkms.rindler import (
    RindlerPoint,
    WedgePairGeometry,
    commutator_massive,
    dowker_massless,
    ground_state_massless,
    minkowski_interval,
    pauli_jordan_gate,
    vacuum_massive,
    vacuum_massless,
    wightman_beta,
)
from slimkms.rindler.fields import pauli_jordan_timelike
from slimkms.rindler.verify import (
    Probe,
    bisognano_wichmann_gate,
    contour_residue,
    l1_family_report,
    limit_jump_weights,
    scaled_sequence,
    scaling_limit_horizon,
    slc_check,
    spacelike_probes,
)

TWO_PI = 2 * math.pi
pos = st.floats(0.1, 5.0)


class TestKinematics:
    @given(st.floats(-3, 3), pos, st.floats(-2, 2), st.floats(-2, 2))
    def test_points_lie_in_wedge(self, eta, xi, a, b):
        x = RindlerPoint(eta, xi, (a, b)).minkowski()
        assert x[1] > abs(x[0])
        back = RindlerPoint.from_minkowski(x)
        assert abs(back.eta - eta) < 1e-9 and abs(back.xi - xi) < 1e-9 * max(1, xi)

    def test_outside_wedge_rejected(self):
        with pytest.raises(InputError):
            RindlerPoint.from_minkowski([1.0, 0.5, 0.0, 0.0])

    def test_boost_preserves_orbit(self):
        p = RindlerPoint(0.3, 1.7, (0.1, 0.2))
        assert p.boosted(2.0).xi == p.xi and p.boosted(2.0).eta == pytest.approx(2.3)

    def test_interval_identity(self, rng):
        n = 10_000
        xi, xp = rng.uniform(0.1, 5, n), rng.uniform(0.1, 5, n)
        d = rng.uniform(0.01, 5, n)
        s = rng.uniform(-4, 4, n)
        worst = 0.0
        for i in range(n):
            g = WedgePairGeometry(xi[i], xp[i], d[i])
            x, y = g.points(s[i], eta_prime=rng.uniform(-1, 1))
            direct = minkowski_interval(x, y)
            # relative to the size of the terms that cancel in the direct form
            scale = np.sum((x - y) ** 2)
            worst = max(worst, abs(g.tau2(s[i]) - direct) / scale)
        assert worst < 1e-12

    def test_coincident_orbit(self):
        with pytest.raises(CoincidentOrbitError):
            WedgePairGeometry(1.0, 1.0, 0.0, mass=1.0)

    @given(pos, pos, st.floats(0.05, 3), st.floats(1e-3, 10))
    def test_scaling_keeps_gamma(self, xi, xp, d, lam):
        g = WedgePairGeometry(xi, xp, d)
        h = g.scaled(lam)
        assert abs(h.gamma - g.gamma) < 1e-9 * max(1, g.gamma)
        np.testing.assert_allclose(h.tau2(0.3), lam**2 * g.tau2(0.3), rtol=1e-9)

    def test_light_cone_at_gamma(self):
        g = WedgePairGeometry(1.0, 2.0, 0.5)
        assert abs(g.tau2(g.gamma)) < 1e-14
        assert g.is_spacelike(0.9 * g.gamma) and not g.is_spacelike(1.1 * g.gamma)


class TestCommutator:
    geo = WedgePairGeometry(1.0, 1.3, 0.7, mass=1.0)

    def test_massless_is_delta_pair(self):
        C = commutator_massive(self.geo.with_(mass=0.0))
        assert C.smooth is None and len(C.deltas) == 2
        assert C.check_antisymmetry()
        k = self.geo.kappa
        assert {d.location: d.weight for d in C.deltas} == {self.geo.gamma: -1j * k, -self.geo.gamma: 1j * k}

    def test_spacelike_commutativity(self):
        C = commutator_massive(self.geo)
        s = np.linspace(-0.999, 0.999, 101) * self.geo.gamma
        assert np.all(C(s) == 0)

    def test_antisymmetric(self):
        assert commutator_massive(self.geo).check_antisymmetry()

    def test_tail_matches_minkowski_pauli_jordan(self):
        C = commutator_massive(self.geo)
        for s in (-3.0, -1.6, 1.4, 2.5, 6.0):
            x, y = self.geo.points(s)
            assert abs(C(np.array([s]))[0] - 1j * pauli_jordan_timelike(x - y, 1.0)) < 1e-14

    def test_envelope_holds(self):
        assert commutator_massive(self.geo).check_envelope()

    def test_gate_report(self):
        rep = pauli_jordan_gate(1.0)
        assert rep["canonical"] < 1e-6 and rep["kg_smeared"] < 1e-6 and rep["spacelike_zero"] == 0

    def test_negative_mass(self):
        with pytest.raises(InputError):
            pauli_jordan_gate(-1.0)

    def test_tail_rate(self):
        C = commutator_massive(WedgePairGeometry(1.0, 1.0, 1.0, mass=1.0))
        v = l1_clustering_check(C, T_max=40.0)
        assert v.integrable
        assert abs(v.fits["+"].rate - 0.75) < 0.05 and v.fits["+"].model == "exponential"


class TestVacuumForms:
    def test_massless_limit_of_massive_vacuum(self):
        geo = WedgePairGeometry(1.0, 2.0, 0.5, mass=1e-6)
        s = np.array([0.0, 0.3, -0.5])
        np.testing.assert_allclose(vacuum_massive(geo, s), vacuum_massless(geo, s), rtol=1e-9)

    def test_massive_vacuum_direct(self):
        geo = WedgePairGeometry(1.0, 1.0, 1.0, mass=1.0)
        x, y = geo.points(0.2)
        r = math.sqrt(-minkowski_interval(x, y))
        ref = special.k1(r) / (4 * math.pi**2 * r)
        np.testing.assert_allclose(vacuum_massive(geo, 0.2), ref, rtol=1e-13)


class TestDowker:
    @pytest.mark.parametrize("xi,xp,d", [(1, 1, 1), (0.5, 2, 0.3), (1, 3, 0), (2, 2, 0.5)])
    def test_equals_vacuum_at_two_pi(self, xi, xp, d):
        geo = WedgePairGeometry(xi, xp, d)
        s = np.linspace(-0.95, 0.95, 21) * geo.gamma
        np.testing.assert_allclose(dowker_massless(geo, s), vacuum_massless(geo, s), rtol=1e-10)
        sc = np.array([1.7 * geo.gamma + 0j, -2 * geo.gamma]) - 0.3j
        np.testing.assert_allclose(dowker_massless(geo, sc), vacuum_massless(geo, sc), rtol=1e-10)

    @pytest.mark.parametrize("beta", [math.pi, TWO_PI, 4 * math.pi])
    def test_pole_locations_and_weights(self, beta):
        geo = WedgePairGeometry(1.0, 1.5, 0.4, beta=beta)
        g, k = geo.gamma, geo.kappa
        for h in (1e-4, 1e-6):
            # simple poles at +-gamma with beta-independent weight kappa / 2 pi
            assert abs(h * dowker_massless(geo, g - h) - k / (2 * math.pi)) < 1e-3 * k
            assert abs(h * dowker_massless(geo, -g + h) - k / (2 * math.pi)) < 1e-3 * k
        s = np.linspace(-0.9, 0.9, 19) * g
        assert np.all(np.isfinite(dowker_massless(geo, s)))

    @pytest.mark.parametrize("beta", [math.pi, 4 * math.pi])
    def test_kms(self, beta):
        geo = WedgePairGeometry(1.0, 1.3, 0.7, beta=beta)
        W = lambda s: dowker_massless(geo, s)
        assert kms_check(*thermal_pair(W, beta)).max_residual < 1e-8

    def test_ground_state_limit(self):
        geo = WedgePairGeometry(1.0, 1.3, 0.7, beta=1e4)
        s = np.array([0.0, 0.4, -0.6, 3.0])
        np.testing.assert_allclose(dowker_massless(geo, s), ground_state_massless(geo, s), rtol=1e-6)

    def test_infinite_beta_rejected(self):
        with pytest.raises(InputError):
            dowker_massless(WedgePairGeometry(1, 1, 1, beta=math.inf), 0.0)


class TestThermalWightman:
    def test_bisognano_wichmann(self):
        rep = bisognano_wichmann_gate(1.0, spacelike_probes()[:2])
        assert rep.passed and rep.max_rel_massive < 1e-5 and rep.max_rel_massless < 1e-8

    def test_massless_is_dowker(self):
        geo = WedgePairGeometry(1.0, 1.3, 0.7, beta=math.pi)
        s = np.array([0.0, 0.3, -0.2 - 0.4j])
        np.testing.assert_allclose(wightman_beta(geo)(s), dowker_massless(geo, s), rtol=1e-14)

    def test_massive_kms(self):
        geo = WedgePairGeometry(1.0, 1.0, 1.0, mass=1.0, beta=math.pi)
        W = wightman_beta(geo)
        rep = kms_check(*thermal_pair(W, math.pi), omega_grid=np.linspace(-2, 2, 9), sigma=2.0, nodes=400)
        assert rep.max_residual < 1e-6

    def test_antisymmetric_part_is_commutator(self):
        geo = WedgePairGeometry(1.0, 1.0, 1.0, mass=1.0, beta=math.pi)
        W = wightman_beta(geo)
        s = np.array([geo.gamma + 0.7, -geo.gamma - 1.2, 0.3])
        np.testing.assert_allclose(W.antisymmetric_part(s), W.commutator(s), atol=1e-7)

    def test_light_cone_rejected(self):
        geo = WedgePairGeometry(1.0, 1.0, 1.0, mass=1.0)
        with pytest.raises(InputError):
            wightman_beta(geo)(np.array([geo.gamma]))

    def test_ground_state_rejected(self):
        with pytest.raises(InputError):
            wightman_beta(WedgePairGeometry(1, 1, 1, mass=1.0, beta=math.inf))


class TestScalingLimit:
    def test_massless_fixed_point(self):
        geo = WedgePairGeometry(1.0, 1.3, 0.7, beta=math.pi)
        s = np.array([0.0, 0.4])
        lam = np.geomspace(1, 1e-4, 5)
        seq = scaled_sequence(geo, s, lam)
        np.testing.assert_allclose(seq, np.broadcast_to(dowker_massless(geo, s), seq.shape), rtol=1e-13)
        rep = scaling_limit_horizon(math.pi, 0.0, [Probe(1.0, 1.3, 0.7, (0.0, 0.4))])
        assert rep.max_deviation == 0.0

    def test_vacuum_probe(self):
        rep = scaling_limit_horizon(TWO_PI, 1.0, [Probe(1.0, 1.0, 1.0, (0.0, 0.5))])
        assert rep.passed and rep.max_deviation < 1e-4
        dev = rep.probes[0].raw_deviation
        assert np.all(np.diff(dev) < 0)

    def test_plot_rows(self):
        rep = scaling_limit_horizon(TWO_PI, 1.0, [Probe(1.0, 1.0, 1.0, (0.2,))])
        rows = rep.plot_rows()
        assert {"lambda", "deviation"} <= set(rows[0])

    def test_jump_weights(self):
        p = Probe(1.0, 1.0, 1.0, (0.3,))
        k = p.geometry(1.0, math.pi).kappa
        w = limit_jump_weights(math.pi, 1.0, p)
        assert abs(w["+"][0] / k + 1j) < 1e-6 and abs(w["-"][0] / k - 1j) < 1e-6

    def test_contour_residue(self):
        f = lambda z: 3.0 / (z - 1.0) + z**2 + 1 / (z - 5.0)
        assert abs(contour_residue(f, 1.0, 0.5) - 3.0) < 1e-14


class TestSLC:
    def test_two_pi_satisfied(self):
        rep = slc_check(TWO_PI)
        assert rep.satisfied and rep.max_dev < 1e-6

    @pytest.mark.parametrize("beta", [math.pi, 4 * math.pi])
    def test_other_beta_violated(self, beta):
        rep = slc_check(beta)
        assert not rep.satisfied and rep.variation > 0.10


class TestL1Family:
    def test_massive(self):
        rep = l1_family_report(betas=(TWO_PI,), mass=1.0)
        e = rep.entries[0]
        assert rep.passed and e.tail_model == "exponential" and not e.distributional

    def test_massless_distributional(self):
        rep = l1_family_report(betas=(TWO_PI,), mass=0.0)
        assert rep.entries[0].distributional and rep.entries[0].commutator_l1
