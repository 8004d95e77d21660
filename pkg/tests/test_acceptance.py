"""
Physical property checks and figure-level reproductions.

The figure-level cases run the shipped preset configs and are skipped unless
DIPOLESIM_RUN_SLOW is set.
"""

import numpy as np

from dipolesim import settings
from dipolesim.dynamics import evolve
from dipolesim.eigenmodes import subradiant_scaling
from dipolesim.hilbert import trace_distance
from dipolesim.observables import DetectorScanner, DetectorSpec
from scenarios.config import parse_config
from scenarios.presets import run_scenario

from .test_base import BaseSimulationTestCase, slow


def run_preset(name, overrides=()):
    return run_scenario(parse_config(settings.PRESETS_DIR / name, overrides))


class SteadyStatePropertyTestCase(BaseSimulationTestCase):
    """Test cases for symmetry and stationarity of driven chains."""

    def setUp(self):
        """Set up a driven three-emitter chain and its steady state."""
        super().setUp()
        self.array, self.couplings = self.create_test_chain(n=3, d=0.1)
        self.drive = self.create_test_drive(rabi=1.0, detuning=0.3)
        self.state = self.solve_steady(self.array, self.couplings, self.drive).state

    def test_steady_state_is_stationary(self):
        """Test that evolving the steady state leaves it unchanged."""
        trajectory = evolve(self.state, self.drive, (0.0, 5.0), self.array, self.couplings, rel_tol=1e-10, abs_tol=1e-12)
        self.assertLess(trace_distance(trajectory.states[-1], self.state), 1e-7)

    def test_mirror_symmetry(self):
        """Test J(phi) = J(-phi) for a chain symmetric under x -> -x."""
        scanner = DetectorScanner(self.state, self.array)
        for phi in (0.3, 1.2, 2.5):
            left, right = scanner.j_phi(phi), scanner.j_phi(-phi)
            self.assertAlmostEqual(left, right, delta=1e-10 * right)

    def test_weak_drive_intensity_is_quadratic(self):
        """Test that doubling a weak drive quadruples the emitted intensity."""
        values = []
        for rabi in (0.01, 0.02):
            state = self.solve_steady(self.array, self.couplings, self.create_test_drive(rabi=rabi, detuning=0.3)).state
            values.append(DetectorScanner(state, self.array).intensity(0.7))
        self.assertAlmostEqual(values[1] / values[0], 4.0, delta=0.04)

    def test_far_field_limit_independent_of_distance(self):
        """Test that g2 and I r^2 agree at r = 100 and r = 1000 in the far-field limit."""
        near = DetectorScanner(self.state, self.array, DetectorSpec(r_far=100.0, far_field=True))
        far = DetectorScanner(self.state, self.array, DetectorSpec(r_far=1000.0, far_field=True))
        for phi in (0.0, 0.7, 2.0):
            self.assertAlmostEqual(near.g2(phi), far.g2(phi), delta=1e-6 * far.g2(phi))
            scaled = far.intensity(phi) * 1000.0**2
            self.assertAlmostEqual(near.intensity(phi) * 100.0**2, scaled, delta=1e-4 * scaled)

    def test_intensity_falls_off_as_inverse_square(self):
        """Test I r^2 and g2 of the exact field against the far-field limit at growing distance."""
        limit = DetectorScanner(self.state, self.array, DetectorSpec(r_far=1000.0, far_field=True))
        phi = 0.7
        for r, tolerance in ((100.0, 1e-2), (1000.0, 5e-3)):
            exact = DetectorScanner(self.state, self.array, DetectorSpec(r_far=r))
            expected = limit.intensity(phi) * 1000.0**2
            self.assertAlmostEqual(exact.intensity(phi) * r**2, expected, delta=tolerance * expected, msg=r)
        self.assertAlmostEqual(exact.g2(phi), limit.g2(phi), delta=5e-3 * limit.g2(phi))


class FigureReproductionTestCase(BaseSimulationTestCase):
    """Figure-level checks on the shipped configs."""

    @slow
    def test_chain_emission_peaks_perpendicular(self):
        """Test that the broadside-driven N=30, d=1/40 chain emits at phi = +-pi/2."""
        result = run_preset("fig2.json")
        self.assertAlmostEqual(abs(result.summary["phi_max"]), np.pi / 2, delta=0.01 * np.pi + 1e-12)

    @slow
    def test_axial_drive_tilts_emission(self):
        """Test that driving along the chain pulls the lobes toward the laser, to |phi| = 0.39 pi."""
        result = run_preset("fig2_axial.json")
        self.assertAlmostEqual(abs(result.summary["phi_max"]), 0.39 * np.pi, delta=0.011 * np.pi)

    @slow
    def test_dense_chain_antibunching(self):
        """Test g2 <= 0.1 at the emission maximum of the N=30, d=1/70 chain."""
        result = run_preset("fig2_d70.json")
        self.assertLessEqual(result.summary["g2_max"], 0.1)

    @slow
    def test_truncation_accuracy(self):
        """Test truncated against full model within 1% at weak and 5% at unit drive, and small p3."""
        result = run_preset("figS5.json", ["sweep.values=[0.1, 1.0]"])
        weak, strong = result.table("model_comparison").rows
        self.assertLess(weak["n_ex_deviation"], 0.01)
        self.assertLess(weak["gamma_out_deviation"], 0.01)
        self.assertLess(strong["n_ex_deviation"], 0.05)
        self.assertLess(strong["gamma_out_deviation"], 0.05)

        manifolds = result.table("model_comparison_manifolds").rows
        p3 = [row["population"] for row in manifolds if row["model"] == "full" and row["n"] == 3]
        self.assertLess(max(p3), 0.01)

    @slow
    def test_subradiant_pulse(self):
        """Test that the pulsed N=12 chain ends in {0, 1} and radiates near 1e-3."""
        result = run_preset("figS2.json")
        self.assertGreater(result.summary["manifolds"][0] + result.summary["manifolds"][1], 0.98)
        self.assertGreater(result.summary["gamma_out"], 1e-3 / 3)
        self.assertLess(result.summary["gamma_out"], 3e-3)

    @slow
    def test_tilted_ring_pair(self):
        """Test the enhanced emission and antibunching of the tilted ring pair."""
        result = run_preset("figS4.json")
        self.assertGreaterEqual(result.summary["gamma_out_over_single"], 5.0)
        self.assertLessEqual(result.summary["gamma_out_over_single"], 9.0)
        self.assertLess(result.summary["g2_max"], 0.1)

    def test_subradiant_exponent(self):
        """Test min decay ~ N^-3 within 0.5 for N in 10..40."""
        exponent, _ = subradiant_scaling(range(10, 45, 5), 0.05)
        self.assertAlmostEqual(exponent, 3.0, delta=0.5)

    @slow
    def test_disorder_trend(self):
        """Test that disorder lowers Gamma_out and raises g2."""
        table = run_preset("figS6.json").table("disorder")
        for n in (5, 10, 15):
            rows = {row["epsilon"]: row for row in table.rows if row["n"] == n}
            self.assertLess(rows[0.1]["gamma_out_mean"], rows[0.02]["gamma_out_mean"])
            self.assertLess(rows[0.02]["gamma_out_mean"], rows[0.0]["ordered_gamma_out"])
            self.assertGreater(rows[0.1]["g2_mean"], rows[0.02]["g2_mean"])
