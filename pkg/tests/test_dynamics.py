"""
Unit tests for time evolution and steady states.
"""

import numpy as np

from dipolesim.dynamics import STEADY_STATE_METHODS, evolve, steady_state
from dipolesim.eigenmodes import target_detuning
from dipolesim.errors import ConvergenceError, InvalidArgumentError, ResourceLimitError
from dipolesim.hilbert import DensityState, Pulse, build_basis, trace_distance
from dipolesim.observables import excited_population, field_coefficients, g2_zero, total_emission_rate

from .test_base import BaseSimulationTestCase


def single_atom_rate(rabi, detuning):
    return rabi**2 / (4 * detuning**2 + 1 + 2 * rabi**2)


class SingleAtomSteadyStateTestCase(BaseSimulationTestCase):
    """Test cases for the driven two-level atom."""

    def setUp(self):
        """Set up a lone emitter."""
        super().setUp()
        self.array, self.couplings = self.create_test_chain(n=1)

    def test_emission_rate_matches_analytic_grid(self):
        """Test Gamma_out = Omega^2 / (4 Delta^2 + 1 + 2 Omega^2) over a 5x5 grid."""
        for rabi in (0.25, 0.5, 1.0, 2.0, 4.0):
            for detuning in (-1.0, -0.5, 0.0, 0.5, 1.0):
                report = self.solve_steady(self.array, self.couplings, self.create_test_drive(rabi, detuning))
                rate = total_emission_rate(report.state, self.couplings)
                expected = single_atom_rate(rabi, detuning)
                self.assertAlmostEqual(rate, expected, delta=1e-7 * expected, msg=f"rabi={rabi}, detuning={detuning}")

    def test_resonant_unit_drive_gives_one_third(self):
        """Test <s+ s-> = 1/3 at Omega = Gamma_0, Delta = 0."""
        report = self.solve_steady(self.array, self.couplings, self.create_test_drive(1.0, 0.0))
        self.assertAlmostEqual(excited_population(report.state), 1.0 / 3.0, places=9)
        self.assertDensityMatrix(report.state)

    def test_saturation(self):
        """Test Gamma_out -> Gamma_0 / 2 for a very strong drive."""
        report = self.solve_steady(self.array, self.couplings, self.create_test_drive(1e3, 0.0))
        self.assertAlmostEqual(total_emission_rate(report.state, self.couplings), 0.5, delta=0.005)

    def test_single_atom_is_antibunched(self):
        """Test g2(0) = 0 for one emitter."""
        report = self.solve_steady(self.array, self.couplings, self.create_test_drive(1.0, 0.0))
        coeffs = field_coefficients(self.array, (100.0, 0.0, 0.0))
        self.assertLess(abs(g2_zero(report.state, coeffs)), 1e-8)

    def test_report_fields(self):
        """Test the steady-state report bookkeeping."""
        report = self.solve_steady(self.array, self.couplings, self.create_test_drive(1.0, 0.0))
        self.assertEqual(report.method, "null-space")
        self.assertLess(report.residual, report.tolerance)
        self.assertGreaterEqual(report.iterations, 1)


class SteadyStateMethodTestCase(BaseSimulationTestCase):
    """Test cases comparing steady-state methods on a small chain."""

    def setUp(self):
        """Set up a driven three-emitter chain."""
        super().setUp()
        self.array, self.couplings = self.create_test_chain(n=3, d=0.1)
        self.drive = self.create_test_drive(rabi=1.0, detuning=0.3)

    def test_methods_agree(self):
        """Test integration, null-space and krylov reach the same state."""
        reference = self.solve_steady(self.array, self.couplings, self.drive, method="null-space")
        for method in ("integration", "krylov"):
            report = self.solve_steady(self.array, self.couplings, self.drive, method=method, tol_ss=1e-10)
            self.assertLess(trace_distance(report.state, reference.state), 1e-6, msg=method)
            self.assertDensityMatrix(report.state)

    def test_default_method_converges(self):
        """Test that the default method reaches its default tolerance on a three-emitter chain."""
        reference = self.solve_steady(self.array, self.couplings, self.drive)
        report = steady_state(self.array, self.couplings, self.drive)

        self.assertEqual(report.method, "integration")
        self.assertLessEqual(report.residual, report.tolerance)
        self.assertLess(trace_distance(report.state, reference.state), 1e-7)
        self.assertDensityMatrix(report.state)

    def test_default_method_on_superradiant_drive(self):
        """Test the default method on a dense four-emitter chain driven at its superradiant mode."""
        array, couplings = self.create_test_chain(n=4, d=0.05)
        for rabi in (0.3, 3.0):
            drive = self.create_test_drive(rabi=rabi, detuning=target_detuning(couplings))
            reference = self.solve_steady(array, couplings, drive)
            report = steady_state(array, couplings, drive)
            self.assertLessEqual(report.residual, report.tolerance, msg=rabi)
            self.assertLess(trace_distance(report.state, reference.state), 1e-7, msg=rabi)

    def test_methods_listed(self):
        """Test the published method names."""
        self.assertEqual(STEADY_STATE_METHODS, ("integration", "null-space", "krylov"))

    def test_unknown_method(self):
        """Test that an unknown method is rejected."""
        with self.assertRaises(InvalidArgumentError):
            steady_state(self.array, self.couplings, self.drive, method="power")

    def test_pulsed_drive_rejected(self):
        """Test that steady states need a constant drive."""
        pulsed = self.create_test_drive(pulse=Pulse(1.0, 50.0, 25.0))
        with self.assertRaises(InvalidArgumentError):
            steady_state(self.array, self.couplings, pulsed)

    def test_null_space_budget(self):
        """Test that null-space refuses systems above the Liouvillian budget."""
        array, couplings = self.create_test_chain(n=11, d=0.1)
        with self.assertRaises(ResourceLimitError):
            steady_state(array, couplings, self.drive, method="null-space")

    def test_integration_timeout(self):
        """Test that integration reports non-convergence at max_time."""
        with self.assertRaises(ConvergenceError) as ctx:
            steady_state(self.array, self.couplings, self.drive, method="integration", max_time=0.1)
        self.assertGreater(ctx.exception.residual, 0.0)


class EvolveTestCase(BaseSimulationTestCase):
    """Test cases for trajectories."""

    def test_free_decay(self):
        """Test rho_ee(t) = exp(-Gamma_0 t) for an undriven atom."""
        array, couplings = self.create_test_chain(n=1)
        initial = DensityState.product(build_basis(1, 1), [0])
        trajectory = evolve(
            initial,
            self.create_test_drive(rabi=0.0),
            (0.0, 2.0),
            array,
            couplings,
            sample_times=[0.0, 1.0, 2.0],
            observer=excited_population,
        )

        self.assertAllClose(trajectory.times, [0.0, 1.0, 2.0])
        self.assertAllClose(trajectory.states, np.exp(-np.array([0.0, 1.0, 2.0])), rtol=1e-6)
        self.assertGreater(trajectory.steps, 0)

    def test_dark_state_protection(self):
        """Test that the antisymmetric state of a close pair loses < 1e-4 over t = 10."""
        array, couplings = self.create_test_chain(n=2, d=1e-3)
        basis = build_basis(2, 2)
        initial = DensityState.single_excitation(basis, [1.0, -1.0])
        trajectory = evolve(initial, self.create_test_drive(rabi=0.0), (0.0, 10.0), array, couplings)
        final = trajectory.states[-1]

        self.assertLess(1.0 - excited_population(final), 1e-4)
        self.assertDensityMatrix(final)

    def test_driven_trajectory_keeps_invariants(self):
        """Test that sampled states stay valid density matrices under a pulse."""
        array, couplings = self.create_test_chain(n=3, d=0.1)
        drive = self.create_test_drive(detuning=target_detuning(couplings), pulse=Pulse(1.0, 5.0, 2.0))
        initial = DensityState.ground(build_basis(3, 2))
        trajectory = evolve(initial, drive, (0.0, 10.0), array, couplings, sample_times=np.linspace(0.0, 10.0, 6))

        self.assertEqual(len(trajectory.states), 6)
        for state in trajectory.states:
            self.assertDensityMatrix(state, tol=1e-7)
        self.assertGreater(max(excited_population(s) for s in trajectory.states), 1e-3)

    def test_invalid_spans(self):
        """Test decreasing spans and sample times outside the span."""
        array, couplings = self.create_test_chain(n=1)
        initial = DensityState.ground(build_basis(1, 1))
        drive = self.create_test_drive()
        with self.assertRaises(InvalidArgumentError):
            evolve(initial, drive, (1.0, 0.0), array, couplings)
        with self.assertRaises(InvalidArgumentError):
            evolve(initial, drive, (0.0, 1.0), array, couplings, sample_times=[2.0])
