"""
Unit tests for far-field observables.
"""

import numpy as np

from dipolesim.errors import DipoleSimError, InvalidArgumentError, SingularInputError, UndefinedCorrelationError
from dipolesim.hilbert import DensityState, build_basis
from dipolesim.observables import (
    AngularScan,
    DetectorScanner,
    DetectorSpec,
    angular_scan,
    correlation_matrix,
    detector_direction,
    directional_intensity,
    emitter_emission_rates,
    excited_population,
    far_field_coefficients,
    field_coefficients,
    g2_zero,
    intensity,
    intensity_map,
    manifold_populations,
    observe,
    total_emission_rate,
)

from .test_base import BaseSimulationTestCase

Z = (0.0, 0.0, 1.0)


def brute_force_g2(state, amplitudes):
    """g2(0) of a scalar field sum_j a_j sigma^-_j on the full 2^N space."""
    n = state.basis.n_emitters
    dim = 2**n
    e_plus = np.zeros((dim, dim), dtype=complex)
    for j, a in enumerate(amplitudes):
        for b in range(dim):
            if b >> j & 1:
                e_plus[b ^ (1 << j), b] += a
    rho = np.zeros((dim, dim), dtype=complex)
    patterns = list(state.basis.bit_patterns)
    rho[np.ix_(patterns, patterns)] = state.rho
    e_minus = e_plus.conj().T
    numerator = np.trace(e_minus @ e_minus @ e_plus @ e_plus @ rho).real
    denominator = np.trace(e_minus @ e_plus @ rho).real
    return numerator / denominator**2


class CorrelationTestCase(BaseSimulationTestCase):
    """Test cases for correlations, populations and emission rates."""

    def test_single_excitation_correlations(self):
        """Test C_ij = conj(v_i) v_j for a pure single-excitation state."""
        basis = build_basis(3, 2)
        v = np.array([0.2, 0.5j, -0.4 + 0.1j])
        state = DensityState.single_excitation(basis, v)
        v = v / np.linalg.norm(v)

        self.assertAllClose(correlation_matrix(state), np.outer(v.conj(), v), atol=1e-15)

    def test_product_state_correlations(self):
        """Test correlations of a doubly excited product state."""
        basis = build_basis(3, 2)
        C = correlation_matrix(DensityState.product(basis, [0, 2]))
        self.assertAllClose(C, np.diag([1.0, 0.0, 1.0]), atol=0.0)

    def test_dicke_emission_rate(self):
        """Test Gamma_out ~ 2 Gamma_0 for the symmetric state of a close pair."""
        _, couplings = self.create_test_chain(n=2, d=1e-3)
        state = DensityState.single_excitation(build_basis(2, 2), [1.0, 1.0])
        self.assertAlmostEqual(total_emission_rate(state, couplings), 2.0, delta=1e-3)

    def test_emitter_rates_sum_to_total(self):
        """Test that per-emitter rates add up to Gamma_out."""
        _, couplings = self.create_test_chain(n=3, d=0.1)
        state = self.create_random_state(n=3)
        self.assertAlmostEqual(emitter_emission_rates(state, couplings).sum(), total_emission_rate(state, couplings))

    def test_manifold_populations(self):
        """Test that manifold populations sum to one and weight the excitation number."""
        state = self.create_random_state(n=4)
        populations = manifold_populations(state)

        self.assertEqual(len(populations), 3)
        self.assertAlmostEqual(populations.sum(), 1.0, places=12)
        self.assertAlmostEqual(excited_population(state), populations[1] + 2 * populations[2], places=12)

    def test_observe_record(self):
        """Test the detector-independent observable record."""
        _, couplings = self.create_test_chain(n=3, d=0.1)
        state = self.create_random_state(n=3)
        record = observe(state, couplings)

        self.assertEqual(record.gamma_out, total_emission_rate(state, couplings))
        self.assertEqual(record.n_ex, excited_population(state))
        self.assertIsNone(record.g2)
        self.assertEqual(record.time, 0.0)


class IntensityTestCase(BaseSimulationTestCase):
    """Test cases for field coefficients and intensity."""

    def test_detector_direction(self):
        """Test r(phi) = (sin phi, -cos phi, 0)."""
        self.assertAllClose(detector_direction(0.0), [0.0, -1.0, 0.0], atol=0.0)
        self.assertAllClose(detector_direction(np.pi / 2), [1.0, 0.0, 0.0], atol=1e-16)

    def test_single_emitter_intensity(self):
        """Test I = |G.mu|^2 rho_ee for an excited emitter."""
        array, _ = self.create_test_chain(n=1)
        state = DensityState.product(build_basis(1, 1), [0])
        r = 5.0
        coeffs = field_coefficients(array, (r, 0.0, 0.0))
        kr = 2 * np.pi * r
        expected = abs(np.exp(1j * kr) / (4 * np.pi * r) * (1 - 1 / kr**2 + 1j / kr)) ** 2

        self.assertAlmostEqual(intensity(state, coeffs), expected, delta=1e-12 * expected)

    def test_field_at_emitter_is_singular(self):
        """Test that field points on an emitter are rejected."""
        array, _ = self.create_test_chain(n=2, d=0.1)
        with self.assertRaises(SingularInputError):
            field_coefficients(array, array.positions[0])

    def test_far_field_coefficients(self):
        """Test the far-field limit against the exact field at a large distance."""
        array, _ = self.create_test_chain(n=3, d=0.1, orientation=(0.6, 0.0, 0.8))
        direction = detector_direction(0.7)
        r = 1e5
        limit = far_field_coefficients(array, direction, r).c
        scale = np.abs(limit).max()

        self.assertAllClose(limit, field_coefficients(array, r * direction).c, rtol=0.0, atol=1e-4 * scale)
        self.assertAllClose(limit @ direction, np.zeros(3), rtol=0.0, atol=1e-12 * scale)
        with self.assertRaises(InvalidArgumentError):
            far_field_coefficients(array, direction, 0.0)

    def test_far_field_intensity_scales_as_inverse_square(self):
        """Test that I r^2 of the far-field limit does not depend on r."""
        array, _ = self.create_test_chain(n=3, d=0.1)
        state = self.create_random_state(n=3)
        direction = detector_direction(1.1)
        scaled = [intensity(state, far_field_coefficients(array, direction, r)) * r**2 for r in (10.0, 100.0, 1000.0)]

        self.assertAllClose(scaled, [scaled[0]] * 3, rtol=1e-10)

    def test_coefficient_count_checked(self):
        """Test that coefficients must match the state."""
        array, _ = self.create_test_chain(n=2, d=0.1)
        with self.assertRaises(InvalidArgumentError):
            intensity(DensityState.ground(build_basis(3, 2)), field_coefficients(array, (10.0, 0.0, 0.0)))

    def test_intensity_map_marks_emitters(self):
        """Test that map points on an emitter are NaN."""
        array, _ = self.create_test_chain(n=1)
        state = DensityState.product(build_basis(1, 1), [0])
        grid = intensity_map(state, array, [-0.5, 0.0, 0.5], [0.0, 0.5])

        self.assertEqual(grid.shape, (2, 3))
        self.assertTrue(np.isnan(grid[0, 1]))
        self.assertEqual(int(np.isnan(grid).sum()), 1)
        self.assertAlmostEqual(grid[0, 0], grid[0, 2], places=12)


class G2TestCase(BaseSimulationTestCase):
    """Test cases for g2(0)."""

    def setUp(self):
        """Set up a weakly driven pair."""
        super().setUp()
        self.array, self.couplings = self.create_test_chain(n=2, d=0.05)
        self.state = self.solve_steady(self.array, self.couplings, self.create_test_drive(rabi=0.1)).state
        self.coeffs = field_coefficients(self.array, 100.0 * detector_direction(np.pi / 2))

    def test_matches_full_space_brute_force(self):
        """Test g2 against an independent full-space evaluation."""
        expected = brute_force_g2(self.state, self.coeffs.c[:, 2])
        filtered = g2_zero(self.state, self.coeffs, "polarization-filtered", Z)
        self.assertAlmostEqual(filtered, expected, delta=1e-9 * expected)

    def test_total_equals_filtered_for_z_fields(self):
        """Test that total and z-filtered g2 agree when fields are z polarized."""
        total = g2_zero(self.state, self.coeffs)
        filtered = g2_zero(self.state, self.coeffs, "polarization-filtered", Z)
        self.assertAlmostEqual(total, filtered, delta=1e-10 * max(1.0, filtered))

    def test_truncated_chain_matches_brute_force(self):
        """Test g2 of a truncated three-emitter steady state."""
        array, couplings = self.create_test_chain(n=3, d=0.1)
        state = self.solve_steady(array, couplings, self.create_test_drive(rabi=0.5)).state
        coeffs = field_coefficients(array, (100.0, 0.0, 0.0))
        expected = brute_force_g2(state, coeffs.c[:, 2])
        self.assertAlmostEqual(g2_zero(state, coeffs, "polarization-filtered", Z), expected, delta=1e-9 * expected)

    def test_fully_inverted_pair(self):
        """Test g2 = 1 for two excited emitters seen with equal amplitudes."""
        state = DensityState.product(build_basis(2, 2), [0, 1])
        coeffs = field_coefficients(self.array, (100.0, 0.0, 0.0))
        self.assertAlmostEqual(g2_zero(state, coeffs), 1.0, places=10)

    def test_single_excitation_is_antibunched(self):
        """Test g2 = 0 for a state without two-excitation weight."""
        state = DensityState.single_excitation(build_basis(2, 2), [1.0, 0.3], ground_weight=0.5)
        self.assertEqual(g2_zero(state, self.coeffs), 0.0)

    def test_undefined_without_intensity(self):
        """Test that g2 is undefined for the ground state."""
        with self.assertRaises(UndefinedCorrelationError):
            g2_zero(DensityState.ground(build_basis(2, 2)), self.coeffs)

    def test_invalid_modes(self):
        """Test unknown modes and filtered mode without polarization."""
        with self.assertRaises(InvalidArgumentError):
            g2_zero(self.state, self.coeffs, "polarization-filtered")
        with self.assertRaises(InvalidArgumentError):
            g2_zero(self.state, self.coeffs, "cross")


class DetectorTestCase(BaseSimulationTestCase):
    """Test cases for detector-integrated intensity and angular scans."""

    def setUp(self):
        """Set up a driven three-emitter chain."""
        super().setUp()
        self.array, self.couplings = self.create_test_chain(n=3, d=0.1)
        self.state = self.solve_steady(self.array, self.couplings, self.create_test_drive(rabi=1.0)).state

    def test_small_detector_limit(self):
        """Test J / dOmega -> I(phi) as dphi -> 0."""
        delta_phi = 1e-3
        j = directional_intensity(self.state, self.array, 0.3, delta_phi=delta_phi)
        scanner = DetectorScanner(self.state, self.array)
        point = scanner.intensity(0.3)
        self.assertAlmostEqual(j / (2 * delta_phi) ** 2, point, delta=1e-4 * point)

    def test_quadrature_order_checked(self):
        """Test that n_quad must be odd and at least 5."""
        with self.assertRaises(InvalidArgumentError):
            directional_intensity(self.state, self.array, 0.0, n_quad=4)
        with self.assertRaises(InvalidArgumentError):
            directional_intensity(self.state, self.array, 0.0, n_quad=3)
        with self.assertRaises(InvalidArgumentError):
            directional_intensity(self.state, self.array, 0.0, delta_phi=0.0)

    def test_scan(self):
        """Test an angular scan with g2."""
        phis = np.linspace(-np.pi, np.pi, 13)
        scan = angular_scan(self.state, self.array, phis)

        self.assertEqual(scan.j.shape, (13,))
        self.assertFalse(np.any(np.isnan(scan.j)))
        self.assertFalse(np.any(np.isnan(scan.g2)))
        self.assertEqual(scan.j_norm.max(), 1.0)
        self.assertEqual(scan.argmax_phi, phis[scan.argmax_index])
        self.assertEqual(scan.errors, [])

    def test_scan_without_g2(self):
        """Test that g2 can be skipped."""
        scan = DetectorScanner(self.state, self.array, DetectorSpec(n_quad=7)).scan([0.0, 0.5], with_g2=False)
        self.assertTrue(np.all(np.isnan(scan.g2)))
        self.assertFalse(np.any(np.isnan(scan.j)))

    def test_scanner_g2_matches_g2_zero(self):
        """Test that the scanner g2 equals a direct evaluation."""
        scanner = DetectorScanner(self.state, self.array)
        coeffs = field_coefficients(self.array, scanner.detector.r_far * detector_direction(0.7))
        self.assertAlmostEqual(scanner.g2(0.7), g2_zero(self.state, coeffs), places=12)

    def test_failed_points_recorded(self):
        """Test that per-point failures are recorded and an all-failed scan has no maximum."""
        ground = DensityState.ground(self.state.basis)
        scan = angular_scan(ground, self.array, [0.0, 1.0])

        self.assertEqual(len(scan.errors), 2)
        self.assertEqual(scan.errors[0]["error"], "UndefinedCorrelationError")
        self.assertFalse(np.any(np.isnan(scan.j)))

        empty = AngularScan(np.array([0.0]), np.array([np.nan]), np.array([np.nan]))
        with self.assertRaises(DipoleSimError):
            empty.argmax_index
