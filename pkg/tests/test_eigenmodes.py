"""
Unit tests for collective modes, dispersion and spin-wave assignment.
"""

import numpy as np

from dipolesim.couplings import coupling_matrices
from dipolesim.eigenmodes import (
    MOST_SUBRADIANT,
    MOST_SUPERRADIANT,
    allowed_ring_momenta,
    assign_spin_waves,
    chain_decay_rate,
    chain_dispersion,
    effective_modes,
    ring_mode,
    select_mode,
    spectral_decay,
    subradiant_scaling,
    target_detuning,
)
from dipolesim.errors import InvalidArgumentError, SingularInputError
from dipolesim.geometry import make_chain, make_ring
from dipolesim.observables import total_emission_rate

from .test_base import BaseSimulationTestCase


class EffectiveModesTestCase(BaseSimulationTestCase):
    """Test cases for eigenmodes of Omega - i Gamma / 2."""

    def test_single_atom(self):
        """Test that one atom has decay Gamma_0 and no shift."""
        _, couplings = self.create_test_chain(n=1)
        (mode,) = effective_modes(couplings)
        self.assertEqual(mode.decay, 1.0)
        self.assertEqual(mode.shift, 0.0)
        self.assertEqual(mode.eigenvalue, complex(0.0, -0.5))

    def test_dicke_pair(self):
        """Test decays {2, 0} within 1e-3 for a pair at d = 1e-3."""
        _, couplings = self.create_test_chain(n=2, d=1e-3)
        modes = effective_modes(couplings)
        self.assertAlmostEqual(modes[0].decay, 2.0, delta=1e-3)
        self.assertAlmostEqual(modes[1].decay, 0.0, delta=1e-3)

    def test_modes_sorted_and_normalized(self):
        """Test ordering by decay and unit-norm vectors."""
        _, couplings = self.create_test_chain(n=6, d=0.1)
        modes = effective_modes(couplings)
        decays = [m.decay for m in modes]

        self.assertEqual(decays, sorted(decays, reverse=True))
        self.assertEqual([m.label for m in modes], list(range(6)))
        for mode in modes:
            self.assertAlmostEqual(np.linalg.norm(mode.vector), 1.0, places=12)

    def test_decays_sum_to_trace(self):
        """Test that the decay rates sum to N Gamma_0."""
        _, couplings = self.create_test_chain(n=5, d=0.07)
        self.assertAlmostEqual(sum(m.decay for m in effective_modes(couplings)), 5.0, places=9)

    def test_select_and_target(self):
        """Test mode selection and the resonant detuning."""
        _, couplings = self.create_test_chain(n=5, d=0.05)
        modes = effective_modes(couplings)
        superradiant = select_mode(modes, MOST_SUPERRADIANT)
        subradiant = select_mode(modes, MOST_SUBRADIANT)

        self.assertEqual(superradiant.decay, max(m.decay for m in modes))
        self.assertEqual(subradiant.decay, min(m.decay for m in modes))
        self.assertEqual(target_detuning(couplings), -superradiant.shift)
        self.assertEqual(target_detuning(couplings, MOST_SUBRADIANT), -subradiant.shift)
        with self.assertRaises(InvalidArgumentError):
            select_mode(modes, "brightest")

    def test_target_on_subset(self):
        """Test that a subset target uses the restricted couplings."""
        _, couplings = self.create_test_chain(n=4, d=0.1)
        subset = target_detuning(couplings, subset=[0, 1])
        self.assertAlmostEqual(subset, -select_mode(effective_modes(couplings.restrict([0, 1])), MOST_SUPERRADIANT).shift)

    def test_emission_maximum_at_returned_detuning(self):
        """Test that a detuning scan of a weakly driven chain peaks at the superradiant target."""
        array, couplings = self.create_test_chain(n=5, d=0.05)
        target = target_detuning(couplings)
        detunings = target + np.linspace(-3.0, 3.0, 61)
        rates = []
        for detuning in detunings:
            report = self.solve_steady(array, couplings, self.create_test_drive(rabi=0.2, detuning=detuning))
            rates.append(total_emission_rate(report.state, couplings))

        self.assertAlmostEqual(detunings[int(np.argmax(rates))], target, delta=0.2 + 1e-9)


class RingModeTestCase(BaseSimulationTestCase):
    """Test cases for ring angular-momentum modes."""

    def setUp(self):
        """Set up the N=4, d=0.02 ring."""
        super().setUp()
        self.ring = make_ring(4, 0.02)
        self.couplings = coupling_matrices(self.ring)

    def test_superradiant_ring_mode(self):
        """Test the m=0 eigenvalue against the row sums of the couplings."""
        expected_shift = float(np.sum(self.couplings.omega[0, 1:]))
        expected_decay = float(np.sum(self.couplings.gamma[0]))
        mode = select_mode(effective_modes(self.couplings), MOST_SUPERRADIANT)
        m0 = ring_mode(self.ring, 0, self.couplings)

        self.assertAlmostEqual(mode.shift, expected_shift, delta=1e-10)
        self.assertAlmostEqual(mode.decay, expected_decay, delta=1e-10)
        self.assertAlmostEqual(m0.shift, expected_shift, delta=1e-10)
        self.assertAlmostEqual(m0.decay, expected_decay, delta=1e-10)

    def test_plus_minus_degeneracy(self):
        """Test omega_m = omega_-m."""
        for m in (1, 2):
            plus = ring_mode(self.ring, m, self.couplings)
            minus = ring_mode(self.ring, -m, self.couplings)
            self.assertAlmostEqual(plus.eigenvalue, minus.eigenvalue, delta=1e-10)

    def test_ring_modes_are_eigenvalues(self):
        """Test that every ring mode appears in the effective spectrum."""
        ring = make_ring(5, 0.1)
        couplings = coupling_matrices(ring)
        spectrum = np.array([m.eigenvalue for m in effective_modes(couplings)])
        for m in allowed_ring_momenta(5):
            eigenvalue = ring_mode(ring, m, couplings).eigenvalue
            self.assertLess(np.abs(spectrum - eigenvalue).min(), 1e-10)

    def test_allowed_momenta(self):
        """Test the allowed angular momenta."""
        self.assertEqual(allowed_ring_momenta(5), [-2, -1, 0, 1, 2])
        with self.assertRaises(InvalidArgumentError):
            ring_mode(self.ring, 3)

    def test_non_circulant_rejected(self):
        """Test that a chain is not accepted as a ring."""
        with self.assertRaises(InvalidArgumentError):
            ring_mode(make_chain(4, 0.1), 0)


class DispersionTestCase(BaseSimulationTestCase):
    """Test cases for the infinite-chain dispersion."""

    def test_symmetric_in_k(self):
        """Test omega(k) = omega(-k)."""
        for k in (0.05 * np.pi / 0.05, 0.6 * np.pi / 0.05):
            self.assertAlmostEqual(chain_dispersion(k, 0.05), chain_dispersion(-k, 0.05), delta=1e-10)

    def test_guided_modes_do_not_decay(self):
        """Test that modes outside the light cone are dark."""
        for k in (1.05 * 2 * np.pi, 0.3 * np.pi / 0.05, 0.8 * np.pi / 0.05, np.pi / 0.05):
            self.assertLess(abs(-2.0 * chain_dispersion(k, 0.05).imag), 1e-6, msg=k)

    def test_decay_inside_light_cone(self):
        """Test Gamma(k) = 3 lambda0 / (8 d) (1 + k^2/k0^2) for dipoles perpendicular to the chain."""
        k0 = 2 * np.pi
        for k in (0.0, 0.3 * k0, 0.784 * k0, 0.98 * k0):
            expected = 3.0 / (8 * 0.05) * (1 + (k / k0) ** 2)
            self.assertAlmostEqual(-2.0 * chain_dispersion(k, 0.05).imag, expected, delta=1e-7 * expected, msg=k)

    def test_decay_along_chain_axis(self):
        """Test Gamma(k) = 3 lambda0 / (4 d) (1 - k^2/k0^2) for dipoles along the chain."""
        k0 = 2 * np.pi
        for k in (0.0, 0.5 * k0):
            expected = 3.0 / (4 * 0.1) * (1 - (k / k0) ** 2)
            value = chain_dispersion(k, 0.1, orientation=(0.0, 1.0, 0.0))
            self.assertAlmostEqual(-2.0 * value.imag, expected, delta=1e-7 * expected)

    def test_near_light_line_converges(self):
        """Test wavenumbers just inside and outside the light line at the default tolerance."""
        k0 = 2 * np.pi
        for k in (0.8 * k0, 0.98 * k0, 6.16, 1.02 * k0):
            value = chain_dispersion(k, 0.05)
            self.assertTrue(np.isfinite(value.real) and np.isfinite(value.imag), msg=k)

    def test_decay_rate_matches_dispersion(self):
        """Test the closed-form decay curve against the imaginary part of the lattice sum."""
        ks = np.linspace(0.0, np.pi / 0.05, 37)[1:]
        rates = chain_decay_rate(ks, 0.05)
        for k, rate in zip(ks, rates):
            self.assertAlmostEqual(rate, -2.0 * chain_dispersion(k, 0.05).imag, delta=1e-7)
        tilted = (0.0, 0.6, 0.8)
        self.assertAlmostEqual(
            float(chain_decay_rate(2.0, 0.1, tilted)), -2.0 * chain_dispersion(2.0, 0.1, tilted).imag, delta=1e-7
        )

    def test_light_line_is_singular(self):
        """Test that k_y = k0 raises a singular-input error."""
        with self.assertRaises(SingularInputError):
            chain_dispersion(2 * np.pi, 0.05)

    def test_out_of_zone_rejected(self):
        """Test that k_y outside the first Brillouin zone is rejected."""
        with self.assertRaises(InvalidArgumentError):
            chain_dispersion(1.5 * np.pi / 0.05, 0.05)
        with self.assertRaises(InvalidArgumentError):
            chain_dispersion(0.0, 0.0)
        with self.assertRaises(InvalidArgumentError):
            chain_decay_rate([0.0, 1.5 * np.pi / 0.05], 0.05)

    def test_finite_chain_follows_dispersion(self):
        """Test that N=50 chain modes lie on the dispersion curve."""
        chain = make_chain(50, 0.05)
        assignments = assign_spin_waves(chain, effective_modes(coupling_matrices(chain)))
        k0 = 2 * np.pi

        bulk = [a for a in assignments if abs(a.k_y - k0) > 0.3 * k0 and 5 < a.n < 45]
        finite = np.array([a.mode.shift for a in bulk])
        infinite = np.array([chain_dispersion(a.k_y, 0.05).real for a in bulk])
        self.assertGreater(len(bulk), 10)
        self.assertGreater(np.corrcoef(finite, infinite)[0, 1], 0.99)

        radiating = [a for a in assignments if a.k_y < k0 and a.overlap > 0.95]
        self.assertGreater(len(radiating), 0)
        for a in radiating:
            smeared = spectral_decay(chain, a.mode)
            self.assertLess(abs(a.mode.decay - smeared) / smeared, 0.1, msg=a.n)
        interior = [a for a in radiating if a.k_y < 0.7 * k0]
        self.assertGreater(len(interior), 0)
        for a in interior:
            point = -2.0 * chain_dispersion(a.k_y, 0.05).imag
            self.assertLess(abs(a.mode.decay - point) / point, 0.1, msg=a.n)

    def test_spectral_decay_is_exact_average(self):
        """Test that the momentum-averaged rate reproduces every eigenmode decay of a short chain."""
        chain = make_chain(12, 0.1)
        for mode in effective_modes(coupling_matrices(chain)):
            self.assertAlmostEqual(spectral_decay(chain, mode), mode.decay, delta=1e-6 * max(1.0, mode.decay))


class SpinWaveTestCase(BaseSimulationTestCase):
    """Test cases for spin-wave assignment and subradiant scaling."""

    def test_superradiant_mode_is_lowest_harmonic(self):
        """Test that the most superradiant mode of a dense chain is the n=1 standing wave."""
        chain = make_chain(8, 0.05)
        modes = effective_modes(coupling_matrices(chain))
        assignments = assign_spin_waves(chain, modes)

        self.assertEqual(assignments[0].n, 1)
        self.assertAlmostEqual(assignments[0].k_y, np.pi / (9 * 0.05), places=9)
        self.assertGreater(assignments[0].overlap, 0.8)

    def test_subradiant_scaling_exponent(self):
        """Test that the darkest decay falls off as a power of N."""
        exponent, decays = subradiant_scaling([10, 15, 20, 25, 30], 0.05)

        self.assertEqual(len(decays), 5)
        self.assertTrue(np.all(np.diff(decays) < 0))
        self.assertGreater(exponent, 1.5)

    def test_scaling_needs_two_lengths(self):
        """Test that one chain length is not enough for a fit."""
        with self.assertRaises(InvalidArgumentError):
            subradiant_scaling([10], 0.05)
