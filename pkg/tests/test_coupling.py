import math

import numpy as np
import pytest

from ionising import kernels
from ionising.coupling import (
    CouplingMatrix,
    DetuningSchedule,
    RabiMatrix,
    detuning_schedule,
    forward_coupling,
    naive_forward_coupling,
    response_tensor,
    single_tone_coupling,
    validity_check,
)
from ionising.crystal import ModeSpectrum, default_trap, equilibrium_positions, transverse_modes
from ionising.exceptions import ResonanceError, ScheduleCollisionError

from conftest import OMEGA_COM


def synthetic_modes(freqs, eta):
    freqs = np.asarray(freqs, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return ModeSpectrum(freqs, np.eye(freqs.size), eta)


class TestSchedule:
    def test_pairing_rule_exact(self, design5):
        _, _, modes, sched, _ = design5
        w = modes.frequencies
        expected = w + 0.03 * (w[0] - w[1])
        np.testing.assert_array_equal(sched.detunings, expected)
        assert sched.reference_gap == w[0] - w[1]

    def test_single_ion_rule(self):
        cfg = default_trap(1, OMEGA_COM)
        modes = transverse_modes(cfg, equilibrium_positions(cfg))
        sched = detuning_schedule(modes, 0.5)
        assert sched.detunings[0] == OMEGA_COM * (1.0 + 0.01 * 0.5)

    def test_f_s_out_of_range(self, design5):
        _, _, modes, _, _ = design5
        for bad in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(ValueError):
                detuning_schedule(modes, bad)

    def test_collision_inside_guard_band(self):
        # mu_3 = w_3 + f_s (w_1 - w_2) lands exactly on unpaired mode 2
        modes = synthetic_modes([10.0, 9.0, 8.5], 0.05 * np.ones((3, 3)))
        with pytest.raises(ScheduleCollisionError):
            detuning_schedule(modes, 0.5)

    def test_degenerate_top_gap(self):
        modes = synthetic_modes([10.0, 10.0, 8.0], 0.05 * np.ones((3, 3)))
        with pytest.raises(ResonanceError):
            detuning_schedule(modes, 0.1)


class TestResponseTensor:
    def test_hand_computed_two_ions(self):
        w = np.array([3.0, 2.0])
        eta = np.array([[0.1, 0.2], [0.3, -0.4]])
        modes = synthetic_modes(w, eta)
        sched = detuning_schedule(modes, 0.25)  # mu = [3.25, 2.25]
        f = response_tensor(modes, sched)
        for i in range(2):
            for j in range(2):
                for n in range(2):
                    expected = sum(
                        eta[i, m] * eta[j, m] * w[m] / (sched.detunings[n] ** 2 - w[m] ** 2)
                        for m in range(2)
                    )
                    assert f.f[i, j, n] == pytest.approx(expected, rel=1e-14)

    def test_exact_resonance_raises(self):
        modes = synthetic_modes([3.0, 2.0], 0.1 * np.ones((2, 2)))
        sched = DetuningSchedule(np.array([2.5, 2.0]), 0.5, 1.0)
        with pytest.raises(ResonanceError):
            response_tensor(modes, sched)

    def test_symmetric_in_ion_indices(self, design5):
        _, _, _, _, f = design5
        np.testing.assert_array_equal(f.f, np.transpose(f.f, (1, 0, 2)))


class TestForwardMap:
    def test_matches_naive_loops(self, rng):
        # optimized path vs the independent triple-loop oracle
        for n in (2, 4, 8):
            cfg = default_trap(n, OMEGA_COM)
            modes = transverse_modes(cfg, equilibrium_positions(cfg))
            sched = detuning_schedule(modes, 0.07)
            f = response_tensor(modes, sched)
            omega = RabiMatrix(1e5 * rng.standard_normal((n, n)))
            fast = forward_coupling(omega, f).j
            slow = naive_forward_coupling(omega, f).j
            scale = np.abs(slow).max()
            assert np.abs(fast - slow).max() <= 1e-12 * scale

    def test_quadratic_amplitude_scaling(self, design5, rng):
        _, _, _, _, f = design5
        om = rng.standard_normal((5, 5))
        j1 = forward_coupling(RabiMatrix(om), f).j
        j2 = forward_coupling(RabiMatrix(3.0 * om), f).j
        np.testing.assert_allclose(j2, 9.0 * j1, rtol=1e-12)

    def test_mode_sign_gauge_invariance(self, design5, rng):
        # eta_im eta_jm is even under per-mode sign flips: J identical bitwise
        _, _, modes, sched, f = design5
        signs = np.array([1.0, -1.0, 1.0, -1.0, -1.0])
        flipped = ModeSpectrum(
            modes.frequencies, modes.mode_matrix * signs, modes.lamb_dicke * signs
        )
        f_flip = response_tensor(flipped, sched)
        om = RabiMatrix(rng.standard_normal((5, 5)))
        np.testing.assert_array_equal(
            forward_coupling(om, f).j, forward_coupling(om, f_flip).j
        )

    def test_zero_diagonal_and_symmetry(self, design5, rng):
        _, _, _, _, f = design5
        j = forward_coupling(RabiMatrix(rng.standard_normal((5, 5))), f).j
        assert np.all(np.diag(j) == 0.0)
        np.testing.assert_array_equal(j, j.T)

    def test_shape_mismatch(self, design5):
        _, _, _, _, f = design5
        with pytest.raises(ValueError):
            forward_coupling(RabiMatrix(np.ones((4, 5))), f)

    def test_single_tone_hand_case(self):
        w = np.array([3.0, 2.0])
        eta = np.array([[0.1, 0.2], [0.3, -0.4]])
        modes = synthetic_modes(w, eta)
        mu = 3.5
        amps = np.array([2.0, -1.5])
        j = single_tone_coupling(amps, mu, modes).j
        f12 = sum(
            eta[0, m] * eta[1, m] * w[m] / (mu**2 - w[m] ** 2) for m in range(2)
        )
        assert j[0, 1] == pytest.approx(amps[0] * amps[1] * f12, rel=1e-14)

    def test_single_tone_resonance(self):
        modes = synthetic_modes([3.0, 2.0], 0.1 * np.ones((2, 2)))
        with pytest.raises(ResonanceError):
            single_tone_coupling(np.ones(2), 2.0, modes)


class TestValidity:
    def test_hand_computed_ratios(self):
        w = np.array([3.0, 2.0])
        eta = np.array([[0.1, 0.2], [0.3, -0.4]])
        modes = synthetic_modes(w, eta)
        sched = DetuningSchedule(np.array([3.5]), 0.5, 1.0)
        omega = RabiMatrix(np.array([[4.0], [5.0]]))
        report = validity_check(omega, sched, modes, threshold=0.1)
        ratios = np.abs(eta)[:, :, None] * np.array([[4.0], [5.0]])[:, None, :] / np.abs(
            w[:, None] - 3.5
        )
        assert report.max_ratio == pytest.approx(ratios.max(), rel=1e-14)
        assert not report.ok
        assert len(report.violations) == int((ratios > 0.1).sum())

    def test_weak_drive_passes(self, design5):
        _, _, modes, sched, _ = design5
        omega = RabiMatrix(np.full((5, 5), 1e-3))
        report = validity_check(omega, sched, modes)
        assert report.ok
        assert report.violations == ()


class TestContainers:
    def test_coupling_requires_symmetry(self):
        with pytest.raises(ValueError):
            CouplingMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))

    def test_coupling_requires_zero_diagonal(self):
        with pytest.raises(ValueError):
            CouplingMatrix(np.array([[1.0, 2.0], [2.0, 0.0]]))

    def test_rabi_total_amplitude(self):
        m = RabiMatrix(np.array([[1.0, -2.0], [3.0, -4.0]]))
        assert m.total_amplitude() == 10.0

    def test_arrays_are_frozen(self, design5):
        _, _, _, _, f = design5
        with pytest.raises(ValueError):
            f.f[0, 0, 0] = 1.0
