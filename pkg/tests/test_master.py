import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

import linepin as lp
from linepin import master as ms
from linepin.errors import InvalidParameter, UnsupportedSequence

from conftest import unit_peak


def brute_force_free(rho0, dt, delta, gamma, n=20000):
    """Euler-free reference: integrate the Bloch equations with tiny steps."""
    y = rho0.as_matrix()
    h = dt / n
    for _ in range(n):
        k1 = _rhs(y, delta, gamma)
        k2 = _rhs(y + 0.5 * h * k1, delta, gamma)
        k3 = _rhs(y + 0.5 * h * k2, delta, gamma)
        k4 = _rhs(y + h * k3, delta, gamma)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _rhs(m, delta, gamma):
    out = np.empty_like(m)
    out[0, 0] = -gamma * m[0, 0]
    out[1, 1] = gamma * m[0, 0]
    out[0, 1] = (-1j * delta - gamma / 2) * m[0, 1]
    out[1, 0] = (1j * delta - gamma / 2) * m[1, 0]
    return out


class TestPropagateFree:
    def test_pure_decay(self):
        rho = ms.EmitterDensityMatrix.excited()
        out = ms.propagate_free(rho, 0.7, lp.EmitterParams(delta=0.0, gamma=2.0))
        assert out.rho_ee == pytest.approx(math.exp(-2 * 0.7), abs=1e-14)
        assert out.rho_gg == pytest.approx(1 - math.exp(-2 * 0.7), abs=1e-14)

    def test_zero_dt_is_identity(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.4, rho_gg=0.6, rho_eg=0.1 + 0.2j)
        out = ms.propagate_free(rho, 0.0, lp.EmitterParams(delta=3.0))
        assert out == rho

    def test_coherence_phase_example(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.5, rho_gg=0.5, rho_eg=0.5)
        out = ms.propagate_free(rho, 0.2, lp.EmitterParams(delta=3.0, gamma=2.0))
        assert out.rho_eg == pytest.approx(0.5 * cmath.exp(-0.2) * cmath.exp(-0.6j))

    def test_against_fine_step_integration(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.7, rho_gg=0.3, rho_eg=0.2 - 0.1j)
        em = lp.EmitterParams(delta=1.7, gamma=2.0)
        out = ms.propagate_free(rho, 0.9, em)
        ref = brute_force_free(rho, 0.9, em.delta, em.gamma)
        assert np.allclose(out.as_matrix(), ref, atol=1e-10)

    def test_rejects_negative_dt(self):
        with pytest.raises(InvalidParameter):
            ms.propagate_free(ms.EmitterDensityMatrix.excited(), -0.1,
                              lp.EmitterParams(delta=0.0))


class TestApplyIdealPulse:
    def test_population_swap(self):
        out = ms.apply_ideal_pulse(ms.EmitterDensityMatrix.excited())
        assert out.rho_gg == 1.0

    def test_twice_is_identity(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.3, rho_gg=0.7, rho_eg=0.1 + 0.05j)
        assert ms.apply_ideal_pulse(ms.apply_ideal_pulse(rho)) == rho

    def test_coherence_conjugation(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.5, rho_gg=0.5, rho_eg=0.2 + 0.3j)
        assert ms.apply_ideal_pulse(rho).rho_eg == pytest.approx(0.2 - 0.3j)


class TestPropagateDriven:
    def test_zero_drive_matches_free(self):
        rho = ms.EmitterDensityMatrix(rho_ee=0.8, rho_gg=0.2, rho_eg=0.1j)
        em = lp.EmitterParams(delta=2.0, gamma=2.0)
        a = ms.propagate_driven(rho, 0.3, em, omega_drive=5.0, on=False)
        b = ms.propagate_free(rho, 0.3, em)
        assert np.allclose(a.as_matrix(), b.as_matrix(), atol=1e-8)

    def test_pi_rotation(self):
        em = lp.EmitterParams(delta=0.0, gamma=1e-12)
        out = ms.propagate_driven(ms.EmitterDensityMatrix.excited(), 0.05, em,
                                  omega_drive=math.pi / 0.05)
        assert out.rho_gg == pytest.approx(1.0, abs=1e-8)

    def test_175_degree_rotation(self):
        em = lp.EmitterParams(delta=0.0, gamma=1e-12)
        angle = math.radians(175.0)
        out = ms.propagate_driven(ms.EmitterDensityMatrix.excited(), 0.05, em,
                                  omega_drive=angle / 0.05)
        assert out.rho_ee == pytest.approx(math.cos(math.radians(87.5)) ** 2, abs=1e-8)

    def test_against_exact_two_level_unitary(self):
        # Gamma ~ 0: the driven evolution reduces to a pure sigma_x rotation.
        em = lp.EmitterParams(delta=0.0, gamma=1e-13)
        omega, dt = 17.0, 0.11
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        u = expm(-1j * omega / 2 * sx * dt)
        rho0 = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
        expected = u @ rho0 @ u.conj().T
        start = ms.EmitterDensityMatrix.from_matrix(rho0)
        out = ms.propagate_driven(start, dt, em, omega_drive=omega)
        assert np.allclose(out.as_matrix(), expected, atol=1e-8)

    def test_trace_and_positivity_preserved(self):
        em = lp.EmitterParams(delta=1.0, gamma=2.0)
        rho = ms.EmitterDensityMatrix.excited()
        for _ in range(5):
            rho = ms.propagate_driven(rho, 0.05, em, omega_drive=10.0)
            rho = ms.propagate_free(rho, 0.1, em)
            rho = ms.apply_ideal_pulse(rho)
        assert rho.rho_ee + rho.rho_gg == pytest.approx(1.0, abs=1e-10)
        assert abs(rho.rho_eg) ** 2 <= rho.rho_ee * rho.rho_gg + 1e-10


class TestRhoExcited:
    def test_initial_value(self):
        assert ms.rho_excited(0.0, 0.2, 2.0) == pytest.approx(1.0)

    def test_free_decay_before_first_pulse(self):
        assert ms.rho_excited(0.15, 0.2, 2.0) == pytest.approx(math.exp(-2 * 0.15))

    def test_stationary_half_for_small_gamma_tau(self):
        assert ms.rho_excited(10.0, 0.01, 2.0) == pytest.approx(0.5, abs=2e-2)

    @pytest.mark.parametrize("t", np.linspace(0.0, 1.55, 25))
    def test_matches_piecewise_propagation(self, t):
        tau, gamma = 0.2, 2.0
        seq = lp.make_pdd(tau, 40)
        em = lp.EmitterParams(delta=1.3, gamma=gamma)
        rho = ms.evolve_matrix(ms.EmitterDensityMatrix.excited().as_matrix(),
                               0.0, t, seq, em)
        assert ms.rho_excited(t, tau, gamma) == pytest.approx(
            rho[0, 0].real, abs=1e-12)


class TestCorrF:
    def test_same_interval_formula(self):
        seq = lp.make_pdd(0.2, 8)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        got = ms.corr_f(0.25, 0.1, seq, em)
        assert got == pytest.approx(cmath.exp(-0.1) * cmath.exp(0.3j))

    @pytest.mark.parametrize("t,theta", [(0.1, 0.2), (0.3, 0.55), (0.05, 1.0)])
    def test_odd_separation_vanishes(self, t, theta):
        seq = lp.make_pdd(0.2, 8)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        d = lp.decompose_interval(t, theta, seq)
        if d.m % 2 == 1:
            assert ms.corr_f(t, theta, seq, em) == 0

    def test_even_separation_detuning_free(self):
        seq = lp.make_pdd(0.2, 8)
        em = lp.EmitterParams(delta=0.0, gamma=2.0)
        got = ms.corr_f(0.1, 0.4, seq, em)
        assert got == pytest.approx(math.exp(-0.4))

    def test_rejects_nonuniform_sequences(self):
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        with pytest.raises(UnsupportedSequence):
            ms.corr_f(0.1, 0.2, lp.make_udd(1.6, 8), em)


class TestCorrNumeric:
    def test_theta_zero_returns_population(self):
        seq = lp.make_pdd(0.2, 8)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        got = ms.corr_numeric(0.5, 0.0, seq, em)
        assert got.imag == pytest.approx(0.0, abs=1e-14)
        assert got.real == pytest.approx(ms.rho_excited(0.5, 0.2, 2.0), abs=1e-12)

    def test_matches_closed_form_product(self):
        seq = lp.make_pdd(0.2, 8)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        got = ms.corr_numeric(0.5, 0.45, seq, em)
        want = ms.rho_excited(0.5, 0.2, 2.0) * ms.corr_f(0.5, 0.45, seq, em)
        assert got == pytest.approx(want, abs=1e-12)

    def test_no_pulses_free_decay(self):
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        got = ms.corr_numeric(0.7, 0.4, None, em)
        want = math.exp(-2 * 0.7) * cmath.exp((3j - 1) * 0.4)
        assert got == pytest.approx(want, abs=1e-12)

    @pytest.mark.parametrize("t", np.linspace(0.03, 1.9, 10))
    @pytest.mark.parametrize("theta", np.linspace(0.02, 1.2, 5))
    def test_factorization_on_lattice(self, t, theta):
        seq = lp.make_pdd(0.2, 12)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        got = ms.corr_numeric(t, theta, seq, em)
        want = complex(ms.phi_closed(t, theta, seq, em))
        assert got == pytest.approx(want, abs=1e-8)

    @pytest.mark.parametrize("t,theta", [(0.37, 0.53), (0.11, 0.9), (0.73, 0.21)])
    def test_hermiticity_partner(self, t, theta):
        # <s+(t) s-(t+theta)>, regressed with the deviation rho(t) sigma^+,
        # must conjugate phi(t, theta).
        seq = lp.make_pdd(0.2, 12)
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        rho_t = ms.evolve_matrix(ms.EmitterDensityMatrix.excited().as_matrix(),
                                 0.0, t, seq, em)
        sigma_plus = np.array([[0, 1], [0, 0]], dtype=complex)
        sigma_minus = sigma_plus.T
        dev = rho_t @ sigma_plus
        evolved = ms.evolve_matrix(dev, t, t + theta, seq, em)
        backward = complex(np.trace(sigma_minus @ evolved))
        forward = ms.corr_numeric(t, theta, seq, em)
        assert backward == pytest.approx(forward.conjugate(), abs=1e-10)

    def test_driven_pulses_converge_to_ideal(self):
        # Narrow strong pulses approach the instantaneous-pi limit.
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        ideal = lp.make_pdd(0.2, 4)
        width = 1e-4
        driven = lp.PulseSequence(timings=ideal.timings, pulse_width=width)
        got = ms.corr_numeric(0.3, 0.45, driven, em)
        want = ms.corr_numeric(0.3, 0.45, ideal, em)
        assert got == pytest.approx(want, abs=5e-4)


class TestSpectrumNumeric:
    def test_free_decay_lorentzian(self):
        from scipy.optimize import curve_fit
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        grid = lp.FrequencyGrid.linspace(-6.0, 12.0, 181)
        sp = ms.spectrum_numeric(grid, 7.0, None, em)

        def lor(w, amp, c, hw):
            return amp / ((w - c) ** 2 + hw**2)

        popt, _ = curve_fit(lor, grid.points, sp.intensity, p0=[1.0, 3.0, 1.0])
        assert popt[1] == pytest.approx(3.0, abs=0.05)
        assert 2 * abs(popt[2]) == pytest.approx(2.0, rel=0.03)

    def test_intensity_nonnegative_and_real(self, emitter_d3):
        grid = lp.FrequencyGrid.linspace(-20, 20, 161)
        sp = ms.spectrum_numeric(grid, 1.8, lp.make_pdd(0.2, 8), emitter_d3)
        assert np.all(sp.intensity >= 0)

    def test_argmax_pinned_for_small_tau_delta(self):
        # tau*delta = 0.6
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        grid = lp.FrequencyGrid.linspace(-20, 20, 301)
        sp = ms.spectrum_numeric(grid, 1.8, lp.make_pdd(0.2, 8), em)
        step = grid.points[1] - grid.points[0]
        assert abs(grid.points[np.argmax(sp.intensity)]) <= step + 1e-12

    def test_cp_close_to_pdd_in_core(self, emitter_d3):
        grid = lp.FrequencyGrid.linspace(-2.0, 2.0, 41)
        pdd = ms.spectrum_numeric(grid, 1.6, lp.make_pdd(0.2, 8), emitter_d3)
        cp = ms.spectrum_numeric(grid, 1.6, lp.make_cp(0.2, 8), emitter_d3)
        diff = np.abs(unit_peak(pdd) - unit_peak(cp))
        assert np.max(diff) <= 0.10

    def test_large_gamma_concentrates_before_first_pulse(self):
        # Emission is over long before the pulses arrive, so the controlled
        # spectrum collapses onto the control-free one.
        em = lp.EmitterParams(delta=3.0, gamma=50.0)
        grid = lp.FrequencyGrid.linspace(-60, 70, 131)
        pulsed = ms.spectrum_numeric(grid, 1.0, lp.make_pdd(0.2, 4), em)
        free = ms.spectrum_numeric(grid, 1.0, None, em)
        assert np.max(np.abs(unit_peak(pulsed) - unit_peak(free))) < 0.02

    def test_rejects_bad_total_time(self, emitter_d3):
        grid = lp.FrequencyGrid.linspace(-1, 1, 11)
        with pytest.raises(InvalidParameter):
            ms.spectrum_numeric(grid, 0.0, None, emitter_d3)


class TestClosedForm:
    def test_matches_numeric_at_k20(self, emitter_d3):
        # Spec reference point: tau = 0.2, K = 20 (T = 8), unit-peak curves
        # agree within 3 percent pointwise.
        grid = lp.FrequencyGrid.linspace(-20, 20, 161)
        closed = ms.spectrum_closed_form(grid, 20, 0.2, emitter_d3)
        seq = lp.make_pdd(0.2, 40)
        numeric = ms.spectrum_numeric(grid, 8.0, seq, emitter_d3)
        assert np.max(np.abs(unit_peak(closed) - unit_peak(numeric))) < 0.03

    def test_small_tau_lorentzian_limit(self):
        em = lp.EmitterParams(delta=0.5, gamma=2.0)
        grid = lp.FrequencyGrid.linspace(-2.0, 2.0, 81)
        closed = ms.spectrum_closed_form(grid, 1000, 0.01, em)
        lor = ms.lorentzian_limit(grid.points, 1000, 0.01, 2.0)
        assert np.max(np.abs(closed.intensity - lor) / lor) < 0.05

    def test_linear_in_k(self):
        em = lp.EmitterParams(delta=0.5, gamma=2.0)
        v1 = ms.closed_form_value(np.array([0.3]), 500, 0.01, em)[0]
        v2 = ms.closed_form_value(np.array([0.3]), 1000, 0.01, em)[0]
        assert v2 / v1 == pytest.approx(2.0, rel=0.05)

    def test_params_bundle_invariants(self):
        em = lp.EmitterParams(delta=3.0, gamma=2.0)
        params = ms.ClosedFormSpectrumParams.at(1.0, em, K=5)
        assert params.gamma0c == 1j * (1.0 - 3.0) + 1.0
        assert params.gamma3 == 1j * 1.0 + 1.0
        assert params.gamma4 == 1j * (1.0 - 3.0) - 1.0
        with pytest.raises(InvalidParameter):
            ms.ClosedFormSpectrumParams.at(1.0, em, K=0)


class TestLorentzianLimit:
    def test_peak_value(self):
        assert ms.lorentzian_limit(0.0, 10, 0.2, 2.0) == pytest.approx(10 * 0.2 / 2.0)

    def test_half_width(self):
        peak = ms.lorentzian_limit(0.0, 10, 0.2, 2.0)
        assert ms.lorentzian_limit(1.0, 10, 0.2, 2.0) == pytest.approx(peak / 2)
        assert ms.lorentzian_limit(-1.0, 10, 0.2, 2.0) == pytest.approx(peak / 2)

    def test_doubling_k(self):
        a = ms.lorentzian_limit(0.7, 10, 0.2, 2.0)
        b = ms.lorentzian_limit(0.7, 20, 0.2, 2.0)
        assert b == pytest.approx(2 * a)


class TestCorrelationRecord:
    def test_accepts_consistent_factorization(self):
        rec = ms.CorrelationRecord(t=0.5, theta=0.1, phi=0.25 + 0j, rho_e=0.5,
                                   f=0.5 + 0j)
        assert rec.phi == rec.rho_e * rec.f

    def test_rejects_inconsistent_factorization(self):
        with pytest.raises(InvalidParameter):
            ms.CorrelationRecord(t=0.5, theta=0.1, phi=0.3 + 0j, rho_e=0.5,
                                 f=0.5 + 0j)

    def test_rejects_oversized_coherence(self):
        with pytest.raises(InvalidParameter):
            ms.CorrelationRecord(t=0.5, theta=0.1, phi=0.6 + 0j, rho_e=0.5,
                                 f=1.2 + 0j)
