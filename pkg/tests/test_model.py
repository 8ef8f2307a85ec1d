import math

import numpy as np
import pytest

import linepin as lp
from linepin import InvalidParameter, UnsupportedSequence


class TestEmitterParams:
    def test_defaults(self):
        em = lp.EmitterParams(delta=3.0)
        assert em.gamma == 2.0

    @pytest.mark.parametrize("kwargs", [
        dict(delta=float("nan")),
        dict(delta=float("inf")),
        dict(delta=0.0, gamma=0.0),
        dict(delta=0.0, gamma=-1.0),
    ])
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(InvalidParameter):
            lp.EmitterParams(**kwargs)


class TestDiscretizeBath:
    def test_spec_example_l151(self):
        bath = lp.discretize_bath(151, 20.0, 2.0)
        assert bath.mode_spacing == pytest.approx(40.0 / 150.0)
        assert bath.coupling == pytest.approx(0.2913, abs=1e-4)
        # linewidth relation holds to near machine precision
        assert abs(2 * math.pi * bath.coupling**2 * bath.density_of_states - 2.0) < 1e-12

    def test_spec_example_l201(self):
        bath = lp.discretize_bath(201, 30.0, 2.0)
        assert bath.density_of_states == pytest.approx(200.0 / 60.0)

    def test_two_modes_at_endpoints(self):
        bath = lp.discretize_bath(2, 1.0, 2.0)
        assert np.allclose(bath.mode_frequencies, [-1.0, 1.0])

    def test_grid_is_uniform_and_increasing(self):
        bath = lp.discretize_bath(51, 10.0, 2.0)
        diffs = np.diff(bath.mode_frequencies)
        assert np.all(diffs > 0)
        assert np.allclose(diffs, bath.mode_spacing)

    @pytest.mark.parametrize("args", [(1, 20.0, 2.0), (151, -1.0, 2.0), (151, 20.0, 0.0)])
    def test_rejects_bad_sizes(self, args):
        with pytest.raises(InvalidParameter):
            lp.discretize_bath(*args)


class TestSequenceGenerators:
    def test_pdd_fig3_timings(self):
        seq = lp.make_pdd(0.2, 8)
        assert np.allclose(seq.timings, 0.2 * np.arange(1, 9))
        assert seq.rotation_angle == math.pi
        assert seq.pulse_width == 0.0

    def test_pdd_single_pulse(self):
        assert np.allclose(lp.make_pdd(1.0, 1).timings, [1.0])

    def test_pdd_last_timing(self):
        assert lp.make_pdd(0.4, 12).timings[-1] == pytest.approx(4.8)

    def test_cp_two_pulses(self):
        seq = lp.make_cp(0.2, 2)
        assert np.allclose(seq.timings, [0.1, 0.3])

    def test_cp_eight_pulses(self):
        assert np.allclose(lp.make_cp(0.2, 8).timings, np.arange(0.1, 1.6, 0.2))

    def test_cp_four_pulses(self):
        assert np.allclose(lp.make_cp(0.4, 4).timings, [0.2, 0.6, 1.0, 1.4])

    def test_cp_rejects_odd_count(self):
        with pytest.raises(InvalidParameter):
            lp.make_cp(0.2, 3)

    def test_udd_single_pulse_at_midpoint(self):
        assert lp.make_udd(2.0, 1).timings[0] == pytest.approx(1.0)

    def test_udd_symmetry(self):
        seq = lp.make_udd(1.6, 8)
        assert np.allclose(seq.timings + seq.timings[::-1], 1.6)

    def test_udd_count_and_range(self):
        seq = lp.make_udd(1.6, 8)
        assert seq.n_pulses == 8
        assert np.all(seq.timings > 0) and np.all(seq.timings < 1.6)

    @pytest.mark.parametrize("maker,args", [
        (lp.make_pdd, (-0.2, 8)),
        (lp.make_pdd, (0.2, 0)),
        (lp.make_udd, (-1.0, 8)),
    ])
    def test_generators_reject_bad_arguments(self, maker, args):
        with pytest.raises(InvalidParameter):
            maker(*args)

    @pytest.mark.parametrize("maker,args", [
        (lp.make_pdd, (0.2, 8)),
        (lp.make_cp, (0.2, 8)),
        (lp.make_udd, (1.6, 8)),
    ])
    def test_generators_deterministic_and_positive(self, maker, args):
        a, b = maker(*args), maker(*args)
        assert np.array_equal(a.timings, b.timings)
        assert np.all(a.timings > 0)
        assert np.all(np.diff(a.timings) > 0)


class TestPulseSequenceType:
    def test_rejects_overlapping_wide_pulses(self):
        with pytest.raises(InvalidParameter):
            lp.PulseSequence(timings=np.array([0.2, 0.24]), pulse_width=0.05)

    def test_drive_strength_from_width(self):
        seq = lp.PulseSequence(timings=np.array([0.2, 0.4]), pulse_width=0.05)
        assert seq.drive_strength == pytest.approx(math.pi / 0.05)

    def test_xi_windows_toggle_with_parity(self):
        seq = lp.make_pdd(0.2, 4)
        assert seq.xi1(0.1) == 1 and seq.xi2(0.1) == 0
        assert seq.xi1(0.3) == 0 and seq.xi2(0.3) == 1
        assert seq.xi1(0.5) == 1
        # a time exactly on a pulse belongs to the interval after it
        assert seq.xi1(0.2) == 0
        assert seq.xi1(0.4) == 1

    def test_rejects_unsorted_or_nonpositive(self):
        with pytest.raises(InvalidParameter):
            lp.PulseSequence(timings=np.array([0.4, 0.2]))
        with pytest.raises(InvalidParameter):
            lp.PulseSequence(timings=np.array([-0.1, 0.2]))


class TestDecomposeInterval:
    def test_same_interval(self):
        d = lp.decompose_interval(0.3, 0.05, lp.make_pdd(0.2, 8))
        assert d.m == 0

    def test_single_pulse_between(self):
        d = lp.decompose_interval(0.1, 0.25, lp.make_pdd(0.2, 8))
        assert d.m == 1
        assert d.tau1 == pytest.approx(0.1)
        assert d.tau2 == pytest.approx(0.15)
        assert d.big_m == 0

    def test_two_pulses_between(self):
        d = lp.decompose_interval(0.5, 0.45, lp.make_pdd(0.2, 8))
        assert d.m == 2
        assert d.tau1 == pytest.approx(0.1)
        assert d.tau2 == pytest.approx(0.15)
        assert d.big_m == 2

    @pytest.mark.parametrize("t", np.linspace(0.01, 1.55, 12))
    @pytest.mark.parametrize("theta", np.linspace(0.21, 1.4, 9))
    def test_roundtrip_reconstructs_theta(self, t, theta):
        tau = 0.2
        d = lp.decompose_interval(t, theta, lp.make_pdd(tau, 40))
        if d.m >= 1:
            assert d.tau1 + d.tau2 + (d.m - 1) * tau == pytest.approx(theta, abs=1e-12)
        assert d.big_m * tau + (tau - d.tau1) == pytest.approx(t, abs=1e-12)

    def test_boundary_time_counts_as_post_pulse(self):
        seq = lp.make_pdd(0.2, 8)
        d = lp.decompose_interval(3 * 0.2, 0.05, seq)
        assert d.big_m == 3
        # pulse exactly at the end of the window separates the instants
        d2 = lp.decompose_interval(0.1, 0.1, seq)
        assert d2.m == 1

    def test_requires_uniform_sequence(self):
        with pytest.raises(UnsupportedSequence):
            lp.decompose_interval(0.1, 0.2, lp.make_udd(1.6, 8))


class TestFrequencyGridAndSpectrum:
    def test_grid_requires_increasing_points(self):
        with pytest.raises(InvalidParameter):
            lp.FrequencyGrid(points=np.array([0.0, 0.0, 1.0]))

    def test_spectrum_rejects_negative_intensity(self):
        grid = lp.FrequencyGrid(points=np.array([0.0, 1.0]))
        with pytest.raises(InvalidParameter):
            lp.Spectrum(grid=grid, intensity=np.array([1.0, -0.5]),
                        observation_time=1.0, engine_tag=lp.EngineTag.HEISENBERG)

    def test_spectrum_rejects_length_mismatch(self):
        grid = lp.FrequencyGrid(points=np.array([0.0, 1.0]))
        with pytest.raises(InvalidParameter):
            lp.Spectrum(grid=grid, intensity=np.array([1.0]),
                        observation_time=1.0, engine_tag=lp.EngineTag.HEISENBERG)

    def test_unit_peak_normalization(self):
        grid = lp.FrequencyGrid(points=np.array([0.0, 1.0, 2.0]))
        sp = lp.Spectrum(grid=grid, intensity=np.array([1.0, 4.0, 2.0]),
                         observation_time=1.0, engine_tag=lp.EngineTag.HEISENBERG)
        assert sp.normalized_to_unit_peak().intensity.max() == 1.0
