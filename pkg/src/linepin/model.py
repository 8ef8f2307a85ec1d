"""Shared domain types: emitter, discretized photon bath, pulse sequences.

All quantities are dimensionless, in units where the natural linewidth is
Gamma = 2 by default (energy in units of Gamma/2, time in units of
2/Gamma).  Frequencies are measured in the frame rotating at the target
frequency, so omega = 0 is the frequency the control pulses pin the line
to, and the emitter sits at omega = delta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, UnsupportedSequence

# Relative tolerance used to decide that a time coincides with a pulse
# timing.  A time exactly on a pulse belongs to the interval AFTER the
# pulse (half-open intervals [k*tau, (k+1)*tau)).
_BOUNDARY_RTOL = 1e-9


class SequenceKind(enum.Enum):
    PDD = "pdd"
    CP = "cp"
    UDD = "udd"
    CUSTOM = "custom"


class EngineTag(enum.Enum):
    HEISENBERG = "heisenberg"
    MASTER_NUMERIC = "master-numeric"
    MASTER_CLOSED = "master-closed"
    ORACLE = "oracle"
    ENSEMBLE = "ensemble"


@dataclass(frozen=True)
class EmitterParams:
    """Two-level emitter: detuning ``delta`` from the target frequency and
    natural FWHM linewidth ``gamma`` (default 2, the unit convention)."""

    delta: float
    gamma: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.delta):
            raise InvalidParameter("delta must be finite")
        if not (self.gamma > 0) or not math.isfinite(self.gamma):
            raise InvalidParameter("gamma must be positive and finite")


@dataclass(frozen=True)
class PhotonBathSpec:
    """Uniform discretization of the photon continuum.

    ``n_modes`` frequencies on [-half_bandwidth, +half_bandwidth] with
    spacing eps = 2D/(L-1), density of states 1/eps, and a flat coupling
    ``g`` per mode.  The emergent linewidth is 2*pi*g^2/eps.
    """

    n_modes: int
    half_bandwidth: float
    coupling: float
    mode_frequencies: np.ndarray = field(repr=False)
    density_of_states: float

    def __post_init__(self):
        # Grid baths need L >= 2 (discretize_bath enforces it); a bare
        # single mode is allowed here for closed-system checks.
        if self.n_modes < 1:
            raise InvalidParameter("n_modes must be >= 1")
        if not (self.half_bandwidth > 0):
            raise InvalidParameter("half_bandwidth must be positive")
        if self.coupling < 0:
            raise InvalidParameter("coupling must be non-negative")
        freqs = np.asarray(self.mode_frequencies, dtype=float)
        if freqs.shape != (self.n_modes,):
            raise InvalidParameter("mode_frequencies length must equal n_modes")
        if not np.all(np.diff(freqs) > 0):
            raise InvalidParameter("mode_frequencies must be strictly increasing")
        object.__setattr__(self, "mode_frequencies", freqs)
        freqs.setflags(write=False)

    @property
    def mode_spacing(self) -> float:
        if self.n_modes == 1:
            return 2.0 * self.half_bandwidth
        return 2.0 * self.half_bandwidth / (self.n_modes - 1)

    @property
    def linewidth(self) -> float:
        """Gamma implied by the coupling, 2*pi*g^2*rho."""
        return 2.0 * math.pi * self.coupling**2 * self.density_of_states


def discretize_bath(n_modes: int, half_bandwidth: float, gamma: float) -> PhotonBathSpec:
    """Build the uniform mode grid whose Markovian decay rate equals ``gamma``.

    Parameters
    ----------
    n_modes : int
        Number of photon modes L, at least 2.
    half_bandwidth : float
        Half width D of the retained spectral window around the target
        frequency; modes run from -D to +D.
    gamma : float
        Desired free-emission FWHM; fixes g = sqrt(gamma*eps/(2*pi)).
    """
    if n_modes < 2:
        raise InvalidParameter("n_modes must be >= 2")
    if not (half_bandwidth > 0):
        raise InvalidParameter("half_bandwidth must be positive")
    if not (gamma > 0):
        raise InvalidParameter("gamma must be positive")
    eps = 2.0 * half_bandwidth / (n_modes - 1)
    freqs = -half_bandwidth + eps * np.arange(n_modes)
    g = math.sqrt(gamma * eps / (2.0 * math.pi))
    return PhotonBathSpec(
        n_modes=n_modes,
        half_bandwidth=half_bandwidth,
        coupling=g,
        mode_frequencies=freqs,
        density_of_states=1.0 / eps,
    )


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulse timings with a common rotation angle and width.

    ``timings`` mark the pulse start; an instantaneous pulse
    (``pulse_width == 0``) acts entirely at that instant, a finite pulse
    occupies [t_j, t_j + pulse_width] with constant Rabi drive
    ``drive_strength``.  Intervals between pulses are half-open: a time
    equal to a timing counts as after the pulse.
    """

    timings: np.ndarray
    rotation_angle: float = math.pi
    pulse_width: float = 0.0
    drive_strength: float | None = None
    kind: SequenceKind = SequenceKind.CUSTOM

    def __post_init__(self):
        t = np.asarray(self.timings, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise InvalidParameter("timings must be a non-empty 1-d sequence")
        if not np.all(t > 0):
            raise InvalidParameter("timings must all be positive")
        if not np.all(np.diff(t) > 0):
            raise InvalidParameter("timings must be strictly increasing")
        if self.pulse_width < 0:
            raise InvalidParameter("pulse_width must be >= 0")
        if self.pulse_width > 0:
            if np.any(np.diff(t) <= self.pulse_width):
                raise InvalidParameter(
                    "pulse_width larger than a pulse gap: pulses overlap"
                )
            if self.drive_strength is None:
                object.__setattr__(
                    self, "drive_strength", self.rotation_angle / self.pulse_width
                )
        object.__setattr__(self, "timings", t)
        t.setflags(write=False)

    @property
    def n_pulses(self) -> int:
        return int(self.timings.size)

    @property
    def tau(self) -> float:
        """Inter-pulse delay for a uniform (PDD) sequence."""
        if not self.is_uniform:
            raise UnsupportedSequence("tau is only defined for a uniform sequence")
        return float(self.timings[0])

    @property
    def is_uniform(self) -> bool:
        t = self.timings
        tau = t[0]
        return bool(np.allclose(t, tau * np.arange(1, t.size + 1), rtol=1e-12, atol=0))

    def pulses_up_to(self, t: float) -> int:
        """Number of pulses fired at or before time t (boundary: a pulse at
        exactly t has fired)."""
        tol = _BOUNDARY_RTOL * max(1.0, abs(t))
        return int(np.searchsorted(self.timings, t + tol, side="left"))

    def pulses_between(self, t0: float, t1: float) -> int:
        """Number of pulses in the half-open window (t0, t1]."""
        return self.pulses_up_to(t1) - self.pulses_up_to(t0)

    def xi1(self, t: float) -> int:
        """Toggling-frame filter: 1 on intervals following an even number of
        pulses, else 0."""
        return 1 if self.pulses_up_to(t) % 2 == 0 else 0

    def xi2(self, t: float) -> int:
        return 1 - self.xi1(t)


def make_pdd(tau: float, n_pulses: int) -> PulseSequence:
    """Periodic sequence [tau - pi]^N: pulses at tau, 2*tau, ..., N*tau."""
    if not (tau > 0):
        raise InvalidParameter("tau must be positive")
    if n_pulses < 1:
        raise InvalidParameter("n_pulses must be >= 1")
    timings = tau * np.arange(1, n_pulses + 1)
    return PulseSequence(timings=timings, kind=SequenceKind.PDD)


def make_cp(tau: float, n_pulses: int) -> PulseSequence:
    """Symmetrized Carr-Purcell [(tau/2) - pi - tau - pi - (tau/2)]^(N/2):
    pulses at tau/2, 3*tau/2, 5*tau/2, ...  Requires an even pulse count."""
    if not (tau > 0):
        raise InvalidParameter("tau must be positive")
    if n_pulses < 2 or n_pulses % 2 != 0:
        raise InvalidParameter("n_pulses must be a positive even integer")
    timings = tau * (np.arange(n_pulses) + 0.5)
    return PulseSequence(timings=timings, kind=SequenceKind.CP)


def make_udd(total_time: float, n_pulses: int) -> PulseSequence:
    """Uhrig sequence over [0, total_time].

    The timings follow the standard convention
    t_j = T * sin^2(pi*j / (2*N + 2)), j = 1..N, which places the pulses
    at zeros of a sine; they are symmetric about T/2.
    """
    if not (total_time > 0):
        raise InvalidParameter("total_time must be positive")
    if n_pulses < 1:
        raise InvalidParameter("n_pulses must be >= 1")
    j = np.arange(1, n_pulses + 1)
    timings = total_time * np.sin(math.pi * j / (2 * n_pulses + 2)) ** 2
    return PulseSequence(timings=timings, kind=SequenceKind.UDD)


@dataclass(frozen=True)
class PulseIntervalDecomposition:
    """Relative position of two instants t and t + theta within a uniform
    sequence.

    ``m`` pulses lie strictly between them, ``tau1`` is the time from t to
    the next pulse, ``tau2`` the time from the last intervening pulse to
    t + theta, and ``big_m`` counts pulses in (0, t].  For m >= 1,
    theta = tau1 + tau2 + (m-1)*tau and t = big_m*tau + (tau - tau1).
    A time exactly on a pulse belongs to the interval after it, so tau1
    takes values in (0, tau].
    """

    m: int
    tau1: float
    tau2: float
    big_m: int


def _snap_count(t: float, tau: float) -> int:
    """floor(t / tau) with times within _BOUNDARY_RTOL of a multiple of tau
    snapped onto it (and classified as post-pulse)."""
    x = t / tau
    n = math.floor(x)
    if x - n > 1.0 - _BOUNDARY_RTOL * max(1.0, abs(x)):
        n += 1
    return n


def decompose_interval(t: float, theta: float, seq: PulseSequence) -> PulseIntervalDecomposition:
    """Split the pair (t, t+theta) into the (m, tau1, tau2, big_m) bookkeeping
    used by the closed-form correlators.

    The sequence supplies the delay tau and must be uniform; the pulse
    train is treated as indefinitely periodic, which is the regime the
    closed forms describe.  Times within a relative 1e-9 of a pulse are
    snapped onto it and classified as post-pulse.
    """
    if t < 0 or theta < 0:
        raise InvalidParameter("t and theta must be non-negative")
    if seq.kind is not SequenceKind.PDD or not seq.is_uniform:
        raise UnsupportedSequence("decompose_interval requires a uniform PDD sequence")
    tau = seq.tau
    big_m = _snap_count(t, tau)
    m = _snap_count(t + theta, tau) - big_m
    tau1 = (big_m + 1) * tau - t
    if m >= 1:
        tau2 = (t + theta) - (big_m + m) * tau
    else:
        tau2 = theta
    return PulseIntervalDecomposition(m=m, tau1=tau1, tau2=tau2, big_m=big_m)


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing frequency samples, in the shared dimensionless
    units (zero is the target frequency)."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameter("grid points must be a non-empty 1-d sequence")
        if not np.all(np.diff(p) > 0):
            raise InvalidParameter("grid points must be strictly increasing")
        object.__setattr__(self, "points", p)
        p.setflags(write=False)

    @classmethod
    def linspace(cls, omega_min: float, omega_max: float, n: int) -> "FrequencyGrid":
        if not (omega_max > omega_min):
            raise InvalidParameter("omega_max must exceed omega_min")
        if n < 2:
            raise InvalidParameter("omega_points must be >= 2")
        return cls(points=np.linspace(omega_min, omega_max, n))


@dataclass(frozen=True)
class Spectrum:
    """Frequency grid plus non-negative intensity at one observation time."""

    grid: FrequencyGrid
    intensity: np.ndarray
    observation_time: float
    engine_tag: EngineTag
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        y = np.asarray(self.intensity, dtype=float)
        if y.shape != self.grid.points.shape:
            raise InvalidParameter("intensity length must match the grid")
        if np.any(y < 0):
            raise InvalidParameter("intensity must be non-negative")
        object.__setattr__(self, "intensity", y)
        y.setflags(write=False)

    def normalized_to_unit_peak(self) -> "Spectrum":
        peak = float(self.intensity.max())
        if peak <= 0:
            raise InvalidParameter("cannot normalize an all-zero spectrum")
        return Spectrum(
            grid=self.grid,
            intensity=self.intensity / peak,
            observation_time=self.observation_time,
            engine_tag=self.engine_tag,
            meta={**self.meta, "normalization": "unit-peak"},
        )


def clamp_intensity(values: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Zero out numerical undershoot; anything below -tol*scale is a bug."""
    values = np.asarray(values, dtype=float)
    scale = max(float(np.max(np.abs(values), initial=0.0)), 1e-300)
    if np.min(values, initial=0.0) < -tol * scale:
        raise InvalidParameter(
            f"intensity has a negative excursion beyond tolerance "
            f"(min {values.min():.3e}, scale {scale:.3e})"
        )
    return np.maximum(values, 0.0)
