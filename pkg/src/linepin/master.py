"""Reduced-density-matrix engine: piecewise-exact evolution, quantum
regression, and the detector-integral spectrum.

Between pulses the emitter obeys

    d(rho_ee)/dt = -Gamma rho_ee
    d(rho_gg)/dt = +Gamma rho_ee
    d(rho_eg)/dt = (-i Delta - Gamma/2) rho_eg
    d(rho_ge)/dt = (+i Delta - Gamma/2) rho_ge

in the frame rotating at the target frequency; an ideal pulse conjugates
with sigma_x.  The same linear map propagates non-Hermitian deviation
operators, which is what the quantum-regression correlators use.  The
spectrum is the detector excitation probability

    P(omega, T) = 2 A^2 Re int_0^T dt int_0^(T-t) dtheta
                  phi(t, theta) exp(-i omega theta)

with phi(t, theta) = <sigma^+(t+theta) sigma^-(t)>.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NumericFailure, UnsupportedSequence
from .model import (
    EmitterParams,
    EngineTag,
    FrequencyGrid,
    PulseSequence,
    SequenceKind,
    Spectrum,
    _snap_count,
    clamp_intensity,
)

_IDEAL_ANGLE_TOL = 1e-12
_DRIVEN_STEPS_PER_PULSE = 200


@dataclass(frozen=True)
class EmitterDensityMatrix:
    """Physical emitter state: populations plus the e-g coherence."""

    rho_ee: float
    rho_gg: float
    rho_eg: complex = 0j

    def __post_init__(self):
        if abs(self.rho_ee + self.rho_gg - 1.0) > 1e-12:
            raise InvalidParameter("rho_ee + rho_gg must equal 1")
        if not (-1e-12 <= self.rho_ee <= 1 + 1e-12):
            raise InvalidParameter("rho_ee must lie in [0, 1]")
        if abs(self.rho_eg) ** 2 > self.rho_ee * self.rho_gg + 1e-12:
            raise InvalidParameter("coherence violates positivity")

    @property
    def rho_ge(self) -> complex:
        return self.rho_eg.conjugate()

    def as_matrix(self) -> np.ndarray:
        """2x2 array in the (e, g) basis."""
        return np.array(
            [[self.rho_ee, self.rho_eg], [self.rho_ge, self.rho_gg]], dtype=complex
        )

    @classmethod
    def excited(cls) -> "EmitterDensityMatrix":
        return cls(rho_ee=1.0, rho_gg=0.0)

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "EmitterDensityMatrix":
        return cls(
            rho_ee=float(mat[0, 0].real),
            rho_gg=float(mat[1, 1].real),
            rho_eg=complex(mat[0, 1]),
        )


@dataclass(frozen=True)
class CorrelationRecord:
    """One two-time correlator sample phi(t, theta) = rho_e * f."""

    t: float
    theta: float
    phi: complex
    rho_e: float
    f: complex

    def __post_init__(self):
        if abs(self.phi - self.rho_e * self.f) > 1e-12:
            raise InvalidParameter("phi must factor as rho_e * f")
        if abs(self.f) > 1.0 + 1e-12:
            raise InvalidParameter("|f| cannot exceed 1")


@dataclass(frozen=True)
class ClosedFormSpectrumParams:
    """Per-frequency coefficients of the long-time closed-form spectrum."""

    gamma0c: complex
    gamma3: complex
    gamma4: complex
    K: int
    normalization: float = 1.0

    def __post_init__(self):
        if self.K < 1:
            raise InvalidParameter("K must be >= 1")
        if not (self.gamma3.real > 0):
            raise InvalidParameter("Re gamma3 = Gamma/2 must be positive")

    @classmethod
    def at(cls, omega: float, emitter: EmitterParams, K: int,
           normalization: float = 1.0) -> "ClosedFormSpectrumParams":
        d, g = emitter.delta, emitter.gamma
        return cls(
            gamma0c=1j * (omega - d) + g / 2,
            gamma3=1j * omega + g / 2,
            gamma4=1j * (omega - d) - g / 2,
            K=K,
            normalization=normalization,
        )


# ---------------------------------------------------------------------------
# Elementary maps on stacked 2x2 matrices (index 0 = excited, 1 = ground).
# They are linear, so they apply equally to density matrices and to the
# deviation operators of the quantum regression theorem.

def free_map(mat: np.ndarray, dt: float, delta: float, gamma: float) -> np.ndarray:
    """Closed-form free evolution of (..., 2, 2) matrices over dt >= 0."""
    out = np.array(mat, dtype=complex, copy=True)
    decay = math.exp(-gamma * dt)
    coh = cmath.exp((-1j * delta - gamma / 2) * dt)
    ee = out[..., 0, 0].copy()
    out[..., 0, 0] = ee * decay
    out[..., 1, 1] = out[..., 1, 1] + ee * (1.0 - decay)
    out[..., 0, 1] = out[..., 0, 1] * coh
    out[..., 1, 0] = out[..., 1, 0] * coh.conjugate()
    return out


def rotation_map(mat: np.ndarray, angle: float) -> np.ndarray:
    """Instantaneous rotation exp(-i*angle/2*sigma_x): mat -> U mat U^dag."""
    c = math.cos(angle / 2)
    s = -1j * math.sin(angle / 2)
    u = np.array([[c, s], [s, c]], dtype=complex)
    return np.einsum("ab,...bc,cd->...ad", u, np.asarray(mat, dtype=complex),
                     u.conj().T)


def pulse_map(mat: np.ndarray) -> np.ndarray:
    """Ideal pi pulse: conjugation by sigma_x, i.e. swap e <-> g."""
    out = np.empty_like(np.asarray(mat, dtype=complex))
    out[..., 0, 0] = mat[..., 1, 1]
    out[..., 1, 1] = mat[..., 0, 0]
    out[..., 0, 1] = mat[..., 1, 0]
    out[..., 1, 0] = mat[..., 0, 1]
    return out


def _lindblad_rhs(mat, delta, gamma, omega):
    ee = mat[..., 0, 0]
    gg = mat[..., 1, 1]
    eg = mat[..., 0, 1]
    ge = mat[..., 1, 0]
    out = np.empty_like(mat)
    half_om = 0.5j * omega
    out[..., 0, 0] = -gamma * ee - half_om * (ge - eg)
    out[..., 1, 1] = gamma * ee - half_om * (eg - ge)
    out[..., 0, 1] = (-1j * delta - gamma / 2) * eg - half_om * (gg - ee)
    out[..., 1, 0] = (1j * delta - gamma / 2) * ge - half_om * (ee - gg)
    return out


def driven_map(mat: np.ndarray, dt: float, delta: float, gamma: float,
               omega_drive: float, max_step: float) -> np.ndarray:
    """Fixed-step RK4 integration of the driven Bloch equations over dt."""
    if dt <= 0:
        return np.array(mat, dtype=complex, copy=True)
    if max_step <= 0:
        raise NumericFailure("driven-pulse step size underflow",
                             {"max_step": max_step})
    n = max(1, int(math.ceil(dt / max_step)))
    h = dt / n
    y = np.array(mat, dtype=complex, copy=True)
    for _ in range(n):
        k1 = _lindblad_rhs(y, delta, gamma, omega_drive)
        k2 = _lindblad_rhs(y + 0.5 * h * k1, delta, gamma, omega_drive)
        k3 = _lindblad_rhs(y + 0.5 * h * k2, delta, gamma, omega_drive)
        k4 = _lindblad_rhs(y + h * k3, delta, gamma, omega_drive)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


# ---------------------------------------------------------------------------
# Sequence walking.

def _drive_windows(seq: PulseSequence):
    """(start, end) of every driven window; empty for instantaneous pulses."""
    if seq.pulse_width == 0:
        return []
    return [(t0, t0 + seq.pulse_width) for t0 in seq.timings]


def evolve_matrix(mat: np.ndarray, t0: float, t1: float, seq: PulseSequence | None,
                  emitter: EmitterParams) -> np.ndarray:
    """Propagate (..., 2, 2) matrices from absolute time t0 to t1 under the
    free Lindbladian interrupted by the sequence's pulses.

    Pulses at exactly t0 are assumed already applied (a time on a pulse
    belongs to the interval after it); a pulse at exactly t1 is applied.
    """
    if t1 < t0:
        raise InvalidParameter("t1 must be >= t0")
    d, g = emitter.delta, emitter.gamma
    if seq is None or seq.n_pulses == 0:
        return free_map(mat, t1 - t0, d, g)

    if seq.pulse_width == 0:
        n0, n1 = seq.pulses_up_to(t0), seq.pulses_up_to(t1)
        t = t0
        out = np.asarray(mat, dtype=complex)
        for j in range(n0, n1):
            tp = float(seq.timings[j])
            out = free_map(out, max(tp - t, 0.0), d, g)
            if abs(seq.rotation_angle - math.pi) <= _IDEAL_ANGLE_TOL:
                out = pulse_map(out)
            else:
                out = rotation_map(out, seq.rotation_angle)
            t = tp
        return free_map(out, max(t1 - t, 0.0), d, g)

    # Finite-width pulses: tile [t0, t1] into free and driven stretches.
    omega = seq.drive_strength
    max_step = seq.pulse_width / _DRIVEN_STEPS_PER_PULSE
    out = np.asarray(mat, dtype=complex)
    t = t0
    for start, end in _drive_windows(seq):
        if end <= t or start >= t1:
            continue
        a, b = max(start, t), min(end, t1)
        out = free_map(out, max(a - t, 0.0), d, g)
        out = driven_map(out, b - a, d, g, omega, max_step)
        t = b
    return free_map(out, max(t1 - t, 0.0), d, g)


# ---------------------------------------------------------------------------
# Public single-step operations.

def propagate_free(rho: EmitterDensityMatrix, dt: float,
                   emitter: EmitterParams) -> EmitterDensityMatrix:
    """Exact free evolution of a physical state over dt >= 0."""
    if dt < 0:
        raise InvalidParameter("dt must be >= 0")
    mat = free_map(rho.as_matrix(), dt, emitter.delta, emitter.gamma)
    return EmitterDensityMatrix.from_matrix(mat)


def apply_ideal_pulse(rho: EmitterDensityMatrix) -> EmitterDensityMatrix:
    """Ideal instantaneous pi pulse: swap populations, conjugate coherence."""
    return EmitterDensityMatrix.from_matrix(pulse_map(rho.as_matrix()))


def propagate_driven(rho: EmitterDensityMatrix, dt: float, emitter: EmitterParams,
                     omega_drive: float, on: bool = True) -> EmitterDensityMatrix:
    """Integrate the optical Bloch equations with a resonant drive of Rabi
    frequency omega_drive for a duration dt (RK4, step <= dt/200)."""
    if dt <= 0:
        raise InvalidParameter("dt must be positive")
    omega = omega_drive if on else 0.0
    mat = driven_map(rho.as_matrix(), dt, emitter.delta, emitter.gamma, omega,
                     dt / _DRIVEN_STEPS_PER_PULSE)
    return EmitterDensityMatrix.from_matrix(mat)


# ---------------------------------------------------------------------------
# Closed-form correlators for ideal PDD.

def rho_excited(t: float, tau: float, gamma: float) -> float:
    """Excited population under an ongoing ideal PDD train.

    With t = M*tau + (tau - tau1) this is the closed form
    [1 - (-1)^(M+1) exp(-Gamma tau (M+1))] / (1 + exp(-Gamma tau))
    * exp(-Gamma (tau - tau1)).
    """
    if t < 0:
        raise InvalidParameter("t must be >= 0")
    if not (tau > 0):
        raise InvalidParameter("tau must be positive")
    big_m = _snap_count(t, tau)
    since_pulse = t - big_m * tau
    num = 1.0 - (-1.0) ** (big_m + 1) * math.exp(-gamma * tau * (big_m + 1))
    return num / (1.0 + math.exp(-gamma * tau)) * math.exp(-gamma * since_pulse)


def _require_ideal_pdd(seq: PulseSequence):
    if (
        seq.kind is not SequenceKind.PDD
        or not seq.is_uniform
        or seq.pulse_width != 0
        or abs(seq.rotation_angle - math.pi) > _IDEAL_ANGLE_TOL
    ):
        raise UnsupportedSequence(
            "closed-form correlators require an ideal instantaneous pi PDD "
            "sequence; use corr_numeric instead"
        )


def corr_f(t: float, theta: float, seq: PulseSequence,
           emitter: EmitterParams) -> complex:
    """Coherence factor f(t, theta) for an ideal PDD sequence.

    Zero pulses in between: exp(-Gamma theta/2) exp(i Delta theta); an odd
    number: 0; an even number: exp(-Gamma theta/2)
    exp(i Delta (tau1 + tau2 - tau)).  Pulse counting uses the actual
    (finite) sequence, so times past the last pulse are handled exactly.
    """
    _require_ideal_pdd(seq)
    if theta < 0:
        raise InvalidParameter("theta must be >= 0")
    g, d = emitter.gamma, emitter.delta
    m = seq.pulses_between(t, t + theta)
    envelope = math.exp(-g * theta / 2)
    if m == 0:
        return envelope * cmath.exp(1j * d * theta)
    if m % 2 == 1:
        return 0j
    tau = seq.tau
    fired = seq.pulses_up_to(t)
    tau1 = (fired + 1) * tau - t
    tau2 = (t + theta) - float(seq.timings[fired + m - 1])
    return envelope * cmath.exp(1j * d * (tau1 + tau2 - tau))


def _rho_excited_seq(t, seq, gamma):
    """rho_e(t) for a finite ideal PDD train (free decay past the last pulse).

    Vectorized over t.
    """
    tau = seq.tau
    n_p = seq.n_pulses
    t = np.asarray(t, dtype=float)
    big_m = np.minimum(np.floor(t / tau + 1e-9).astype(int), n_p)
    since = t - big_m * tau
    num = 1.0 - (-1.0) ** (big_m + 1) * np.exp(-gamma * tau * (big_m + 1))
    return num / (1.0 + math.exp(-gamma * tau)) * np.exp(-gamma * since)


def _corr_f_grid(t, theta, seq, emitter):
    """Vectorized corr_f over broadcastable t, theta arrays."""
    g, d = emitter.gamma, emitter.delta
    tau = seq.tau
    n_p = seq.n_pulses
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    fired0 = np.minimum(np.floor(t / tau + 1e-9).astype(int), n_p)
    fired1 = np.minimum(np.floor((t + theta) / tau + 1e-9).astype(int), n_p)
    m = fired1 - fired0
    envelope = np.exp(-g * theta / 2)
    tau1 = (fired0 + 1) * tau - t
    tau2 = (t + theta) - fired1 * tau
    phase = np.where(m == 0, d * theta, d * (tau1 + tau2 - tau))
    f = envelope * np.exp(1j * phase)
    return np.where(m % 2 == 1, 0j, f)


def phi_closed(t, theta, seq: PulseSequence, emitter: EmitterParams):
    """Vectorized phi(t, theta) = rho_e(t) f(t, theta) for ideal PDD."""
    _require_ideal_pdd(seq)
    return _rho_excited_seq(t, seq, emitter.gamma) * _corr_f_grid(
        t, theta, seq, emitter
    )


# ---------------------------------------------------------------------------
# Quantum regression.

def corr_numeric(t: float, theta: float, seq: PulseSequence | None,
                 emitter: EmitterParams) -> complex:
    """phi(t, theta) = <sigma^+(t+theta) sigma^-(t)> by quantum regression.

    Works for any sequence (or none), ideal or driven pulses: evolve the
    state to t, form the deviation operator sigma^- rho(t), propagate it
    with the same pulse-interrupted superoperator for theta, and read off
    the ge component.
    """
    if t < 0 or theta < 0:
        raise InvalidParameter("t and theta must be >= 0")
    rho0 = EmitterDensityMatrix.excited().as_matrix()
    rho_t = evolve_matrix(rho0, 0.0, t, seq, emitter)
    # sigma^- rho: only the ge and gg components survive.
    dev = np.zeros((2, 2), dtype=complex)
    dev[1, 0] = rho_t[0, 0]
    dev[1, 1] = rho_t[0, 1]
    dev = evolve_matrix(dev, t, t + theta, seq, emitter)
    return complex(dev[1, 0])


def _phi_table(seq, emitter, t_nodes, theta_lists):
    """phi at scattered regression nodes, sharing one timeline walk.

    t_nodes must be sorted ascending; theta_lists[i] is the sorted array of
    offsets for t_nodes[i].  Returns a list of complex arrays.
    """
    rho0 = EmitterDensityMatrix.excited().as_matrix()
    # Pass 1: density matrix at each t node.
    rho_at = []
    rho, t_prev = rho0, 0.0
    for t in t_nodes:
        rho = evolve_matrix(rho, t_prev, t, seq, emitter)
        rho_at.append(rho)
        t_prev = t

    # Pass 2: batch the deviation operators along the absolute timeline.
    events = []  # (time, priority, walk index)
    for i, (t, thetas) in enumerate(zip(t_nodes, theta_lists)):
        events.append((t, 0, i))
        for j, th in enumerate(np.atleast_1d(thetas)):
            events.append((t + th, 1, (i, j)))
    events.sort(key=lambda e: (e[0], e[1]))

    n = len(t_nodes)
    act = np.zeros((n, 2, 2), dtype=complex)
    active = np.zeros(n, dtype=bool)
    out = [np.zeros(len(np.atleast_1d(th)), dtype=complex) for th in theta_lists]
    t_now = 0.0
    for time, prio, payload in events:
        if time > t_now:
            if active.any():
                act[active] = evolve_matrix(act[active], t_now, time, seq, emitter)
            t_now = time
        if prio == 0:
            i = payload
            act[i, 1, 0] = rho_at[i][0, 0]
            act[i, 1, 1] = rho_at[i][0, 1]
            act[i, 0, 0] = act[i, 0, 1] = 0.0
            active[i] = True
        else:
            i, j = payload
            out[i][j] = act[i, 1, 0]
    return out


# ---------------------------------------------------------------------------
# Spectra.

def _cell_edges(breaks, max_len):
    """Subdivide [breaks] so no cell exceeds max_len."""
    edges = [breaks[0]]
    for b in breaks[1:]:
        prev = edges[-1]
        n_sub = max(1, int(math.ceil((b - prev) / max_len - 1e-12)))
        for k in range(1, n_sub + 1):
            edges.append(prev + (b - prev) * k / n_sub)
    return np.array(edges)


_GL_CACHE: dict = {}


def _gl_nodes(a, b, order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    x, w = _GL_CACHE[order]
    half = (b - a) / 2
    return a + half * (x + 1), half * w


def _quadrature_nodes(seq, total_time, order, max_len):
    """(t, theta, weight) triples for the triangular (t, theta) domain,
    split on pulse boundaries in both absolute times."""
    breaks = {0.0, float(total_time)}
    if seq is not None:
        for tp in seq.timings:
            if 0.0 < tp < total_time:
                breaks.add(float(tp))
            if seq.pulse_width > 0 and 0.0 < tp + seq.pulse_width < total_time:
                breaks.add(float(tp + seq.pulse_width))
    edges = _cell_edges(sorted(breaks), max_len)

    ts, thetas, weights = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        t_nodes, t_w = _gl_nodes(a, b, order)
        for t, wt in zip(t_nodes, t_w):
            sub = edges[edges > t]
            th_edges = np.concatenate(([t], sub)) - t
            for c, dnext in zip(th_edges[:-1], th_edges[1:]):
                th_nodes, th_w = _gl_nodes(c, dnext, order)
                ts.append(np.full(order, t))
                thetas.append(th_nodes)
                weights.append(wt * th_w)
    return (np.concatenate(ts), np.concatenate(thetas), np.concatenate(weights))


def _phi_at_nodes(seq, emitter, t_flat, theta_flat):
    if seq is None:
        g, d = emitter.gamma, emitter.delta
        return np.exp(-g * t_flat) * np.exp((1j * d - g / 2) * theta_flat)
    try:
        return phi_closed(t_flat, theta_flat, seq, emitter)
    except UnsupportedSequence:
        pass
    order = np.argsort(t_flat, kind="stable")
    t_sorted = t_flat[order]
    uniq, starts = np.unique(t_sorted, return_index=True)
    groups = np.split(order, starts[1:])
    theta_lists, perms = [], []
    for idx in groups:
        th = theta_flat[idx]
        perm = np.argsort(th, kind="stable")
        theta_lists.append(th[perm])
        perms.append(idx[perm])
    tables = _phi_table(seq, emitter, list(uniq), theta_lists)
    phi = np.empty(t_flat.shape, dtype=complex)
    for idx, vals in zip(perms, tables):
        phi[idx] = vals
    return phi


def _detector_integral(grid, total_time, seq, emitter, order, max_len,
                       amplitude_sq):
    t_flat, theta_flat, w_flat = _quadrature_nodes(seq, total_time, order, max_len)
    phi = _phi_at_nodes(seq, emitter, t_flat, theta_flat)
    weighted = w_flat * phi
    # Chunk the node axis so the Fourier kernel stays modest in memory.
    result = np.zeros(grid.points.size, dtype=complex)
    block = max(1, int(4e6 / max(1, grid.points.size)))
    for lo in range(0, theta_flat.size, block):
        sl = slice(lo, lo + block)
        kernel = np.exp(-1j * np.outer(grid.points, theta_flat[sl]))
        result += kernel @ weighted[sl]
    return 2.0 * amplitude_sq * result.real


def spectrum_numeric(grid: FrequencyGrid, total_time: float,
                     seq: PulseSequence | None, emitter: EmitterParams,
                     amplitude_sq: float = 1.0,
                     rtol: float = 1e-6) -> Spectrum:
    """Detector-integral spectrum P(omega, T) by per-cell Gauss-Legendre
    quadrature, with one refinement pass that must agree to rtol."""
    if not (total_time > 0):
        raise InvalidParameter("total_time must be positive")
    omega_scale = max(1.0, float(np.max(np.abs(grid.points))),
                      abs(emitter.delta))
    max_len = min(3.0 / omega_scale, 3.0 / emitter.gamma)
    coarse = _detector_integral(grid, total_time, seq, emitter, 8, max_len,
                                amplitude_sq)
    fine = _detector_integral(grid, total_time, seq, emitter, 16, max_len,
                              amplitude_sq)
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    achieved = float(np.max(np.abs(fine - coarse))) / scale
    if achieved > rtol:
        raise NumericFailure(
            "detector-integral quadrature failed to converge",
            {"achieved_rtol": achieved, "requested_rtol": rtol},
        )
    return Spectrum(
        grid=grid,
        intensity=clamp_intensity(fine),
        observation_time=float(total_time),
        engine_tag=EngineTag.MASTER_NUMERIC,
        meta={"quadrature_rtol_achieved": achieved, "amplitude_sq": amplitude_sq},
    )


def closed_form_value(omega, K: int, tau: float, emitter: EmitterParams,
                      amplitude_sq: float = 1.0):
    """Long-time P(omega) at T = 2*K*tau, as printed, vectorized in omega."""
    omega = np.asarray(omega, dtype=float)
    d, g = emitter.delta, emitter.gamma
    g0 = 1j * (omega - d) + g / 2
    g3 = 1j * omega + g / 2
    g4 = 1j * (omega - d) - g / 2
    egt = math.exp(-g * tau)
    c = egt / (1.0 + egt)
    e4 = (np.exp(g4 * tau) - 1.0) / g4
    g3tail = np.exp(-2 * g3 * tau) / (1.0 - np.exp(-2 * g3 * tau))
    first = ((1.0 - egt) / g - np.exp(-g0 * tau) * e4) * (K + c)
    second = e4 * (1.0 - np.exp(-g0 * tau)) * g3tail * (K + c - g3tail)
    return 2.0 * amplitude_sq * ((first + second) / (g0 * (1.0 + egt))).real


def spectrum_closed_form(grid: FrequencyGrid, K: int, tau: float,
                         emitter: EmitterParams,
                         amplitude_sq: float = 1.0) -> Spectrum:
    """Evaluate the printed long-time closed form on a grid (T = 2*K*tau)."""
    if K < 1:
        raise InvalidParameter("K must be >= 1")
    if not (tau > 0):
        raise InvalidParameter("tau must be positive")
    values = closed_form_value(grid.points, K, tau, emitter, amplitude_sq)
    return Spectrum(
        grid=grid,
        intensity=clamp_intensity(values),
        observation_time=2.0 * K * tau,
        engine_tag=EngineTag.MASTER_CLOSED,
        meta={"K": K, "tau": tau, "amplitude_sq": amplitude_sq},
    )


def lorentzian_limit(omega, K: int, tau: float, gamma: float):
    """Small-tau limit of the pulse-controlled line: a natural-width
    Lorentzian pinned at the target frequency, amplitude linear in K."""
    omega = np.asarray(omega, dtype=float)
    value = (K * tau * gamma / 4.0) / (omega**2 + (gamma / 2.0) ** 2)
    return value if value.ndim else float(value)
