"""Two-photon-interference observables for pulse-controlled emitters.

Photons from two emitters with detunings delta1, delta2 (equal linewidth)
meet at a 50:50 beamsplitter; the normalized coincidence rate

    g34 = G34 / N34,
    G34 = (1/4) [ phi1(t+th,0) phi2(t,0) + phi1(t,0) phi2(t+th,0)
                  - 2 Re phi1(t,th)* phi2(t,th) ]

vanishes for indistinguishable photons and reaches 1/2 for independent
dephased sources.  Correlators come from the master-equation module:
closed forms for ideal PDD, quantum regression otherwise.  Single-emitter
intensity correlators G2 are reported separately and never folded into
g34.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, UnsupportedSequence
from .master import corr_numeric, evolve_matrix, phi_closed
from .model import (
    EmitterParams,
    PulseIntervalDecomposition,
    PulseSequence,
    _snap_count,
)


@dataclass(frozen=True)
class TPIPair:
    """Two emitters feeding the beamsplitter: detunings and shared
    linewidth."""

    delta1: float
    delta2: float
    gamma: float = 2.0

    def __post_init__(self):
        if not (self.gamma > 0):
            raise InvalidParameter("gamma must be positive")

    @property
    def delta21(self) -> float:
        return self.delta2 - self.delta1

    def emitters(self) -> tuple[EmitterParams, EmitterParams]:
        return (
            EmitterParams(delta=self.delta1, gamma=self.gamma),
            EmitterParams(delta=self.delta2, gamma=self.gamma),
        )


def _phi(t, theta, seq, emitter):
    if seq is None:
        g, d = emitter.gamma, emitter.delta
        return math.exp(-g * t) * np.exp((1j * d - g / 2) * theta)
    try:
        return complex(phi_closed(t, theta, seq, emitter))
    except UnsupportedSequence:
        return corr_numeric(t, theta, seq, emitter)


def g34(t: float, theta: float, seq: PulseSequence | None, pair: TPIPair) -> float:
    """Normalized coincidence rate for clicks at t and t + theta."""
    if theta < 0 or t < 0:
        raise InvalidParameter("t and theta must be >= 0")
    e1, e2 = pair.emitters()
    r1t = _phi(t, 0.0, seq, e1).real
    r2t = _phi(t, 0.0, seq, e2).real
    r1tt = _phi(t + theta, 0.0, seq, e1).real
    r2tt = _phi(t + theta, 0.0, seq, e2).real
    p1 = _phi(t, theta, seq, e1)
    p2 = _phi(t, theta, seq, e2)
    g_raw = 0.25 * (r1tt * r2t + r1t * r2tt - 2.0 * (p1.conjugate() * p2).real)
    norm = 0.25 * (r1t + r2t) * (r1tt + r2tt)
    if norm <= 0:
        raise InvalidParameter("vanishing normalization: emitters fully decayed")
    return g_raw / norm


def g34_stationary(decomp: PulseIntervalDecomposition, tau: float,
                   pair: TPIPair) -> float:
    """Long-time closed form (rho_e = 1/2, leading order in Gamma*theta).

    An odd pulse count between the clicks gives 1/2; an even count gives
    (1/2)(1 - cos[delta21 (tau1 + tau2 - tau)]), where for zero pulses the
    phase is just delta21 * theta (tau2 carries theta when m = 0).
    """
    if decomp.m % 2 == 1:
        return 0.5
    if decomp.m == 0:
        phase = pair.delta21 * decomp.tau2
    else:
        phase = pair.delta21 * (decomp.tau1 + decomp.tau2 - tau)
    return 0.5 * (1.0 - math.cos(phase))


def g34_time_averaged(theta: float, tau: float) -> float:
    """Small-tau leading-order coincidence rate averaged over the first
    click time: theta = 2j*tau + th1 gives th1/(2*tau), an odd multiple
    gives (1/2)(1 - th1/tau)."""
    if theta < 0:
        raise InvalidParameter("theta must be >= 0")
    if not (tau > 0):
        raise InvalidParameter("tau must be positive")
    j = _snap_count(theta, tau)
    th1 = theta - j * tau
    if j % 2 == 0:
        return th1 / (2.0 * tau)
    return 0.5 * (1.0 - th1 / tau)


def g34_time_averaged_numeric(theta: float, seq: PulseSequence, pair: TPIPair,
                              t_start: float, n_samples: int = 2000) -> float:
    """Measured-style time average: mean G34 over one pulse period divided
    by mean N34, with the first click swept over [t_start, t_start + 2*tau]."""
    tau = seq.tau
    ts = t_start + (np.arange(n_samples) + 0.5) / n_samples * 2.0 * tau
    e1, e2 = pair.emitters()
    try:
        r1t = phi_closed(ts, 0.0, seq, e1).real
        r2t = phi_closed(ts, 0.0, seq, e2).real
        r1tt = phi_closed(ts + theta, 0.0, seq, e1).real
        r2tt = phi_closed(ts + theta, 0.0, seq, e2).real
        p1 = phi_closed(ts, theta, seq, e1)
        p2 = phi_closed(ts, theta, seq, e2)
    except UnsupportedSequence:
        r1t = np.array([_phi(t, 0.0, seq, e1).real for t in ts])
        r2t = np.array([_phi(t, 0.0, seq, e2).real for t in ts])
        r1tt = np.array([_phi(t + theta, 0.0, seq, e1).real for t in ts])
        r2tt = np.array([_phi(t + theta, 0.0, seq, e2).real for t in ts])
        p1 = np.array([_phi(t, theta, seq, e1) for t in ts])
        p2 = np.array([_phi(t, theta, seq, e2) for t in ts])
    num = 0.25 * (r1tt * r2t + r1t * r2tt - 2.0 * (np.conj(p1) * p2).real)
    den = 0.25 * (r1t + r2t) * (r1tt + r2tt)
    return float(np.sum(num) / np.sum(den))


def g2_single(theta: float, seq: PulseSequence, gamma: float) -> float:
    """Leading-order single-emitter intensity correlator in the stationary
    pulsed regime: (1/4)(1 - exp(-Gamma theta)) for an even pulse-count
    separation, (1/4)(1 + exp(-Gamma theta)) for odd."""
    if theta < 0:
        raise InvalidParameter("theta must be >= 0")
    if not seq.is_uniform:
        raise UnsupportedSequence("g2_single parity needs a uniform sequence")
    parity = _snap_count(theta, seq.tau) % 2
    envelope = math.exp(-gamma * theta)
    if parity == 0:
        return 0.25 * (1.0 - envelope)
    return 0.25 * (1.0 + envelope)


def g2_numeric(t: float, theta: float, seq: PulseSequence | None,
               gamma: float, delta: float = 0.0) -> float:
    """Quantum-regression G2(t, theta): collapse at the first click, evolve
    through the remaining pulses, read the re-excited population."""
    if t < 0 or theta < 0:
        raise InvalidParameter("t and theta must be >= 0")
    emitter = EmitterParams(delta=delta, gamma=gamma)
    rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    rho_t = evolve_matrix(rho0, 0.0, t, seq, emitter)
    collapsed = np.zeros((2, 2), dtype=complex)
    collapsed[1, 1] = rho_t[0, 0]
    evolved = evolve_matrix(collapsed, t, t + theta, seq, emitter)
    return float(evolved[0, 0].real)


def g34_no_pulses(theta: float, pair: TPIPair) -> float:
    """Control-free normalized coincidence sin^2(delta21 theta / 2); under
    spectral diffusion the oscillation averages to 1/2."""
    if theta < 0:
        raise InvalidParameter("theta must be >= 0")
    return math.sin(pair.delta21 * theta / 2.0) ** 2
