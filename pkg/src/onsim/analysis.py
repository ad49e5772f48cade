"""Envelope extraction and beat statistics for the perturbation amplitude.

The perturbation u(t) oscillates quickly; its envelope (the sequence of
local maxima of |u|) carries the slow beat structure.  Because u is
normalised to u(0) = 1, envelope values read directly as fractions of the
initial amplitude: min_envelope is the deepest collapse, max_envelope_late
measures how well the amplitude recurs towards the end of the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import InsufficientDataError, UndersampledError, ValidationError

__all__ = ["EnvelopeSeries", "BeatReport", "extract_envelope", "beat_report"]

# finest sampling accepted: at least this many samples per perturbation cycle
_MIN_SAMPLES_PER_CYCLE = 20.0
_MIN_EXTREMA = 10


@dataclass(frozen=True)
class EnvelopeSeries:
    times: np.ndarray
    amplitudes: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class BeatReport:
    min_envelope: float
    max_envelope_late: float
    recurrence_ratio: float
    modulation_depth: float
    n_envelope_cycles: int

    def to_dict(self) -> dict:
        return {
            "min_envelope": self.min_envelope,
            "max_envelope_late": self.max_envelope_late,
            "recurrence_ratio": self.recurrence_ratio,
            "modulation_depth": self.modulation_depth,
            "n_envelope_cycles": self.n_envelope_cycles,
        }


def _refine_parabolic(t0, t1, t2, y0, y1, y2):
    """Vertex of the parabola through three points, arbitrary spacing.

    Falls back to the middle sample when the points are collinear to
    rounding, which can only happen for an essentially flat envelope.
    """
    d01 = t1 - t0
    d12 = t1 - t2
    num = d01 * d01 * (y1 - y2) - d12 * d12 * (y1 - y0)
    den = d01 * (y1 - y2) - d12 * (y1 - y0)
    if abs(den) < 1e-300 or not math.isfinite(num / den):
        return t1, y1
    t_star = t1 - 0.5 * num / den
    # quadratic through the three samples, evaluated at the vertex
    l0 = (t_star - t1) * (t_star - t2) / ((t0 - t1) * (t0 - t2))
    l1 = (t_star - t0) * (t_star - t2) / ((t1 - t0) * (t1 - t2))
    l2 = (t_star - t0) * (t_star - t1) / ((t2 - t0) * (t2 - t1))
    return t_star, y0 * l0 + y1 * l1 + y2 * l2


def extract_envelope(traj: Trajectory) -> EnvelopeSeries:
    """Local maxima of |u| with three-point parabolic refinement.

    Requires sampling finer than a twentieth of the perturbation cycle
    2 pi / omega_eff, otherwise maxima fall between samples and the
    envelope is aliased (UndersampledError).
    """
    if len(traj) < 3:
        raise InsufficientDataError("trajectory too short for envelope extraction")
    cycle = 2.0 * math.pi / traj.setup.omega_eff
    stride = float(np.median(np.diff(traj.t)))
    if stride > cycle / _MIN_SAMPLES_PER_CYCLE:
        raise UndersampledError(
            f"output stride {stride:.3e} coarser than a twentieth of the "
            f"perturbation cycle {cycle:.3e}"
        )
    y = np.abs(traj.u)
    inner = slice(1, -1)
    is_peak = (y[inner] > y[:-2]) & (y[inner] > y[2:])
    idx = np.nonzero(is_peak)[0] + 1
    times = []
    amps = []
    for i in idx:
        t_star, a_star = _refine_parabolic(
            traj.t[i - 1], traj.t[i], traj.t[i + 1], y[i - 1], y[i], y[i + 1]
        )
        times.append(t_star)
        amps.append(a_star)
    return EnvelopeSeries(times=np.asarray(times), amplitudes=np.asarray(amps))


def beat_report(envelope: EnvelopeSeries, late_fraction: float = 0.2) -> BeatReport:
    """Summary statistics of the envelope.

    The late window is the last late_fraction of the envelope time span;
    its maximum over the initial amplitude 1 is the recurrence ratio.
    n_envelope_cycles counts sign changes of the discrete envelope slope,
    i.e. how often the envelope turns around.
    """
    if not (0.0 < late_fraction <= 1.0):
        raise ValidationError("late_fraction must lie in (0, 1]")
    if len(envelope) < _MIN_EXTREMA:
        raise InsufficientDataError(
            f"need at least {_MIN_EXTREMA} envelope extrema, got {len(envelope)}"
        )
    t_end = float(envelope.times[-1])
    threshold = t_end * (1.0 - late_fraction)
    late = envelope.amplitudes[envelope.times >= threshold]
    if late.size == 0:
        raise InsufficientDataError("late window contains no envelope extrema")
    min_env = float(np.min(envelope.amplitudes))
    max_late = float(np.max(late))
    d = np.diff(envelope.amplitudes)
    signs = np.sign(d)
    signs = signs[signs != 0.0]
    n_cycles = int(np.count_nonzero(signs[1:] != signs[:-1]))
    return BeatReport(
        min_envelope=min_env,
        max_envelope_late=max_late,
        recurrence_ratio=max_late / 1.0,
        modulation_depth=1.0 - min_env,
        n_envelope_cycles=n_cycles,
    )
