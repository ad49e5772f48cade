"""Reduced equations of motion and their adaptive integration.

The closed system integrated here is four dimensional:

    x''(t) = -dU/dx,           U(x) = 4 x V(x) - 4 x e_per_dof,
    u''(t) = -2 V'(x(t)) u,    u(0) = 1, u'(0) = 0,

with x(0) = x_init and x'(0) = 0.  u is the perturbation amplitude
normalised to its initial value; its equation has a periodic coefficient
because x(t) oscillates, which is what produces beats and, potentially,
parametric resonance.

Integration uses the embedded 8(5,3) Dormand-Prince pair (scipy's DOP853)
with dense output.  A trial step that wanders into x <= 0 reports NaN
derivatives, which the step controller treats as a rejected step; if the
motion genuinely reaches the barrier the run fails cleanly instead of
continuing on garbage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateMotionError,
    DomainError,
    EventNotFoundError,
    NumericalError,
    ValidationError,
)
from .potential import Potential
from .thermal import PerturbedSetup, effective_potential

__all__ = [
    "S_MIN",
    "State",
    "IntegratorConfig",
    "IntegratorStats",
    "Trajectory",
    "derivative",
    "energy_x",
    "integrate",
    "locate_turning_events",
    "time_reversal_roundtrip",
]

# below this shift the oscillation amplitude is numerically unresolvable
S_MIN = 1e-12

_NAN4 = (math.nan, math.nan, math.nan, math.nan)


@dataclass(frozen=True)
class State:
    t: float
    x: float
    x_dot: float
    u: float
    u_dot: float


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling for the adaptive integrator.

    output_stride None means one sample every 1/128th of the perturbation
    cycle 2 pi / omega_eff.  That is much denser than the envelope analysis
    strictly requires because the parabolic peak refinement carries an
    amplitude bias of order (omega_eff * stride)^4; at 128 samples per
    cycle the bias sits safely below 1e-6.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    output_stride: float | None = None
    energy_tol: float = 1e-8

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValidationError("rtol and atol must be positive")
        if not (self.max_step > 0.0):
            raise ValidationError("max_step must be positive")
        if self.output_stride is not None and not (self.output_stride > 0.0):
            raise ValidationError("output_stride must be positive")
        if not (self.energy_tol > 0.0):
            raise ValidationError("energy_tol must be positive")


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    nfev: int
    max_energy_drift: float


@dataclass(eq=False)
class Trajectory:
    """Sampled solution plus the per-sample energy of the x motion."""

    t: np.ndarray
    x: np.ndarray
    x_dot: np.ndarray
    u: np.ndarray
    u_dot: np.ndarray
    energy_x: np.ndarray
    setup: PerturbedSetup
    stats: IntegratorStats

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> State:
        return State(
            t=float(self.t[i]),
            x=float(self.x[i]),
            x_dot=float(self.x_dot[i]),
            u=float(self.u[i]),
            u_dot=float(self.u_dot[i]),
        )


def _v_and_vp(pairs, x):
    """Value and first derivative of V at scalar x > 0, shared hot path."""
    v = 0.0
    vp = 0.0
    for k, c in pairs:
        if k == 1:
            v += c * x
            vp += c
        else:
            p = x ** (k - 1)
            v += c * p * x
            vp += k * c * p
    return v, vp


def _make_rhs(model: Potential, e_per_dof: float, frozen_coeff: float | None = None):
    pairs = tuple(zip(model.exponents, model.coefficients))
    e4 = 4.0 * e_per_dof

    def rhs(t, y):
        x = y[0]
        if x <= 0.0:
            return _NAN4
        v, vp = _v_and_vp(pairs, x)
        grad = 4.0 * v + 4.0 * x * vp - e4
        coeff = 2.0 * vp if frozen_coeff is None else frozen_coeff
        return (y[1], -grad, y[3], -coeff * y[2])

    return rhs


def derivative(setup: PerturbedSetup, model: Potential, state: State):
    """Time derivatives (x', x'', u', u'') of a state; requires x > 0."""
    if not (state.x > 0.0):
        raise DomainError("dynamics defined only for x > 0")
    pairs = tuple(zip(model.exponents, model.coefficients))
    v, vp = _v_and_vp(pairs, state.x)
    grad = 4.0 * v + 4.0 * state.x * vp - 4.0 * setup.e_per_dof
    return (state.x_dot, -grad, state.u_dot, -2.0 * vp * state.u)


def energy_x(setup: PerturbedSetup, model: Potential, x, x_dot):
    """Conserved energy of the x motion, 0.5 x'^2 + U(x)."""
    return 0.5 * x_dot * x_dot + effective_potential(setup, model, x)


def _initial_state(setup: PerturbedSetup):
    return (setup.x_init, 0.0, 1.0, 0.0)


def _run_ivp(rhs, t_end, y0, config, events=None, dense=False):
    res = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=config.rtol,
        atol=config.atol,
        max_step=config.max_step,
        dense_output=dense,
        events=events,
    )
    if not res.success:
        raise NumericalError(f"integration failed: {res.message}")
    return res


def _default_stride(setup: PerturbedSetup) -> float:
    return 2.0 * math.pi / setup.omega_eff / 128.0


def _sample_times(t_end: float, stride: float) -> np.ndarray:
    n_full = int(math.floor(t_end / stride + 1e-9))
    times = stride * np.arange(n_full + 1, dtype=float)
    if t_end - times[-1] > 1e-12 * max(1.0, t_end):
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def integrate(
    setup: PerturbedSetup,
    model: Potential,
    config: IntegratorConfig,
    t_end: float,
    freeze_u_coefficient: bool = False,
) -> Trajectory:
    """Integrate the coupled (x, u) system on [0, t_end] and sample it.

    Samples sit at multiples of the output stride, with the final sample
    exactly at t_end.  The energy of the x motion is monitored over all
    samples; drift relative to the motion's energy scale, taken as
    max(|energy at t=0|, peak kinetic energy), beyond config.energy_tol
    raises NumericalError.

    freeze_u_coefficient replaces the periodic coefficient 2 V'(x(t)) by its
    initial value 2 V'(x_init), giving the constant-frequency control run
    used to separate genuine beats from sampling artifacts.
    """
    if not (t_end > 0.0) or not math.isfinite(t_end):
        raise ValidationError("t_end must be positive and finite")
    frozen = 2.0 * model.derivative(setup.x_init) if freeze_u_coefficient else None
    rhs = _make_rhs(model, setup.e_per_dof, frozen)
    res = _run_ivp(rhs, t_end, _initial_state(setup), config, dense=True)

    stride = config.output_stride or _default_stride(setup)
    times = _sample_times(t_end, stride)
    samples = res.sol(times)

    x = samples[0]
    x_dot = samples[1]
    energies = energy_x(setup, model, x, x_dot)
    # drift is judged against the energy scale of the motion, not the bare
    # conserved value: for large shifts the latter is a near cancellation of
    # kinetic and potential terms and would overstate the drift
    scale = max(abs(energies[0]), 0.5 * float(np.max(x_dot * x_dot)))
    drift = float(np.max(np.abs(energies - energies[0]))) / max(scale, 1e-300)
    stats = IntegratorStats(
        steps=len(res.t) - 1, nfev=int(res.nfev), max_energy_drift=drift
    )
    if drift > config.energy_tol:
        raise NumericalError(
            f"energy drift {drift:.3e} exceeds energy_tol {config.energy_tol:.3e}; "
            "tighten rtol/atol"
        )
    return Trajectory(
        t=times,
        x=x,
        x_dot=x_dot,
        u=samples[2],
        u_dot=samples[3],
        energy_x=energies,
        setup=setup,
        stats=stats,
    )


def linearized_frequency(setup: PerturbedSetup, model: Potential) -> float:
    """Small-shift oscillation frequency of x: sqrt of the well curvature
    8 V'(x0) + 4 x0 V''(x0) at the equilibrium point."""
    curv = 8.0 * model.derivative(setup.x0) + 4.0 * setup.x0 * model.second_derivative(
        setup.x0
    )
    if curv <= 0.0:
        raise ValidationError("effective well curvature must be positive")
    return math.sqrt(curv)


def locate_turning_events(
    setup: PerturbedSetup,
    model: Potential,
    config: IntegratorConfig,
    count: int,
    t_end: float | None = None,
) -> list[tuple[float, float]]:
    """First `count` zeros of x'(t) for t > 0, as (time, x) pairs.

    Events alternate between arrivals at the inner turning point and returns
    to x_init.  Located by root-finding on the dense output of each step.
    With t_end omitted the search window starts from the linearized period
    estimate and doubles until enough events are found.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    if setup.s <= S_MIN:
        raise DegenerateMotionError(
            f"shift s={setup.s:g} below threshold {S_MIN:g}: no oscillation to locate"
        )
    rhs = _make_rhs(model, setup.e_per_dof)
    t_lin = 2.0 * math.pi / linearized_frequency(setup, model)

    def x_dot_zero(t, y):
        return y[1]

    window = t_end if t_end is not None else 1.5 * t_lin * (0.5 * count + 1.0)
    attempts = 1 if t_end is not None else 6
    for _ in range(attempts):
        res = _run_ivp(
            rhs, window, _initial_state(setup), config, events=[x_dot_zero]
        )
        raw_t = res.t_events[0]
        raw_y = res.y_events[0]
        events = []
        floor = max(1e-12, 1e-6 * t_lin)
        for te, ye in zip(raw_t, raw_y):
            if te <= floor:
                continue
            if events and te - events[-1][0] <= 1e-9 * t_lin:
                continue
            events.append((float(te), float(ye[0])))
        if len(events) >= count:
            return events[:count]
        window *= 2.0
    raise EventNotFoundError(
        f"found {len(events)} of {count} turning events by t={window / 2.0:g}"
    )


def time_reversal_roundtrip(
    setup: PerturbedSetup,
    model: Potential,
    config: IntegratorConfig,
    period: float,
    n_periods: int,
) -> float:
    """Forward n periods, negate velocities, forward n periods again.

    The coefficient of the u equation is even around each turning point, so
    a perfect integration returns to the initial state.  Returns the largest
    coordinate deviation from that return, a global accuracy probe.
    """
    if not (period > 0.0):
        raise ValidationError("period must be positive")
    if n_periods < 1:
        raise ValidationError("n_periods must be >= 1")
    rhs = _make_rhs(model, setup.e_per_dof)
    span = period * n_periods
    out = _run_ivp(rhs, span, _initial_state(setup), config)
    yf = out.y[:, -1]
    back = _run_ivp(rhs, span, (yf[0], -yf[1], yf[2], -yf[3]), config)
    yr = back.y[:, -1]
    return max(
        abs(yr[2] - 1.0),
        abs(yr[3]),
        abs(yr[0] - setup.x_init),
        abs(yr[1]),
    )
