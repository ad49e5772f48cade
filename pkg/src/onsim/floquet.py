"""Oscillation period and Floquet stability of the perturbation equation.

The period of the x motion is computed by two independent routes so each
one checks the other:

* event route: zeros of x'(t) located on the dense output of the
  integration (the first zero is the half period);
* quadrature route: the turning-point integral
  T = 2 * int_{x_f}^{x_init} dx / sqrt(2 (U(x_init) - U(x))),
  evaluated after the substitution x = c - A cos(theta).

For the quadrature the energy difference is factored exactly through both
turning points: U(x_init) - U(x) = (x_init - x) (x - x_f) H(x), with H the
second divided difference of the polynomial U (the linear energy term drops
out of H entirely).  Under the substitution the prefactor
(x_init - x)(x - x_f) = A^2 sin^2(theta) cancels against dx = A sin(theta)
dtheta, so the integrand is just 1 / sqrt(2 H(x(theta))): finite at both
endpoints and free of the cancellation that the naive difference suffers
even for oscillation amplitudes many orders below the well position.

Stability of u''= -2 V'(x(t)) u over one period is encoded in the 2x2
monodromy matrix M.  Its determinant is 1 (Wronskian) and the symmetry of
x(t) about the turning points forces equal diagonal entries; both are
recorded as consistency errors.  Multipliers are the eigenvalues of M and
the classification follows |trace| relative to 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    S_MIN,
    IntegratorConfig,
    _make_rhs,
    _run_ivp,
    _v_and_vp,
    linearized_frequency,
    locate_turning_events,
)
from .errors import DegenerateMotionError, NumericalError, ValidationError
from .potential import Potential
from .thermal import PerturbedSetup

__all__ = [
    "TOL_BOUNDARY",
    "DET_ERROR_LIMIT",
    "PeriodEstimate",
    "MonodromyResult",
    "find_inner_turning_point",
    "period_by_events",
    "period_by_quadrature",
    "compute_monodromy",
    "classify_stability",
    "multiplier_deviation",
]

# half-width of the trace band around |trace| = 2 classified as boundary
TOL_BOUNDARY = 1e-9
# a monodromy matrix whose determinant strays further than this is rejected
DET_ERROR_LIMIT = 1e-6

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_MAX_PANELS = 4096
_QUAD_RTOL = 1e-10
_INTEGRAND_GUARD = 1e12

# relative agreement required between the first and second event times;
# below the event-location noise floor an absolute allowance takes over
_EVENT_CONSISTENCY_RTOL = 1e-9
_EVENT_NOISE_FACTOR = 64.0


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    method: str
    x_f: float
    x_max: float

    def __post_init__(self):
        if not (self.period > 0.0):
            raise ValidationError("period must be positive")
        if not (0.0 < self.x_f < self.x_max):
            raise ValidationError("need 0 < x_f < x_max")


@dataclass(frozen=True)
class MonodromyResult:
    period: float
    matrix: tuple[tuple[float, float], tuple[float, float]]
    trace: float
    det_error: float
    symmetry_error: float
    multipliers: tuple[complex, complex]
    classification: str


def _divided_difference(model: Potential, x_init: float, e_per_dof: float):
    """G with U(x_init) - U(x) = (x_init - x) G(x), as a vectorised callable.

    G(x) = sum_k 4 c_k sum_{j=0}^{k} x_init^j x^(k-j) - 4 e_per_dof.
    G(0) = -4 x0 V'(x0) < 0 and G(x_init) = U'(x_init), so G brackets the
    inner turning point by construction.
    """
    pairs = tuple(zip(model.exponents, model.coefficients))

    def g(x):
        total = -4.0 * e_per_dof
        for k, c in pairs:
            s_k = 0.0
            for j in range(k + 1):
                s_k = s_k + x_init ** j * x ** (k - j)
            total = total + 4.0 * c * s_k
        return total

    return g


def _second_divided_difference(model: Potential, x_init: float, x_f: float):
    """H with U(x_init) - U(x) = (x_init - x) (x - x_f) H(x), vectorised.

    For U(x) = sum_k 4 c_k x^(k+1) - 4 e x the second divided difference
    over (x_init, x_f, x) is the complete homogeneous symmetric sum
    H(x) = sum_k 4 c_k sum_{i+j+l = k-1} x_init^i x_f^j x^l;
    the energy term is linear and contributes nothing.  For positive
    coefficients every term is positive, so H carries no cancellation.
    """
    pairs = tuple(zip(model.exponents, model.coefficients))

    def h(x):
        total = 0.0
        for k, c in pairs:
            s_k = 0.0
            for i in range(k):
                for j in range(k - i):
                    s_k = s_k + x_init ** i * x_f ** j * x ** (k - 1 - i - j)
            total = total + 4.0 * c * s_k
        return total

    return h


def find_inner_turning_point(setup: PerturbedSetup, model: Potential) -> float:
    """Inner turning point x_f in (0, x_init): the root of G above.

    Root-finding on G rather than on the raw energy difference keeps full
    precision even when the well is only s wide.  Verifies afterwards that
    the well interior really lies below the starting energy.
    """
    if setup.s <= S_MIN:
        raise DegenerateMotionError(
            f"shift s={setup.s:g} below threshold {S_MIN:g}: turning points merge"
        )
    g = _divided_difference(model, setup.x_init, setup.e_per_dof)
    if not g(setup.x_init) > 0.0:
        raise NumericalError("x_init is not an outer turning point of the well")
    x_f = brentq(g, 0.0, setup.x_init, xtol=1e-15, rtol=1e-13)
    if not (0.0 < x_f < setup.x_init):
        raise NumericalError("turning point search left (0, x_init)")
    interior = x_f + (setup.x_init - x_f) * np.linspace(1e-3, 1.0 - 1e-3, 33)
    if not np.all(g(interior) > 0.0):
        raise NumericalError(
            "well interior is not strictly below the starting energy"
        )
    return float(x_f)


def period_by_events(
    setup: PerturbedSetup, model: Potential, config: IntegratorConfig
) -> PeriodEstimate:
    """Period from the first zero of x'(t): T = 2 t1.

    The second zero must land at 2 t1; its offset is checked against a
    relative tolerance plus an absolute noise floor proportional to
    (atol + rtol |x'|_max) / |x''| at the turning points, which is the
    accuracy limit of event location for small amplitudes.
    """
    events = locate_turning_events(setup, model, config, count=2)
    (t1, x1), (t2, x2) = events
    if not (0.0 < x1 < x2):
        raise NumericalError("turning events out of order")
    g1 = abs(_accel(setup, model, x1))
    g2 = abs(_accel(setup, model, x2))
    amp = 0.5 * (x2 - x1)
    v_max = amp * linearized_frequency(setup, model)
    noise_floor = _EVENT_NOISE_FACTOR * (config.atol + config.rtol * v_max) / max(
        min(g1, g2), 1e-300
    )
    allowance = max(_EVENT_CONSISTENCY_RTOL * t2, noise_floor)
    if abs(t2 - 2.0 * t1) > allowance:
        raise NumericalError(
            f"event period inconsistency: |t2 - 2 t1| = {abs(t2 - 2.0 * t1):.3e} "
            f"exceeds {allowance:.3e}"
        )
    return PeriodEstimate(period=2.0 * t1, method="events", x_f=x1, x_max=x2)


def _accel(setup, model, x):
    pairs = tuple(zip(model.exponents, model.coefficients))
    v, vp = _v_and_vp(pairs, x)
    return -(4.0 * v + 4.0 * x * vp - 4.0 * setup.e_per_dof)


def period_by_quadrature(
    setup: PerturbedSetup, model: Potential, x_f: float
) -> PeriodEstimate:
    """Period from the turning-point integral, no ODE integration involved.

    Composite 16-point Gauss-Legendre in theta with panel doubling until two
    successive estimates agree to 1e-10 relative.
    """
    x_init = setup.x_init
    if not (0.0 < x_f < x_init):
        raise ValidationError("need 0 < x_f < x_init")
    if setup.s <= S_MIN:
        raise DegenerateMotionError("amplitude below threshold: period undefined")
    half_width = 0.5 * (x_init - x_f)
    center = 0.5 * (x_init + x_f)
    h = _second_divided_difference(model, x_init, x_f)

    prev = None
    panels = 1
    while panels <= _MAX_PANELS:
        width = math.pi / panels
        starts = width * np.arange(panels)
        theta = (starts[:, None] + 0.5 * width * (_GL_NODES + 1.0)[None, :]).ravel()
        x = center - half_width * np.cos(theta)
        h_vals = h(x)
        if not np.all(np.isfinite(h_vals)) or np.any(h_vals <= 0.0):
            raise NumericalError(
                "turning-point integrand not finite: turning points not simple"
            )
        integrand = 1.0 / np.sqrt(2.0 * h_vals)
        if np.any(integrand > _INTEGRAND_GUARD):
            raise NumericalError("turning-point integrand exceeded guard bound")
        total = 0.5 * width * float(
            np.dot(np.tile(_GL_WEIGHTS, panels), integrand)
        )
        period = 2.0 * total
        if prev is not None and abs(period - prev) < _QUAD_RTOL * abs(period):
            return PeriodEstimate(
                period=period, method="quadrature", x_f=x_f, x_max=x_init
            )
        prev = period
        panels *= 2
    raise NumericalError("turning-point quadrature did not converge")


def _make_rhs6(model: Potential, e_per_dof: float):
    pairs = tuple(zip(model.exponents, model.coefficients))
    e4 = 4.0 * e_per_dof
    nan6 = (math.nan,) * 6

    def rhs(t, y):
        x = y[0]
        if x <= 0.0:
            return nan6
        v, vp = _v_and_vp(pairs, x)
        grad = 4.0 * v + 4.0 * x * vp - e4
        c2 = 2.0 * vp
        return (y[1], -grad, y[3], -c2 * y[2], y[5], -c2 * y[4])

    return rhs


def compute_monodromy(
    setup: PerturbedSetup,
    model: Potential,
    config: IntegratorConfig,
    period: float,
) -> MonodromyResult:
    """Evolve the u basis columns (1,0) and (0,1) over one period.

    Both columns ride on a single x(t) integration so they see identical
    coefficient histories.  Multipliers come from the quadratic formula with
    the actually computed determinant: forcing det = 1 would turn an O(eps)
    trace error into an O(sqrt(eps)) modulus error at the |trace| = 2
    boundary, exactly where the free theory sits.
    """
    if not (period > 0.0) or not math.isfinite(period):
        raise ValidationError("period must be positive and finite")
    rhs = _make_rhs6(model, setup.e_per_dof)
    y0 = (setup.x_init, 0.0, 1.0, 0.0, 0.0, 1.0)
    res = _run_ivp(rhs, period, y0, config)
    yf = res.y[:, -1]
    m11, m21 = float(yf[2]), float(yf[3])
    m12, m22 = float(yf[4]), float(yf[5])
    trace = m11 + m22
    det = m11 * m22 - m12 * m21
    det_error = abs(det - 1.0)
    symmetry_error = abs(m11 - m22)
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        r = math.sqrt(disc)
        multipliers = (
            complex(0.5 * (trace + r), 0.0),
            complex(0.5 * (trace - r), 0.0),
        )
    else:
        im = 0.5 * math.sqrt(-disc)
        multipliers = (complex(0.5 * trace, im), complex(0.5 * trace, -im))
    classification = _classify(trace, det_error, TOL_BOUNDARY)
    return MonodromyResult(
        period=period,
        matrix=((m11, m12), (m21, m22)),
        trace=trace,
        det_error=det_error,
        symmetry_error=symmetry_error,
        multipliers=multipliers,
        classification=classification,
    )


def _classify(trace: float, det_error: float, tol_boundary: float) -> str:
    if det_error >= DET_ERROR_LIMIT:
        raise NumericalError(
            f"monodromy determinant error {det_error:.3e} exceeds "
            f"{DET_ERROR_LIMIT:g}: matrix invalid"
        )
    a = abs(trace)
    if a < 2.0 - tol_boundary:
        return "oscillatory"
    if a > 2.0 + tol_boundary:
        return "resonant"
    return "boundary"


def classify_stability(
    result: MonodromyResult, tol_boundary: float = TOL_BOUNDARY
) -> str:
    """Stability class from |trace| against 2 with a boundary band."""
    if not (tol_boundary > 0.0):
        raise ValidationError("tol_boundary must be positive")
    return _classify(result.trace, result.det_error, tol_boundary)


def multiplier_deviation(result: MonodromyResult) -> float:
    """max_i | |lambda_i| - 1 |, the distance of the multipliers from the
    unit circle; > 0 signals parametric resonance."""
    return max(abs(abs(m) - 1.0) for m in result.multipliers)
