"""Thermal initial data for the reduced large-N dynamics.

The mean square displacement per degree of freedom in a self-consistent
Gaussian thermal state satisfies the gap equation

    x0 = coth(beta*omega/2) / (2*omega),   omega^2 = 2 V'(x0),

with the beta -> inf limit coth -> 1.  From x0, a symmetric shift s of the
initial state defines the starting point x_init = x0 + s and the conserved
energy per degree of freedom that closes the effective potential

    U(x) = 4 x V(x) - 4 x e_per_dof,

in which x(t) subsequently moves classically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, NonMonotonicError, NumericalError, ValidationError
from .formats import render_json
from .potential import Potential

__all__ = [
    "PerturbedSetup",
    "solve_gap_equation",
    "gap_residual",
    "matsubara_x0",
    "energy_per_dof",
    "effective_potential",
    "effective_gradient",
    "build_setup",
]

_BRACKET_CAP = 1.0e6
_MAX_BISECTIONS = 400


@dataclass(frozen=True)
class PerturbedSetup:
    """Initial data of a thermally prepared, symmetrically shifted state."""

    beta: float
    x0: float
    s: float
    x_init: float
    e_per_dof: float
    omega_eff: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "x0": self.x0,
            "s": self.s,
            "x_init": self.x_init,
            "e_per_dof": self.e_per_dof,
            "omega_eff": self.omega_eff,
        }

    def to_json(self) -> str:
        return render_json(self.to_dict())


def _thermal_moment(omega: float, beta: float) -> float:
    """coth(beta*omega/2)/(2*omega), the Gaussian <phi^2> per mode."""
    if omega <= 0.0:
        return math.inf
    if math.isinf(beta):
        return 1.0 / (2.0 * omega)
    return 1.0 / (math.tanh(0.5 * beta * omega) * 2.0 * omega)


def gap_residual(model: Potential, beta: float, x: float) -> float:
    """x - coth(beta*omega(x)/2)/(2*omega(x)); zero at the gap solution."""
    slope = model.derivative(x)
    if slope < 0.0:
        raise NonMonotonicError(
            f"V'({x:g}) < 0: thermal frequency undefined for a falling potential"
        )
    omega = math.sqrt(2.0 * slope)
    return x - _thermal_moment(omega, beta)


def solve_gap_equation(model: Potential, beta: float, tol: float = 1e-12) -> float:
    """Solve the gap equation for x0 by bracketing plus bisection.

    The residual x - coth(beta*omega(x)/2)/(2*omega(x)) is monotone increasing
    for a monotone potential, so bisection is slow but unconditionally safe.
    Raises BracketError if no sign change is found below the bracket cap and
    NonMonotonicError if the potential fails the single-well check there.
    """
    if not (beta > 0.0):
        raise ValidationError("beta must be positive (or inf)")
    if not (tol > 0.0):
        raise ValidationError("tol must be positive")

    lo = 1e-300
    hi = 1.0
    if not model.is_monotonic(hi):
        raise NonMonotonicError(
            "potential derivative must stay positive on the gap bracket"
        )
    while gap_residual(model, beta, hi) < 0.0:
        hi *= 10.0
        if hi > _BRACKET_CAP:
            raise BracketError(
                f"gap equation has no sign change on [0, {_BRACKET_CAP:g}]"
            )
        if not model.is_monotonic(hi):
            raise NonMonotonicError(
                "potential derivative must stay positive on the gap bracket"
            )
    if gap_residual(model, beta, lo) > 0.0:
        raise BracketError("gap equation residual positive at the lower bracket end")

    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        g_mid = gap_residual(model, beta, mid)
        if abs(g_mid) < tol:
            return mid
        if g_mid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * max(1.0, mid):
            break
    raise NumericalError(f"gap equation residual did not reach {tol:g}")


def matsubara_x0(omega: float, beta: float, n_max: int) -> float:
    """Independent route to <phi^2>: truncated Matsubara sum plus tail.

    (1/beta) * sum_{n=-n_max}^{n_max} 1/(omega_n^2 + omega^2) with
    omega_n = 2 pi n / beta, corrected by the analytic tail estimate
    beta/(2 pi^2 n_max).  Converges to the closed form as n_max grows.
    """
    if not (omega > 0.0) or not math.isfinite(omega):
        raise ValidationError("omega must be positive and finite")
    if not (beta > 0.0) or not math.isfinite(beta):
        raise ValidationError("beta must be positive and finite")
    n_max = int(n_max)
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    n = np.arange(-n_max, n_max + 1, dtype=float)
    omega_n = 2.0 * math.pi * n / beta
    total = float(np.sum(1.0 / (omega_n * omega_n + omega * omega))) / beta
    tail = beta / (2.0 * math.pi * math.pi * n_max)
    return total + tail


def energy_per_dof(model: Potential, x0: float, x_init: float) -> float:
    """Conserved energy per degree of freedom: x0 V'(x0) + V(x_init)."""
    if not (0.0 < x0 <= x_init):
        raise ValidationError("need 0 < x0 <= x_init")
    return x0 * model.derivative(x0) + model.value(x_init)


def effective_potential(setup: PerturbedSetup, model: Potential, x):
    """U(x) = 4 x V(x) - 4 x e_per_dof, the well confining x(t)."""
    return 4.0 * x * model.value(x) - 4.0 * x * setup.e_per_dof


def effective_gradient(setup: PerturbedSetup, model: Potential, x):
    """dU/dx = 4 V(x) + 4 x V'(x) - 4 e_per_dof.

    Vanishes identically at x = x0 when s = 0, so the unshifted thermal
    state is an exact equilibrium of the reduced dynamics.
    """
    return 4.0 * model.value(x) + 4.0 * x * model.derivative(x) - 4.0 * setup.e_per_dof


def build_setup(
    model: Potential, beta: float, s: float, tol: float = 1e-12
) -> PerturbedSetup:
    """Solve the gap equation and assemble initial data for a shift s >= 0."""
    if not (s >= 0.0) or not math.isfinite(s):
        raise ValidationError("shift s must be finite and >= 0")
    x0 = solve_gap_equation(model, beta, tol)
    x_init = x0 + s
    e = energy_per_dof(model, x0, x_init)
    omega_eff = math.sqrt(2.0 * model.derivative(x0))
    return PerturbedSetup(
        beta=beta, x0=x0, s=s, x_init=x_init, e_per_dof=e, omega_eff=omega_eff
    )
