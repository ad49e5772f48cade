"""Polynomial single-well potentials V(x) = sum_k c_k x^k with integer k >= 1.

The model only ever evaluates V on x >= 0 (x is a mean square displacement),
so the domain is enforced here.  Monotonic growth of V on the working interval
is what guarantees a single confining well for the reduced dynamics, hence the
is_monotonic check used by the thermal solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

__all__ = ["Potential", "parse_coefficients", "format_coefficients"]

# tolerance for treating a polynomial root as real, relative to 1 + |Re z|
_REAL_ROOT_IMAG_TOL = 1e-9


def _check_domain(x):
    if np.any(np.asarray(x) < 0.0):
        raise DomainError("potential evaluated at x < 0")


@dataclass(frozen=True)
class Potential:
    """Polynomial potential with ascending, distinct integer exponents >= 1.

    Terms are stored (and summed) in ascending degree so evaluation is
    deterministic: the same inputs always produce bit-identical results.
    """

    exponents: tuple[int, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self):
        exps = tuple(int(k) for k in self.exponents)
        coefs = tuple(float(c) for c in self.coefficients)
        if len(exps) != len(coefs):
            raise ValidationError("exponents and coefficients differ in length")
        if not exps:
            raise ValidationError("potential needs at least one term")
        if any(k < 1 for k in exps):
            raise ValidationError("exponents must be integers >= 1")
        if any(exps[i] >= exps[i + 1] for i in range(len(exps) - 1)):
            raise ValidationError("exponents must be strictly ascending (duplicates rejected)")
        if not all(np.isfinite(c) for c in coefs):
            raise ValidationError("coefficients must be finite")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", coefs)

    @classmethod
    def from_pairs(cls, pairs) -> "Potential":
        """Build from an iterable of (exponent, coefficient) pairs, any order."""
        items = sorted((int(k), float(c)) for k, c in pairs)
        exps = tuple(k for k, _ in items)
        if len(set(exps)) != len(exps):
            raise ValidationError("duplicate exponents rejected")
        return cls(exps, tuple(c for _, c in items))

    @classmethod
    def from_w_lambda(cls, w: float, lam: float) -> "Potential":
        """Quadratic-plus-quartic shorthand: V(x) = (w^2/2) x + (lam/4) x^2.

        Zero-coefficient terms are dropped, so lam = 0 yields the pure
        harmonic (free) model {(1, w^2/2)}.
        """
        pairs = [(1, w * w / 2.0), (2, lam / 4.0)]
        pairs = [(k, c) for k, c in pairs if c != 0.0]
        if not pairs:
            raise ValidationError("w and lambda cannot both vanish")
        return cls.from_pairs(pairs)

    @classmethod
    def parse(cls, text: str) -> "Potential":
        return cls.from_pairs(parse_coefficients(text))

    def to_text(self) -> str:
        """Inverse of parse(): 'k:c,k:c' with round-trip exact coefficients."""
        return format_coefficients(zip(self.exponents, self.coefficients))

    # -- evaluation ---------------------------------------------------------

    def value(self, x):
        """V(x) for scalar or array x >= 0."""
        _check_domain(x)
        total = 0.0
        for k, c in zip(self.exponents, self.coefficients):
            total = total + c * x ** k
        return total

    def derivative(self, x):
        """V'(x) for scalar or array x >= 0."""
        _check_domain(x)
        total = 0.0
        for k, c in zip(self.exponents, self.coefficients):
            if k == 1:
                total = total + c
            else:
                total = total + k * c * x ** (k - 1)
        return total

    def second_derivative(self, x):
        """V''(x) for scalar or array x >= 0."""
        _check_domain(x)
        total = 0.0
        for k, c in zip(self.exponents, self.coefficients):
            if k > 1:
                total = total + k * (k - 1) * c * x ** (k - 2)
        return total

    # -- shape analysis -----------------------------------------------------

    def _derivative_dense_coeffs(self) -> np.ndarray:
        deg = max(self.exponents)
        dense = np.zeros(deg)
        for k, c in zip(self.exponents, self.coefficients):
            dense[k - 1] += k * c
        return dense

    def is_monotonic(self, x_max: float) -> bool:
        """True iff V'(x) > 0 on (0, x_max] and V'(0) >= 0.

        V'(0) = 0 is tolerated only at the endpoint x = 0 (e.g. a potential
        with no linear term).  Decided by the real roots of the derivative
        polynomial plus a dense sample sweep as a numerical guard.
        """
        if not (x_max > 0.0):
            raise ValidationError("x_max must be positive")
        if self.derivative(0.0) < 0.0:
            return False
        dense = self._derivative_dense_coeffs()
        if not np.any(dense != 0.0):
            return False
        scale = max(
            abs(d) * max(1.0, x_max) ** i for i, d in enumerate(dense)
        )
        root_floor = 1e-12 * max(1.0, x_max)
        roots = np.polynomial.polynomial.polyroots(dense)
        for z in np.atleast_1d(roots):
            if abs(z.imag) > _REAL_ROOT_IMAG_TOL * (1.0 + abs(z.real)):
                continue
            r = z.real
            if root_floor < r <= x_max and self.derivative(r) <= 1e-12 * scale:
                return False
        xs = np.linspace(x_max / 256.0, x_max, 256)
        return bool(np.all(self.derivative(xs) > 0.0))


def parse_coefficients(text: str) -> list[tuple[int, float]]:
    """Parse 'k:c[,k:c...]' into (exponent, coefficient) pairs.

    Rejects non-integer or < 1 exponents, bad floats and duplicates.
    """
    pairs = []
    if not text.strip():
        raise ValidationError("empty coefficient string")
    for item in text.split(","):
        head, sep, tail = item.partition(":")
        if not sep:
            raise ValidationError(f"malformed coefficient term {item!r} (expected k:c)")
        try:
            k = int(head.strip())
        except ValueError:
            raise ValidationError(f"exponent {head.strip()!r} is not an integer") from None
        try:
            c = float(tail.strip())
        except ValueError:
            raise ValidationError(f"coefficient {tail.strip()!r} is not a number") from None
        if k < 1:
            raise ValidationError(f"exponent {k} < 1 rejected")
        pairs.append((k, c))
    if len({k for k, _ in pairs}) != len(pairs):
        raise ValidationError("duplicate exponents rejected")
    return pairs


def format_coefficients(pairs) -> str:
    return ",".join("%d:%.17g" % (k, c) for k, c in pairs)
