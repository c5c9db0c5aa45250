"""
Legendre and Gegenbauer polynomials at complex arguments, in scaled form.

The coherent-state series multiply polynomials that grow like ``(2|w|)**n``
by damping factors ``exp(-n(n+1)/2)``.  Either factor alone leaves the double
range long before the product does, so values are carried as a modulus
logarithm plus a phase (:class:`ScaledComplex`) or, for arrays, as a mantissa
with a separate log scale (:class:`ScaledArray`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScaledComplex",
    "ScaledArray",
    "legendre_p",
    "gegenbauer_c",
    "legendre_table",
    "gegenbauer_table",
    "legendre_iter",
    "gegenbauer_iter",
]


def _wrap_phase(phase):
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(phase, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class ScaledComplex:
    """Complex number stored as ``exp(log_magnitude) * exp(1j * phase)``.

    Exact zero is flagged separately; its ``log_magnitude`` is ``-inf``.
    """

    log_magnitude: float
    phase: float = 0.0
    zero: bool = False

    @classmethod
    def from_complex(cls, value):
        value = complex(value)
        if value == 0:
            return cls.zero_value()
        return cls(math.log(abs(value)), _wrap_phase(math.atan2(value.imag, value.real)))

    @classmethod
    def zero_value(cls):
        return cls(-math.inf, 0.0, True)

    @classmethod
    def one(cls):
        return cls(0.0, 0.0)

    def to_complex(self):
        if self.zero:
            return 0j
        return math.exp(self.log_magnitude) * complex(math.cos(self.phase), math.sin(self.phase))

    def __complex__(self):
        return self.to_complex()

    def _coerce(self, other):
        if isinstance(other, ScaledComplex):
            return other
        return ScaledComplex.from_complex(other)

    def __mul__(self, other):
        other = self._coerce(other)
        if self.zero or other.zero:
            return ScaledComplex.zero_value()
        return ScaledComplex(
            self.log_magnitude + other.log_magnitude,
            _wrap_phase(self.phase + other.phase),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.zero:
            raise ZeroDivisionError("division by exact zero")
        if self.zero:
            return self
        return ScaledComplex(
            self.log_magnitude - other.log_magnitude,
            _wrap_phase(self.phase - other.phase),
        )

    def __neg__(self):
        if self.zero:
            return self
        return ScaledComplex(self.log_magnitude, _wrap_phase(self.phase + math.pi))

    def __add__(self, other):
        other = self._coerce(other)
        if self.zero:
            return other
        if other.zero:
            return self
        big, small = (self, other) if self.log_magnitude >= other.log_magnitude else (other, self)
        # big * (1 + small/big), the ratio has modulus <= 1
        ratio = math.exp(small.log_magnitude - big.log_magnitude)
        dphi = small.phase - big.phase
        factor = complex(1.0 + ratio * math.cos(dphi), ratio * math.sin(dphi))
        if factor == 0:
            return ScaledComplex.zero_value()
        return ScaledComplex(
            big.log_magnitude + math.log(abs(factor)),
            _wrap_phase(big.phase + math.atan2(factor.imag, factor.real)),
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)


@dataclass(frozen=True)
class ScaledArray:
    """Array of complex values ``mantissa * exp(log_scale)``.

    ``mantissa`` has modulus at most about one wherever the value is nonzero.
    """

    mantissa: np.ndarray
    log_scale: np.ndarray

    def to_complex(self):
        with np.errstate(under="ignore", over="raise"):
            return self.mantissa * np.exp(self.log_scale)

    def log_abs(self):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.log_scale

    def damped(self, log_factor):
        """Collapse ``value * exp(log_factor)`` to plain complex numbers.

        ``log_factor`` may be complex; its imaginary part is applied as a phase.
        """
        log_factor = np.asarray(log_factor)
        with np.errstate(under="ignore"):
            return self.mantissa * np.exp(self.log_scale + log_factor)

    def __getitem__(self, item):
        return ScaledArray(self.mantissa[item], self.log_scale[item])


def _scaled_iter(w, first, coeffs):
    """Yield ``(mantissa, log_scale)`` of y[0], y[1], ... for a recurrence.

    ``y[n] = a_n w y[n-1] - b_n y[n-2]`` with y[0] = 1, y[1] = ``first`` and
    ``coeffs(n) = (a_n, b_n)``.  The two carried values are rescaled to order
    one after every step, so the iteration never overflows.
    """
    w = np.asarray(w, dtype=complex)
    prev = np.ones(w.shape, dtype=complex)
    cur = np.asarray(first, dtype=complex) * np.ones(w.shape)
    scale = np.zeros(w.shape)
    yield prev.copy(), scale.copy()
    n = 1
    while True:
        if n > 1:
            a, b = coeffs(n)
            prev, cur = cur, a * w * cur - b * prev
        r = np.maximum(np.abs(cur), np.abs(prev))
        r = np.where(r > 0, r, 1.0)
        cur = cur / r
        prev = prev / r
        scale = scale + np.log(r)
        yield cur, scale
        n += 1


def legendre_iter(w):
    """Scaled Legendre values P_0(w), P_1(w), ... as an endless generator."""
    w = np.asarray(w, dtype=complex)
    return _scaled_iter(w, w, lambda n: ((2 * n - 1) / n, (n - 1) / n))


def gegenbauer_iter(alpha, w):
    """Scaled Gegenbauer values C_0^alpha(w), C_1^alpha(w), ..."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    w = np.asarray(w, dtype=complex)
    return _scaled_iter(
        w,
        2.0 * alpha * w,
        lambda n: (2.0 * (n + alpha - 1.0) / n, (n + 2.0 * alpha - 2.0) / n),
    )


def _collect(gen, nmax):
    mant, logs = zip(*(next(gen) for _ in range(nmax + 1)))
    return ScaledArray(np.array(mant), np.array(logs))


def legendre_table(nmax, w):
    """Scaled values P_0(w) .. P_nmax(w) for scalar or array ``w``.

    Uses ``(n+1) P_{n+1} = (2n+1) w P_n - n P_{n-1}`` upward from P_0 = 1.
    """
    return _collect(legendre_iter(w), nmax)


def gegenbauer_table(nmax, alpha, w):
    """Scaled values C_0^alpha(w) .. C_nmax^alpha(w).

    Recurrence ``n C_n = 2(n+alpha-1) w C_{n-1} - (n+2alpha-2) C_{n-2}`` with
    C_0 = 1 and C_1 = 2 alpha w.
    """
    return _collect(gegenbauer_iter(alpha, w), nmax)


def legendre_p(n, w):
    """Legendre polynomial P_n(w) at a complex scalar, as a :class:`ScaledComplex`."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    w = ScaledComplex.from_complex(w)
    prev, cur = ScaledComplex.one(), w
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1) * w * cur - k * prev) / (k + 1)
    return cur


def gegenbauer_c(n, alpha, w):
    """Gegenbauer polynomial C_n^alpha(w) at a complex scalar, scaled.

    Parameters
    ----------
    n : int
        Degree, nonnegative.
    alpha : float
        Positive index; the coherent-state coefficients use ``|m| + 1/2``.
    w : complex
        Argument.

    Returns
    -------
    ScaledComplex
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    w = ScaledComplex.from_complex(w)
    prev, cur = ScaledComplex.one(), (2.0 * alpha) * w
    if n == 0:
        return prev
    for k in range(2, n + 1):
        prev, cur = cur, (2.0 * (k + alpha - 1.0) * w * cur - (k + 2.0 * alpha - 2.0) * prev) / k
    return cur
