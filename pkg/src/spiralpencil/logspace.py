"""Nonzero complex numbers kept as (log-magnitude, argument) pairs."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
_LOG_MAX = math.log(np.finfo(float).max)


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = math.remainder(a, TWO_PI)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class LogComplex:
    log_mag: float
    arg: float = 0.0

    def __post_init__(self):
        if self.log_mag == -math.inf:
            object.__setattr__(self, "arg", 0.0)
        else:
            object.__setattr__(self, "arg", wrap_angle(float(self.arg)))

    @classmethod
    def zero(cls) -> "LogComplex":
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls.zero()
        return cls(math.log(abs(z)), cmath.phase(z))

    @classmethod
    def from_log(cls, w: complex) -> "LogComplex":
        """From a complex logarithm log|z| + i arg z (imaginary part unreduced)."""
        w = complex(w)
        return cls(w.real, w.imag)

    @property
    def is_zero(self) -> bool:
        return self.log_mag == -math.inf

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag + other.log_mag, self.arg + other.arg)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero element")
        if self.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_mag - other.log_mag, self.arg - other.arg)

    def __pow__(self, n: int) -> "LogComplex":
        if self.is_zero:
            return LogComplex.zero() if n > 0 else LogComplex(math.inf)
        return LogComplex(n * self.log_mag, n * self.arg)

    def to_complex(self) -> complex:
        """Linear value; overflows to inf for huge magnitudes."""
        if self.is_zero:
            return 0j
        if self.log_mag > _LOG_MAX:
            return cmath.rect(math.inf, self.arg)
        return cmath.rect(math.exp(self.log_mag), self.arg)

    def log(self) -> complex:
        return complex(self.log_mag, self.arg)


def log_add(a: LogComplex, b: LogComplex) -> LogComplex:
    """a + b with the larger magnitude factored out."""
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if b.log_mag > a.log_mag:
        a, b = b, a
    ratio = cmath.rect(math.exp(b.log_mag - a.log_mag), b.arg - a.arg)
    s = 1.0 + ratio
    if s == 0:
        return LogComplex.zero()
    return LogComplex(a.log_mag + math.log(abs(s)), a.arg + cmath.phase(s))


def log_sub(a: LogComplex, b: LogComplex) -> LogComplex:
    return log_add(a, LogComplex(b.log_mag, b.arg + math.pi))


def logaddexp(a, b):
    """log(exp(a) + exp(b)) for real log magnitudes, -inf aware."""
    return np.logaddexp(a, b)


def complex_log_sum(w, axis=-1) -> np.ndarray:
    """Sum of complex logarithms with log(0) mapped to -inf magnitude."""
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore"):
        mag = np.sum(np.log(np.abs(w)), axis=axis)
    arg = np.sum(np.angle(w), axis=axis)
    return mag + 1j * arg
