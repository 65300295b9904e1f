"""The theta-like product P_lambda with zeros on a perturbed integer lattice.

    P(z) = prod_{m>=0} (1 - e^{-2 pi m} e^{2 pi i lam_m} e^{-2 pi i z})
         * prod_{m>=1} (1 - e^{-2 pi m} e^{2 pi i lam_{-m}} e^{2 pi i z})

truncated at ``m <= M``.  The first product vanishes on ``n + lam_m + i m``
(m >= 0) and the second on ``n - lam_{-m} - i m`` (m >= 1), that is on
``n - lam_j + i j`` for j < 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, TruncationError
from .logspace import LogComplex

DEFAULT_TRUNCATION = 12
TAIL_TOLERANCE = 1e-14
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LambdaSequence:
    """A sequence m -> lam_m in [0, 1) with lam_0 = 0, truncated at M."""

    values: Callable[[int], float]
    M: int = DEFAULT_TRUNCATION
    normalized: bool = True

    def __post_init__(self):
        if not isinstance(self.M, (int, np.integer)) or self.M < 1:
            raise DomainError(f"truncation M must be a positive integer, got {self.M!r}")
        for m in range(-self.M - 1, self.M + 2):
            v = float(self.values(m))
            if not 0.0 <= v < 1.0:
                raise DomainError(f"lambda_{m} = {v!r} outside [0, 1)")
        if self.normalized and float(self.values(0)) != 0.0:
            raise DomainError(f"lambda_0 must be 0, got {self.values(0)!r}")

    def __call__(self, m: int) -> float:
        return float(self.values(m))

    @classmethod
    def constant(cls, value: float = 0.0, M: int = DEFAULT_TRUNCATION) -> "LambdaSequence":
        return cls(lambda m: value if m != 0 else 0.0, M)

    @classmethod
    def from_mapping(cls, table: Mapping[int, float], M: int = DEFAULT_TRUNCATION) -> "LambdaSequence":
        """Entries missing from ``table`` are 0."""
        table = {int(m): float(v) for m, v in table.items()}
        return cls(lambda m: table.get(m, 0.0), M)

    @classmethod
    def random(cls, rng: np.random.Generator, M: int = DEFAULT_TRUNCATION) -> "LambdaSequence":
        span = M + 2
        draws = rng.uniform(0.0, 1.0, 2 * span + 1)
        table = {m: float(draws[m + span]) for m in range(-span, span + 1)}
        table[0] = 0.0
        return cls.from_mapping(table, M)

    def shifted(self) -> "LambdaSequence":
        """The left shift m -> lam_{m+1}; its zeroth term is lam_1, not forced to 0."""
        f = self.values
        return LambdaSequence(lambda m: f(m + 1), self.M, normalized=False)

    def renormalized_shift(self) -> "LambdaSequence":
        """Left shift with the new zeroth term reset to 0."""
        f = self.values
        return LambdaSequence(lambda m: 0.0 if m == 0 else f(m + 1), self.M)

    def table(self) -> dict:
        return {m: self(m) for m in range(-self.M, self.M + 1)}


def check_truncation(M: int, z: complex) -> float:
    """Size of the first dropped factor's perturbation; raises if too large."""
    tail = math.exp(-TWO_PI * (M + 1) + TWO_PI * abs(complex(z).imag))
    if tail >= TAIL_TOLERANCE:
        raise TruncationError(
            f"truncation M={M} too small for Im z={complex(z).imag!r} (tail {tail:.3g})"
        )
    return tail


def _lattice_point(seq: LambdaSequence, n: int, m: int) -> complex:
    # second product: index j >= 1 vanishes at n - lam_{-j} - i j, i.e. Im = m = -j
    return complex(n + seq(m), m) if m >= 0 else complex(n - seq(m), m)


def lattice_zero(seq: LambdaSequence, z: complex) -> bool:
    """True when z lies exactly on one of the truncated zero lattices."""
    z = complex(z)
    if z.imag != round(z.imag) or abs(z.imag) > seq.M:
        return False
    m = int(z.imag)
    shift = seq(m) if m >= 0 else -seq(m)
    n = int(round(z.real - shift))
    return _lattice_point(seq, n, m) == z


def p_lambda(seq: LambdaSequence, z: complex) -> LogComplex:
    z = complex(z)
    check_truncation(seq.M, z)
    if lattice_zero(seq, z):
        return LogComplex.zero()
    m = np.arange(seq.M + 1)
    lam_pos = np.array([seq(i) for i in m])
    lam_neg = np.array([seq(-i) for i in m[1:]])
    w1 = np.exp(-TWO_PI * m + 1j * TWO_PI * (lam_pos - z))
    w2 = np.exp(-TWO_PI * m[1:] + 1j * TWO_PI * (lam_neg + z))
    factors = np.concatenate([1.0 - w1, 1.0 - w2])
    if np.any(factors == 0):
        return LogComplex.zero()
    log_mag = math.fsum(np.log1p(-w1).real) + math.fsum(np.log1p(-w2).real)
    arg = float(np.sum(np.angle(factors)))
    return LogComplex(log_mag, arg)


def relative_residual(a: LogComplex, b: LogComplex) -> float:
    """|a/b - 1| evaluated from log values; 0 when both vanish."""
    if a.is_zero and b.is_zero:
        return 0.0
    if a.is_zero or b.is_zero:
        return math.inf
    return abs(LogComplex(a.log_mag - b.log_mag, a.arg - b.arg).to_complex() - 1.0)


def periodicity_residual(seq: LambdaSequence, z: complex) -> float:
    """Relative mismatch in P(z + 1) = P(z)."""
    return relative_residual(p_lambda(seq, complex(z) + 1.0), p_lambda(seq, z))


def shift_residual(seq: LambdaSequence, z: complex) -> float:
    """Relative mismatch in P_lam(z + i) = -e^{-2 pi i z} e^{2 pi} P_{shift lam}(z).

    The relation needs lam_0 = 0; for a sequence with lam_0 != 0 the
    residual measures the failure of the identity, not rounding error.
    """
    z = complex(z)
    lhs = p_lambda(seq, z + 1j)
    factor = LogComplex(TWO_PI + TWO_PI * z.imag, math.pi - TWO_PI * z.real)
    rhs = factor * p_lambda(seq.shifted(), z)
    return relative_residual(lhs, rhs)


def zero_lattice(seq: LambdaSequence, n_range=range(-2, 3), m_max: int = 2) -> list:
    """Zeros of the truncated product with |Im| <= m_max and real shifts in n_range."""
    out = []
    for m in range(-m_max, m_max + 1):
        for n in n_range:
            out.append(_lattice_point(seq, n, m))
    return out
