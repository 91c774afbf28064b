"""Decoding: partial sums, bias correction, tail error, and the exact
integer fixed-point requantizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gre import PHI

__all__ = [
    "decode_partial_sum",
    "decode_bias_corrected",
    "bias_correction",
    "bias_correction_is_exact",
    "tail_error",
    "FixedPointValue",
    "requantize",
    "phi_power_mantissas",
    "min_frac_bits",
]


def _bit_array(bits):
    arr = getattr(bits, "bits", bits)
    return np.asarray(arr)


def decode_partial_sum(bits, beta: float) -> float:
    """sum of b_n * beta^(-n) over n = 0..N-1, compensated summation."""
    if not beta > 1.0:
        raise ValueError("beta must exceed 1")
    b = _bit_array(bits)
    n = np.arange(b.size, dtype=float)
    powers = np.power(beta, -n)
    return math.fsum(powers[b != 0])


def bias_correction(n_bits: int) -> float:
    """Constant added by the bias-corrected decoder: half of phi^(-N+2).

    Equals the mean tail error of exact unit-gain encoding over a uniform
    input, so subtracting it from the error (equivalently, adding it to the
    plain decode) centers the error at zero.
    """
    return 0.5 * PHI ** (-n_bits + 2)


def bias_correction_is_exact(bits) -> bool:
    """True when the stream came from the unit-gain exact quantizer, the
    only case where the correction constant is exact rather than heuristic."""
    p = getattr(bits, "params", {})
    return p.get("alpha") == 1 and p.get("nu1") == 1 and p.get("nu2") == 1


def decode_bias_corrected(bits) -> float:
    """Base-phi partial sum plus the mean-error correction.

    The constant is exact for unit-gain exact streams; for other golden
    ratio parameters it is applied as a heuristic (check
    :func:`bias_correction_is_exact`).
    """
    b = _bit_array(bits)
    return decode_partial_sum(b, PHI) + bias_correction(b.size)


def tail_error(u_n: float, u_next: float, n: int) -> float:
    """Reconstruction error after n bits in terms of the final state pair:
    phi^(-n) (u_n + phi * u_{n+1})."""
    return PHI ** (-n) * (u_n + PHI * u_next)


# ---------------------------------------------------------------------------
# fixed-point requantization


@dataclass(frozen=True)
class FixedPointValue:
    """Signed fixed-point number value = mantissa * 2^(-frac_bits).

    All arithmetic that produced the mantissa is exact integer arithmetic.
    """

    frac_bits: int
    mantissa: int

    def __post_init__(self):
        if self.frac_bits < 8:
            raise ValueError("frac_bits must be at least 8")

    def to_float(self) -> float:
        return math.ldexp(self.mantissa, -self.frac_bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.frac_bits)

    def binary_string(self) -> str:
        """Base-2 string, integer part then frac_bits fractional digits."""
        sign = "-" if self.mantissa < 0 else ""
        m = abs(self.mantissa)
        int_part = m >> self.frac_bits
        frac = m & ((1 << self.frac_bits) - 1)
        frac_digits = format(frac, f"0{self.frac_bits}b")
        return f"{sign}{int_part:b}.{frac_digits}"


def min_frac_bits(n_bits: int) -> int:
    """Smallest accepted fixed-point precision for an n-bit stream."""
    return math.ceil(n_bits * math.log2(PHI)) + 8


def phi_power_mantissas(count: int, frac_bits: int) -> list[int]:
    """Mantissas of the recursively generated base-2 representations of
    phi^0, phi^-1, phi^-2, ...

    The seed for phi^-1 is the truncation of (sqrt(5) - 1) / 2 to frac_bits
    fractional bits, obtained from the integer square root of 5 * 4^B so no
    floating point enters the digital path. Later terms follow the exact
    integer recurrence m_n = m_{n-2} - m_{n-1}, mirroring the identity
    phi^-n = phi^-(n-2) - phi^-(n-1).
    """
    if count < 1:
        return []
    one = 1 << frac_bits
    table = [one]
    if count == 1:
        return table
    root5 = math.isqrt(5 << (2 * frac_bits))
    table.append((root5 - one) >> 1)
    for _ in range(count - 2):
        table.append(table[-2] - table[-1])
    return table


def requantize(bits, frac_bits: int = 64) -> FixedPointValue:
    """Convert a base-phi stream to a conventional binary representation
    using exact integer arithmetic only.

    Accumulates x_N = sum of q_k * phi_k where phi_k is the fixed-point
    table from :func:`phi_power_mantissas`. Requires frac_bits at least
    ceil(N log2 phi) + 8.
    """
    b = _bit_array(bits)
    n = int(b.size)
    need = min_frac_bits(n)
    if frac_bits < need:
        raise ValueError(f"frac_bits={frac_bits} below minimum {need} for {n} bits")
    table = phi_power_mantissas(n, frac_bits)
    acc = 0
    for q, m in zip(b.tolist(), table):
        if q:
            acc += m
    return FixedPointValue(frac_bits=frac_bits, mantissa=acc)
