"""Binary phase fractions, remainders and measurement feedback angles.

A phase is a real number phi in [0, 1) understood as a binary fraction
0.x1 x2 ... : phi = sum_j x_j 2^{-j}.  Truncating after m bits splits it as

    phi = 0.x1...xm + delta * 2^{-m},    0 <= delta < 1,

and that remainder ``delta`` is the single parameter every success formula
in this package depends on.  The feedback angle rotates away the already
measured low bits so that each iteration faces a fresh binary digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_BITS = 52  # one float64 mantissa; beyond this the split cannot be exact

# The remainder delta is carried around as a plain float in [0, 1).
Remainder = float


@dataclass(frozen=True)
class PhaseFraction:
    """An exact m-bit binary fraction 0.x1 x2 ... xm, most significant first."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.bits) <= MAX_BITS:
            raise ValueError(f"need between 1 and {MAX_BITS} bits, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be 0 or 1, got {self.bits!r}")
        # Normalise any integer-like inputs (e.g. np.int64) to plain ints.
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @property
    def m(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> float:
        """Exact value sum_j x_j 2^{-j}; dyadic, so no rounding occurs."""
        acc = 0.0
        for j, b in enumerate(self.bits, start=1):
            if b:
                acc += 2.0**-j
        return acc

    @classmethod
    def from_value(cls, value: float, m: int) -> "PhaseFraction":
        """Exact m-bit fraction for a dyadic ``value`` = t / 2^m."""
        fraction, remainder = decompose(value, m)
        if remainder != 0.0:
            raise ValueError(f"{value!r} is not an exact {m}-bit fraction")
        return fraction

    def __str__(self) -> str:
        return "0." + "".join(str(b) for b in self.bits)


def decompose(phi: float, m: int) -> tuple[PhaseFraction, Remainder]:
    """Split phi in [0, 1) into its first m bits and the scaled remainder.

    Returns (fraction, delta) with phi = fraction.value + delta * 2^{-m}
    holding exactly in float64: phi * 2^m is an exact power-of-two scaling,
    and floor plus subtraction of floats of the same magnitude are exact.
    """
    if not 1 <= m <= MAX_BITS:
        raise ValueError(f"m must be in [1, {MAX_BITS}], got {m}")
    if not 0.0 <= phi < 1.0:
        raise ValueError(f"phi must lie in [0, 1), got {phi!r}")
    scaled = phi * float(2**m)
    t = int(math.floor(scaled))
    delta = scaled - t
    bits = tuple((t >> (m - j)) & 1 for j in range(1, m + 1))
    return PhaseFraction(bits), delta


def feedback_angle(measured_bits: Sequence[int] | Iterable[int]) -> float:
    """Feedback rotation for iteration k from the bits below it.

    ``measured_bits`` are (x_{k+1}, ..., x_m) in significance order; the
    angle is -2*pi * 0.0 x_{k+1} ... x_m, which lies in (-pi, 0].  An empty
    sequence (the first iteration, k = m) gives 0.
    """
    frac = 0.0
    for j, b in enumerate(measured_bits, start=2):
        if b not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {b!r}")
        if b:
            frac += 2.0**-j
    return -2.0 * math.pi * frac


def acceptance_set(phi: float, m: int) -> tuple[PhaseFraction, PhaseFraction]:
    """The two m-bit outcomes counted as accurate to 2^{-m}: the truncation
    0.x1...xm and its upper neighbour (0.x1...xm + 2^{-m}) mod 1."""
    fraction, _ = decompose(phi, m)
    t = sum(b << (m - j) for j, b in enumerate(fraction.bits, start=1))
    up = (t + 1) % 2**m
    upper = PhaseFraction(tuple((up >> (m - j)) & 1 for j in range(1, m + 1)))
    return fraction, upper


def phase_distance(a: float, b: float) -> float:
    """Distance between two phases on the unit circle: min(d, 1 - d)."""
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)
