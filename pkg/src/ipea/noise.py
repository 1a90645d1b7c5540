"""Gaussian control-error and dephasing model.

Two channels, both Gaussian and independent between rounds:

* X-rotation over-rotation: each RX(+-pi/2) in a round is executed as
  RX(+-pi/2 + d) with d ~ N(0, delta_x^2), a fresh draw per gate.
  ``delta_x`` is the standard deviation of the over-rotation angle.
* Dephasing during the entangling gate: the ancilla picks up one extra
  relative phase kick xi ~ N(0, sigma^2) per round with
  sigma^2 = 2 * |alpha| * 2^k * gamma_ratio, where gamma_ratio is the
  dephasing rate over the coupling strength.  Averaging e^{i xi} over the
  Gaussian gives the damping e^{-sigma^2/2} = e^{-|alpha| 2^k gamma}.

Averaging a round over both channels multiplies the interference term by

    exp(-delta_x^2 - |alpha| * 2^k * gamma_ratio),

so the probability of reading the correct bit at iteration k of an m-bit
run (given correct earlier bits) becomes

    P'_k = 1/2 * (1 + exp(-delta_x^2 - |alpha| 2^k gamma) * cos(pi 2^(k-m) delta)).

The batched trajectory runner at the bottom simulates the full two-qubit
round with per-sample gate matrices; it exists so the formula above can be
checked against an independent route at Monte-Carlo scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import RngStream


@dataclass(frozen=True)
class NoiseParams:
    """delta_x: std dev of the RX over-rotation angle (radians).
    gamma_ratio: dephasing rate over coupling strength, Gamma_phi/lambda."""

    delta_x: float = 0.0
    gamma_ratio: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta_x) and self.delta_x >= 0.0):
            raise ValueError(f"delta_x must be finite and >= 0, got {self.delta_x!r}")
        if not (math.isfinite(self.gamma_ratio) and self.gamma_ratio >= 0.0):
            raise ValueError(f"gamma_ratio must be finite and >= 0, got {self.gamma_ratio!r}")

    @property
    def is_off(self) -> bool:
        return self.delta_x == 0.0 and self.gamma_ratio == 0.0


def damping_factor(alpha: float, k: int, params: NoiseParams) -> float:
    """exp(-delta_x^2 - |alpha| * 2^k * gamma_ratio) for iteration k."""
    if not 1 <= k <= 62:
        raise ValueError(f"iteration index k must be in [1, 62], got {k}")
    return math.exp(-params.delta_x**2 - abs(alpha) * float(2**k) * params.gamma_ratio)


def noisy_bit_prob(alpha: float, k: int, scaled_remainder: float, params: NoiseParams) -> float:
    """Probability of measuring the correct bit at iteration k under noise.

    ``scaled_remainder`` is the truncation remainder already divided by 2^m
    (so the interference angle is pi * 2^k * scaled_remainder); pass 0 for
    an exact phase.  Reduces to the noiseless cos^2(pi 2^(k-m-1) delta) when
    both channels are off.
    """
    damp = damping_factor(alpha, k, params)
    angle = math.pi * float(2**k) * scaled_remainder
    return 0.5 * (1.0 + damp * math.cos(angle))


def analytic_success_with_noise(alpha: float, m: int, delta: float, params: NoiseParams) -> float:
    """Product of the per-bit probabilities P'_k over k = 1..m: the chance
    all m bits come out right.  Equals the noiseless success probability
    when the channels are off, and collapses toward 2^-m as damping kills
    the interference term."""
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive int, got {m!r}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    scaled = delta / float(2**m)
    acc = 1.0
    for k in range(1, m + 1):
        acc *= noisy_bit_prob(alpha, k, scaled, params)
    return acc


def sample_rx_error(params: NoiseParams, rng: RngStream) -> float:
    """One over-rotation angle d ~ N(0, delta_x^2)."""
    if params.delta_x == 0.0:
        return 0.0
    return rng.normal(params.delta_x)


def sample_dephasing_kick(alpha: float, k: int, params: NoiseParams, rng: RngStream) -> float:
    """One phase kick xi ~ N(0, 2 * |alpha| * 2^k * gamma_ratio)."""
    if not 1 <= k <= 62:
        raise ValueError(f"iteration index k must be in [1, 62], got {k}")
    variance = 2.0 * abs(alpha) * float(2**k) * params.gamma_ratio
    if variance == 0.0:
        return 0.0
    return rng.normal(math.sqrt(variance))


def run_step_trajectories(
    alpha: float,
    k: int,
    omega: float,
    params: NoiseParams,
    n: int,
    rng: RngStream,
    rz_sign: float = -1.0,
) -> np.ndarray:
    """Simulate n noisy rounds of iteration k at once; returns the n
    per-trajectory probabilities of reading 0 on the ancilla.

    Matches the scalar circuit path gate for gate (RX, ZZ, kick, feedback
    RZ, RX) but carries a batch axis through the matrix algebra, which is
    what makes 1e5-trajectory cross-checks affordable.  Draw order per
    batch: first RX errors, kicks, second RX errors.
    """
    if n < 1:
        raise ValueError(f"need at least one trajectory, got {n}")
    dx1 = np.zeros(n)
    dx2 = np.zeros(n)
    xi = np.zeros(n)
    if params.delta_x > 0.0:
        dx1 = rng.normals(n, params.delta_x)
    if params.gamma_ratio > 0.0:
        sigma = math.sqrt(2.0 * abs(alpha) * float(2**k) * params.gamma_ratio)
        xi = rng.normals(n, sigma)
    if params.delta_x > 0.0:
        dx2 = rng.normals(n, params.delta_x)

    def rx_batch(theta: np.ndarray) -> np.ndarray:
        c = np.cos(0.5 * theta)
        s = np.sin(0.5 * theta)
        out = np.empty((len(theta), 2, 2), dtype=np.complex128)
        out[:, 0, 0] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
        out[:, 1, 1] = c
        return out

    # State as (n, ancilla, target); target starts and stays in |0>.
    psi = np.zeros((n, 2, 2), dtype=np.complex128)
    psi[:, 0, 0] = 1.0
    psi = np.einsum("nij,njt->nit", rx_batch(0.5 * math.pi + dx1), psi)
    zz = np.asarray(qcore.make_zz(alpha * float(2 ** (k - 1)))).reshape(2, 2, 2, 2)
    # make_zz is diagonal: contract only its diagonal (a, t) phases.
    zz_diag = np.einsum("atat->at", zz)
    psi = psi * zz_diag[None, :, :]
    ancilla_phase = np.exp(0.5j * (xi + rz_sign * omega))
    psi = psi * np.stack([np.conj(ancilla_phase), ancilla_phase], axis=1)[:, :, None]
    psi = np.einsum("nij,njt->nit", rx_batch(-0.5 * math.pi + dx2), psi)
    return np.abs(psi[:, 0, 0]) ** 2 + np.abs(psi[:, 0, 1]) ** 2
