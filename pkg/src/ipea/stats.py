"""Repetition budgeting: inverse error function, per-bit counts, runners.

A noisy bit with correct-read probability p > 1/2 can be cleaned up by
majority voting.  Asking each of the m bits to fail with probability at
most eps/m and applying the usual Gaussian tail bound for a majority of N
coin flips gives the per-bit count

    N_k = 1/8 * (erf_inv(1 - 2*eps/m) / (P'_k - 1/2))^2,

rounded up to the next odd integer.  The exponential decay of P'_k - 1/2
with k is what ultimately caps how many bits a given budget can buy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import pea
from .noise import NoiseParams, noisy_bit_prob
from .pea import CIRCUIT, IpeaConfig, MeasurementLedger, run_ipea
from .phase import PhaseFraction, feedback_angle
from .qcore import RngStream, sample_bit

_HALF_GAP_MIN = 1e-9


class UnresolvableBitError(ValueError):
    """A bit whose correct-read probability is within 1e-9 of a fair coin:
    no finite repetition count can resolve it."""

    def __init__(self, p_bit: float, k: int | None = None):
        self.p_bit = p_bit
        self.k = k
        where = f" at iteration k={k}" if k is not None else ""
        super().__init__(f"bit probability {p_bit!r}{where} is too close to 1/2 to repeat away")


def erf_inv(y: float) -> float:
    """Inverse of the error function on (-1, 1).

    A rational initial approximation (one log, two square roots) lands
    within about 1e-2, then Newton steps against the library erf polish to
    full double precision; the derivative 2/sqrt(pi) * exp(-x^2) is cheap
    and the iteration is self-correcting.  Round trip |erf(erf_inv(y)) - y|
    stays below 1e-10 across (-1, 1).
    """
    if not -1.0 < y < 1.0:
        raise ValueError(f"erf_inv needs |y| < 1, got {y!r}")
    if y == 0.0:
        return 0.0
    # Initial guess (Winitzki's approximation).
    a = 0.147
    ln_term = math.log1p(-y * y)
    u = 2.0 / (math.pi * a) + 0.5 * ln_term
    x = math.copysign(math.sqrt(math.sqrt(u * u - ln_term / a) - u), y)
    two_over_sqrt_pi = 2.0 / math.sqrt(math.pi)
    for _ in range(6):
        err = math.erf(x) - y
        if err == 0.0:
            break
        step = err / (two_over_sqrt_pi * math.exp(-x * x))
        x -= step
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def repetitions_for_bit(p_bit: float, eps: float, m: int) -> int:
    """Odd repetition count for one bit with correct-read probability p_bit,
    budgeting a failure probability of eps/m for it.  At least 1; raises
    UnresolvableBitError when p_bit is not meaningfully above 1/2."""
    if not 0.0 <= p_bit <= 1.0:
        raise ValueError(f"p_bit must lie in [0, 1], got {p_bit!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive int, got {m!r}")
    if p_bit == 1.0:
        # Degenerate Bernoulli: one round always reads correctly, and the
        # normal approximation behind the formula does not apply.
        return 1
    gap = p_bit - 0.5
    if gap <= _HALF_GAP_MIN:
        raise UnresolvableBitError(p_bit)
    raw = 0.125 * (erf_inv(1.0 - 2.0 * eps / m) / gap) ** 2
    n = max(1, math.ceil(raw))
    return n if n % 2 == 1 else n + 1


@dataclass(frozen=True)
class RepetitionPlan:
    """Per-bit repetition counts for an m-bit run; counts[k-1] belongs to
    iteration k, so the first measured bit (k = m) sits at the end."""

    alpha: float
    m: int
    epsilon: float
    noise: NoiseParams
    delta: float
    counts: tuple[int, ...]

    @property
    def per_bit_budget(self) -> float:
        return self.epsilon / self.m

    @property
    def n_total(self) -> int:
        return sum(self.counts)

    def count_for(self, k: int) -> int:
        return self.counts[k - 1]


def plan(
    alpha: float,
    m: int,
    eps: float,
    noise: NoiseParams,
    delta: float = 0.0,
) -> RepetitionPlan:
    """Repetition counts for every bit of an m-bit run at coupling alpha.

    Uses the analytic per-bit probabilities, so planning costs nothing
    compared to running.  Raises UnresolvableBitError (carrying k) as soon
    as some bit cannot be resolved; with dephasing on, that is always the
    earliest-measured bits, since damping grows as 2^k.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    scaled = delta / float(2**m)
    counts = []
    for k in range(1, m + 1):
        p_bit = noisy_bit_prob(alpha, k, scaled, noise)
        try:
            counts.append(repetitions_for_bit(p_bit, eps, m))
        except UnresolvableBitError as exc:
            raise UnresolvableBitError(exc.p_bit, k=k) from None
    return RepetitionPlan(
        alpha=alpha, m=m, epsilon=eps, noise=noise, delta=delta, counts=tuple(counts)
    )


def uniform_plan(
    alpha: float,
    m: int,
    repeats: int,
    first_bits: int | None = None,
) -> RepetitionPlan:
    """Fixed repetition counts with no noise model behind them: ``repeats``
    (rounded up to odd) for the first ``first_bits`` measured bits (k = m
    downward), a single shot for the rest.  This is the tunable few-bit
    variant; first_bits=None repeats every bit."""
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if repeats % 2 == 0:
        repeats += 1
    if first_bits is None:
        first_bits = m
    if not 0 <= first_bits <= m:
        raise ValueError(f"first_bits must lie in [0, m], got {first_bits}")
    counts = tuple(repeats if k > m - first_bits else 1 for k in range(1, m + 1))
    return RepetitionPlan(
        alpha=alpha, m=m, epsilon=float("nan"), noise=NoiseParams(), delta=0.0, counts=counts
    )


def majority(bits: Sequence[int]) -> int:
    """Majority vote over an odd number of 0/1 outcomes."""
    if len(bits) % 2 == 0:
        raise ValueError(f"majority needs an odd count, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return 1 if 2 * sum(bits) > len(bits) else 0


def _plan_alpha(config: IpeaConfig) -> float:
    if config.mode == CIRCUIT:
        return float(config.alpha)  # type: ignore[arg-type]
    return pea._abstract_alpha_abs(float(config.phi))  # type: ignore[arg-type]


def run_with_repetitions(
    config: IpeaConfig,
    eps: float,
    rng: RngStream,
    repetition_plan: RepetitionPlan | None = None,
) -> tuple[PhaseFraction, MeasurementLedger]:
    """Iterative run with each bit measured N_k times and majority-voted.

    The plan defaults to the analytic one for the config's noise model
    (every count is 1 when no noise is configured, matching the single-shot
    run).  Feedback for later bits uses the voted values, so a cleaned-up
    early bit protects everything after it.
    """
    if repetition_plan is None:
        if config.noise is None or config.noise.is_off:
            repetition_plan = uniform_plan(_plan_alpha(config), config.m, 1)
        else:
            repetition_plan = plan(_plan_alpha(config), config.m, eps, config.noise)
    if repetition_plan.m != config.m:
        raise ValueError(f"plan is for m={repetition_plan.m}, config has m={config.m}")
    measured: list[int] = []
    ledger = MeasurementLedger()
    if config.mode == CIRCUIT:
        alpha_abs = abs(float(config.alpha))  # type: ignore[arg-type]
    else:
        alpha_abs = pea._abstract_alpha_abs(float(config.phi))  # type: ignore[arg-type]
    for k in range(config.m, 0, -1):
        omega = feedback_angle(tuple(reversed(measured)))
        votes = []
        for _ in range(repetition_plan.count_for(k)):
            if config.mode == CIRCUIT:
                p0 = pea._circuit_round_p0(
                    float(config.alpha), k, omega, config.noise, rng  # type: ignore[arg-type]
                )
            else:
                p0 = pea._abstract_round_p0(
                    float(config.phi), k, omega, config.noise  # type: ignore[arg-type]
                )
            votes.append(sample_bit(p0, rng))
            ledger.record_round(k, alpha_abs)
        measured.append(majority(votes))
    return PhaseFraction(tuple(reversed(measured))), ledger


def guard_bits(eps: float) -> int:
    """Extra low bits to run so that truncating back still meets accuracy
    2^-m with probability >= 1 - eps: ceil(log2(2 + 1/(2 eps)))."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    return math.ceil(math.log2(2.0 + 1.0 / (2.0 * eps)))


def run_with_guard_bits(
    config: IpeaConfig, eps: float, rng: RngStream
) -> tuple[PhaseFraction, MeasurementLedger]:
    """Single-shot run at m' = m + guard_bits(eps) bits, truncated to m.

    The alternative to repetition: the extra digits absorb the rounding
    tail, so the kept m bits are accurate to 2^-m with probability at
    least 1 - eps.
    """
    extra = guard_bits(eps)
    wide = IpeaConfig(
        m=config.m + extra,
        mode=config.mode,
        phi=config.phi,
        alpha=config.alpha,
        noise=config.noise,
    )
    transcript = run_ipea(wide, rng)
    return PhaseFraction(transcript.fraction.bits[: config.m]), transcript.ledger
