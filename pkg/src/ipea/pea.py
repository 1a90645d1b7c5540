"""Phase estimation runners: iterative, naive single-H, and Kitaev style.

The iterative estimator extracts an m-bit phase one binary digit at a time,
least significant first.  At iteration k (k = m down to 1) the ancilla
acquires the relative phase 2*pi*2^(k-1)*phi, a feedback rotation subtracts
the digits already known, and a Hadamard-type basis change turns the
remaining digit into a measurement statistic

    p0 = cos^2(pi * 2^(k-1) * phi + omega_k / 2).

Two execution modes produce that statistic.  Abstract mode evaluates it
directly.  Circuit mode simulates the two-qubit gate sequence

    RX(pi/2) . ZZ(alpha * 2^(k-1)) . RZ(-omega_k) . RX(-pi/2)

on |ancilla, target> = |00> through :mod:`ipea.qcore` and measures the
ancilla.  Multiplying those matrices out under the qcore conventions gives
the single-step probability cos^2(alpha*2^(k-1) - omega/2), so the circuit
realises the abstract iteration for the effective phase

    phi = (-alpha / pi) mod 1.

Both the RZ feedback sign and this alpha -> phi mapping are pinned by a
matrix-product test; change one and the deterministic-extraction suite
goes red.  They are exported as module constants so transcripts can record
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from . import noise as noise_mod
from . import qcore
from .noise import NoiseParams
from .phase import MAX_BITS, PhaseFraction, feedback_angle, phase_distance
from .qcore import RngStream, sample_bit

ABSTRACT = "abstract"
CIRCUIT = "circuit"

# Established by the four-matrix product oracle in the test suite: the
# feedback rotation enters the circuit as RZ(RZ_FEEDBACK_SIGN * omega_k),
# and the circuit with coupling alpha realises the abstract phase
# (ALPHA_TO_PHI_SIGN * alpha / pi) mod 1.
RZ_FEEDBACK_SIGN = -1.0
ALPHA_TO_PHI_SIGN = -1.0

CONVENTIONS = {
    "rz_feedback_sign": RZ_FEEDBACK_SIGN,
    "alpha_to_phi_sign": ALPHA_TO_PHI_SIGN,
}


def effective_phase(alpha: float) -> float:
    """Phase in [0, 1) extracted by the circuit with coupling angle alpha."""
    return (ALPHA_TO_PHI_SIGN * alpha / math.pi) % 1.0


def alpha_for_phase(phi: float) -> float:
    """Coupling angle whose circuit realises the abstract phase phi."""
    return ALPHA_TO_PHI_SIGN * math.pi * phi


def _abstract_alpha_abs(phi: float) -> float:
    """|alpha| of the shortest ZZ pulse realising phi; used for ledger time
    and for dephasing strength when running in abstract mode."""
    return math.pi * min(phi, 1.0 - phi)


@dataclass(frozen=True)
class IpeaConfig:
    """One iterative-estimation run.

    Abstract mode takes the phase ``phi`` in [0, 1) directly; circuit mode
    takes the coupling angle ``alpha`` in radians.  Exactly one of the two
    must be given, matching the mode.
    """

    m: int
    mode: Literal["abstract", "circuit"] = ABSTRACT
    phi: float | None = None
    alpha: float | None = None
    noise: NoiseParams | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or not 1 <= self.m <= MAX_BITS:
            raise ValueError(f"m must be an int in [1, {MAX_BITS}], got {self.m!r}")
        if self.mode == ABSTRACT:
            if self.phi is None or self.alpha is not None:
                raise ValueError("abstract mode takes phi and no alpha")
            if not 0.0 <= self.phi < 1.0:
                raise ValueError(f"phi must lie in [0, 1), got {self.phi!r}")
        elif self.mode == CIRCUIT:
            if self.alpha is None or self.phi is not None:
                raise ValueError("circuit mode takes alpha and no phi")
            if not math.isfinite(self.alpha):
                raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        else:
            raise ValueError(f"mode must be {ABSTRACT!r} or {CIRCUIT!r}, got {self.mode!r}")

    @property
    def target_phase(self) -> float:
        """The phase the run is trying to extract."""
        if self.mode == ABSTRACT:
            return float(self.phi)  # type: ignore[arg-type]
        return effective_phase(float(self.alpha))  # type: ignore[arg-type]


@dataclass
class MeasurementLedger:
    """Running cost totals: measurement rounds, controlled-phase powers
    applied (sum of 2^(k-1)), and evolution time in units of 1/lambda
    (sum of |alpha| * 2^(k-1) per gate)."""

    rounds: int = 0
    u_applications: int = 0
    total_evolution_time: float = 0.0

    def record_round(self, k: int, alpha_abs: float, repeats: int = 1) -> None:
        power = 2 ** (k - 1)
        self.rounds += repeats
        self.u_applications += power * repeats
        self.total_evolution_time += alpha_abs * power * repeats

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "u_applications": self.u_applications,
            "total_evolution_time": self.total_evolution_time,
        }


@dataclass(frozen=True)
class IterationRecord:
    k: int
    omega: float
    p0: float
    bit: int


@dataclass(frozen=True)
class RunTranscript:
    """Everything one run produced, in execution order (k = m down to 1)."""

    mode: str
    phi_or_alpha: float
    records: tuple[IterationRecord, ...]
    fraction: PhaseFraction
    ledger: MeasurementLedger

    def bits(self) -> tuple[int, ...]:
        return self.fraction.bits


def step_prob_abstract(phi: float, k: int, omega: float) -> float:
    """Noiseless probability of reading 0 at iteration k with feedback omega:
    cos^2(pi * 2^(k-1) * phi + omega/2).

    The multiple 2^(k-1)*phi is reduced mod 1 before the cosine (its period)
    so exact dyadic phases stay exact out to the 52-bit cap.
    """
    if not 1 <= k <= 62:
        raise ValueError(f"iteration index k must be in [1, 62], got {k}")
    reduced = math.fmod(phi * float(2 ** (k - 1)), 1.0)
    return math.cos(math.pi * reduced + 0.5 * omega) ** 2


def _abstract_round_p0(phi: float, k: int, omega: float, noise: NoiseParams | None) -> float:
    if noise is None:
        return step_prob_abstract(phi, k, omega)
    # Analytic fast path: damp the interference term, no trajectories.
    damp = noise_mod.damping_factor(_abstract_alpha_abs(phi), k, noise)
    reduced = math.fmod(phi * float(2 ** (k - 1)), 1.0)
    theta = 2.0 * (math.pi * reduced + 0.5 * omega)
    return 0.5 * (1.0 + damp * math.cos(theta))


def _circuit_round_p0(
    alpha: float,
    k: int,
    omega: float,
    noise: NoiseParams | None,
    rng: RngStream | None,
) -> float:
    """One simulated two-qubit round; draws one noise sample per active
    channel in gate order (first RX, ZZ kick, second RX)."""
    dx1 = dx2 = xi = 0.0
    if noise is not None and rng is not None:
        if noise.delta_x > 0.0:
            dx1 = noise_mod.sample_rx_error(noise, rng)
        if noise.gamma_ratio > 0.0:
            xi = noise_mod.sample_dephasing_kick(alpha, k, noise, rng)
        if noise.delta_x > 0.0:
            dx2 = noise_mod.sample_rx_error(noise, rng)
    psi = qcore.zero_state(2)
    psi = qcore.apply(qcore.make_rx(0.5 * math.pi + dx1), qcore.ANCILLA, psi)
    psi = qcore.apply(qcore.make_zz(alpha * float(2 ** (k - 1))), None, psi)
    if xi != 0.0:
        psi = qcore.apply(qcore.make_rz(xi), qcore.ANCILLA, psi)
    psi = qcore.apply(qcore.make_rz(RZ_FEEDBACK_SIGN * omega), qcore.ANCILLA, psi)
    psi = qcore.apply(qcore.make_rx(-0.5 * math.pi + dx2), qcore.ANCILLA, psi)
    return qcore.prob_zero(psi, qcore.ANCILLA)


def step_prob_circuit(alpha: float, k: int, omega: float) -> float:
    """Noiseless circuit-mode probability of reading 0 at iteration k,
    obtained by simulating the two-qubit sequence, not from a formula."""
    if not 1 <= k <= 62:
        raise ValueError(f"iteration index k must be in [1, 62], got {k}")
    return _circuit_round_p0(alpha, k, omega, None, None)


def run_ipea(config: IpeaConfig, rng: RngStream) -> RunTranscript:
    """Execute one iterative phase estimation run, one round per bit.

    Iterations go k = m down to 1; the feedback angle for iteration k is
    built from the already measured bits x_{k+1}..x_m.  Each round draws
    its noise samples (circuit mode) and exactly one measurement uniform,
    so the stream position after a run depends only on the configuration.
    """
    measured: list[int] = []  # in measurement order: x_m first
    records: list[IterationRecord] = []
    ledger = MeasurementLedger()
    if config.mode == ABSTRACT:
        alpha_abs = _abstract_alpha_abs(float(config.phi))  # type: ignore[arg-type]
    else:
        alpha_abs = abs(float(config.alpha))  # type: ignore[arg-type]
    for k in range(config.m, 0, -1):
        omega = feedback_angle(tuple(reversed(measured)))
        if config.mode == ABSTRACT:
            p0 = _abstract_round_p0(float(config.phi), k, omega, config.noise)  # type: ignore[arg-type]
        else:
            p0 = _circuit_round_p0(float(config.alpha), k, omega, config.noise, rng)  # type: ignore[arg-type]
        bit = sample_bit(p0, rng)
        ledger.record_round(k, alpha_abs)
        records.append(IterationRecord(k=k, omega=omega, p0=p0, bit=bit))
        measured.append(bit)
    fraction = PhaseFraction(tuple(reversed(measured)))
    phi_or_alpha = float(config.phi if config.mode == ABSTRACT else config.alpha)  # type: ignore[arg-type]
    return RunTranscript(
        mode=config.mode,
        phi_or_alpha=phi_or_alpha,
        records=tuple(records),
        fraction=fraction,
        ledger=ledger,
    )


# ---------------------------------------------------------------------------
# Closed-form success probabilities


def success_probability(delta: float, m: int) -> float:
    """Probability that a noiseless m-bit run returns the exact truncation:

        P(delta) = sin^2(pi*delta) / (2^(2m) * sin^2(pi * 2^-m * delta)),

    with the removable singularity P(0) = 1.  Decreasing in m for fixed
    delta, and P(1/2, m) -> 4/pi^2 from above as m grows.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive int, got {m!r}")
    if delta == 0.0:
        return 1.0
    num = math.sin(math.pi * delta) ** 2
    den = float(2 ** (2 * m)) * math.sin(math.pi * delta / float(2**m)) ** 2
    return num / den


def success_probability_product(delta: float, m: int) -> float:
    """The same success probability as a product over iterations,

        prod_{k=1..m} cos^2(pi * 2^(k-m-1) * delta),

    kept separate so the closed form above has an in-package identity
    partner (they agree to 1e-12; see the verification suite)."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta!r}")
    acc = 1.0
    for k in range(1, m + 1):
        acc *= math.cos(math.pi * delta * 2.0 ** (k - m - 1)) ** 2
    return acc


def success_with_accuracy(delta: float, m: int) -> float:
    """P(delta) + P(1 - delta): probability of landing on either neighbour
    of the true phase, i.e. accuracy 2^-m.  Bounded below by 8/pi^2."""
    return success_probability(delta, m) + success_probability(1.0 - delta, m)


# ---------------------------------------------------------------------------
# Naive single-Hadamard estimator


def run_naive_pea(phi: float, m: int, rng: RngStream) -> tuple[float, MeasurementLedger]:
    """Estimate phi by sampling the k = 1 round with no feedback.

    Each of N = 2^(2m) rounds reads 0 with probability cos^2(pi*phi); the
    estimate arccos(sqrt(p0_hat))/pi lies in [0, 1/2], so phi and 1 - phi
    are indistinguishable (cos^2 is even around 1/2).  The quadratic round
    count is what the iterative scheme exists to avoid.
    """
    if not 0.0 <= phi < 1.0:
        raise ValueError(f"phi must lie in [0, 1), got {phi!r}")
    if not isinstance(m, int) or not 1 <= m <= MAX_BITS:
        raise ValueError(f"m must be an int in [1, {MAX_BITS}], got {m!r}")
    n_rounds = 2 ** (2 * m)
    p0 = step_prob_abstract(phi, 1, 0.0)
    zeros = rng.binomial(n_rounds, p0)
    p0_hat = zeros / n_rounds
    estimate = math.acos(math.sqrt(p0_hat)) / math.pi
    ledger = MeasurementLedger()
    ledger.record_round(1, _abstract_alpha_abs(phi), repeats=n_rounds)
    return estimate, ledger


# ---------------------------------------------------------------------------
# Kitaev-style estimator


def kitaev_sample_count(m: int, eps: float) -> int:
    """Samples per quadrature so every beta_k lands within 1/8 of the truth
    with overall failure probability at most eps.

    Hoeffding: a sample mean of N draws misses by more than t = 0.15 with
    probability at most 2*exp(-2*N*t^2).  Splitting eps over m bits and two
    quadratures each gives N = ceil(ln(4m/eps) / (2 t^2)); estimates that
    good pin the angle to within asin(0.3*sqrt(2)) < 2*pi/8.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive int, got {m!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    t = 0.15
    return math.ceil(math.log(4.0 * m / eps) / (2.0 * t * t))


def run_kitaev_pea(
    phi: float, m: int, eps: float, rng: RngStream
) -> tuple[PhaseFraction, MeasurementLedger]:
    """Kitaev-style estimation of phi to m + 2 bits.

    For each k = 1..m the fractional multiple beta_k = frac(2^(k-1)*phi) is
    located on the unit circle from two quadrature statistics, each sampled
    N_s = kitaev_sample_count(m, eps) times:

        p_c estimates (1 + cos(2*pi*beta_k)) / 2      (no extra phase)
        p_s estimates (1 + sin(2*pi*beta_k)) / 2      (extra -pi/2 phase)

    Sampling uses one binomial count per quadrature, which is exactly the
    distribution of N_s single-shot rounds.  The beta estimates are then
    stitched together from the top: a_m = beta_m, and a_k is whichever of
    a_{k+1}/2 and a_{k+1}/2 + 1/2 lies closer (mod 1) to beta_k.  Each
    halving also halves the error, so a_1 determines phi to 2^-(m+2) and
    is returned rounded to that many bits.
    """
    if not 0.0 <= phi < 1.0:
        raise ValueError(f"phi must lie in [0, 1), got {phi!r}")
    if not isinstance(m, int) or not 1 <= m <= MAX_BITS - 2:
        raise ValueError(f"m must be an int in [1, {MAX_BITS - 2}], got {m!r}")
    n_s = kitaev_sample_count(m, eps)
    alpha_abs = _abstract_alpha_abs(phi)
    ledger = MeasurementLedger()
    betas: list[float] = []
    for k in range(1, m + 1):
        p_cos = step_prob_abstract(phi, k, 0.0)
        p_sin = step_prob_abstract(phi, k, -0.5 * math.pi)
        cos_hat = 2.0 * (rng.binomial(n_s, p_cos) / n_s) - 1.0
        sin_hat = 2.0 * (rng.binomial(n_s, p_sin) / n_s) - 1.0
        betas.append(math.atan2(sin_hat, cos_hat) / (2.0 * math.pi) % 1.0)
        ledger.record_round(k, alpha_abs, repeats=2 * n_s)
    estimate = betas[m - 1]
    for k in range(m - 1, 0, -1):
        half = (0.5 * estimate) % 1.0
        candidates = (half, (half + 0.5) % 1.0)
        estimate = min(candidates, key=lambda c: phase_distance(c, betas[k - 1]))
    scale = 2 ** (m + 2)
    index = int(round(estimate * scale)) % scale
    bits = tuple((index >> (m + 2 - j)) & 1 for j in range(1, m + 3))
    return PhaseFraction(bits), ledger
