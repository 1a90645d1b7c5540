"""Two-qubit simulator and benchmark harness for single-ancilla
iterative phase estimation."""

__version__ = "0.1.0"

from .noise import NoiseParams, analytic_success_with_noise, noisy_bit_prob
from .pea import (
    ABSTRACT,
    CIRCUIT,
    IpeaConfig,
    MeasurementLedger,
    RunTranscript,
    effective_phase,
    run_ipea,
    run_kitaev_pea,
    run_naive_pea,
    step_prob_abstract,
    step_prob_circuit,
    success_probability,
    success_with_accuracy,
)
from .phase import PhaseFraction, acceptance_set, decompose, feedback_angle
from .qcore import RngStream
from .stats import (
    RepetitionPlan,
    UnresolvableBitError,
    erf_inv,
    majority,
    plan,
    repetitions_for_bit,
    run_with_repetitions,
)

__all__ = [
    "ABSTRACT",
    "CIRCUIT",
    "IpeaConfig",
    "MeasurementLedger",
    "NoiseParams",
    "PhaseFraction",
    "RepetitionPlan",
    "RngStream",
    "RunTranscript",
    "UnresolvableBitError",
    "__version__",
    "acceptance_set",
    "analytic_success_with_noise",
    "decompose",
    "effective_phase",
    "erf_inv",
    "feedback_angle",
    "majority",
    "noisy_bit_prob",
    "plan",
    "repetitions_for_bit",
    "run_ipea",
    "run_kitaev_pea",
    "run_naive_pea",
    "run_with_repetitions",
    "step_prob_abstract",
    "step_prob_circuit",
    "success_probability",
    "success_with_accuracy",
]
