"""Benchmark drivers, deterministic CSV/JSON emission, and self-checks.

Every driver walks its parameter grid in a fixed order and gives each
trial its own random stream keyed by (master_seed, experiment id, trial
index), so results do not depend on how trials are scheduled.  Success
counts are aggregated as plain integers and floats are written with 12
significant digits, which together make the emitted files byte-stable
across thread counts and re-runs.

CSV files open with '#' comment lines carrying the code version, the
master seed and, for the noise sweep, the noise-axis mapping; the column
header and schema follow unchanged.  Readers should skip '#' lines.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from . import noise as noise_mod
from . import pea, phase, stats
from .noise import NoiseParams
from .pea import CIRCUIT, IpeaConfig, run_ipea
from .qcore import RngStream

SCHEMAS: dict[str, tuple[str, ...]] = {
    "success-curve": (
        "m",
        "delta",
        "analytic_p",
        "analytic_p_acc",
        "trials",
        "successes_exact",
        "successes_acc",
        "rate_exact",
        "rate_acc",
        "stderr",
    ),
    "noise-sweep": (
        "m",
        "noise_case",
        "noise_level",
        "trials",
        "successes",
        "rate",
        "stderr",
        "master_seed",
    ),
    "cost-sweep": (
        "m",
        "gamma_ratio",
        "alpha",
        "epsilon",
        "n_total",
        "within_1e4",
        "unresolvable",
    ),
    "crosscheck": ("m", "mode_pair", "max_abs_discrepancy", "z_score", "trials"),
}

NOISE_CASES = ("xerr", "dephasing", "both")
NOISE_AXIS_DOC = (
    "noise level nu maps to delta_x=nu (xerr), gamma_ratio=nu (dephasing), "
    "or both at the same numeric value (both)"
)

# Cap recorded in place of a repetition total when some bit is unresolvable.
SATURATED_N_TOTAL = 10**12


@dataclass(frozen=True)
class ExperimentConfig:
    """CLI-facing bundle describing one driver invocation."""

    experiment: str
    m_list: tuple[int, ...]
    trials: int = 1000
    eps: float = 0.05
    deltas: tuple[float, ...] = ()
    noise_cases: tuple[str, ...] = NOISE_CASES
    levels: tuple[float, ...] = ()
    gammas: tuple[float, ...] = ()
    alpha: float = math.pi / 2.0
    alpha_policy: str = "fixed"
    master_seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    threads: int = 1

    def __post_init__(self) -> None:
        if self.experiment not in SCHEMAS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.m_list:
            raise ValueError("m grid must be non-empty")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")


@dataclass(frozen=True)
class ResultRow:
    """One output row; carries seed and version beyond the schema columns."""

    experiment: str
    values: dict
    master_seed: int
    version: str = __version__


def _format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def write_csv(path: str | Path, rows: Sequence[ResultRow], extra_comments: Iterable[str] = ()) -> Path:
    """Write rows under their schema with deterministic formatting."""
    if not rows:
        raise ValueError("refusing to write an empty result set")
    experiment = rows[0].experiment
    schema = SCHEMAS[experiment]
    path = Path(path)
    lines = [
        f"# artifact-ipea {rows[0].version} experiment={experiment} "
        f"master_seed={rows[0].master_seed}"
    ]
    lines.extend(f"# {c}" for c in extra_comments)
    lines.append(",".join(schema))
    for row in rows:
        if set(row.values) != set(schema):
            raise ValueError(
                f"row columns {sorted(row.values)} do not match schema {sorted(schema)}"
            )
        lines.append(",".join(_format_value(row.values[col]) for col in schema))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def write_json(path: str | Path, rows: Sequence[ResultRow]) -> Path:
    if not rows:
        raise ValueError("refusing to write an empty result set")
    path = Path(path)
    doc = {
        "experiment": rows[0].experiment,
        "version": rows[0].version,
        "master_seed": rows[0].master_seed,
        "rows": [row.values for row in rows],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _map_trials(worker: Callable[[int], tuple], trials: int, threads: int) -> list[tuple]:
    """Run worker(0..trials-1); order of results is always trial order."""
    if threads <= 1:
        return [worker(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(trials)))


def _alternating_fraction(m: int) -> phase.PhaseFraction:
    """Fixed non-trivial base pattern 0.1010... used by the success curve;
    the curve depends only on the remainder, so any base works."""
    return phase.PhaseFraction(tuple(1 if j % 2 == 0 else 0 for j in range(m)))


def exp_success_curve(
    m_list: Sequence[int],
    deltas: Sequence[float],
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> list[ResultRow]:
    """Empirical extraction rates vs the analytic success curve.

    Per (m, delta): the target phase is a fixed m-bit pattern plus
    delta * 2^-m; abstract-mode runs count exact hits and accuracy-2^-m
    hits.  The stderr column is the binomial error of rate_exact.
    """
    rows: list[ResultRow] = []
    for m in m_list:
        base = _alternating_fraction(m)
        for delta in deltas:
            phi = base.value + delta * 2.0**-m
            target, delta_actual = phase.decompose(phi, m)
            accepted = {f.bits for f in phase.acceptance_set(phi, m)}
            exp_id = f"success-curve/m={m}/delta={delta_actual:.17g}"
            config = IpeaConfig(m=m, mode=pea.ABSTRACT, phi=phi)

            def one_trial(t: int, config=config, target=target, accepted=accepted, exp_id=exp_id):
                rng = RngStream(master_seed, exp_id, t)
                fraction = run_ipea(config, rng).fraction
                return (
                    1 if fraction == target else 0,
                    1 if fraction.bits in accepted else 0,
                )

            outcomes = _map_trials(one_trial, trials, threads)
            n_exact = sum(o[0] for o in outcomes)
            n_acc = sum(o[1] for o in outcomes)
            rate_exact = n_exact / trials
            rate_acc = n_acc / trials
            rows.append(
                ResultRow(
                    "success-curve",
                    {
                        "m": m,
                        "delta": delta_actual,
                        "analytic_p": pea.success_probability(delta_actual, m),
                        "analytic_p_acc": pea.success_with_accuracy(delta_actual, m),
                        "trials": trials,
                        "successes_exact": n_exact,
                        "successes_acc": n_acc,
                        "rate_exact": rate_exact,
                        "rate_acc": rate_acc,
                        "stderr": math.sqrt(rate_exact * (1.0 - rate_exact) / trials),
                    },
                    master_seed,
                )
            )
    return rows


def noise_params_for_case(case: str, level: float) -> NoiseParams:
    """The documented noise-axis mapping for the sweep."""
    if case == "xerr":
        return NoiseParams(delta_x=level)
    if case == "dephasing":
        return NoiseParams(gamma_ratio=level)
    if case == "both":
        return NoiseParams(delta_x=level, gamma_ratio=level)
    raise ValueError(f"noise case must be one of {NOISE_CASES}, got {case!r}")


def exp_noise_sweep(
    m_list: Sequence[int],
    cases: Sequence[str],
    levels: Sequence[float],
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> list[ResultRow]:
    """Success rate of noisy circuit-mode runs over random coupling angles.

    Per grid point and trial: alpha is drawn uniformly from [-pi, pi), the
    two-qubit circuit runs with trajectory noise, and success means the
    result lies in the accuracy-2^-m acceptance pair of the effective
    phase.
    """
    rows: list[ResultRow] = []
    for m in m_list:
        for case in cases:
            for level in levels:
                params = noise_params_for_case(case, float(level))
                exp_id = f"noise-sweep/m={m}/case={case}/level={float(level):.17g}"

                def one_trial(t: int, m=m, params=params, exp_id=exp_id):
                    rng = RngStream(master_seed, exp_id, t)
                    alpha = -math.pi + 2.0 * math.pi * rng.uniform()
                    config = IpeaConfig(
                        m=m,
                        mode=CIRCUIT,
                        alpha=alpha,
                        noise=None if params.is_off else params,
                    )
                    fraction = run_ipea(config, rng).fraction
                    accepted = {
                        f.bits for f in phase.acceptance_set(pea.effective_phase(alpha), m)
                    }
                    return (1 if fraction.bits in accepted else 0,)

                outcomes = _map_trials(one_trial, trials, threads)
                successes = sum(o[0] for o in outcomes)
                rate = successes / trials
                rows.append(
                    ResultRow(
                        "noise-sweep",
                        {
                            "m": m,
                            "noise_case": case,
                            "noise_level": float(level),
                            "trials": trials,
                            "successes": successes,
                            "rate": rate,
                            "stderr": math.sqrt(rate * (1.0 - rate) / trials),
                            "master_seed": master_seed,
                        },
                        master_seed,
                    )
                )
    return rows


def exp_cost_sweep(
    m_list: Sequence[int],
    gammas: Sequence[float],
    eps: float,
    alpha: float = math.pi / 2.0,
    master_seed: int = 0,
) -> list[ResultRow]:
    """Total planned measurements per (m, gamma_ratio) at delta_x = 0, delta = 0.

    Purely analytic (no sampling; the seed only tags the rows).  When a bit
    is unresolvable, n_total is recorded saturated at 10^12 with the
    unresolvable flag set.
    """
    rows: list[ResultRow] = []
    for m in m_list:
        for gamma in gammas:
            params = NoiseParams(gamma_ratio=float(gamma))
            try:
                n_total = stats.plan(alpha, m, eps, params).n_total
                unresolvable = False
            except stats.UnresolvableBitError:
                n_total = SATURATED_N_TOTAL
                unresolvable = True
            rows.append(
                ResultRow(
                    "cost-sweep",
                    {
                        "m": m,
                        "gamma_ratio": float(gamma),
                        "alpha": alpha,
                        "epsilon": eps,
                        "n_total": n_total,
                        "within_1e4": int(not unresolvable and n_total <= 10**4),
                        "unresolvable": int(unresolvable),
                    },
                    master_seed,
                )
            )
    return rows


def step_correct_frequency(
    alpha: float,
    k: int,
    m: int,
    params: NoiseParams,
    trials: int,
    rng: RngStream,
) -> float:
    """Monte-Carlo frequency of reading the correct bit at iteration k.

    The phase is the exact circuit phase of alpha written to m bits
    (requires it to be exactly representable), earlier bits assumed
    correct; the analytic counterpart is noisy_bit_prob(alpha, k, 0, params).
    """
    phi = pea.effective_phase(alpha)
    fraction, remainder = phase.decompose(phi, m)
    if remainder != 0.0:
        raise ValueError(f"alpha={alpha!r} has no exact {m}-bit circuit phase")
    expected = fraction.bits[k - 1]
    omega = phase.feedback_angle(fraction.bits[k:])
    p0 = noise_mod.run_step_trajectories(
        alpha, k, omega, params, trials, rng, rz_sign=pea.RZ_FEEDBACK_SIGN
    )
    bits = np.where(rng.uniforms(trials) < p0, 0, 1)
    return float(np.mean(bits == expected))


def exp_crosscheck(
    m_list: Sequence[int],
    trials: int,
    master_seed: int,
    threads: int = 1,
) -> list[ResultRow]:
    """Two consistency rows per m.

    abstract_vs_circuit: noiseless per-step p0 discrepancy over every exact
    m-bit phase and every iteration, plus exhaustive extraction in both
    modes (an extraction miss saturates the discrepancy to 1).  z_score 0
    by construction.

    trajectory_vs_analytic: Monte-Carlo correct-bit frequency at iteration
    k = min(m, 4) under (alpha=pi/2, gamma=0.05, delta_x=0.1) against the
    closed-form probability; reports |diff| and the binomial z-score.
    """
    del threads  # sampling here is batched; kept for a uniform driver signature
    rows: list[ResultRow] = []
    for m in m_list:
        worst = 0.0
        for t in range(2**m):
            phi = t / float(2**m)
            alpha = pea.alpha_for_phase(phi)
            bits = phase.decompose(phi, m)[0].bits
            for k in range(m, 0, -1):
                omega = phase.feedback_angle(bits[k:])
                d = abs(
                    pea.step_prob_abstract(phi, k, omega) - pea.step_prob_circuit(alpha, k, omega)
                )
                worst = max(worst, d)
            for mode_cfg in (
                IpeaConfig(m=m, mode=pea.ABSTRACT, phi=phi),
                IpeaConfig(m=m, mode=CIRCUIT, alpha=alpha),
            ):
                rng = RngStream(master_seed, f"crosscheck/m={m}/extract/{mode_cfg.mode}", t)
                if run_ipea(mode_cfg, rng).fraction.bits != bits:
                    worst = 1.0
        rows.append(
            ResultRow(
                "crosscheck",
                {
                    "m": m,
                    "mode_pair": "abstract_vs_circuit",
                    "max_abs_discrepancy": worst,
                    "z_score": 0.0,
                    "trials": 2**m,
                },
                master_seed,
            )
        )
        k = min(m, 4)
        params = NoiseParams(delta_x=0.1, gamma_ratio=0.05)
        analytic = noise_mod.noisy_bit_prob(math.pi / 2.0, k, 0.0, params)
        rng = RngStream(master_seed, f"crosscheck/m={m}/trajectory", 0)
        freq = step_correct_frequency(math.pi / 2.0, k, m, params, trials, rng)
        sigma = math.sqrt(analytic * (1.0 - analytic) / trials)
        rows.append(
            ResultRow(
                "crosscheck",
                {
                    "m": m,
                    "mode_pair": "trajectory_vs_analytic",
                    "max_abs_discrepancy": abs(freq - analytic),
                    "z_score": (freq - analytic) / sigma,
                    "trials": trials,
                },
                master_seed,
            )
        )
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Dispatch an ExperimentConfig to its driver."""
    if config.experiment == "success-curve":
        deltas = config.deltas or tuple(round(0.1 * i, 2) for i in range(10))
        return exp_success_curve(
            config.m_list, deltas, config.trials, config.master_seed, config.threads
        )
    if config.experiment == "noise-sweep":
        levels = config.levels or (0.0, 0.02, 0.05, 0.1, 0.2)
        return exp_noise_sweep(
            config.m_list,
            config.noise_cases,
            levels,
            config.trials,
            config.master_seed,
            config.threads,
        )
    if config.experiment == "cost-sweep":
        gammas = config.gammas or (0.01, 0.1)
        alpha = config.alpha if config.alpha_policy == "fixed" else math.pi / 2.0
        return exp_cost_sweep(config.m_list, gammas, config.eps, alpha, config.master_seed)
    if config.experiment == "crosscheck":
        return exp_crosscheck(config.m_list, config.trials, config.master_seed, config.threads)
    raise ValueError(f"no driver for experiment {config.experiment!r}")


def comments_for(experiment: str) -> tuple[str, ...]:
    if experiment == "noise-sweep":
        return (NOISE_AXIS_DOC,)
    return ()


# ---------------------------------------------------------------------------
# Self-check suite behind the `verify` CLI subcommand


def _check_unitarity() -> tuple[bool, str]:
    from . import qcore

    worst = 0.0
    eye2, eye4 = np.eye(2), np.eye(4)
    for angle in np.linspace(-2.0 * math.pi, 2.0 * math.pi, 17):
        for g, eye in (
            (qcore.make_rx(angle), eye2),
            (qcore.make_rz(angle), eye2),
            (qcore.make_zz(angle), eye4),
            (qcore.make_controlled_phase(angle, 3), eye4),
        ):
            worst = max(worst, float(np.max(np.abs(g.conj().T @ g - eye))))
    worst = max(worst, float(np.max(np.abs(
        qcore.make_hadamard().conj().T @ qcore.make_hadamard() - eye2
    ))))
    return worst <= 1e-12, f"max |U^dag U - I| = {worst:.3e}"


def _check_zz_exponential() -> tuple[bool, str]:
    """make_zz against exp(-i a Z(x)Z) built by eigendecomposition."""
    from . import qcore

    zz_op = np.kron(np.diag([1.0, -1.0]), np.diag([1.0, -1.0]))
    evals, evecs = np.linalg.eigh(zz_op)
    worst = 0.0
    for a in (-1.3, -0.25, 0.0, 0.4, math.pi / 2.0, 2.2):
        expm = (evecs * np.exp(-1j * a * evals)) @ evecs.conj().T
        worst = max(worst, float(np.max(np.abs(expm - qcore.make_zz(a)))))
    return worst <= 1e-12, f"max |make_zz - expm| = {worst:.3e}"


def _check_determinism() -> tuple[bool, str]:
    draws_a = [RngStream(9, "verify", 5).uniform() for _ in range(3)]
    draws_b = [RngStream(9, "verify", 5).uniform() for _ in range(3)]
    if draws_a != draws_b:
        return False, "identical stream keys produced different draws"
    config = IpeaConfig(m=6, mode=CIRCUIT, alpha=1.234, noise=NoiseParams(0.1, 0.05))
    t1 = run_ipea(config, RngStream(11, "verify-run", 0))
    t2 = run_ipea(config, RngStream(11, "verify-run", 0))
    if t1.records != t2.records:
        return False, "identical seeds produced different transcripts"
    return True, "streams and transcripts repeat bit-identically"


def _check_erf_inv() -> tuple[bool, str]:
    worst = 0.0
    for y in np.linspace(-0.999, 0.999, 2001):
        worst = max(worst, abs(math.erf(stats.erf_inv(float(y))) - float(y)))
    return worst <= 1e-10, f"max round-trip error = {worst:.3e}"


def _check_product_identity() -> tuple[bool, str]:
    worst = 0.0
    for m in range(1, 17):
        for delta in np.arange(0.05, 1.0, 0.05):
            d = float(delta)
            worst = max(
                worst,
                abs(pea.success_probability(d, m) - pea.success_probability_product(d, m)),
            )
    return worst <= 1e-12, f"max |closed form - product| = {worst:.3e}"


def _check_mode_equivalence() -> tuple[bool, str]:
    worst = 0.0
    for alpha in np.linspace(-math.pi, math.pi, 13):
        phi = pea.effective_phase(float(alpha))
        for k in (1, 2, 5):
            for omega in (0.0, -0.3 * math.pi, -0.9 * math.pi):
                worst = max(
                    worst,
                    abs(
                        pea.step_prob_circuit(float(alpha), k, omega)
                        - pea.step_prob_abstract(phi, k, omega)
                    ),
                )
    return worst <= 1e-12, f"max |circuit - abstract| p0 gap = {worst:.3e}"


def _check_extraction() -> tuple[bool, str]:
    m = 6
    for t in range(2**m):
        phi = t / float(2**m)
        bits = phase.decompose(phi, m)[0].bits
        for config in (
            IpeaConfig(m=m, mode=pea.ABSTRACT, phi=phi),
            IpeaConfig(m=m, mode=CIRCUIT, alpha=pea.alpha_for_phase(phi)),
        ):
            got = run_ipea(config, RngStream(3, "verify-extract", t)).fraction.bits
            if got != bits:
                return False, f"phase {t}/2^{m} extracted as {got} in {config.mode} mode"
    return True, f"all {2**m} exact {m}-bit phases extracted in both modes"


VERIFY_CHECKS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("unitarity", _check_unitarity),
    ("zz exponential identity", _check_zz_exponential),
    ("rng determinism", _check_determinism),
    ("erf_inv round trip", _check_erf_inv),
    ("success-probability product identity", _check_product_identity),
    ("abstract/circuit mode equivalence", _check_mode_equivalence),
    ("deterministic extraction", _check_extraction),
)


def run_verify(printer: Callable[[str], None] = print) -> bool:
    """Run the oracle suite; one line per check, True when all pass."""
    all_ok = True
    for name, check in VERIFY_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        printer(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
