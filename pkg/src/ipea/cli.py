"""Command-line front end.

Subcommands:
  run            one phase-estimation run, transcript as JSON on stdout
  success-curve  empirical vs analytic success rates over a delta grid
  noise-sweep    circuit-mode success rates under trajectory noise
  cost-sweep     planned measurement totals from the repetition formula
  crosscheck     abstract/circuit and trajectory/analytic consistency
  kitaev         one two-quadrature reference run
  naive          one fixed-batch reference run at the first harmonic
  verify         internal oracle suite

Exit status: 0 on success, 1 when a run or check fails, 2 on bad
arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__, bench, pea, phase, stats
from .bench import ExperimentConfig, NOISE_CASES
from .noise import NoiseParams
from .pea import CONVENTIONS, IpeaConfig
from .qcore import RngStream


def _parse_m_list(text: str) -> tuple[int, ...]:
    """Accept '5', '3,5,7' or '2..11' (inclusive range)."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise ValueError(f"empty m range {text!r}")
        return tuple(range(lo, hi + 1))
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def _noise_from_args(args: argparse.Namespace) -> NoiseParams | None:
    delta_x = getattr(args, "delta_x", 0.0) or 0.0
    gamma = getattr(args, "gamma", 0.0) or 0.0
    if delta_x == 0.0 and gamma == 0.0:
        return None
    return NoiseParams(delta_x=delta_x, gamma_ratio=gamma)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="trial-level worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipea",
        description="Two-qubit iterative phase estimation simulator and benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run with full transcript")
    p_run.add_argument("--m", type=int, required=True, help="number of phase bits")
    group = p_run.add_mutually_exclusive_group(required=True)
    group.add_argument("--phi", type=float, help="target phase in [0, 1) (abstract mode)")
    group.add_argument("--alpha", type=float, help="coupling angle (circuit mode)")
    p_run.add_argument(
        "--mode",
        choices=(pea.ABSTRACT, pea.CIRCUIT),
        default=None,
        help="defaults to abstract with --phi, circuit with --alpha",
    )
    p_run.add_argument("--gamma", type=float, default=0.0, help="dephasing ratio Gamma_phi/lambda")
    p_run.add_argument("--delta-x", type=float, default=0.0, help="control-error spread")
    _add_common(p_run)

    p_curve = sub.add_parser("success-curve", help="success rate vs phase remainder")
    p_curve.add_argument("--m", type=_parse_m_list, required=True, help="e.g. 3,5,7 or 2..11")
    p_curve.add_argument("--delta", type=_parse_float_list, default=(), help="remainder grid in [0,1)")
    p_curve.add_argument("--trials", type=int, default=1000)
    _add_common(p_curve)
    _add_output(p_curve)

    p_noise = sub.add_parser("noise-sweep", help="success under trajectory noise")
    p_noise.add_argument("--m", type=_parse_m_list, required=True)
    p_noise.add_argument("--case", choices=NOISE_CASES + ("all",), default="all")
    p_noise.add_argument("--levels", type=_parse_float_list, default=(), help="noise level grid")
    p_noise.add_argument("--trials", type=int, default=1000)
    _add_common(p_noise)
    _add_output(p_noise)

    p_cost = sub.add_parser("cost-sweep", help="repetition totals from the budget formula")
    p_cost.add_argument("--m", type=_parse_m_list, required=True)
    p_cost.add_argument("--gamma", type=_parse_float_list, default=(), help="gamma ratio grid")
    p_cost.add_argument("--eps", type=float, default=0.05, help="total failure budget")
    p_cost.add_argument("--alpha", type=float, default=math.pi / 2.0)
    p_cost.add_argument(
        "--alpha-policy",
        choices=("fixed", "halfpi"),
        default="fixed",
        help="use --alpha as given, or force pi/2",
    )
    _add_common(p_cost)
    _add_output(p_cost)

    p_cross = sub.add_parser("crosscheck", help="mode and trajectory consistency")
    p_cross.add_argument("--m", type=_parse_m_list, required=True)
    p_cross.add_argument("--trials", type=int, default=100000)
    _add_common(p_cross)
    _add_output(p_cross)

    p_kitaev = sub.add_parser("kitaev", help="two-quadrature reference estimator")
    p_kitaev.add_argument("--m", type=int, required=True)
    p_kitaev.add_argument("--phi", type=float, required=True)
    p_kitaev.add_argument("--eps", type=float, default=0.05)
    _add_common(p_kitaev)

    p_naive = sub.add_parser("naive", help="fixed-batch reference estimator")
    p_naive.add_argument("--m", type=int, required=True)
    p_naive.add_argument("--phi", type=float, required=True)
    _add_common(p_naive)

    sub.add_parser("verify", help="run the internal oracle suite")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    mode = args.mode
    if mode is None:
        mode = pea.ABSTRACT if args.phi is not None else pea.CIRCUIT
    if mode == pea.ABSTRACT and args.phi is None:
        print("error: abstract mode needs --phi", file=sys.stderr)
        return 2
    if mode == pea.CIRCUIT and args.alpha is None:
        print("error: circuit mode needs --alpha", file=sys.stderr)
        return 2
    config = IpeaConfig(
        m=args.m,
        mode=mode,
        phi=args.phi,
        alpha=args.alpha,
        noise=_noise_from_args(args),
    )
    rng = RngStream(args.seed, f"cli/run/m={args.m}", 0)
    transcript = pea.run_ipea(config, rng)
    print("bits: " + "".join(str(b) for b in transcript.bits()))
    doc = {
        "phi_or_alpha": config.target_phase if mode == pea.ABSTRACT else config.alpha,
        "m": config.m,
        "mode": mode,
        "bits": list(transcript.bits()),
        "iterations": [
            {"k": r.k, "omega": r.omega, "p0": r.p0, "bit": r.bit}
            for r in transcript.records
        ],
        "ledger": transcript.ledger.as_dict(),
        "seed": args.seed,
        "conventions": CONVENTIONS,
    }
    print(json.dumps(doc, indent=2))
    return 0


def _emit(rows, args: argparse.Namespace, experiment: str) -> int:
    if args.format == "json":
        path = bench.write_json(args.out, rows)
    else:
        path = bench.write_csv(args.out, rows, bench.comments_for(experiment))
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_success_curve(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        experiment="success-curve",
        m_list=args.m,
        trials=args.trials,
        deltas=args.delta,
        master_seed=args.seed,
        out=args.out,
        fmt=args.format,
        threads=args.threads,
    )
    return _emit(bench.run_experiment(config), args, config.experiment)


def _cmd_noise_sweep(args: argparse.Namespace) -> int:
    cases = NOISE_CASES if args.case == "all" else (args.case,)
    config = ExperimentConfig(
        experiment="noise-sweep",
        m_list=args.m,
        trials=args.trials,
        noise_cases=cases,
        levels=args.levels,
        master_seed=args.seed,
        out=args.out,
        fmt=args.format,
        threads=args.threads,
    )
    return _emit(bench.run_experiment(config), args, config.experiment)


def _cmd_cost_sweep(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        experiment="cost-sweep",
        m_list=args.m,
        eps=args.eps,
        gammas=args.gamma,
        alpha=args.alpha,
        alpha_policy="fixed" if args.alpha_policy == "fixed" else "halfpi",
        master_seed=args.seed,
        out=args.out,
        fmt=args.format,
    )
    return _emit(bench.run_experiment(config), args, config.experiment)


def _cmd_crosscheck(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        experiment="crosscheck",
        m_list=args.m,
        trials=args.trials,
        master_seed=args.seed,
        out=args.out,
        fmt=args.format,
        threads=args.threads,
    )
    return _emit(bench.run_experiment(config), args, config.experiment)


def _cmd_kitaev(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed, f"cli/kitaev/m={args.m}", 0)
    fraction, ledger = pea.run_kitaev_pea(args.phi, args.m, args.eps, rng)
    doc = {
        "phi": args.phi,
        "m": args.m,
        "eps": args.eps,
        "estimate_bits": str(fraction),
        "estimate": fraction.value,
        "abs_error": phase.phase_distance(fraction.value, args.phi),
        "ledger": ledger.as_dict(),
        "seed": args.seed,
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_naive(args: argparse.Namespace) -> int:
    rng = RngStream(args.seed, f"cli/naive/m={args.m}", 0)
    estimate, ledger = pea.run_naive_pea(args.phi, args.m, rng)
    doc = {
        "phi": args.phi,
        "m": args.m,
        "estimate": estimate,
        "abs_error": min(
            phase.phase_distance(estimate, args.phi),
            phase.phase_distance(1.0 - estimate, args.phi),
        ),
        "note": "estimate lies in [0, 1/2]; phi and 1-phi are indistinguishable here",
        "ledger": ledger.as_dict(),
        "seed": args.seed,
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_verify(_args: argparse.Namespace) -> int:
    return 0 if bench.run_verify() else 1


_DISPATCH = {
    "run": _cmd_run,
    "success-curve": _cmd_success_curve,
    "noise-sweep": _cmd_noise_sweep,
    "cost-sweep": _cmd_cost_sweep,
    "crosscheck": _cmd_crosscheck,
    "kitaev": _cmd_kitaev,
    "naive": _cmd_naive,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, stats.UnresolvableBitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
