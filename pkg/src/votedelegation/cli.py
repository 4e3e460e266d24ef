"""Command-line front end.

Every command prints one JSON object on stdout, except the studies, which
print CSV when no ``--csv`` file is given.  Exit status: 0 on success, 1 on
invalid input (or a failed theorem sweep), 2 when an instance exceeds a
computation cap.
"""

from __future__ import annotations

import argparse
import functools
import os
import sys

from . import delegation, experiments, imbalance, model, montecarlo
from .errors import CapacityError, ValidationError

THREADS_ENV = "VOTEDELEGATION_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; we reserve 2 for cap errors.
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_weights(text: str, fixed_point: int | None, allow_empty: bool = False) -> tuple[int, ...]:
    items = _split(text)
    if not items and not allow_empty:
        raise ValidationError("empty weight list")
    if fixed_point is not None:
        return model.to_fixed_point(items, fixed_point)
    try:
        return tuple(int(i) for i in items)
    except ValueError:
        raise ValidationError(f"weights must be comma-separated integers, got {text!r}") from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(i) for i in _split(text)]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(i) for i in _split(text)]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


@functools.lru_cache(maxsize=1)
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="votedelegation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def weights_args(p, delegators=False):
        p.add_argument("--weights", required=True, help="voter weights, comma-separated")
        if delegators:
            p.add_argument("--delegators", default="", help="delegator weights, comma-separated")
        p.add_argument("--fixed-point", type=int, default=None, metavar="DEN",
                       help="read weights as decimal stakes in units of 1/DEN")

    def mc_args(p):
        p.add_argument("--reps", type=int, default=100_000, help="Monte-Carlo replicates")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--interval", choices=("normal", "wilson"), default="normal")

    p = sub.add_parser("exact", help="exact conventional win probability")
    weights_args(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--method", choices=("auto", "enum", "dp"), default="auto")

    p = sub.add_parser("classify", help="equal-weight / dominant-weight / other")
    weights_args(p)

    p = sub.add_parser("closed-form", help="equal-weight or dominant-weight closed form")
    p.add_argument("--kind", choices=("ew", "dw"), required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", type=float, required=True)

    p = sub.add_parser("delegate", help="post-delegation win probability")
    weights_args(p, delegators=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--mode", choices=("exact", "fast", "mc"), default="exact")
    p.add_argument("--method", choices=("auto", "enum", "dp"), default="auto",
                   help="per-vector evaluation in exact mode")
    p.add_argument("--show-distribution", action="store_true",
                   help="include the post-delegation weight distribution (exact mode)")
    mc_args(p)

    p = sub.add_parser("large-election", help="Poisson large-election Monte Carlo")
    p.add_argument("--n", type=float, required=True, help="Poisson population scale")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--m", type=int, default=0, help="unit-weight delegators")
    mc_args(p)

    p = sub.add_parser("imbalance", help="Gini, variance, Theil and Hoover of a weight vector")
    p.add_argument("--values", required=True, help="non-negative reals, comma-separated")
    p.add_argument("--standardized-theil", action="store_true")

    study = sub.add_parser("study", help="reproducible studies")
    ssub = study.add_subparsers(dest="study", required=True, parser_class=_Parser)

    p = ssub.add_parser("imbalance", help="imbalance indices vs. win probability")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--p", type=float, default=0.7)
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=10**6, help="fixed-point denominator for sampled weights")
    p.add_argument("--standardized-theil", action="store_true")
    p.add_argument("--csv", default=None, help="write records here; stdout then gets the JSON summary")
    p.add_argument("--json", default=None, help="also write the JSON summary here")

    p = ssub.add_parser("convergence", help="win probability vs. number of unit delegators")
    weights_args(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--m-grid", default=",".join(map(str, experiments.DEFAULT_M_GRID)))
    p.add_argument("--csv", default=None)

    p = ssub.add_parser("p-limit", help="post-delegation win probability vs. p")
    weights_args(p, delegators=True)
    p.add_argument("--p-grid", default=",".join(map(str, experiments.DEFAULT_P_GRID)))
    p.add_argument("--csv", default=None)

    p = ssub.add_parser("theorems", help="randomized inequality sweeps and the claim gap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dw", type=int, default=200, help="dominant-weight scenarios")
    p.add_argument("--ew", type=int, default=200, help="equal-weight scenarios")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--max-m", type=int, default=4)
    p.add_argument("--max-weight", type=int, default=20)
    p.add_argument("--ps", default="0.6,0.7,0.9")
    p.add_argument("--claim-ns", default="11,51,101")
    p.add_argument("--claim-p", type=float, default=0.7)

    for action in [*sub.choices.values(), *ssub.choices.values()]:
        action.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                            help=f"worker threads (default ${THREADS_ENV} or 1)")
    return parser


def _estimate_payload(est: montecarlo.Estimate) -> dict:
    return {
        "p_win": est.point,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "replicates": est.replicates,
        "seed": est.seed,
    }


def _series_payload(series: experiments.ConvergenceSeries) -> dict:
    return {"target": series.target, "points": [[x, y] for x, y in series.points]}


def _dispatch(args, out) -> int:
    threads = getattr(args, "threads", None)
    if threads is None:
        threads = _default_threads()
    if threads < 1:
        raise ValidationError("--threads must be >= 1")
    emit = lambda payload: print(experiments.dumps(payload), file=out)  # noqa: E731
    fp = getattr(args, "fixed_point", None)

    if args.command == "exact":
        w = _parse_weights(args.weights, fp)
        emit({"p_win": model.win_probability(w, args.p, method=args.method, threads=threads)})
    elif args.command == "classify":
        c = model.classify(_parse_weights(args.weights, fp))
        emit({"class": c.kind.value, "dominant": c.dominant})
    elif args.command == "closed-form":
        if args.kind == "ew":
            emit({"p_win": model.ew_win_probability(args.n, args.p)})
        else:
            emit({"p_win": model.dw_win_probability(args.p)})
    elif args.command == "delegate":
        scenario = delegation.DelegationScenario(
            _parse_weights(args.weights, fp),
            _parse_weights(args.delegators, fp, allow_empty=True),
            args.p,
        )
        if args.mode == "mc":
            est = montecarlo.mc_win_probability(scenario, args.reps, args.seed, threads=threads,
                                                interval=args.interval)
            emit(_estimate_payload(est))
        elif args.mode == "fast":
            if any(d != 1 for d in scenario.delegators):
                raise ValidationError("fast mode needs every delegator weight to be 1")
            emit({"p_win": delegation.equalweight_delegation_probability(scenario.voters, scenario.m, scenario.p)})
        else:
            payload = {"p_win": delegation.post_delegation_win_probability(scenario, method=args.method)}
            if args.show_distribution:
                dist = delegation.enumerate_post_delegation(scenario)
                payload["distribution"] = [[list(v), c / dist.denominator] for v, c in dist.counts.items()]
            emit(payload)
    elif args.command == "large-election":
        params = montecarlo.LargeElectionParams(args.n, args.p, args.m)
        est = montecarlo.mc_large_election(params, args.reps, args.seed, threads=threads, interval=args.interval)
        emit(_estimate_payload(est))
    elif args.command == "imbalance":
        emit(imbalance.imbalance_measures(_parse_floats(args.values), args.standardized_theil).to_dict())
    elif args.command == "study":
        return _dispatch_study(args, out, emit)
    return 0


def _dispatch_study(args, out, emit) -> int:
    fp = getattr(args, "fixed_point", None)
    if args.study == "imbalance":
        config = experiments.StudyConfig(
            n_voters=args.n, p=args.p, trials=args.trials, seed=args.seed, weight_grid=args.grid,
            csv_path=args.csv, json_path=args.json, standardized_theil=args.standardized_theil,
        )
        if args.csv:
            emit(experiments.run_imbalance_study(config).summary())
        else:
            # Records go to stdout; correlations are still validated.
            study = experiments.run_imbalance_study(config)
            out.write(experiments.study_csv_text(study.records))
        return 0
    if args.study == "convergence":
        series = experiments.run_convergence_study(_parse_weights(args.weights, fp), args.p, _parse_ints(args.m_grid))
    elif args.study == "p-limit":
        series = experiments.run_p_limit_study(
            _parse_weights(args.weights, fp),
            _parse_weights(args.delegators, fp, allow_empty=True),
            _parse_floats(args.p_grid),
        )
    else:
        cfg = experiments.SweepConfig(
            dw_scenarios=args.dw, ew_scenarios=args.ew, max_n=args.max_n, max_m=args.max_m,
            max_weight=args.max_weight, ps=tuple(_parse_floats(args.ps)), seed=args.seed,
            claim_ns=tuple(_parse_ints(args.claim_ns)), claim_p=args.claim_p,
        )
        report = experiments.run_theorem_sweep(cfg)
        emit(report.to_dict())
        return 0 if report.passed else 1
    if args.csv:
        series.write_csv(args.csv)
        emit(_series_payload(series))
    else:
        out.write(series.csv_text())
    return 0


def run_cli(argv=None, stdout=None, stderr=None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=err)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return _dispatch(args, out)
    except CapacityError as exc:
        print(f"error: {exc}", file=err)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
