"""Command-line front end.

Exit codes: 0 success, 1 argument or validation error, 2 certification or
5-sigma failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .checks import run_checks
from .errors import CertificationFailed, VerificationError
from .oracles import one_way_oracle, ppt_min_delta, two_way_grid_search
from .simulator import DeviceModel, dump_density, load_device_file, run_campaign
from .spectral import num_tests
from .strategies import STRATEGY_NAMES, build_strategy
from .sweep import SWEEP_STRATEGIES, rows_to_csv, strategy_lambda2, sweep_rows

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    seed: int | None
    output_path: str | None


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _strategy_list(values) -> list[str]:
    names = []
    for v in values or SWEEP_STRATEGIES:
        names.extend(s.strip() for s in v.split(",") if s.strip())
    return names


# ---------------------------------------------------------------- subcommands


def cmd_sweep(args) -> int:
    rows = sweep_rows(
        args.lambda_min, args.lambda_max, args.steps, _strategy_list(args.strategy), args.epsilon, args.confidence
    )
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    certs = [one_way_oracle(args.lam, args.grid), two_way_grid_search(args.lam, args.grid), ppt_min_delta(args.lam)]
    if args.tol is not None:
        certs = [dataclasses.replace(c, tolerance=args.tol) for c in certs]
    _emit(_dumps([c.to_dict() for c in certs]), args.out)
    failed = [c for c in certs if not c.passed]
    if failed:
        msg = "; ".join(f"{c.claim}: gap {c.gap:.3e} > tol {c.tolerance:g}" for c in failed)
        raise CertificationFailed(msg)
    return EXIT_OK


def _device(spec: str, epsilon: float) -> DeviceModel:
    if spec == "honest":
        return DeviceModel.honest()
    if spec == "worst":
        return DeviceModel.worst_case(epsilon)
    if spec.startswith("file:"):
        return load_device_file(spec[len("file:") :])
    raise VerificationError(f"device must be honest, worst or file:PATH, got {spec!r}")


def cmd_simulate(args) -> int:
    strategy = build_strategy(args.strategy, args.lam, p=args.p, delta=args.delta)
    device = _device(args.device, args.epsilon)
    report = run_campaign(strategy, device, args.n_tests, args.trials, args.seed, workers=args.workers)
    config = RunConfig(
        command="simulate",
        parameters={
            "lambda": args.lam,
            "strategy": args.strategy,
            "device": args.device,
            "epsilon": args.epsilon,
            "n_tests": args.n_tests,
            "trials": args.trials,
            "p": strategy.params.get("p"),
            "delta": strategy.params.get("delta"),
        },
        seed=args.seed,
        output_path=args.out,
    )
    doc = {
        "config": dataclasses.asdict(config),
        "report": report.to_dict(),
        "emitted_state": dump_density(device.emitted_state(strategy)),
    }
    _emit(_dumps(doc), args.out)
    if not report.within_bound:
        raise CertificationFailed(
            f"empirical rate {report.empirical_rate:.6g} deviates from {report.predicted_rate:.6g} by more than 5 sigma"
        )
    return EXIT_OK


def cmd_ntests(args) -> int:
    l2 = strategy_lambda2(args.strategy, args.lam)
    n = num_tests(l2, args.epsilon, args.confidence)
    line = (
        f"strategy={args.strategy} lambda={args.lam:.9g} lambda2={l2:.9g} "
        f"epsilon={args.epsilon:g} confidence={args.confidence:g} "
        f"n_exact={n.n_exact} n_approx={n.n_approx:.9g}\n"
    )
    _emit(line, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks()
    _emit("".join(r.line() + "\n" for r in results), args.out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CertificationFailed("failed checks: " + ", ".join(failed))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _lambda_arg(p, default=0.25):
    p.add_argument("--lambda", dest="lam", type=float, default=default, help="Schmidt coefficient in [0, 1/2]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="locc-verify", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="CSV of second eigenvalues and test counts over a lambda grid")
    p.add_argument("--lambda-min", type=float, default=0.0)
    p.add_argument("--lambda-max", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--strategy", action="append", help="comma separated; repeatable (default: all)")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--confidence", type=float, default=0.001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("certify", help="run the one-way, two-way and PPT optimality oracles")
    _lambda_arg(p)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--tol", type=float, default=None, help="override every certificate's gap tolerance")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="Monte-Carlo verification campaigns")
    _lambda_arg(p)
    p.add_argument("--strategy", default="two_way", choices=[s for s in STRATEGY_NAMES if s != "plm"])
    p.add_argument("--device", default="honest", help="honest, worst, or file:PATH")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--n-tests", type=int, default=1)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ntests", help="number of tests for a target fidelity and confidence")
    _lambda_arg(p)
    p.add_argument("--strategy", default="two_way", choices=STRATEGY_NAMES)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--confidence", type=float, default=0.001)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ntests)

    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CertificationFailed as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (VerificationError, ValueError, KeyError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
