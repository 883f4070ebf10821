"""Command-line entry point (``pauliest``)."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import SUITES, VerificationError, delta_A_bracket, lower_bound_card, run_suite
from .coloring import build_graph, fractional_coloring, schedule
from .config import DenseCapError
from .harness import (ConfigError, ExperimentConfig, PROTOCOLS, SWEEP_AXES, report_render,
                      run_experiment, sweep, write_once)
from .pauli import PauliError, PauliSet
from .protocols import ProtocolError
from .quantum import PovmError, StateError, make_rng

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3
log = logging.getLogger("pauliest")


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v
    p.add_argument("--seed", type=int, default=default(0), help="base seed (trial i uses seed+i)")
    p.add_argument("--config", default=default(None), help="JSON experiment config; options override it")
    p.add_argument("--out", default=default(None), help="output directory, or a .json/.csv file path")
    p.add_argument("--threads", type=int, default=default(1))
    p.add_argument("-v", "--verbose", action="store_true", default=default(False))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pauliest", description="Exact-simulation Pauli shadow tomography toolkit")
    p.add_argument("--version", action="version", version=f"pauliest {__version__}")
    _global_flags(p, suppress=False)
    # global flags are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", parents=[common], help="run a learning protocol")
    est.add_argument("--protocol", choices=[x for x in PROTOCOLS if x != "purity"])
    est.add_argument("--set", dest="paulis", help="Pauli set file (default: all nontrivial strings)")
    est.add_argument("--state", help="state generator or density-matrix JSON")
    est.add_argument("--n", type=int)
    est.add_argument("--eps", type=float)
    est.add_argument("--k", type=int)
    est.add_argument("--c", type=int)
    est.add_argument("--rounds", type=int)
    est.add_argument("--trials", type=int)
    est.add_argument("--oblivious", action="store_true", default=None)

    pur = sub.add_parser("purity", parents=[common], help="purity test with k qubits of memory")
    pur.add_argument("--state")
    pur.add_argument("--n", type=int)
    pur.add_argument("--k", type=int)
    pur.add_argument("--trials", type=int)
    pur.add_argument("--mode", dest="purity_mode", choices=["bernoulli", "trajectory"])

    col = sub.add_parser("coloring", parents=[common], help="fractional coloring and measurement plan")
    col.add_argument("--set", dest="paulis", required=True)
    col.add_argument("--method", choices=["enumerate", "colgen"])

    dl = sub.add_parser("delta", parents=[common], help="bracket the memory-free game value")
    dl.add_argument("--set", dest="paulis", required=True)
    dl.add_argument("--iters", type=int, default=500)
    dl.add_argument("--restarts", type=int, default=4)

    ver = sub.add_parser("verify", parents=[common], help="randomized lemma checks")
    ver.add_argument("--suite", choices=SUITES, required=True)
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--n", type=int)
    ver.add_argument("--k", type=int, nargs="*")
    ver.add_argument("--eps", type=float, default=0.1)

    bd = sub.add_parser("bound", parents=[common], help="closed-form copy lower bounds")
    bd.add_argument("--n", type=int, required=True)
    bd.add_argument("--k", type=int, required=True)
    bd.add_argument("--c", type=int, required=True)
    bd.add_argument("--eps", type=float, required=True)

    bench = sub.add_parser("bench", parents=[common], help="parameter sweep to CSV")
    bench.add_argument("--protocol", choices=PROTOCOLS)
    bench.add_argument("--axis", choices=SWEEP_AXES, required=True)
    bench.add_argument("--values", required=True, help="comma-separated values")
    bench.add_argument("--set", dest="paulis")
    bench.add_argument("--state")
    bench.add_argument("--n", type=int)
    bench.add_argument("--eps", type=float)
    bench.add_argument("--k", type=int)
    bench.add_argument("--rounds", type=int)
    bench.add_argument("--trials", type=int)
    return p


_CONFIG_KEYS = ("protocol", "paulis", "state", "n", "eps", "k", "c", "rounds", "trials",
                "oblivious", "purity_mode")


def _experiment_config(args, protocol: str | None = None, defaults: dict | None = None) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if protocol is not None:
        data["protocol"] = protocol
    for key, val in (defaults or {}).items():
        data.setdefault(key, val)
    data.setdefault("seed", args.seed)
    data["threads"] = args.threads
    data.pop("out", None)
    return ExperimentConfig.from_dict(data)


def _emit(args, text: str, default_name: str) -> None:
    """Print ``text``; with ``--out`` also write it (write-once)."""
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    if args.out:
        out = Path(args.out)
        target = out if out.suffix in (".json", ".csv", ".txt") else out / default_name
        path = write_once(target, text)
        log.info("wrote %s", path)


def _cmd_estimate(args) -> int:
    cfg = _experiment_config(args)
    result = run_experiment(cfg, persist=False)
    sys.stderr.write(report_render(result))
    _emit(args, result.dumps(), f"{cfg.protocol}_report.json")
    return EXIT_OK


def _cmd_purity(args) -> int:
    cfg = _experiment_config(args, protocol="purity")
    result = run_experiment(cfg, persist=False)
    sys.stderr.write(report_render(result))
    _emit(args, result.dumps(), "purity_report.json")
    return EXIT_OK


def _cmd_coloring(args) -> int:
    paulis = PauliSet.from_file(args.paulis)
    col = fractional_coloring(build_graph(paulis), method=args.method)
    out = col.to_json()
    out["families"] = schedule(col).to_json()
    _emit(args, json.dumps(out, indent=2), "coloring.json")
    return EXIT_OK


def _cmd_delta(args) -> int:
    paulis = PauliSet.from_file(args.paulis)
    bracket = delta_A_bracket(paulis, iterations=args.iters, rng=make_rng(args.seed), restarts=args.restarts)
    _emit(args, json.dumps(bracket.to_json(paulis), indent=2), "delta.json")
    return EXIT_OK


def _cmd_verify(args) -> int:
    n = args.n if args.n is not None else (3 if args.suite == "pauli-identities" else 2)
    try:
        res = run_suite(args.suite, args.trials, make_rng(args.seed), n=n, ks=args.k, eps=args.eps)
    except VerificationError as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        if args.out and exc.counterexample is not None:
            write_once(Path(args.out) / f"counterexample_{args.suite}.txt", repr(exc.counterexample))
        return EXIT_VERIFY
    _emit(args, json.dumps({"suite": args.suite, "trials": args.trials, "n": n, "result": res,
                            "passed": True}, indent=2), f"verify_{args.suite}.json")
    return EXIT_OK


def _cmd_bound(args) -> int:
    card = lower_bound_card(args.n, args.k, args.c, args.eps)
    _emit(args, json.dumps(card.to_json(), indent=2), "bound.json")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cast = int if args.axis in ("T", "k", "n") else float
    try:
        values = [cast(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --values {args.values!r}") from None
    axis_key = "rounds" if args.axis == "T" else args.axis
    cfg = _experiment_config(args, defaults={axis_key: values[0]} if values else None)
    _emit(args, sweep(cfg, args.axis, values), f"sweep_{cfg.protocol}_{args.axis}.csv")
    return EXIT_OK


_COMMANDS = {"estimate": _cmd_estimate, "purity": _cmd_purity, "coloring": _cmd_coloring,
             "delta": _cmd_delta, "verify": _cmd_verify, "bound": _cmd_bound, "bench": _cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        sys.stderr.write("error: --threads must be >= 1\n")
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except VerificationError as exc:
        sys.stderr.write(f"verification failed: {exc}\n")
        return EXIT_VERIFY
    except (ConfigError, PauliError, StateError, PovmError, ProtocolError, DenseCapError,
            FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
