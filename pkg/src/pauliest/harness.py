"""Experiment configuration, orchestration and persistence."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .analysis import delta_A_bracket
from .coloring import build_graph, fractional_coloring, schedule
from .pauli import PauliSet
from .protocols import (Budgets, PovmEnsemble, bell_abs_protocol, clifford_protocol,
                        generic_cm_estimator, k_memory_protocol, no_memory_protocol,
                        oblivious_wrapper, purity_test_k, two_copy_full)
from .quantum import DensityMatrix, bell_povm, make_rng, state_from_spec
from .stabilizer import clifford_povm

PROTOCOLS = ("nomem", "clifford", "bell", "twocopy", "kmem", "generic", "purity")
SWEEP_AXES = ("T", "eps", "k", "n")
SWEEP_COLUMNS = ("axis", "value", "protocol", "n", "k", "eps", "rounds", "trials", "failed",
                 "success_fraction", "median_error", "max_error", "mean_copies")
STATE_TASK = 1 << 20  # stream id reserved for building the test state


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    protocol: str
    n: int | None = None
    paulis: Any = "nontrivial"
    state: str = "haar"
    state_seed: int = 0
    eps: float = 0.25
    k: int | None = None
    c: int = 1
    rounds: int | None = None
    seeds: list[int] | None = None
    seed: int = 0
    trials: int = 1
    budget: dict = field(default_factory=dict)
    threads: int = 1
    out: str | None = None
    sigma_mode: str = "oracle"
    purity_mode: str = "bernoulli"
    oblivious: bool = False
    delta_iterations: int = 100

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.seeds is None:
            if self.trials < 0:
                raise ConfigError("trials must be >= 0")
            self.seeds = [self.seed + i for i in range(self.trials)]
        self.seeds = [int(s) for s in self.seeds]
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        self.trials = len(self.seeds)
        if not (self.eps > 0):
            raise ConfigError("eps must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.protocol in ("kmem", "purity") and self.k is None:
            raise ConfigError(f"protocol {self.protocol!r} needs k")
        if self.c not in (1, 2):
            raise ConfigError("c must be 1 or 2")
        if isinstance(self.paulis, str) and self.paulis not in ("nontrivial", "all", "xyz"):
            if not Path(self.paulis).exists():
                raise ConfigError(f"Pauli set file not found: {self.paulis}")
        if self.state.endswith(".json") and not Path(self.state).exists():
            raise ConfigError(f"state file not found: {self.state}")
        try:
            self.budgets()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def budgets(self) -> Budgets:
        return Budgets.from_dict(self.budget)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        budget = dict(data.pop("budget", {}) or {})
        for key in [k for k in data if k.startswith("budget.")]:
            budget[key.split(".", 1)[1]] = data.pop(key)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "protocol" not in data:
            raise ConfigError("config needs a protocol")
        try:
            return cls(budget=budget, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    config: dict
    trials: list[dict]
    aggregate: dict
    version: str = __version__
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {"config": self.config, "trials": self.trials, "aggregate": self.aggregate,
                "version": self.version, "wall_time": self.wall_time}

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentResult":
        return cls(data["config"], data["trials"], data["aggregate"], data.get("version", ""),
                   data.get("wall_time", 0.0))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def canonical_json(result: ExperimentResult) -> str:
    """Serialized result with timing fields removed; equal configs give equal strings."""
    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in obj.items() if k not in ("wall_time", "threads", "out")}
        if isinstance(obj, list):
            return [strip(v) for v in obj]
        return obj
    return json.dumps(strip(result.to_json()), sort_keys=True)


# -- setup ------------------------------------------------------------------------

def resolve_paulis(source, n: int | None) -> PauliSet:
    if isinstance(source, (list, tuple)):
        return PauliSet.from_labels(source)
    if source in ("nontrivial", "all", "xyz"):
        if n is None:
            raise ConfigError(f"Pauli set {source!r} needs n")
        if source == "xyz":
            return PauliSet.from_labels("".join(t) for t in itertools.product("XYZ", repeat=n))
        full = PauliSet.all(n)
        return full if source == "all" else PauliSet(list(full)[1:], n=n)
    return PauliSet.from_file(source)


@dataclass
class _Setup:
    paulis: PauliSet
    rho: DensityMatrix
    plan: Any = None
    ensemble: Any = None


def _prepare(cfg: ExperimentConfig) -> _Setup:
    paulis = None
    n = cfg.n
    if cfg.protocol not in ("kmem", "purity"):
        paulis = resolve_paulis(cfg.paulis, n)
        n = paulis.n if n is None else n
        if paulis.n != n:
            raise ConfigError(f"Pauli set acts on {paulis.n} qubits, config says n={n}")
    rho = state_from_spec(cfg.state, n, make_rng(cfg.state_seed, STATE_TASK))
    if n is not None and rho.n != n:
        raise ConfigError(f"state has {rho.n} qubits, expected {n}")
    setup = _Setup(paulis if paulis is not None else PauliSet.all(rho.n), rho)
    if cfg.protocol in ("clifford", "generic"):
        setup.plan = schedule(fractional_coloring(build_graph(setup.paulis)))
    if cfg.protocol == "nomem":
        bracket = delta_A_bracket(setup.paulis, iterations=cfg.delta_iterations,
                                  rng=make_rng(cfg.state_seed, STATE_TASK + 1), refine_rounds=10)
        setup.ensemble = bracket.witnesses
    if cfg.protocol == "generic":
        if cfg.c == 1:
            povms = [clifford_povm(e.family) for e in setup.plan.entries]
            setup.ensemble = PovmEnsemble(povms, setup.plan.frequencies())
        else:
            setup.ensemble = PovmEnsemble([bell_povm(rho.n)], [1.0])
    return setup


def _run_protocol(cfg: ExperimentConfig, setup: _Setup, seed: int) -> dict:
    rng = make_rng(seed, 0)
    b = cfg.budgets()
    rho, paulis, T = setup.rho, setup.paulis, cfg.rounds
    if cfg.protocol == "purity":
        verdict = purity_test_k(rho, cfg.k, rng, repetitions=cfg.rounds, mode=cfg.purity_mode, budgets=b)
        truth = "pure" if rho.purity() > 1 - 1e-9 else "mixed"
        out = verdict.to_json()
        out.update(seed=seed, truth=truth, correct=verdict.verdict == truth,
                   max_error=0.0 if verdict.verdict == truth else 1.0)
        return out
    if cfg.protocol == "nomem":
        witnesses = setup.ensemble

        def run(p, r, g):
            return no_memory_protocol(p, witnesses, r, T=T, eps=cfg.eps, rng=g, budgets=b)
    elif cfg.protocol == "clifford":
        def run(p, r, g):
            return clifford_protocol(p, setup.plan, r, T=T, rng=g, eps=cfg.eps, budgets=b)
    elif cfg.protocol == "bell":
        def run(p, r, g):
            return bell_abs_protocol(p, r, T=T, rng=g, eps=cfg.eps, budgets=b)
    elif cfg.protocol == "twocopy":
        def run(p, r, g):
            return two_copy_full(p, r, cfg.eps, rng=g, sigma_mode=cfg.sigma_mode, budgets=b)
    elif cfg.protocol == "kmem":
        def run(p, r, g):
            return k_memory_protocol(r, cfg.k, cfg.eps, rounds_per_group=T, rng=g, budgets=b)
    else:
        def run(p, r, g):
            rounds = T if T is not None else _generic_rounds(len(p), cfg.eps, cfg.c)
            return generic_cm_estimator(p, setup.ensemble, cfg.c, r, cfg.eps, rounds, rng=g)
    if cfg.oblivious:
        report = oblivious_wrapper(run, paulis, rho, rng, budgets=b)
    else:
        report = run(paulis, rho, rng)
    out = {"seed": seed, "protocol": report.protocol, "rounds": int(report.rounds),
           "copies": int(report.copies), "max_error": report.max_error(),
           "wall_time": report.wall_time, "flags": report.flags}
    return out


def _generic_rounds(size: int, eps: float, c: int) -> int:
    return math.ceil(16 * math.log(30 * size) / eps ** (2 * c))


def _trial(cfg: ExperimentConfig, setup: _Setup, seed: int) -> dict:
    try:
        out = _run_protocol(cfg, setup, seed)
        out["ok"] = True
    except Exception as exc:  # recorded, never dropped
        out = {"seed": seed, "ok": False, "error": f"{type(exc).__name__}: {exc}", "max_error": None}
    return out


def aggregate(trials: Sequence[dict], eps: float) -> dict:
    errs = [t["max_error"] for t in trials if t.get("ok") and t.get("max_error") is not None]
    succ = sum(1 for t in trials if t.get("ok") and t.get("max_error") is not None
               and t["max_error"] <= eps)
    copies = [t["copies"] for t in trials if t.get("ok") and "copies" in t]
    return {
        "trials": len(trials),
        "failed": sum(1 for t in trials if not t.get("ok")),
        "success_fraction": succ / len(trials) if trials else float("nan"),
        "max_error": max(errs) if errs else None,
        "median_error": float(np.median(errs)) if errs else None,
        "mean_copies": float(np.mean(copies)) if copies else None,
    }


def run_experiment(config: ExperimentConfig | dict, persist: bool = True) -> ExperimentResult:
    """Run every seed (in parallel when ``threads > 1``) and merge in seed order."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    start = time.perf_counter()
    setup = _prepare(cfg)
    if cfg.threads > 1 and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            trials = list(pool.map(lambda s: _trial(cfg, setup, s), cfg.seeds))
    else:
        trials = [_trial(cfg, setup, s) for s in cfg.seeds]
    agg = aggregate(trials, cfg.eps)
    if cfg.protocol == "purity":
        agg["wrong_verdict_rate"] = 1 - agg["success_fraction"] if trials else float("nan")
    agg["protocol"] = cfg.protocol
    agg["budgets"] = asdict(cfg.budgets())
    result = ExperimentResult(cfg.to_dict(), trials, agg, wall_time=time.perf_counter() - start)
    if persist and cfg.out:
        write_once(Path(cfg.out) / f"{cfg.protocol}_result.json", result.dumps())
    return result


# -- persistence --------------------------------------------------------------------

def write_once(path: str | Path, text: str) -> Path:
    """Write to ``path``, or to ``stem-1.ext``, ``stem-2.ext``... if it already exists."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    candidate, i = path, 0
    while True:
        try:
            with open(candidate, "x") as fh:
                fh.write(text)
            return candidate
        except FileExistsError:
            i += 1
            candidate = path.with_name(f"{path.stem}-{i}{path.suffix}")


def sweep(config: ExperimentConfig | dict, axis: str, values: Sequence) -> str:
    """One result row per value of ``axis`` (``T`` sets ``rounds``); returns CSV text."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for value in values:
        data = cfg.to_dict()
        data["rounds" if axis == "T" else axis] = value
        data["out"] = None
        row_cfg = ExperimentConfig.from_dict(data)
        agg = run_experiment(row_cfg, persist=False).aggregate
        writer.writerow({
            "axis": axis, "value": value, "protocol": row_cfg.protocol, "n": row_cfg.n,
            "k": row_cfg.k, "eps": row_cfg.eps, "rounds": row_cfg.rounds, "trials": agg["trials"],
            "failed": agg["failed"], "success_fraction": agg["success_fraction"],
            "median_error": agg["median_error"], "max_error": agg["max_error"],
            "mean_copies": agg["mean_copies"],
        })
    text = buf.getvalue()
    if cfg.out:
        write_once(Path(cfg.out) / f"sweep_{cfg.protocol}_{axis}.csv", text)
    return text


def report_render(result: ExperimentResult) -> str:
    cfg, agg = result.config, result.aggregate

    def fmt(v):
        if v is None:
            return "n/a"
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    lines = [
        f"protocol        {cfg['protocol']}",
        f"state           {cfg['state']} (state_seed {cfg['state_seed']})",
        f"eps             {fmt(cfg['eps'])}",
        f"seeds           {fmt(cfg['seeds'][0]) if cfg['seeds'] else '-'}"
        f"..{fmt(cfg['seeds'][-1]) if cfg['seeds'] else '-'} ({len(cfg['seeds'])} trials)",
        "budgets         " + ", ".join(f"{k}={fmt(v)}" for k, v in sorted(agg.get("budgets", {}).items())),
        f"success         {fmt(agg['success_fraction'])}",
        f"failed trials   {agg['failed']}",
        f"max error       {fmt(agg['max_error'])}",
        f"median error    {fmt(agg['median_error'])}",
        f"mean copies     {fmt(agg['mean_copies'])}",
    ]
    if "wrong_verdict_rate" in agg:
        lines.append(f"wrong verdicts  {fmt(agg['wrong_verdict_rate'])}")
    for t in result.trials:
        if not t.get("ok"):
            lines.append(f"  seed {t['seed']}: FAILED {t.get('error', '')}")
    return "\n".join(lines) + "\n"
