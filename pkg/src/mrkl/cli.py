"""Command-line interface: generate | eval | route | experts | compare.

Exit codes: 0 success, 1 usage error, 2 runtime error.
Configuration precedence: flags > environment (MRKL_CONFIG, MRKL_CLOCK,
MRKL_SEED) > config file (flat key=value lines) > defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .arithmetic import Op
from .dataset import GenerationError, experiment_spec, generate
from .evalharness import (
    ExperimentConfig,
    LayoutMismatchError,
    baseline_names,
    baseline_report,
    compare,
    parse_report_csv,
    render,
    run,
)
from .experts import RateTable, RecordStore, default_experts
from .extractor import BackendTransportError, get_backend
from .router import DEFAULT_THRESHOLD, build_router

USAGE_EXIT = 1
RUNTIME_EXIT = 2


class CliError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_EXIT)


@dataclass
class CliConfig:
    threshold: float = DEFAULT_THRESHOLD
    rates: str | None = None
    records: str | None = None
    backend: str = "reference"
    seed: int = 0
    clock: str | None = None
    out: str = "."


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"bad config line (expected key=value): {line!r}")
        values[key.strip()] = value.strip()
    return values


def resolve_config(args: argparse.Namespace, env: dict[str, str] | None = None) -> CliConfig:
    env = os.environ if env is None else env
    cfg = CliConfig()
    file_values: dict[str, str] = {}
    if env.get("MRKL_CONFIG"):
        file_values = _read_config_file(env["MRKL_CONFIG"])
    for key in ("threshold", "rates", "records", "backend", "seed", "clock", "out"):
        if key in file_values:
            setattr(cfg, key, file_values[key])
    if env.get("MRKL_CLOCK"):
        cfg.clock = env["MRKL_CLOCK"]
    if env.get("MRKL_SEED"):
        cfg.seed = env["MRKL_SEED"]
    for key in ("threshold", "rates", "records", "backend", "seed", "clock", "out"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.threshold = float(cfg.threshold)
    cfg.seed = int(cfg.seed)
    if not 0.0 <= cfg.threshold <= 1.0:
        raise CliError(f"threshold must be in [0, 1]: {cfg.threshold}")
    return cfg


def _build_parser() -> _Parser:
    parser = _Parser(prog="mrkl", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a dataset file for an experiment")
    p.add_argument("--experiment", type=int, required=True, choices=(1, 2, 3, 4, 5))
    p.add_argument("--two-op", action="store_true", help="experiment 4 two-operation variant")
    p.add_argument("--operation", choices=[op.key for op in Op], default=None,
                   help="fixed operation for experiments 1 and 2 (default add)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default dataset-exp<N>-seed<S>.jsonl)")
    p.add_argument("--verbatim-catalog", action="store_true",
                   help="use the uncorrected catalog spellings")

    p = sub.add_parser("eval", help="run an experiment and write report files")
    p.add_argument("--experiment", type=int, required=True, choices=(1, 2, 3, 4, 5))
    p.add_argument("--two-op", action="store_true")
    p.add_argument("--backend", default=None, help="reference | digits-only | cmd:<command>")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--splits", type=int, default=10, help="formula partitions for --two-op")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory for report files")

    p = sub.add_parser("route", help="answer one input (or REPL on stdin)")
    p.add_argument("text", nargs="?", default=None)
    p.add_argument("--trace", action="store_true", help="print the full score map")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--clock", default=None, help="ISO date for the date expert")
    p.add_argument("--rates", default=None)
    p.add_argument("--records", default=None)

    p = sub.add_parser("experts", help="list experts and resource status")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--clock", default=None)
    p.add_argument("--rates", default=None)
    p.add_argument("--records", default=None)

    p = sub.add_parser("compare", help="diff two report CSVs (or baseline:<name>)")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--list-baselines", action="store_true")
    return parser


def _load_resources(cfg: CliConfig):
    status = {}
    rates = RateTable.empty()
    if cfg.rates:
        if Path(cfg.rates).exists():
            rates = RateTable.load(cfg.rates)
            status["currency"] = f"rates loaded from {cfg.rates} ({len(rates.rates)} pairs)"
        else:
            status["currency"] = f"resource-missing: {cfg.rates}"
    else:
        status["currency"] = "no rates file configured"
    records = RecordStore.empty()
    if cfg.records:
        if Path(cfg.records).exists():
            records = RecordStore.load(cfg.records)
            status["database"] = f"records loaded from {cfg.records} ({len(records.records)} keys)"
        else:
            status["database"] = f"resource-missing: {cfg.records}"
    else:
        status["database"] = "no records file configured"
    if cfg.clock:
        clock = date.fromisoformat(cfg.clock)
        status["date"] = f"injected clock {clock.isoformat()}"
    else:
        clock = None
        status["date"] = "ambient clock"
    return rates, records, clock, status


def _make_router(cfg: CliConfig):
    rates, records, clock, status = _load_resources(cfg)
    experts, fallback = default_experts(clock=clock, rates=rates, records=records)
    return build_router(experts, fallback, cfg.threshold), status


def cmd_generate(args, cfg: CliConfig) -> int:
    operation = Op.from_key(args.operation) if args.operation else Op.ADD
    spec = experiment_spec(
        args.experiment,
        cfg.seed,
        operation=operation,
        two_op=args.two_op,
        verbatim_catalog=args.verbatim_catalog,
    )
    dataset = generate(spec)
    suffix = "-two-op" if spec.two_op else ""
    out = Path(args.out) if args.out else Path(f"dataset-exp{args.experiment}{suffix}-seed{cfg.seed}.jsonl")
    dataset.write_jsonl(out)
    counts = dataset.counts()
    print(f"wrote {out} ({sum(counts.values())} examples)")
    print(" ".join(f"{name}={counts[name]}" for name in ("train", "dev", "test")))
    return 0


def cmd_eval(args, cfg: CliConfig) -> int:
    backend = args.backend or cfg.backend
    get_backend(backend)  # fail fast on unknown names
    config = ExperimentConfig.for_experiment(
        args.experiment,
        backend=backend,
        base_seed=cfg.seed,
        runs=args.runs,
        two_op=args.two_op,
    )
    if args.two_op:
        config = ExperimentConfig(
            experiment=args.experiment,
            backend=backend,
            seeds=tuple(range(cfg.seed, cfg.seed + args.splits)),
            two_op=True,
            splits=args.splits,
        )
    report = run(config)
    display = report
    if args.experiment == 1:
        display = report.merged(baseline_report("reported-gpt3-fewshot-addition"))
    out_dir = Path(args.out or cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = "-two-op" if args.two_op else ""
    stem = f"report-exp{args.experiment}{suffix}-{backend.replace(':', '_').replace('/', '_')}"
    (out_dir / f"{stem}.md").write_text(render(display, "paper-markdown"), encoding="utf-8")
    (out_dir / f"{stem}.csv").write_text(render(report, "csv"), encoding="utf-8")
    print(render(display, "paper-markdown"))
    print(f"wrote {out_dir / (stem + '.md')} and {out_dir / (stem + '.csv')}")
    return 0


def _print_decision(decision, trace: bool) -> None:
    print(decision.response.answer_text)
    print(f"[{decision.chosen}] {decision.response.rationale}")
    if trace:
        ordered = sorted(decision.scores.items(), key=lambda kv: (-kv[1], kv[0]))
        print("scores: " + " ".join(f"{name}={score:g}" for name, score in ordered))
        if decision.errors:
            print("errors: " + json.dumps(decision.errors, sort_keys=True))


def cmd_route(args, cfg: CliConfig) -> int:
    router, _ = _make_router(cfg)
    if args.text is not None:
        _print_decision(router.route(args.text), args.trace)
        return 0
    for line in sys.stdin:  # REPL until EOF
        line = line.strip()
        if line:
            _print_decision(router.route(line), args.trace)
    return 0


def cmd_experts(args, cfg: CliConfig) -> int:
    router, status = _make_router(cfg)
    entries = [
        {
            "name": e.name,
            "kind": e.kind,
            "description": e.description,
            "status": status.get(e.name, "ready"),
        }
        for e in router.experts
    ]
    if args.as_json:
        print(json.dumps(entries, indent=2, sort_keys=True))
        return 0
    width = max(len(e["name"]) for e in entries)
    for e in entries:
        print(f"{e['name']:<{width}}  {e['kind']:<12}  {e['description']}  [{e['status']}]")
    return 0


def _load_report(ref: str):
    if ref.startswith("baseline:"):
        return baseline_report(ref[len("baseline:") :])
    return parse_report_csv(Path(ref).read_text(encoding="utf-8"))


def cmd_compare(args, cfg: CliConfig) -> int:
    if args.list_baselines:
        print("\n".join(baseline_names()))
        return 0
    diff = compare(_load_report(args.report_a), _load_report(args.report_b))
    print(render(diff, "paper-markdown"))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        handler = {
            "generate": cmd_generate,
            "eval": cmd_eval,
            "route": cmd_route,
            "experts": cmd_experts,
            "compare": cmd_compare,
        }[args.command]
        return handler(args, cfg)
    except (ValueError, KeyError) as exc:
        # bad ids/names/flag values are usage problems
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_EXIT
    except (CliError, GenerationError, BackendTransportError, LayoutMismatchError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return RUNTIME_EXIT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
