"""Command-line front door: replay canned or random scenarios, fuzz over
seed sweeps, run the specification checkers, and export DOT drawings.

Exit status is 0 only when every requested check lands as expected; an
--expect-violation flag inverts the expectation for a named check, which
is how the golden counterexample scenario is asserted in CI.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import checkers, dot, simnet
from .ot_core import PriorityRule
from .simnet import RunResult, Schedule

ALL_CHECKS = ("convergence", "weak", "strong", "compat", "structural", "equivalence")


@dataclass
class RunConfig:
    protocol: str
    schedule: Schedule
    checks: Tuple[str, ...]
    expect_violation: Tuple[str, ...]
    out_dir: Optional[Path]
    as_json: bool


def _parse_checks(spec: str) -> Tuple[str, ...]:
    if spec == "all":
        return ALL_CHECKS
    checks = tuple(s.strip() for s in spec.split(",") if s.strip())
    for c in checks:
        if c not in ALL_CHECKS:
            raise argparse.ArgumentTypeError(
                f"unknown check {c!r}; pick from {', '.join(ALL_CHECKS)} or 'all'"
            )
    return checks


def _load_schedule(args: argparse.Namespace) -> Schedule:
    src = args.schedule
    rule = PriorityRule(args.priority)
    if src == "builtin:podc16":
        return simnet.podc16_schedule(rule)
    if src == "random":
        seed = args.seed
        env = os.environ.get("OTWB_SEED")
        if env is not None:
            seed = int(env)
        if seed is None:
            raise SystemExit("--schedule random needs --seed (or OTWB_SEED)")
        return simnet.random_schedule(args.clients, args.ops, seed, rule)
    try:
        text = Path(src).read_text()
    except OSError as exc:
        raise SystemExit(f"cannot read schedule file {src}: {exc}")
    schedule = simnet.schedule_from_json(text)
    if args.priority != schedule.priority_rule.value and args.priority_set:
        schedule = Schedule(schedule.n_clients, schedule.steps, rule, schedule.prng)
    return schedule


def _run_checks(
    protocol: str, schedule: Schedule, checks: Tuple[str, ...]
) -> Tuple[List[checkers.Verdict], Dict[str, RunResult]]:
    """Execute the protocol plus whatever companion replays the requested
    checks need, and evaluate each check."""
    results: Dict[str, RunResult] = {protocol: simnet.run(protocol, schedule)}

    def need(p: str) -> RunResult:
        if p not in results:
            results[p] = simnet.run(p, schedule)
        return results[p]

    primary = results[protocol]
    verdicts: List[checkers.Verdict] = []
    A = None
    for check in checks:
        if check in ("convergence", "weak", "strong", "compat") and A is None:
            A = checkers.build_abstract_execution(primary.trace)
        if check == "convergence":
            verdicts.append(checkers.check_convergence(A))
        elif check == "weak":
            verdicts.append(checkers.check_weak_spec(A))
        elif check == "strong":
            verdicts.append(checkers.check_strong_spec(A))
        elif check == "compat":
            verdicts.append(checkers.check_pairwise_compatibility([e.value for e in A.H]))
        elif check == "structural":
            if protocol == "djupiter":
                verdicts.extend(checkers.check_structural(primary))
            else:
                cj = need("cjupiter")
                j = need("jupiter")
                verdicts.extend(checkers.check_structural(cj, j))
        elif check == "equivalence":
            cj = need("cjupiter")
            j = need("jupiter")
            verdicts.append(checkers.check_equivalence(cj.trace, j.trace))
    return verdicts, results


_VERDICT_TO_CLI = {
    "convergence": "convergence",
    "weak_spec": "weak",
    "strong_spec": "strong",
    "pairwise_compatibility": "compat",
    "equivalence": "equivalence",
}


def _cli_name(verdict_check: str) -> str:
    return _VERDICT_TO_CLI.get(verdict_check, "structural")


def _evaluate(verdicts: List[checkers.Verdict], expect_violation: Tuple[str, ...]) -> bool:
    inverted = set(expect_violation)
    return all(
        (not v.satisfied) if _cli_name(v.check) in inverted else v.satisfied
        for v in verdicts
    )


def _print_verdicts(verdicts: List[checkers.Verdict], expect_violation, as_json: bool) -> None:
    if as_json:
        doc = [v.to_json_dict() for v in verdicts]
        print(json.dumps(doc, sort_keys=True, indent=2))
        return
    inverted = set(expect_violation)
    for v in verdicts:
        expected_violation = _cli_name(v.check) in inverted
        if v.satisfied:
            mark = "OK" if not expected_violation else "SATISFIED (violation expected!)"
        else:
            mark = "VIOLATED (expected)" if expected_violation else "VIOLATED"
        line = f"{v.check}: {mark}"
        if v.witness and not v.satisfied:
            line += f"  witness: {json.dumps(v.witness, sort_keys=True)}"
        print(line)


def _write_outputs(out_dir: Path, results: Dict[str, RunResult], verdicts) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for protocol, res in results.items():
        (out_dir / f"trace_{protocol}.json").write_text(simnet.trace_to_json(res.trace))
    doc = {"format": 1, "verdicts": [v.to_json_dict() for v in verdicts]}
    (out_dir / "verdicts.json").write_text(json.dumps(doc, sort_keys=True, indent=2))


def cmd_run(args: argparse.Namespace) -> int:
    schedule = _load_schedule(args)
    checks = _parse_checks(args.check) if args.check else ()
    verdicts, results = _run_checks(args.protocol, schedule, checks)
    if args.out:
        _write_outputs(Path(args.out), results, verdicts)
    _print_verdicts(verdicts, args.expect_violation, args.format == "json")
    return 0 if _evaluate(verdicts, tuple(args.expect_violation)) else 1


def cmd_fuzz(args: argparse.Namespace) -> int:
    checks = _parse_checks(args.check) if args.check else ("equivalence",)
    rule = PriorityRule(args.priority)
    failures = 0
    for i in range(args.seeds):
        seed = args.seed_start + i
        n_clients = 1 + seed % args.clients
        n_updates = 1 + (seed * 7) % args.ops
        schedule = simnet.random_schedule(n_clients, n_updates, seed, rule)
        verdicts, results = _run_checks(args.protocol, schedule, checks)
        if not _evaluate(verdicts, tuple(args.expect_violation)):
            failures += 1
            print(f"seed {seed} (clients={n_clients}, updates={n_updates}): FAILED")
            _print_verdicts(verdicts, args.expect_violation, False)
            if args.out:
                out = Path(args.out) / f"seed_{seed}"
                _write_outputs(out, results, verdicts)
                (out / "schedule.json").write_text(simnet.schedule_to_json(schedule))
                print(f"  wrote failing artifacts under {out}")
            break
    if failures == 0:
        print(f"fuzz: {args.seeds} seeds, checks [{', '.join(checks)}]: all passed")
    return 0 if failures == 0 else 1


def cmd_export_dot(args: argparse.Namespace) -> int:
    schedule = _load_schedule(args)
    res = simnet.run(args.protocol, schedule)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise SystemExit(f"cannot write to {out_dir}: {exc}")

    written: List[Path] = []

    def emit(name: str, text: str) -> None:
        path = out_dir / f"{name}.dot"
        path.write_text(text)
        written.append(path)

    if args.protocol in ("cjupiter", "djupiter"):
        for rid, snap in sorted(res.css_final.items()):
            name = "server" if rid == 0 else f"c{rid}"
            emit(name, dot.css_to_dot(snap, title=f"{args.protocol} {name}"))
        if args.steps:
            for rid, snaps in sorted(res.css_client_steps.items()):
                for k, snap in enumerate(snaps):
                    emit(f"c{rid}_step{k}", dot.css_to_dot(snap, title=f"c{rid} step {k}"))
            for k, snap in enumerate(res.css_server_steps):
                emit(f"server_step{k}", dot.css_to_dot(snap, title=f"server step {k}"))
    else:
        for cid, snap in sorted(res.cscw_client_final.items()):
            emit(f"c{cid}", dot.cscw_to_dot(snap, title=f"jupiter c{cid}"))
        for cid, snap in sorted(res.cscw_server_final.items()):
            emit(f"server_c{cid}", dot.cscw_to_dot(snap, title=f"jupiter server space for c{cid}"))
        if args.steps:
            for cid, snaps in sorted(res.cscw_client_steps.items()):
                for k, snap in enumerate(snaps):
                    emit(f"c{cid}_step{k}", dot.cscw_to_dot(snap, title=f"c{cid} step {k}"))
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otwb", description="replicated-list OT protocol workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, default_check: Optional[str]) -> None:
        p.add_argument("--protocol", choices=simnet.PROTOCOLS, default="cjupiter")
        p.add_argument(
            "--priority",
            choices=[r.value for r in PriorityRule],
            default=PriorityRule.SMALLER_WINS.value,
        )
        p.add_argument("--check", default=default_check, help="comma list or 'all'")
        p.add_argument(
            "--expect-violation",
            action="append",
            default=[],
            metavar="CHECK",
            help="exit 0 only if this check reports a violation",
        )
        p.add_argument("--out", help="directory for traces, verdicts, artifacts")
        p.add_argument("--format", choices=["text", "json"], default="text")

    run_p = sub.add_parser("run", help="replay one schedule and check it")
    common(run_p, "all")
    run_p.add_argument("--schedule", required=True, help="file | builtin:podc16 | random")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--clients", type=int, default=3)
    run_p.add_argument("--ops", type=int, default=6)
    run_p.set_defaults(func=cmd_run)

    fuzz_p = sub.add_parser("fuzz", help="sweep seeded random schedules")
    common(fuzz_p, "equivalence")
    fuzz_p.add_argument("--seeds", type=int, required=True)
    fuzz_p.add_argument("--seed-start", type=int, default=0)
    fuzz_p.add_argument("--clients", type=int, default=4, help="max clients per seed")
    fuzz_p.add_argument("--ops", type=int, default=8, help="max updates per seed")
    fuzz_p.set_defaults(func=cmd_fuzz)

    dot_p = sub.add_parser("export-dot", help="render state spaces to DOT files")
    dot_p.add_argument("--protocol", choices=simnet.PROTOCOLS, default="cjupiter")
    dot_p.add_argument(
        "--priority",
        choices=[r.value for r in PriorityRule],
        default=PriorityRule.SMALLER_WINS.value,
    )
    dot_p.add_argument("--schedule", required=True, help="file | builtin:podc16 | random")
    dot_p.add_argument("--seed", type=int, default=None)
    dot_p.add_argument("--clients", type=int, default=3)
    dot_p.add_argument("--ops", type=int, default=6)
    dot_p.add_argument("--out", required=True)
    dot_p.add_argument("--steps", action="store_true", help="also one file per construction step")
    dot_p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.priority_set = "--priority" in (argv if argv is not None else sys.argv)
    try:
        return args.func(args)
    except simnet.ScheduleError as exc:
        print(f"schedule error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
