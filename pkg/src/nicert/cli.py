"""Command-line front end.

Exit codes: 0 for Pass / Accept / NonInterferent (and a completed ``run``),
1 for Fail / Reject / Interferent, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from . import corpus
from .abstract import DEFAULT_STATE_BUDGET, StateBudgetExceeded, explore
from .certificate import CertificateKind, check, emit
from .concrete import execute
from .extended import format_trace, run_extended
from .machine import RuntimeFault, StepLimitExceeded
from .oracle import DEFAULT_CAP, DomainCapExceeded, InputDomain, brute_force_ni
from .syntax import ParseError, PolicyError, extract_policy, parse

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _value_text(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _json_value(v: Any) -> Any:
    return v if isinstance(v, (bool, int, str)) or v is None else str(v)


def _resolve(path: str) -> Path:
    if path.startswith("@"):
        try:
            return corpus.path(path[1:])
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from None
    return Path(path)


def _load(path: str):
    p = _resolve(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        program = parse(text)
        return program, extract_policy(program)
    except (ParseError, PolicyError) as exc:
        raise UsageError(f"{path}:{exc}") from None


def _scalar(text: str, type_name: str, name: str):
    if type_name == "boolean":
        if text in ("true", "false"):
            return text == "true"
    else:
        try:
            return int(text)
        except ValueError:
            pass
    raise UsageError(f"input {name!r} expects {type_name}, got {text!r}")


def _inputs(program, pairs: list[str]) -> dict:
    types = dict(program.inputs)
    out = {}
    for pair in pairs:
        name, sep, text = pair.partition("=")
        if not sep or name not in types:
            raise UsageError(f"bad input {pair!r}; declared inputs: {', '.join(types) or 'none'}")
        out[name] = _scalar(text, types[name], name)
    missing = [n for n in types if n not in out]
    if missing:
        raise UsageError(f"missing --in for: {', '.join(missing)}")
    return {n: out[n] for n in types}


def _domain(program, text: str | None, values: list[str]) -> InputDomain:
    ints = range(-2, 4)
    if text:
        lo, sep, hi = text.partition("..")
        try:
            ints = range(int(lo), int(hi) + 1)
        except ValueError:
            raise UsageError(f"bad domain {text!r}; expected lo..hi") from None
        if not sep or not ints:
            raise UsageError(f"bad domain {text!r}; expected lo..hi")
    types = dict(program.inputs)
    overrides = {}
    for item in values:
        name, sep, text = item.partition("=")
        if not sep or name not in types:
            raise UsageError(f"bad --values {item!r}")
        overrides[name] = [_scalar(t, types[name], name) for t in text.split(",") if t]
        if not overrides[name]:
            raise UsageError(f"empty value set for {name!r}")
    return InputDomain.default(program, ints, overrides)


def _witness_labels(witness) -> list[dict]:
    return [{"variable": p, "label": str(l)} for p, l in witness]


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> tuple[int, dict, list[str]]:
    program, _ = _load(args.file)
    inputs = _inputs(program, args.inputs)
    r = execute(program, inputs)
    final = {k: _json_value(v) for k, v in r.final.values.items()}
    lines = [f"output: {_value_text(v)}" for v in r.final.output]
    lines += [f"{k} = {_value_text(v)}" for k, v in r.final.values.items()]
    report = {"inputs": inputs, "final": final, "output": [_json_value(v) for v in r.final.output],
              "statistics": {"steps": r.steps}}
    return EXIT_OK, report, lines


def cmd_trace(args) -> tuple[int, dict, list[str]]:
    program, policy = _load(args.file)
    inputs = _inputs(program, args.inputs)
    trace: list = []
    final, verdict = run_extended(program, policy, inputs, trace=trace)
    obs = final.observed
    lines = format_trace(trace).splitlines() if args.dump else []
    lines += [f"output: {_value_text(v)}" for v in obs.output]
    lines += [f"{k} = {_value_text(obs.values[k])} : {obs.labels[k]}" for k in obs.values]
    lines += [f"warning: {w}" for w in final.warnings]
    lines.append(f"verdict: {'Pass' if verdict.passed else 'Fail'}")
    lines += [f"  {p} = {l}" for p, l in verdict.witness]
    report = {
        "inputs": inputs,
        "verdict": "Pass" if verdict.passed else "Fail",
        "witness": _witness_labels(verdict.witness),
        "final": {k: {"value": _json_value(obs.values[k]), "label": str(obs.labels[k])}
                  for k in obs.values},
        "output": [_json_value(v) for v in obs.output],
        "warnings": list(final.warnings),
        "statistics": {"steps": final.steps},
    }
    if args.dump:
        report["trace"] = [{"step": i, "rule": r, "cl": str(cl)} for i, (r, cl) in enumerate(trace, 1)]
    return (EXIT_OK if verdict.passed else EXIT_NEGATIVE), report, lines


def cmd_analyze(args) -> tuple[int, dict, list[str]]:
    program, policy = _load(args.file)
    graph, verdict = explore(program, policy, budget=args.budget)
    stats = {"states": len(graph.nodes), "edges": len(graph.edges), "finals": len(graph.finals),
             "stuck": len(graph.stuck)}
    lines = [f"states: {stats['states']}  edges: {stats['edges']}  finals: {stats['finals']}"]
    lines += [f"warning: {w}" for w in graph.warnings]
    lines.append(f"verdict: {'Pass' if verdict.passed else 'Fail'}")
    lines += [f"  {p} = {l}" for p, l in verdict.witness]
    report = {"verdict": "Pass" if verdict.passed else "Fail",
              "witness": _witness_labels(verdict.witness), "warnings": list(graph.warnings),
              "statistics": stats}
    if args.cert:
        cert = emit(graph, CertificateKind(args.kind))
        try:
            Path(args.cert).write_text(cert.text(), encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.cert}: {exc.strerror or exc}") from None
        report["certificate"] = args.cert
        report["certificate_kind"] = args.kind
        report["certificate_bytes"] = cert.size()
        lines.append(f"certificate: {args.cert} ({args.kind}, {cert.size()} bytes)")
    return (EXIT_OK if verdict.passed else EXIT_NEGATIVE), report, lines


def cmd_check(args) -> tuple[int, dict, list[str]]:
    program, policy = _load(args.file)
    try:
        text = Path(args.cert).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {args.cert}: {exc}") from None
    result = check(program, policy, text)
    report = {"verdict": "Accept" if result.accepted else "Reject", "certificate": args.cert}
    if not result.accepted:
        report["witness"] = {"reason": str(result.reason), "detail": result.detail}
    return (EXIT_OK if result.accepted else EXIT_NEGATIVE), report, [str(result)]


def cmd_oracle(args) -> tuple[int, dict, list[str]]:
    program, policy = _load(args.file)
    domain = _domain(program, args.domain, args.values)
    r = brute_force_ni(program, policy, domain, cap=args.cap)
    report: dict[str, Any] = {
        "verdict": "Interferent" if r.interferent else "NonInterferent",
        "domain": {k: [_json_value(v) for v in vs] for k, vs in domain.values.items()},
        "statistics": {"runs": r.runs, "steps": r.steps},
    }
    lines = [str(r), f"runs: {r.runs}"]
    if r.interferent:
        a, b = r.finals
        diff = sorted(k for k in a.values if k in b.values and a.values[k] != b.values[k])
        report["witness"] = {"pair": list(r.witness), "differs": diff,
                             "outputs": [[_json_value(v) for v in a.output],
                                         [_json_value(v) for v in b.output]]}
        lines += [f"  {k}: {_value_text(a.values[k])} vs {_value_text(b.values[k])}" for k in diff]
        if a.output != b.output:
            lines.append(f"  output: {list(a.output)} vs {list(b.output)}")
    return (EXIT_NEGATIVE if r.interferent else EXIT_OK), report, lines


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nicert", description="Non-interference certification for .njava programs. "
                                   "A FILE of the form @NAME names a bundled example.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="program source (.njava) or @NAME")
        p.add_argument("--json", action="store_true", help="emit one JSON object")
        return p

    p = add("run", "run on the standard semantics")
    p.add_argument("--in", dest="inputs", action="append", default=[], metavar="NAME=VALUE")
    p.set_defaults(func=cmd_run)

    p = add("trace", "run with label tracking and decide the per-run verdict")
    p.add_argument("--in", dest="inputs", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--dump", action="store_true", help="print one line per step")
    p.set_defaults(func=cmd_trace)

    p = add("analyze", "explore the abstract semantics; optionally emit a certificate")
    p.add_argument("--cert", metavar="PATH")
    p.add_argument("--kind", choices=[k.value for k in CertificateKind], default="full")
    p.add_argument("--budget", type=int, default=DEFAULT_STATE_BUDGET, help="state budget")
    p.set_defaults(func=cmd_analyze)

    p = add("check", "check a certificate against a program")
    p.add_argument("cert", help="certificate (.nicert)")
    p.set_defaults(func=cmd_check)

    p = add("oracle", "brute-force non-interference over a finite input domain")
    p.add_argument("--domain", metavar="LO..HI", help="integer range for int inputs (default -2..3)")
    p.add_argument("--values", action="append", default=[], metavar="NAME=V1,V2,...",
                   help="explicit value set for one input")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of runs")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        code, report, lines = args.func(args)
    except (UsageError, RuntimeFault, StepLimitExceeded, StateBudgetExceeded, DomainCapExceeded,
            ValueError) as exc:
        if args.json:
            print(json.dumps({"command": args.command, "program": args.file, "error": str(exc)}))
        else:
            print(f"nicert {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    elapsed = time.perf_counter() - start
    if args.json:
        report = {"command": args.command, "program": args.file, **report}
        report.setdefault("statistics", {})["wall_time"] = round(elapsed, 6)
        print(json.dumps(report, sort_keys=True))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
