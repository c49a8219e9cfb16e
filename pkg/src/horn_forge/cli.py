"""``horn-forge`` command line: gen, solve, certify, oracle, emit.

Exit codes: solve 0 solved / 1 refuted / 2 unknown or resource limit;
certify 0 all clauses hold / 1 some clause fails; oracle 0 holds / 1 fails /
2 resource limit. Input errors, including constructs a command cannot
handle, exit 4 and usage errors exit 3 everywhere.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .certify import check_model, oracle
from .certify.oracle import QUERIES
from .errors import InputError, ResourceError, UnsupportedFragment
from .generate import VARIANTS, SchemaConfig, generate
from .horn import HornSystem, emit_smtlib
from .model import (ClosedSetEvidence, Derivation, LassoEvidence, Refuted, Solved, format_model,
                    parse_model)
from .program import SCHEMAS, load_program
from .solve import Budget, solve

EXIT_USAGE = 3
EXIT_INPUT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _names(text: str) -> tuple[str, ...]:
    return tuple(n for n in (part.strip() for part in text.split(",")) if n)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horn-forge",
                     description="Generate, solve and certify Horn constraints for "
                                 "transition systems.")
    parser.add_argument("command", choices=("gen", "solve", "certify", "oracle", "emit"))
    parser.add_argument("file", help="transition system (.ts)")
    parser.add_argument("--schema", choices=SCHEMAS)
    parser.add_argument("--variant", choices=VARIANTS)
    parser.add_argument("--low-in", type=_names, help="comma-separated public inputs")
    parser.add_argument("--low-out", type=_names, help="comma-separated public outputs")
    parser.add_argument("--sys-step", type=int, help="per-variable bound on system moves")
    parser.add_argument("--budget-depth", type=int, default=Budget.depth)
    parser.add_argument("--budget-time", type=float, default=Budget.time)
    parser.add_argument("--format", choices=("human", "json"), default="human")
    parser.add_argument("--emit", metavar="PATH", help="also write SMT-LIB2 (gen) / output path")
    parser.add_argument("--deterministic", type=_bool, default=True, metavar="BOOL")
    parser.add_argument("--model", metavar="PATH", help="model file or JSON report (certify)")
    parser.add_argument("--query", choices=QUERIES, help="oracle query")
    return parser


# --- JSON helpers -------------------------------------------------------------

def _num(v):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _derivation_json(hs: HornSystem, d: Derivation) -> dict:
    return {"clause": hs.clause_id(d.clause), "index": d.clause,
            "assignment": {k: _num(v) for k, v in d.assignment},
            "children": [_derivation_json(hs, c) for c in d.children]}


def _evidence_json(hs: HornSystem, ev) -> dict:
    if isinstance(ev, Derivation):
        return {"kind": "derivation", "height": ev.height, "trace": _trace(hs, ev),
                "derivation": _derivation_json(hs, ev)}
    if isinstance(ev, LassoEvidence):
        return {"kind": "lasso", "cycle": [_fact(hs, d) for d in ev.derivations],
                "derivations": [_derivation_json(hs, d) for d in ev.derivations]}
    return {"kind": "closed-set", "predicate": ev.inv,
            "states": [list(s) for s in ev.states],
            "choices": [[list(s), list(c)] for s, c in ev.choices]}


def _fact(hs: HornSystem, d: Derivation) -> str:
    clause = hs.clauses[d.clause]
    values = d.values
    if clause.is_query:
        scope = ", ".join(f"{v.name} = {_num(values[v.name])}" for v in clause.universals
                          if v.name in values)
        return f"false ({scope})" if scope else "false"
    args = ", ".join(str(_num(values[a])) for a in clause.head.args)
    return f"{clause.head.pred}({args})"


def _trace(hs: HornSystem, d: Derivation) -> list[str]:
    out: list[str] = []

    def walk(node):
        for c in node.children:
            walk(c)
        out.append(f"[{hs.clause_id(node.clause)}] {_fact(hs, node)}")

    walk(d)
    return out


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


# --- commands -----------------------------------------------------------------

def _config(args, defaults: dict | None = None) -> SchemaConfig:
    defaults = defaults or {}
    variant = args.variant or defaults.get("variant") or "corrected"
    low_in = args.low_in if args.low_in is not None else defaults.get("low_in")
    low_out = args.low_out if args.low_out is not None else defaults.get("low_out")
    step = args.sys_step if args.sys_step is not None else defaults.get("sys_step")
    return SchemaConfig(variant, tuple(low_in) if low_in is not None else None,
                        tuple(low_out) if low_out is not None else None, step)


def _system(args, defaults: dict | None = None) -> tuple[HornSystem, SchemaConfig]:
    schema = args.schema or (defaults or {}).get("schema")
    if schema is None:
        raise _Usage("--schema is required")
    ts = load_program(args.file)
    cfg = _config(args, defaults)
    return generate(ts, schema, cfg), cfg


class _Usage(Exception):
    pass


def cmd_gen(args, out) -> int:
    hs, _ = _system(args)
    if args.emit:
        Path(args.emit).write_text(emit_smtlib(hs))
    out.write(str(hs))
    return 0


def cmd_emit(args, out) -> int:
    hs, _ = _system(args)
    text = emit_smtlib(hs)
    if args.emit:
        Path(args.emit).write_text(text)
    else:
        out.write(text)
    return 0


def cmd_solve(args, out) -> int:
    hs, cfg = _system(args)
    budget = Budget(depth=args.budget_depth, time=args.budget_time,
                    deterministic=args.deterministic)
    verdict = solve(hs, budget)
    code = {"SOLVED": 0, "REFUTED": 1}.get(verdict.status, 2)
    if args.format == "json":
        doc = {
            "command": "solve",
            "file": args.file,
            "schema": hs.schema,
            "variant": cfg.variant,
            "low_in": list(cfg.low_in) if cfg.low_in is not None else None,
            "low_out": list(cfg.low_out) if cfg.low_out is not None else None,
            "sys_step": cfg.sys_step,
            "status": verdict.status,
            "strategy": getattr(verdict, "strategy", None),
            "model": format_model(hs, verdict.model) if isinstance(verdict, Solved) else None,
            "evidence": (_evidence_json(hs, verdict.evidence)
                         if isinstance(verdict, Refuted) else None),
            "reason": getattr(verdict, "reason", None),
            "spent": dict(getattr(verdict, "spent", ())) or None,
        }
        out.write(_dump(doc))
        return code
    if isinstance(verdict, Solved):
        out.write(f"SOLVED ({verdict.strategy})\n")
        out.write(format_model(hs, verdict.model))
    elif isinstance(verdict, Refuted):
        out.write(f"REFUTED ({verdict.strategy})\n")
        ev = verdict.evidence
        if isinstance(ev, Derivation):
            out.write(f"derivation of height {ev.height}:\n")
            out.writelines(f"  {line}\n" for line in _trace(hs, ev))
        elif isinstance(ev, LassoEvidence):
            out.write("lasso through the well-founded relation:\n")
            out.writelines(f"  {_fact(hs, d)}\n" for d in ev.derivations)
        elif isinstance(ev, ClosedSetEvidence):
            out.write(f"states {ev.inv} can never leave: "
                      + ", ".join(map(str, ev.states)) + "\n")
            if ev.choices:
                out.write("opponent choices: "
                          + ", ".join(f"{s} -> {c}" for s, c in ev.choices) + "\n")
    else:
        out.write(f"UNKNOWN: {verdict.reason}\n")
        for key, value in verdict.spent:
            out.write(f"  {key}: {value}\n")
    return code


def _load_model_source(path: str) -> tuple[str, dict]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read model: {exc}") from None
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON report: {exc}") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("model"), str):
            raise InputError("JSON report carries no model")
        return doc["model"], doc
    return text, {}


def cmd_certify(args, out) -> int:
    if not args.model:
        raise _Usage("--model is required")
    text, defaults = _load_model_source(args.model)
    hs, _ = _system(args, defaults)
    model = parse_model(text, hs)
    reports = check_model(hs, model)
    ok = all(r.holds for r in reports)
    if args.format == "json":
        out.write(_dump({"command": "certify", "file": args.file, "schema": hs.schema,
                         "certified": ok,
                         "clauses": [{"clause": r.clause, "status": r.status,
                                      "witness": ({k: _num(v) for k, v in r.witness}
                                                  if r.witness is not None else None),
                                      "reason": r.reason or None} for r in reports]}))
    else:
        out.writelines(f"{r}\n" for r in reports)
        out.write("certified\n" if ok else "not certified\n")
    return 0 if ok else 1


def cmd_oracle(args, out) -> int:
    if not args.query:
        raise _Usage("--query is required")
    ts = load_program(args.file)
    verdict = oracle(ts, args.query, low_in=args.low_in or (), low_out=args.low_out or (),
                     sys_step=args.sys_step)
    if args.format == "json":
        out.write(_dump({"command": "oracle", "file": args.file, "query": verdict.query,
                         "answer": verdict.answer, "evidence": verdict.evidence}))
    else:
        out.write(f"{verdict.query}: {verdict.answer}\n")
        for key, value in verdict.evidence.items():
            out.write(f"  {key}: {value}\n")
    return 0 if verdict.holds else 1


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "certify": cmd_certify, "oracle": cmd_oracle,
            "emit": cmd_emit}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except _Usage as exc:
        sys.stderr.write(f"horn-forge: error: {exc}\n")
        return EXIT_USAGE
    except (InputError, UnsupportedFragment) as exc:
        sys.stderr.write(f"horn-forge: input error: {exc}\n")
        return EXIT_INPUT
    except ResourceError as exc:
        sys.stderr.write(f"horn-forge: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
