"""``directlogic`` command line.

Exit codes: 0 success or holds, 1 checked and false, 2 usage or internal
error.  Every subcommand accepts ``--format text|json``; JSON output is
sorted and indented so it is byte-stable for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import actors, chaining, decide as dec, kernel, lam, meta
from .parser import ParseError, parse_expr, parse_prop, parse_statement
from .syntax import Inference, print_expr, print_prop, print_statement, sentence_to_xml, xml_to_sentence

DATA = Path(__file__).parent / "data"

OK, FALSE, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve(path: str) -> Path:
    """A user path, or a file of the same name shipped with the package."""
    p = Path(path)
    if p.exists():
        return p
    shipped = DATA / p.name
    if shipped.exists():
        return shipped
    raise FileNotFoundError(f"no such file: {path}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _write(path: str, text: str):
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# parse

def cmd_parse(a, out):
    kind = a.kind
    if kind == "auto":
        try:
            node, kind = parse_statement(a.text), "statement"
        except ParseError:
            node, kind = parse_expr(a.text), "expr"
    elif kind == "prop":
        node = parse_prop(a.text)
    elif kind == "expr":
        node = parse_expr(a.text)
    else:
        node = parse_statement(a.text)
    if kind == "statement" and not node.vars:
        node, kind = node.body, "prop"
    printed = {"statement": print_statement, "prop": print_prop, "expr": print_expr}[kind](node)
    rec = {"kind": kind, "text": printed}
    if a.xml:
        if kind != "prop":
            raise UsageError("--xml needs a closed proposition")
        rec["xml"] = sentence_to_xml(meta.reify(node, a.theory))
    if a.format == "json":
        out.write(_dump(rec))
    else:
        out.write(f"{kind}: {printed}\n")
        if "xml" in rec:
            out.write(rec["xml"] + "\n")
    return OK


# ---------------------------------------------------------------------------
# check

def cmd_check(a, out):
    script = kernel.load_script(_resolve(a.file))
    if a.fix:
        c = meta.build_diagonal(a.fix, script.theory)
        script = meta.with_lemma(script, meta.export_lemma(c, a.fix_label))
    report = kernel.check_script(script)
    out.write(report.to_json() + "\n" if a.format == "json" else report.to_text() + "\n")
    return OK if report.verified else FALSE


# ---------------------------------------------------------------------------
# decide

def decision_record(sequent: Inference, holds: bool, trace, oracle=None) -> dict:
    rec = {"sequent": print_prop(sequent), "holds": holds}
    if trace is not None:
        rec["trace"] = trace.to_dict()
    if oracle is not None:
        rec["oracle"] = {"proved": oracle.proved, "budget_exceeded": oracle.budget_exceeded,
                         "nodes": oracle.nodes, "depth": oracle.depth}
    return rec


def parse_decision(text: str) -> dict:
    """Read a structured decision back; the trace becomes a ``TraceNode``."""
    rec = json.loads(text)
    if not isinstance(rec, dict) or "sequent" not in rec or "holds" not in rec:
        raise ValueError("not a decision record")
    parse_prop(rec["sequent"])
    if "trace" in rec:
        rec["trace"] = dec.TraceNode.from_dict(rec["trace"])
    return rec


def cmd_decide(a, out):
    seq = parse_prop(a.sequent)
    if not isinstance(seq, Inference):
        raise UsageError("decide expects a sequent such as 'P |-{Bot} P \\/ Q'")
    holds, trace = dec.decide(seq, trace=a.trace)
    oracle = dec.oracle_search(seq, depth=a.oracle_depth) if a.oracle_depth else None
    if a.format == "json":
        out.write(_dump(decision_record(seq, holds, trace, oracle)))
    else:
        out.write(f"{print_prop(seq)}: {'holds' if holds else 'does not hold'}\n")
        if trace is not None:
            out.write("\n".join(trace.render()) + "\n")
        if oracle is not None:
            verdict = "proved" if oracle.proved else (
                "budget exceeded" if oracle.budget_exceeded else "no proof")
            agree = "agrees" if oracle.proved == holds else (
                "inconclusive" if oracle.budget_exceeded else "DISAGREES")
            out.write(f"oracle (depth {a.oracle_depth}): {verdict}, {oracle.nodes} nodes; {agree}\n")
    return OK if holds else FALSE


# ---------------------------------------------------------------------------
# eval

def cmd_eval(a, out):
    e = parse_expr(a.expr)
    g = lam.explore(e, a.max_nodes, a.max_depth)
    v = lam.classify(e, a.max_nodes, a.max_depth)
    if a.dot:
        _write(a.dot, g.to_dot())
    values = sorted(v.values, key=print_expr)
    if a.one:
        values = values[:1]
    rec = {"expr": print_expr(e), "verdict": v.kind, "limits_hit": v.limits_hit,
           "values": [print_expr(x) for x in values if lam.is_value(x)],
           "stuck": sorted(print_expr(x) for x in v.stuck) if not a.one else [],
           "nodes": len(g.nodes)}
    if v.witness is not None:
        rec["witness"] = [print_expr(x) for x in v.witness]
    if a.format == "json":
        out.write(_dump(rec))
    else:
        out.write(f"{rec['expr']}\nverdict: {v.kind}{' (limits hit)' if v.limits_hit else ''}\n")
        for x in rec["values"]:
            out.write(f"  value {x}\n")
        for x in rec["stuck"]:
            out.write(f"  stuck {x}\n")
        if "witness" in rec:
            out.write(f"  divergence: {rec['witness'][0]} ->+ {rec['witness'][1]}\n")
        out.write(f"explored {len(g.nodes)} terms\n")
    return OK if (rec["values"] or not a.one) else FALSE


# ---------------------------------------------------------------------------
# chain

def cmd_chain(a, out):
    tf = chaining.load_theory(_resolve(a.file))
    report = chaining.run_to_quiescence(tf.store, a.max_firings, seed=a.seed)
    result = None
    if a.query:
        result = chaining.query_goal(tf.store, parse_statement(a.query, tf.store.name), a.max_firings)
    if a.format == "json":
        rec = report.to_dict()
        if result is not None:
            rec["query"] = {"goal": print_statement(result.goal) if hasattr(result.goal, "vars")
                            else print_prop(result.goal),
                            "established": result.succeeded,
                            "bindings": [{k: print_expr(v) for k, v in sorted(b.items())}
                                         for b in result.bindings],
                            "budget_exhausted": result.budget_exhausted}
        out.write(_dump(rec))
    else:
        out.write(report.to_text())
        if result is not None:
            out.write(result.to_text())
    if result is not None and not result.succeeded:
        return FALSE
    return OK


# ---------------------------------------------------------------------------
# sim

def cmd_sim(a, out):
    fairness = actors.Unfair if a.unfair else actors.Fair
    if a.sweep:
        h = actors.sweep(actors.parse_seed_range(a.sweep), fairness, a.max_steps,
                         program=a.program, workers=a.workers)
        out.write(_dump(h.to_dict()) if a.format == "json" else h.to_text())
        return OK
    if a.seed is None:
        raise UsageError("sim needs --seed N or --sweep A..B")
    o = actors.run_program(a.program, a.seed, fairness, a.max_steps)
    if a.log:
        _write(a.log, o.log.to_text())
    out.write(_dump(o.to_dict()) if a.format == "json" else o.to_text())
    return OK


# ---------------------------------------------------------------------------
# meta

def construction_record(c: meta.DiagonalConstruction) -> dict:
    rec = {
        "name": c.name, "theory": c.theory,
        "fixed_sentence": sentence_to_xml(c.fixed_sentence),
        "fix_lines": [{"expr": print_expr(l.expr), "justification": l.justification, "ok": l.ok}
                      for l in c.fix_lines],
        "certificate": [{"prop": print_prop(s.prop), "justification": s.justification,
                         "ok": s.ok, "detail": s.detail} for s in c.certificate],
        "result": print_prop(c.derived_equivalence),
        "verified": c.verified,
    }
    if c.admissibility is not None:
        rec["admissibility"] = {"sentence": sentence_to_xml(c.admissibility.sentence),
                                "assumed": c.admissibility.assumed,
                                "note": c.admissibility.note}
    return rec


def cmd_meta(a, out):
    if a.action == "build":
        target = parse_prop(a.target) if a.target else None
        c = meta.build_diagonal(a.name, a.theory, target)
        text = _dump(construction_record(c)) if a.format == "json" else c.to_text()
        if a.certificate:
            _write(a.certificate, text)
        out.write(text)
        return OK if c.verified else FALSE
    if a.action == "reify":
        s = meta.reify(parse_prop(a.name), a.theory)
        x = sentence_to_xml(s)
        out.write(_dump({"xml": x}) if a.format == "json" else x + "\n")
        return OK
    p = meta.abstract(xml_to_sentence(a.name), a.theory)
    out.write(_dump({"prop": print_prop(p)}) if a.format == "json" else print_prop(p) + "\n")
    return OK


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text",
                        help="report format (default: text)")
    p = _Parser(prog="directlogic", description="Direct Logic toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", parents=[common], help="parse and pretty-print")
    s.add_argument("text")
    s.add_argument("--kind", choices=("auto", "statement", "prop", "expr"), default="auto")
    s.add_argument("--xml", action="store_true", help="also print the reified sentence")
    s.add_argument("--theory", default="T")
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("check", parents=[common], help="check a .dlp proof script")
    s.add_argument("file")
    s.add_argument("--fix", metavar="CONSTRUCTION",
                   help="supply the script's fixed-point lemma from a diagonal construction")
    s.add_argument("--fix-label", default="Fix")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("decide", parents=[common], help="decide a Boolean sequent")
    s.add_argument("sequent")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--oracle-depth", type=int, default=0, metavar="N")
    s.set_defaults(run=cmd_decide)

    s = sub.add_parser("eval", parents=[common], help="explore a λ expression")
    s.add_argument("expr")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", default=True)
    g.add_argument("--one", action="store_true")
    s.add_argument("--max-nodes", type=int, default=10_000)
    s.add_argument("--max-depth", type=int, default=50)
    s.add_argument("--dot", metavar="FILE")
    s.set_defaults(run=cmd_eval)

    s = sub.add_parser("chain", parents=[common], help="run a .dlt theory")
    csub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = csub.add_parser("run", parents=[common])
    r.add_argument("file")
    r.add_argument("--query", metavar="GOAL")
    r.add_argument("--max-firings", type=int, default=10_000)
    r.add_argument("--seed", type=int)
    r.set_defaults(run=cmd_chain)

    s = sub.add_parser("sim", parents=[common], help="actor simulation")
    s.add_argument("program", choices=("unbounded", "csp"))
    s.add_argument("--seed", type=int)
    f = s.add_mutually_exclusive_group()
    f.add_argument("--fair", action="store_true", default=True)
    f.add_argument("--unfair", action="store_true")
    s.add_argument("--max-steps", type=int, default=1000)
    s.add_argument("--log", metavar="FILE")
    s.add_argument("--sweep", metavar="A..B")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(run=cmd_sim)

    s = sub.add_parser("meta", parents=[common], help="reification and diagonal constructions")
    msub = s.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = msub.add_parser("build", parents=[common])
    b.add_argument("name", choices=meta.NAMES)
    b.add_argument("--theory", default="T")
    b.add_argument("--target", metavar="PROP", help="Ψ for curry and arginfers")
    b.add_argument("--certificate", metavar="FILE")
    b.set_defaults(run=cmd_meta)
    r = msub.add_parser("reify", parents=[common])
    r.add_argument("name", metavar="PROP")
    r.add_argument("--theory", default="T")
    r.set_defaults(run=cmd_meta)
    r = msub.add_parser("abstract", parents=[common])
    r.add_argument("name", metavar="XML")
    r.add_argument("--theory", default="T")
    r.set_defaults(run=cmd_meta)
    return p


def main(argv: Optional[list] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args, out)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return ERROR
    except SystemExit as exc:      # --help
        return int(exc.code or 0)
    except (ParseError, kernel.KernelError, dec.DecideError, lam.LamError, meta.MetaError,
            chaining.ChainError, actors.ActorError, ValueError, OSError) as exc:
        err.write(f"directlogic: error: {exc}\n")
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
