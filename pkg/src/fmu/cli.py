"""Command-line front end.

Exit codes: 0 success, 1 semantic refutation (a Distinguished verdict),
2 usage, parse, or type errors.  With --json a single document is printed
to stdout with the shape {"command": ..., "input": ..., "result": ...};
rationals are encoded as "num/den" strings and distributions as arrays
sorted by their printed value, so identical invocations produce identical
bytes.

The environment variable FMU_EFFORT can preset budgets as comma-separated
key=value pairs (nodes=20000,iters=30,silent=200,depth=3); command-line
flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import corpus
from .analysis import (
    DEFAULT_EFFORT, Effort, IncompleteChain, build_chain, branch_paths,
    exact_distribution, prob_bounds, solve_exact, stratified_lower,
    termination_lower, distribution_lower, NodeStatus,
)
from .equiv import (
    ApproximationHolds, Distinguished, EquivOpts, Inconclusive, ciu_approx,
    ciu_equiv, context_display, enumerate_contexts,
)
from .parser import ParseError, parse_term, parse_type
from .printer import pretty, pretty_type
from .semantics import (
    Config, FuelExhausted, StuckAt, Terminated, from_term, sample_run,
    step_successors,
)
from .syntax import Term, erase
from .typecheck import TypecheckError, typecheck


class UsageError(Exception):
    pass


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _read_term(path: str) -> Term:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_term(fh.read())


def _env_effort() -> dict[str, int]:
    out: dict[str, int] = {}
    raw = os.environ.get("FMU_EFFORT", "")
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, val = part.partition("=")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise UsageError(f"bad FMU_EFFORT entry {part!r}")
    return out


def _effort(args: argparse.Namespace) -> Effort:
    env = _env_effort()
    nodes = args.budget if getattr(args, "budget", None) else env.get(
        "nodes", DEFAULT_EFFORT.node_budget)
    iters = args.iters if getattr(args, "iters", None) else env.get(
        "iters", DEFAULT_EFFORT.iters)
    silent = env.get("silent", DEFAULT_EFFORT.silent_budget)
    return Effort(node_budget=nodes, iters=iters, silent_budget=silent)


def _emit(args: argparse.Namespace, command: str, inputs, result,
          text: str) -> None:
    if args.json:
        doc = {"command": command, "input": inputs, "result": result}
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(text)


def _dist_json(d) -> list[dict]:
    rows = []
    for cfg, p in d:
        row = {"value": pretty(cfg.term), "prob": _frac(p)}
        if cfg.heap:
            row["heap"] = list(cfg.heap)
        rows.append(row)
    rows.sort(key=lambda r: (r["value"], r.get("heap", [])))
    return rows


def _dist_text(d) -> str:
    rows = _dist_json(d)
    if not rows:
        return "(empty distribution)"
    return "\n".join(
        f"{r['prob']}\t{r['value']}" + (f"\theap={r['heap']}" if "heap" in r else "")
        for r in rows)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_parse(args) -> int:
    term = _read_term(args.file)
    _emit(args, "parse", {"file": args.file},
          {"pretty": pretty(term)}, pretty(term))
    return 0


def cmd_check(args) -> int:
    term = _read_term(args.file)
    expected = parse_type(args.type) if args.type else None
    ty = typecheck(term, expected)
    _emit(args, "check", {"file": args.file, "type": args.type},
          {"type": pretty_type(ty)}, pretty_type(ty))
    return 0


def cmd_step(args) -> int:
    term = erase(_read_term(args.file))
    root = from_term(term)
    lines: list[str] = []
    tree: list[dict] = []

    def walk(cfg: Config, depth: int, weight: Fraction, indent: int, out: list):
        for s in step_successors(cfg):
            w = weight * s.weight
            lines.append("  " * indent +
                         f"p={_frac(s.weight)} [{s.kind.value}] "
                         f"{pretty(s.target.term)}"
                         + (f" heap={list(s.target.heap)}" if s.target.heap else ""))
            node = {"prob": _frac(s.weight), "kind": s.kind.value,
                    "term": pretty(s.target.term)}
            if s.target.heap:
                node["heap"] = list(s.target.heap)
            if depth > 1:
                node["next"] = []
                walk(s.target, depth - 1, w, indent + 1, node["next"])
            out.append(node)

    walk(root, args.n, Fraction(1), 0, tree)
    text = pretty(term) + ("\n" + "\n".join(lines) if lines else "\n(no successors)")
    _emit(args, "step", {"file": args.file, "depth": args.n},
          {"term": pretty(term), "tree": tree}, text)
    return 0


def cmd_run(args) -> int:
    term = erase(_read_term(args.file))
    res = sample_run(from_term(term), seed=args.seed, fuel=args.fuel)
    match res:
        case Terminated(value, steps):
            kind, cfg, extra = "terminated", value, {"steps": steps}
        case StuckAt(cfg2, steps):
            kind, cfg, extra = "stuck", cfg2, {"steps": steps}
        case FuelExhausted(cfg3):
            kind, cfg, extra = "fuel-exhausted", cfg3, {}
    result = {"outcome": kind, "term": pretty(cfg.term), **extra}
    if cfg.heap:
        result["heap"] = list(cfg.heap)
    text = f"{kind}: {pretty(cfg.term)}" + (f" heap={list(cfg.heap)}" if cfg.heap else "")
    _emit(args, "run", {"file": args.file, "seed": args.seed, "fuel": args.fuel},
          result, text)
    return 0


def cmd_prob(args) -> int:
    term = erase(_read_term(args.file))
    cfg = from_term(term)
    effort = _effort(args)
    if args.exact:
        g = build_chain(cfg, effort.node_budget)
        if not g.complete:
            raise UsageError(
                f"reachable chain exceeds {effort.node_budget} nodes; "
                f"rerun with a larger --budget or without --exact")
        p = solve_exact(g)[g.root]
        _emit(args, "prob", {"file": args.file, "exact": True},
              {"exact": _frac(p)}, _frac(p))
        return 0
    b = prob_bounds(cfg, effort)
    result = {"lower": _frac(b.lower), "upper": _frac(b.upper), "exact": b.exact}
    text = (_frac(b.lower) if b.exact
            else f"lower={_frac(b.lower)} upper={_frac(b.upper)} (not exact)")
    _emit(args, "prob", {"file": args.file, "exact": False}, result, text)
    return 0


def cmd_strat(args) -> int:
    term = erase(_read_term(args.file))
    p = stratified_lower(from_term(term), args.k, _effort(args).silent_budget)
    _emit(args, "strat", {"file": args.file, "k": args.k},
          {"prob": _frac(p)}, _frac(p))
    return 0


def cmd_dist(args) -> int:
    term = erase(_read_term(args.file))
    cfg = from_term(term)
    effort = _effort(args)
    if args.exact:
        g = build_chain(cfg, effort.node_budget)
        if not g.complete:
            raise UsageError(
                f"reachable chain exceeds {effort.node_budget} nodes; "
                f"rerun with a larger --budget or without --exact")
        d = exact_distribution(g)
    else:
        d = distribution_lower(cfg, args.fuel if args.fuel else effort.iters)
    result = {"entries": _dist_json(d), "mass": _frac(d.mass())}
    _emit(args, "dist", {"file": args.file, "exact": bool(args.exact)},
          result, _dist_text(d) + f"\nmass {_frac(d.mass())}")
    return 0


def cmd_red(args) -> int:
    term = erase(_read_term(args.file))
    paths = branch_paths(from_term(term), _effort(args).silent_budget)
    rows = [{"weight": _frac(p.weight), "length": len(p.steps),
             "last": pretty(p.last().term)} for p in paths]
    text = ("(empty path set)" if not rows else
            "\n".join(f"w={r['weight']} len={r['length']} -> {r['last']}"
                      for r in rows))
    _emit(args, "red", {"file": args.file}, {"paths": rows}, text)
    return 0


def cmd_graph(args) -> int:
    term = erase(_read_term(args.file))
    g = build_chain(from_term(term), _effort(args).node_budget)
    lines = ["digraph chain {"]
    for i, cfg in enumerate(g.nodes):
        label = pretty(cfg.term).replace("\\", "\\\\").replace('"', '\\"')
        if len(label) > 40:
            label = label[:37] + "..."
        shape = {NodeStatus.VALUE: "doublecircle", NodeStatus.STUCK: "box",
                 NodeStatus.LIVE: "circle", NodeStatus.FRONTIER: "diamond"}[g.status[i]]
        lines.append(f'  n{i} [shape={shape} label="{i}: {label}"];')
    for i, out in enumerate(g.edges):
        for w, j, kind in out:
            lines.append(f'  n{i} -> n{j} [label="{_frac(w)} {kind.value}"];')
    lines.append("}")
    dot = "\n".join(lines)
    with open(args.dot, "w", encoding="utf-8") as fh:
        fh.write(dot + "\n")
    summary = (f"nodes={len(g.nodes)} complete={g.complete} "
               f"written to {args.dot}")
    _emit(args, "graph", {"file": args.file, "dot": args.dot},
          {"nodes": len(g.nodes), "complete": g.complete}, summary)
    return 0


def _verdict_json(v) -> dict:
    match v:
        case ApproximationHolds(depth, n, _):
            return {"verdict": "holds", "depth": depth, "contexts": n}
        case Distinguished(ctx, lo, hi, wit):
            out = {"verdict": "distinguished", "context": context_display(ctx),
                   "lhs_lower": _frac(lo), "rhs_upper": _frac(hi),
                   "lhs_lower_decimal": float(lo), "rhs_upper_decimal": float(hi)}
            if wit is not None:
                out["witness_value"] = pretty(wit)
            return out
        case Inconclusive(ctx, _, _):
            return {"verdict": "inconclusive", "context": context_display(ctx)}
    raise AssertionError(v)


def _verdict_text(label: str, v) -> str:
    match v:
        case ApproximationHolds(depth, n, _):
            return f"{label}: holds up to depth {depth} over {n} contexts"
        case Distinguished(ctx, lo, hi, wit):
            extra = f" at value {pretty(wit)}" if wit is not None else ""
            return (f"{label}: DISTINGUISHED{extra}\n"
                    f"  context: {context_display(ctx)}\n"
                    f"  lhs lower {_frac(lo)} (= {float(lo):.6g}) > "
                    f"rhs upper {_frac(hi)} (= {float(hi):.6g})")
        case Inconclusive(ctx, _, _):
            return f"{label}: inconclusive at context {context_display(ctx)}"
    raise AssertionError(v)


def cmd_ciu(args) -> int:
    lhs = _read_term(args.lhs)
    rhs = _read_term(args.rhs)
    ty = parse_type(args.type)
    opts = EquivOpts(depth=args.depth, effort=_effort(args))
    if args.both:
        v = ciu_equiv(lhs, rhs, ty, opts)
        result = {"forward": _verdict_json(v.forward),
                  "backward": _verdict_json(v.backward),
                  "equivalent": v.holds}
        text = "\n".join([_verdict_text("lhs <= rhs", v.forward),
                          _verdict_text("rhs <= lhs", v.backward),
                          f"equivalent: {v.holds}"])
        refuted = not v.holds
    else:
        v1 = ciu_approx(lhs, rhs, ty, opts)
        result = _verdict_json(v1)
        text = _verdict_text("lhs <= rhs", v1)
        refuted = isinstance(v1, Distinguished)
    _emit(args, "ciu", {"lhs": args.lhs, "rhs": args.rhs, "type": args.type,
                        "depth": args.depth}, result, text)
    return 1 if refuted else 0


def cmd_corpus(args) -> int:
    if args.action == "list":
        entries = corpus.registry_entries()
        rows = [{"name": n, "params": p, "description": d}
                for n, (p, d) in sorted(entries.items())]
        text = "\n".join(f"{r['name']:18s} {r['params']:12s} {r['description']}"
                         for r in rows)
        _emit(args, "corpus", {"action": "list"}, {"programs": rows}, text)
        return 0
    spec = corpus.build(args.name, args.params)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(spec.source + "\n")
        text = f"wrote {args.output} : {pretty_type(spec.ty)}"
    else:
        text = spec.source
    _emit(args, "corpus",
          {"action": "emit", "name": args.name, "params": args.params},
          {"type": pretty_type(spec.ty), "source": spec.source}, text)
    return 0


# ---------------------------------------------------------------------------

def build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fmu",
        description="Interpreter and exact probabilistic analyses for a "
                    "polymorphic calculus with uniform choice and "
                    "first-order references.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, effort=True):
        p.add_argument("--json", action="store_true", help="emit one JSON document")
        if effort:
            p.add_argument("--budget", type=int, default=None,
                           help="node budget for chain exploration")
            p.add_argument("--iters", type=int, default=None,
                           help="iteration count for the staged bounds")

    p = sub.add_parser("parse", help="parse a source file and print it back")
    p.add_argument("file")
    common(p, effort=False)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("check", help="typecheck a source file")
    p.add_argument("file")
    p.add_argument("--type", default=None, help="expected type to check against")
    common(p, effort=False)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("step", help="print the weighted successor tree")
    p.add_argument("file")
    p.add_argument("-n", type=int, default=1, help="tree depth")
    common(p, effort=False)
    p.set_defaults(fn=cmd_step)

    p = sub.add_parser("run", help="sample one seeded run")
    p.add_argument("file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fuel", type=int, default=10_000)
    common(p, effort=False)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("prob", help="termination probability (exact or bounds)")
    p.add_argument("file")
    p.add_argument("--exact", action="store_true",
                   help="require a complete chain and solve exactly")
    common(p)
    p.set_defaults(fn=cmd_prob)

    p = sub.add_parser("strat", help="stratified termination probability")
    p.add_argument("file")
    p.add_argument("-k", type=int, required=True,
                   help="number of counted (choice/unfold-fold) reductions")
    common(p)
    p.set_defaults(fn=cmd_strat)

    p = sub.add_parser("dist", help="distribution over terminal values")
    p.add_argument("file")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--fuel", type=int, default=None,
                   help="iteration stages for the non-exact distribution")
    common(p)
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("red", help="paths through exactly one counted reduction")
    p.add_argument("file")
    common(p)
    p.set_defaults(fn=cmd_red)

    p = sub.add_parser("graph", help="write the reachable chain as DOT")
    p.add_argument("file")
    p.add_argument("--dot", required=True, help="output path")
    common(p)
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("ciu", help="contextual approximation / equivalence test")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--type", required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--both", action="store_true",
                   help="test both directions (equivalence)")
    common(p)
    p.set_defaults(fn=cmd_ciu)

    p = sub.add_parser("corpus", help="list or emit built-in example programs")
    psub = p.add_subparsers(dest="action", required=True)
    pl = psub.add_parser("list")
    common(pl, effort=False)
    pl.set_defaults(fn=cmd_corpus)
    pe = psub.add_parser("emit")
    pe.add_argument("name")
    pe.add_argument("params", nargs="*")
    pe.add_argument("-o", "--output", default=None)
    common(pe, effort=False)
    pe.set_defaults(fn=cmd_corpus)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_argparser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, TypecheckError, UsageError, IncompleteChain,
            FileNotFoundError, KeyError) as e:
        print(f"fmu: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
