"""``fglab`` command-line interface.

Exit codes: 0 when every row is ok, 2 when some rows carry errors, 1 on a
fatal error (bad arguments, unreadable config, invalid group).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .. import approx, growth, structure, words
from ..groups import DEFAULT_CAP, CapExceeded, FiniteGroup, NeedsTable, build, element_order
from ..growth import BudgetExceeded
from ..perm import Permutation
from ..specs import SpecError, parse_spec
from .cache import ResultCache
from .experiments import REGISTRY
from .runner import ConfigError, format_table, load_config, render, run

DEFAULT_CACHE = ".fglab-cache"


class Fatal(Exception):
    pass


def _emit(rows: list[dict[str, Any]], fmt: str, extra: dict[str, Any] | None = None) -> None:
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    if fmt == "json":
        payload = dict(extra or {})
        payload["rows"] = rows
        sys.stdout.write(json.dumps(payload, indent=2, default=str) + "\n")
    elif fmt == "csv":
        import csv

        w = csv.DictWriter(sys.stdout, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    else:
        for k, v in (extra or {}).items():
            sys.stdout.write(f"{k}: {v}\n")
        if rows:
            sys.stdout.write(format_table(cols, [[r.get(c, "") for c in cols] for r in rows]))


def _group(args: argparse.Namespace) -> FiniteGroup:
    try:
        return build(args.group, getattr(args, "cap", DEFAULT_CAP))
    except SpecError as exc:
        raise Fatal(str(exc)) from None


def _pair(g: FiniteGroup, text: str) -> tuple[Any, Any]:
    parts = text.split(";")
    if len(parts) != 2:
        raise Fatal(f"--pair expects 'a;b', got {text!r}")
    try:
        return g.parse_element(parts[0]), g.parse_element(parts[1])
    except (KeyError, ValueError) as exc:
        raise Fatal(str(exc)) from None


def _fmt(g: FiniteGroup, x: Any) -> str:
    return g.format(x) if isinstance(x, int) else str(x)


# subcommands ---------------------------------------------------------------


def cmd_group(args: argparse.Namespace) -> int:
    spec = parse_spec(args.group)
    if args.action == "build":
        g = build(spec, args.cap)
        _emit([], args.format, {"group": str(spec), "spec": json.dumps(spec.to_json()),
                                "order": g.order, "backing": g.backing})
        return 0
    g = build(spec, args.cap)
    info = {"group": str(spec), "order": g.order, "backing": g.backing,
            "generators": ", ".join(_fmt(g, x) for x in g.generators)}
    rows = []
    if g.is_tabled and g.order <= args.list_max:
        rows = [{"id": i, "element": g.format(i), "order": element_order(g, i)} for i in g.elements()]
    _emit(rows, args.format, info)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    g = _group(args)
    rep = structure.analyze(g, ks=tuple(args.k), seed=args.seed)
    data = rep.to_json()
    if args.format == "json":
        sys.stdout.write(json.dumps(data, indent=2) + "\n")
        return 0
    flat = {}
    for k, v in data.items():
        if isinstance(v, dict) and "order" in v:
            v = v["order"]
        elif isinstance(v, dict) and "value" in v:
            v = f"{v['value']} ({'exact' if v['exact'] else 'sampled'})"
        elif isinstance(v, dict):
            v = "; ".join(f"k={kk}: {vv['value']} ({'exact' if vv['exact'] else 'sampled'})" for kk, vv in v.items())
        flat[k] = v
    if args.format == "csv":
        _emit([flat], "csv")
    else:
        _emit([], "pretty", flat)
    return 0


def cmd_growth(args: argparse.Namespace) -> int:
    g = _group(args)
    sym = args.alphabet == "sym"
    if args.pair:
        a, b = _pair(g, args.pair)
        prof = growth.ball_profile(g, a, b, args.radius, sym)
        pair = (a, b)
        extra: dict[str, Any] = {"group": g.description, "degree": prof.degree()}
    else:
        rep = growth.approx_degree(g, args.radius, sym, args.budget, args.seed)
        pair = rep.pair
        prof = growth.ball_profile(g, pair[0], pair[1], args.radius, sym)
        extra = {"group": g.description, "degree": rep.degree, "pairs_tried": rep.pairs_tried,
                 "exhaustive": rep.exhaustive, "budget_exceeded": rep.budget_exceeded}
    extra["pair"] = f"{_fmt(g, pair[0])};{_fmt(g, pair[1])}"
    extra["alphabet"] = args.alphabet
    if args.format == "csv":
        _emit(prof.rows(), "csv")
    else:
        _emit(prof.rows(), args.format, extra)
    return 0


def cmd_identity(args: argparse.Namespace) -> int:
    g = _group(args)
    w = words.parse_word(args.word)
    if args.or_word:
        w = words.combine_identities(w, words.parse_word(args.or_word))
    ok, pair = words.satisfies_identity(g, w)
    row: dict[str, Any] = {"group": g.description, "word": str(w), "holds": ok}
    if pair is not None:
        v = words.evaluate(w, g, *pair)
        row.update(witness_a=g.format(pair[0]), witness_b=g.format(pair[1]),
                   value=g.format(v), value_order=element_order(g, v))
    _emit([row], args.format)
    return 0


def cmd_milnor(args: argparse.Namespace) -> int:
    g = _group(args)
    if args.pair:
        a, b = _pair(g, args.pair)
        spec = words.milnor_search(g, a, b, args.degree, args.weight)
        row = {"group": g.description, "a": g.format(a), "b": g.format(b),
               "found": "" if spec is None else str(spec),
               "polynomial": "" if spec is None else str(words.milnor_polynomial(spec))}
        _emit([row], args.format)
        return 0
    res = words.locally_milnor(g, args.degree, args.weight, reps_only=not args.all_pairs)
    rows = [{"a": g.format(a), "b": g.format(b)} for a, b in res.failing_pairs[: args.show]]
    _emit(rows, args.format, {"group": g.description, "locally_milnor": res.holds,
                              "pairs_checked": res.pairs_checked, "failing_pairs": len(res.failing_pairs)})
    return 0


def _structure(args: argparse.Namespace) -> approx.PartialStructure:
    if getattr(args, "window", None) is not None:
        return approx.integer_window(args.window)
    if not args.structure:
        raise Fatal("give --structure FILE or --window R")
    try:
        return approx.PartialStructure.from_json(Path(args.structure).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise Fatal(f"bad partial structure: {exc}") from None


def cmd_lef(args: argparse.Namespace) -> int:
    p = _structure(args)
    g = _group(args)
    xi = approx.lef_embed(p, g)
    if xi is None:
        _emit([], args.format, {"group": g.description, "result": "exhausted"})
        return 0
    rows = [{"label": lab, "id": v, "element": g.format(v)} for lab, v in xi.items()]
    _emit(rows, args.format, {"group": g.description, "result": "found",
                              "verified": approx.check_embedding(p, g, xi)})
    return 0


def cmd_sofic(args: argparse.Namespace) -> int:
    p = _structure(args)
    if args.map:
        raw = json.loads(Path(args.map).read_text())
        imgs = {lab: Permutation.parse(txt, args.degree) for lab, txt in raw.items()}
        m = approx.SoficMap(p, args.degree, imgs)
        d, s = approx.sofic_defect(m)
        heuristic = False
    else:
        res = approx.sofic_search(p, args.degree, args.iterations, args.seed)
        m, d, s = res.map, res.defect, res.separation
        heuristic = True
    rows = [{"label": lab, "image": str(m.images[lab])} for lab in p.labels]
    _emit(rows, args.format, {"degree": args.degree, "max_defect": str(d), "min_separation": str(s),
                              "heuristic": heuristic})
    return 0


def cmd_folner(args: argparse.Namespace) -> int:
    g = _group(args)
    try:
        A = tuple(g.parse_element(t) for t in args.A.split(",") if t.strip())
        q = approx.FolnerQuery(g, A, Fraction(args.epsilon))
    except (KeyError, ValueError) as exc:
        raise Fatal(str(exc)) from None
    res = approx.folner_search(q, args.mode)
    cert = res.certificate()
    cert["V"] = " ".join(g.format(v) for v in res.V)
    _emit([], args.format, {"group": g.description, "A": " ".join(g.format(a) for a in q.window), **cert})
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.action == "list":
        rows = [{"experiment": e.name, "defaults": json.dumps(e.defaults), "description": e.doc}
                for e in REGISTRY.values()]
        _emit(rows, args.format or "pretty")
        return 0
    if not args.file:
        raise Fatal("experiment run needs a config file")
    try:
        cfg = load_config(args.file, args.set)
    except ConfigError as exc:
        raise Fatal(f"invalid config: {exc}") from None
    cache = ResultCache(None if args.no_cache else args.cache_dir)
    result = run(cfg, cache, jobs=args.jobs, timing=args.timing)
    text = render(result, args.format or cfg.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 2 if result.errors else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fglab", description="Finite group laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, group: bool = True, fmt: str | None = "pretty") -> None:
        if group:
            p.add_argument("--group", "-g", required=True, help="group spec, e.g. 'wreath(cyclic(2), cyclic(4))'")
            p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap")
        p.add_argument("--format", choices=["csv", "json", "pretty"], default=fmt)

    p = sub.add_parser("group", help="build or show a group")
    p.add_argument("action", choices=["show", "build"])
    p.add_argument("group")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--list-max", type=int, default=64, help="list elements up to this order")
    common(p, group=False)
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("analyze", help="structural invariants")
    p.add_argument("group")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("-k", type=int, action="append", default=[], help="max_k_generated for this k")
    p.add_argument("--seed", type=int, default=0)
    common(p, group=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("growth", help="Cayley ball profile / approximation degree")
    common(p, fmt="csv")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--alphabet", choices=["sym", "pos"], default="sym")
    p.add_argument("--pair", help="'a;b' as ids or cycle notation")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("identity", help="check a two-variable identity")
    common(p)
    p.add_argument("--word", "-w", required=True, help="e.g. '[x,y]^6'")
    p.add_argument("--or-word", help="check the combination of --word OR this word")
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("milnor", help="Milnor word search")
    common(p)
    p.add_argument("--pair")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--weight", type=int, default=2)
    p.add_argument("--all-pairs", action="store_true", help="do not reduce the first variable to class reps")
    p.add_argument("--show", type=int, default=10, help="failing pairs to list")
    p.set_defaults(func=cmd_milnor)

    p = sub.add_parser("lef", help="embed a partial multiplication table")
    common(p)
    p.add_argument("--structure", help="PartialStructure JSON file")
    p.add_argument("--window", type=int, help="use the integer window {-R..R}")
    p.set_defaults(func=cmd_lef)

    p = sub.add_parser("sofic", help="score or search sofic maps")
    common(p, group=False)
    p.add_argument("--structure")
    p.add_argument("--window", type=int)
    p.add_argument("--degree", "-n", type=int, required=True)
    p.add_argument("--map", help="JSON {label: cycle notation} to score instead of searching")
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sofic)

    p = sub.add_parser("folner", help="Følner set search")
    common(p)
    p.add_argument("--A", required=True, help="comma-separated elements")
    p.add_argument("--epsilon", default="1/2")
    p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    p.set_defaults(func=cmd_folner)

    p = sub.add_parser("experiment", help="batch experiments")
    p.add_argument("action", choices=["run", "list"])
    p.add_argument("file", nargs="?")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--jobs", type=int)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir", default=DEFAULT_CACHE)
    p.add_argument("--timing", action="store_true", help="add a wall_time column (not byte-stable)")
    p.add_argument("--output", "-o")
    common(p, group=False, fmt=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (Fatal, SpecError, CapExceeded, BudgetExceeded, NeedsTable) as exc:
        print(f"fglab: error: {exc}", file=sys.stderr)
        return 1
