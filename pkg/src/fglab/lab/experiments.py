"""Experiment registry: each experiment turns one group into result rows."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from .. import approx, growth, structure, words
from ..groups import FiniteGroup, element_order, exponent


@dataclass(frozen=True)
class Experiment:
    name: str
    columns: tuple[str, ...]
    run: Callable[[FiniteGroup, dict[str, Any], int], list[dict[str, Any]]]
    defaults: dict[str, Any]
    doc: str


REGISTRY: dict[str, Experiment] = {}


def register(name: str, columns: tuple[str, ...], defaults: dict[str, Any] | None = None):
    def deco(fn):
        REGISTRY[name] = Experiment(name, columns, fn, defaults or {}, (fn.__doc__ or "").strip())
        return fn
    return deco


def _flag(b: bool | None) -> str:
    return "" if b is None else ("true" if b else "false")


@register("analyze", ("order", "exponent", "abelian", "nilpotency_class", "derived_length",
                      "radical_order", "socle_order", "semisimple", "csa", "c_dimension",
                      "min_generators", "prufer_rank", "prufer_exact", "commutator_width",
                      "quotient_socle_index"))
def _analyze(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Structural invariants of each group."""
    r = structure.analyze(g, ks=(), seed=seed)
    return [{
        "order": r.order, "exponent": r.exponent, "abelian": _flag(r.is_abelian),
        "nilpotency_class": "" if r.nilpotency_class is None else r.nilpotency_class,
        "derived_length": "" if r.derived_length is None else r.derived_length,
        "radical_order": r.radical.size, "socle_order": r.socle.size,
        "semisimple": _flag(r.is_semisimple), "csa": _flag(r.is_csa),
        "c_dimension": r.c_dimension, "min_generators": r.min_generators,
        "prufer_rank": r.prufer_rank.value, "prufer_exact": _flag(r.prufer_rank.exact),
        "commutator_width": r.commutator_width, "quotient_socle_index": r.quotient_socle_index,
    }]


def _identity_rows(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Check a two-variable identity over all pairs."""
    w = words.parse_word(str(params["word"]))
    ok, pair = words.satisfies_identity(g, w)
    row: dict[str, Any] = {"word": str(params["word"]), "result": "satisfies identity" if ok else "fails identity",
                           "witness_a": "", "witness_b": "", "witness_value_order": ""}
    if pair is not None:
        a, b = pair
        row["witness_a"] = g.format(a)
        row["witness_b"] = g.format(b)
        row["witness_value_order"] = element_order(g, words.evaluate(w, g, a, b))
    return [row]


_IDENTITY_COLUMNS = ("word", "result", "witness_a", "witness_b", "witness_value_order")
REGISTRY["identity"] = Experiment("identity", _IDENTITY_COLUMNS, _identity_rows, {"word": "[x,y]^6"},
                                  "Check a two-variable identity over all pairs.")
REGISTRY["jones"] = Experiment("jones", _IDENTITY_COLUMNS, _identity_rows, {"word": "[x,y]^6"},
                               "Identity check over simple groups (a proper variety holds few of them).")


@register("milnor-threshold", ("max_degree", "max_weight", "locally_milnor", "failing_pairs",
                               "pairs_checked", "first_failing"),
          {"max_degree": 2, "max_weight": 2, "reps_only": True})
def _milnor(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Locally-Milnor test at fixed degree and weight bounds."""
    d, w = int(params["max_degree"]), int(params["max_weight"])
    res = words.locally_milnor(g, d, w, reps_only=bool(params.get("reps_only", True)))
    first = ""
    if res.failing_pairs:
        a, b = res.failing_pairs[0]
        first = f"{g.format(a)};{g.format(b)}"
    return [{"max_degree": d, "max_weight": w, "locally_milnor": _flag(res.holds),
             "failing_pairs": len(res.failing_pairs), "pairs_checked": res.pairs_checked,
             "first_failing": first}]


@register("growth", ("alphabet", "radius", "degree", "pair", "pairs_tried", "exhaustive", "profile"),
          {"radius": 3, "alphabet": "sym", "budget": 2000})
def _growth(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Best approximation degree to F2 (sym) or M2 (pos)."""
    sym = params.get("alphabet", "sym") == "sym"
    rep = growth.approx_degree(g, int(params["radius"]), sym, int(params["budget"]), seed)
    pair = ""
    if rep.pair is not None:
        pair = ";".join(g.format(x) if isinstance(x, int) else str(x) for x in rep.pair)
    return [{"alphabet": "sym" if sym else "pos", "radius": int(params["radius"]), "degree": rep.degree,
             "pair": pair, "pairs_tried": rep.pairs_tried, "exhaustive": _flag(rep.exhaustive),
             "profile": " ".join(map(str, rep.profile))}]


@register("amenability", ("n", "epsilon", "alpha", "windows", "all_windows", "exact_search"),
          {"n": 2, "epsilons": ["1", "1/2", "1/3"], "samples": 200})
def _amenability(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Empirical Følner size function alpha(eps, n)."""
    rows = approx.amenability_profile(g, int(params["n"]), [Fraction(str(e)) for e in params["epsilons"]],
                                      int(params["samples"]), seed)
    return [{"n": r.n, "epsilon": str(r.epsilon), "alpha": r.alpha, "windows": r.windows,
             "all_windows": _flag(r.all_windows), "exact_search": _flag(r.exact_search)} for r in rows]


@register("burnside", ("exponent", "k", "max_k_generated", "exact"), {"k": 2, "budget": 50_000})
def _burnside(g: FiniteGroup, params: dict[str, Any], seed: int) -> list[dict[str, Any]]:
    """Largest k-generated subgroup against the exponent."""
    k = int(params["k"])
    m = structure.max_k_generated(g, k, int(params["budget"]), seed)
    return [{"exponent": exponent(g), "k": k, "max_k_generated": m.value, "exact": _flag(m.exact)}]
