"""Experiment configs, family expansion, and deterministic batch runs."""

from __future__ import annotations

import ast
import copy
import csv
import io
import itertools
import json
import operator
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..groups import DEFAULT_CAP, CapExceeded, NeedsTable, build
from ..growth import BudgetExceeded
from ..specs import SpecError, parse_spec
from .cache import ResultCache, cache_key
from .experiments import REGISTRY

SCHEMA_VERSION = 1
LEAD_COLUMNS = ("index", "group", "status", "error")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    groups: list[str]
    params: dict[str, Any] = field(default_factory=dict)
    cap: int = DEFAULT_CAP
    format: str = "csv"
    seed: int = 0
    jobs: int = 1


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.FloorDiv: operator.floordiv, ast.Pow: operator.pow, ast.BitXor: operator.pow,
        ast.Mod: operator.mod}


def _arith(expr: str, env: dict[str, int]) -> int:
    """Evaluate integer arithmetic over named parameters (``^`` means power)."""

    def ev(node: ast.AST) -> int:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ConfigError(f"unknown parameter {node.id!r} in {{{expr}}}")
            return env[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise ConfigError(f"unsupported expression {{{expr}}}")

    try:
        return ev(ast.parse(expr, mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {{{expr}}}: {exc}") from None


def _range(value: Any) -> list[int]:
    if isinstance(value, int):
        return [value]
    if isinstance(value, list):
        return [int(v) for v in value]
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", str(value))
    if not m:
        raise ConfigError(f"bad range {value!r}; use 'a..b' or a list")
    lo, hi = int(m.group(1)), int(m.group(2))
    if hi < lo:
        raise ConfigError(f"empty range {value!r}")
    return list(range(lo, hi + 1))


def expand_family(family: Any) -> list[str]:
    """Group spec strings from a list or a ``{template, ranges}`` mapping."""
    if isinstance(family, list):
        return [str(x) for x in family]
    if isinstance(family, str):
        return [family]
    if not isinstance(family, dict) or "template" not in family:
        raise ConfigError("family must be a list of specs or have a 'template'")
    template = str(family["template"])
    ranges = family.get("ranges", {}) or {}
    names = list(ranges)
    out = []
    for values in itertools.product(*(_range(ranges[n]) for n in names)):
        env = dict(zip(names, values))
        out.append(re.sub(r"\{([^{}]+)\}", lambda m: str(_arith(m.group(1), env)), template))
    return out


def _set_dotted(cfg: dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    cur = cfg
    for k in keys[:-1]:
        nxt = cur.get(k)
        if not isinstance(nxt, dict):
            nxt = cur[k] = {}
        cur = nxt
    cur[keys[-1]] = value


def load_config(source: str | Path | dict[str, Any], overrides: list[str] | None = None) -> ExperimentConfig:
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    else:
        try:
            raw = yaml.safe_load(Path(source).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    for ov in overrides or []:
        if "=" not in ov:
            raise ConfigError(f"--set expects key=value, got {ov!r}")
        k, v = ov.split("=", 1)
        _set_dotted(raw, k.strip(), yaml.safe_load(v))
    known = {"experiment", "family", "params", "budgets", "format", "seed", "jobs"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    name = raw.get("experiment")
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}; known: {sorted(REGISTRY)}")
    if "family" not in raw:
        raise ConfigError("config needs a 'family'")
    groups = expand_family(raw["family"])
    params = dict(REGISTRY[name].defaults)
    params.update(raw.get("params") or {})
    budgets = raw.get("budgets") or {}
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json", "pretty"):
        raise ConfigError(f"unknown format {fmt!r}")
    try:
        return ExperimentConfig(name, groups, params, int(budgets.get("cap", DEFAULT_CAP)), fmt,
                                int(raw.get("seed", 0)), int(raw.get("jobs", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _run_one(cfg: ExperimentConfig, index: int, spec_text: str, cache: ResultCache,
             timing: bool) -> list[dict[str, Any]]:
    exp = REGISTRY[cfg.experiment]
    base = {"index": index, "group": spec_text, "status": "ok", "error": ""}
    t0 = time.perf_counter()
    try:
        canonical = str(parse_spec(spec_text))
        base["group"] = canonical
        key = cache_key({"schema": SCHEMA_VERSION, "experiment": cfg.experiment, "group": canonical,
                         "params": cfg.params, "seed": cfg.seed, "cap": cfg.cap})
        values = cache.get(key)
        if values is None:
            g = build(canonical, cfg.cap)
            values = exp.run(g, cfg.params, cfg.seed)
            cache.put(key, values)
        rows = [{**base, **v} for v in values]
    except (CapExceeded, BudgetExceeded, NeedsTable, SpecError, ValueError) as exc:
        rows = [{**base, "status": "error", "error": f"{type(exc).__name__}: {exc}"}]
    if timing:
        dt = f"{time.perf_counter() - t0:.4f}"
        for r in rows:
            r["wall_time"] = dt
    return rows


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list[dict[str, Any]]
    columns: list[str]

    @property
    def errors(self) -> int:
        return sum(1 for r in self.rows if r["status"] != "ok")


def run(cfg: ExperimentConfig, cache: ResultCache | None = None, *, jobs: int | None = None,
        timing: bool = False) -> RunResult:
    """Evaluate every family member; rows come back in family order."""
    cache = cache or ResultCache(None)
    jobs = jobs or cfg.jobs
    members = list(enumerate(cfg.groups))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda m: _run_one(cfg, m[0], m[1], cache, timing), members))
    else:
        chunks = [_run_one(cfg, i, s, cache, timing) for i, s in members]
    rows = [r for chunk in chunks for r in chunk]
    columns = list(LEAD_COLUMNS) + list(REGISTRY[cfg.experiment].columns)
    if timing:
        columns.append("wall_time")
    return RunResult(cfg, rows, columns)


def header_line(cfg: ExperimentConfig) -> str:
    return f"# fglab-results schema={SCHEMA_VERSION} experiment={cfg.experiment} seed={cfg.seed}"


def render(result: RunResult, fmt: str | None = None) -> str:
    fmt = fmt or result.config.format
    cols = result.columns
    if fmt == "json":
        payload = {"schema": SCHEMA_VERSION, "experiment": result.config.experiment,
                   "seed": result.config.seed, "params": result.config.params,
                   "rows": [{c: r.get(c, "") for c in cols} for r in result.rows]}
        return json.dumps(payload, indent=2, default=str) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(header_line(result.config) + "\n")
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in result.rows:
            w.writerow({c: r.get(c, "") for c in cols})
        return buf.getvalue()
    if fmt == "pretty":
        return format_table(cols, [[r.get(c, "") for c in cols] for r in result.rows])
    raise ValueError(f"unknown format {fmt!r}")


def format_table(cols: list[str], rows: list[list[Any]]) -> str:
    cells = [[str(c) for c in cols]] + [[str(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    lines = ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
