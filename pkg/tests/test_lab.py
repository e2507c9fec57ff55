import csv
import io
import json
import logging
from pathlib import Path

import pytest

from fglab.lab.cache import ResultCache, cache_key
from fglab.lab.cli import main
from fglab.lab.experiments import REGISTRY
from fglab.lab.runner import ConfigError, expand_family, load_config, render, run

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"


def rows_of(text):
    lines = text.splitlines()
    assert lines[0].startswith("# fglab-results schema=1 ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


# configs ---------------------------------------------------------------------


def test_expand_family():
    assert expand_family(["cyclic(2)", "quaternion8"]) == ["cyclic(2)", "quaternion8"]
    fam = {"template": "wreath(cyclic(2), cyclic({2^k}))", "ranges": {"k": "1..3"}}
    assert expand_family(fam) == [f"wreath(cyclic(2), cyclic({2**k}))" for k in (1, 2, 3)]
    two = {"template": "direct(cyclic({a}), cyclic({a*b+1}))", "ranges": {"a": [2, 3], "b": "0..1"}}
    assert expand_family(two) == ["direct(cyclic(2), cyclic(1))", "direct(cyclic(2), cyclic(3))",
                                  "direct(cyclic(3), cyclic(1))", "direct(cyclic(3), cyclic(4))"]


@pytest.mark.parametrize("bad", [
    {"template": "cyclic({n})", "ranges": {"n": "5..2"}},
    {"template": "cyclic({m})", "ranges": {"n": "1..2"}},
    {"template": "cyclic({__import__('os')})", "ranges": {}},
    {"ranges": {}},
])
def test_expand_family_errors(bad):
    with pytest.raises(ConfigError):
        expand_family(bad)


def test_load_config_and_overrides():
    cfg = load_config(EXPERIMENTS / "milnor_threshold.yaml", ["params.max_degree=2", "seed=5", "jobs=3"])
    assert cfg.experiment == "milnor-threshold"
    assert cfg.params["max_degree"] == 2 and cfg.params["max_weight"] == 3
    assert (cfg.seed, cfg.jobs) == (5, 3)
    assert cfg.groups == ["wreath(cyclic(2), cyclic(2))", "wreath(cyclic(2), cyclic(4))"]


@pytest.mark.parametrize("raw", [
    {"experiment": "nope", "family": ["cyclic(2)"]},
    {"experiment": "analyze"},
    {"experiment": "analyze", "family": ["cyclic(2)"], "colour": "red"},
    {"experiment": "analyze", "family": ["cyclic(2)"], "format": "xml"},
    {"experiment": "analyze", "family": ["cyclic(2)"], "seed": "abc"},
])
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        load_config(raw)


def test_bad_override():
    with pytest.raises(ConfigError):
        load_config({"experiment": "analyze", "family": ["cyclic(2)"]}, ["seed"])


def test_every_example_config_loads():
    files = sorted(EXPERIMENTS.glob("*.yaml"))
    assert len(files) >= 6
    for f in files:
        assert load_config(f).experiment in REGISTRY


# experiments -----------------------------------------------------------------


def test_analyze_cyclic_rows():
    res = run(load_config(EXPERIMENTS / "analyze_cyclic.yaml"))
    assert len(res.rows) == 5 and res.errors == 0
    for n, r in zip(range(2, 7), res.rows):
        assert r["group"] == f"cyclic({n})"
        assert r["exponent"] == n and r["c_dimension"] == 0 and r["abelian"] == "true"


def test_jones_rows_have_witnesses():
    from fglab.groups import build
    from fglab.words import evaluate, parse_word

    res = run(load_config(EXPERIMENTS / "jones.yaml"))
    w = parse_word("[x,y]^6")
    for r in res.rows:
        assert r["result"] == "fails identity"
        g = build(r["group"])
        a, b = g.parse_element(r["witness_a"]), g.parse_element(r["witness_b"])
        assert evaluate(w, g, a, b) != 0


def test_milnor_threshold_rows():
    res = run(load_config(EXPERIMENTS / "milnor_threshold.yaml"))
    k1, k2 = res.rows
    assert k1["locally_milnor"] == "true" and k1["failing_pairs"] == 0
    assert k2["locally_milnor"] == "false" and k2["failing_pairs"] > 0
    k1_deg2 = run(load_config(EXPERIMENTS / "milnor_threshold.yaml", ["params.max_degree=2",
                                                                      "params.max_weight=2"]))
    assert k1_deg2.rows[0]["locally_milnor"] == "true"


def test_error_row_does_not_abort(tmp_path, capsys):
    cfg = {"experiment": "analyze", "family": ["cyclic(4)", "symmetric(6)", "bogus(3)", "cyclic(5)"],
           "budgets": {"cap": 100}}
    res = run(load_config(cfg))
    assert [r["status"] for r in res.rows] == ["ok", "error", "error", "ok"]
    assert res.rows[1]["error"].startswith("CapExceeded")
    assert res.rows[2]["error"].startswith("SpecError")
    path = tmp_path / "c.yaml"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", "run", str(path), "--no-cache"]) == 2
    assert main(["experiment", "run", str(tmp_path / "missing.yaml")]) == 1


# cache and determinism ---------------------------------------------------------


def test_cache_hits_are_byte_identical(tmp_path):
    cfg = load_config({"experiment": "analyze", "family": ["cyclic(6)"]})
    cache = ResultCache(tmp_path)
    first = render(run(cfg, cache))
    entries = list(tmp_path.rglob("*.json"))
    assert len(entries) == 1
    mtime = entries[0].stat().st_mtime_ns
    second = render(run(cfg, cache))
    assert first == second == render(run(cfg, ResultCache(None)))
    assert entries[0].stat().st_mtime_ns == mtime


def test_cache_is_actually_used(tmp_path):
    cfg = load_config({"experiment": "analyze", "family": ["cyclic(6)"]})
    cache = ResultCache(tmp_path)
    run(cfg, cache)
    (entry,) = tmp_path.rglob("*.json")
    blob = json.loads(entry.read_text())
    blob["value"][0]["exponent"] = 999
    entry.write_text(json.dumps(blob))
    assert run(cfg, cache).rows[0]["exponent"] == 999


def test_corrupt_cache_entry_recomputes(tmp_path, caplog):
    cfg = load_config({"experiment": "analyze", "family": ["cyclic(6)"]})
    cache = ResultCache(tmp_path)
    good = render(run(cfg, cache))
    (entry,) = tmp_path.rglob("*.json")
    entry.write_text("{not json")
    with caplog.at_level(logging.WARNING):
        again = render(run(cfg, cache))
    assert again == good
    assert any("corrupt cache entry" in m for m in caplog.messages)
    assert json.loads(entry.read_text())["value"][0]["exponent"] == 6


def test_cache_key_is_canonical():
    assert cache_key({"a": 1, "b": [1, 2]}) == cache_key({"b": [1, 2], "a": 1})
    cfg1 = load_config({"experiment": "analyze", "family": ["c(6)"]})
    cfg2 = load_config({"experiment": "analyze", "family": ["cyclic( 6 )"]})
    assert run(cfg1).rows == run(cfg2).rows


def test_determinism_across_runs_and_threads(tmp_path):
    out = []
    for jobs in (1, 4, 4):
        path = tmp_path / f"r{len(out)}.csv"
        rc = main(["experiment", "run", str(EXPERIMENTS / "growth.yaml"), "--no-cache",
                   "--jobs", str(jobs), "--format", "csv", "-o", str(path)])
        assert rc == 0
        out.append(path.read_bytes())
    assert out[0] == out[1] == out[2]
    rows = rows_of(out[0].decode())
    assert [r["index"] for r in rows] == [str(i) for i in range(10)]


def test_timing_column_is_opt_in():
    cfg = load_config({"experiment": "analyze", "family": ["cyclic(3)"]})
    assert "wall_time" not in render(run(cfg))
    assert "wall_time" in render(run(cfg, timing=True))


def test_json_and_pretty_formats():
    cfg = load_config({"experiment": "burnside", "family": ["elementary_abelian(2, 3)"]})
    res = run(cfg)
    payload = json.loads(render(res, "json"))
    assert payload["schema"] == 1 and payload["rows"][0]["max_k_generated"] == 4
    pretty = render(res, "pretty")
    assert pretty.splitlines()[0].split()[:3] == ["index", "group", "status"]


# CLI ---------------------------------------------------------------------------


def test_cli_group_and_analyze(capsys):
    assert main(["group", "show", "dihedral(4)"]) == 0
    assert "8" in capsys.readouterr().out
    assert main(["analyze", "symmetric(4)", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["order"] == 24 and out["c_dimension"] == 4
    assert main(["group", "show", "cyclic(0)"]) == 1


def test_cli_growth(capsys):
    assert main(["growth", "-g", "symmetric(3)", "--radius", "1", "--pair", "(0 1);(0 1 2)",
                 "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [(r["radius"], r["ball"], r["free"]) for r in rows] == [("0", "1", "1"), ("1", "4", "5")]


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_cli_identity_and_milnor(capsys):
    assert main(["identity", "-g", "symmetric(3)", "-w", "[x,y]^3", "--format", "json"]) == 0
    assert _json_out(capsys)["rows"][0]["holds"] is True
    assert main(["identity", "-g", "alternating(5)", "-w", "[x,y]^6", "--format", "json"]) == 0
    row = _json_out(capsys)["rows"][0]
    assert row["holds"] is False and row["value_order"] == 5
    assert main(["identity", "-g", "symmetric(3)", "-w", "x^2", "--or-word", "x^3", "--format", "json"]) == 0
    row = _json_out(capsys)["rows"][0]
    assert row["word"] == "x" * 6 and row["holds"] is True
    assert main(["milnor", "-g", "wreath(cyclic(2), cyclic(2))", "--degree", "2", "--weight", "2",
                 "--format", "json"]) == 0
    out = _json_out(capsys)
    assert out["locally_milnor"] is True and out["failing_pairs"] == 0


def test_cli_lef_sofic_folner(tmp_path, capsys):
    assert main(["lef", "-g", "cyclic(7)", "--window", "3"]) == 0
    assert "found" in capsys.readouterr().out
    assert main(["lef", "-g", "cyclic(6)", "--window", "3"]) == 0
    assert "exhausted" in capsys.readouterr().out
    struct = tmp_path / "s.json"
    struct.write_text(json.dumps({"labels": ["e", "a"], "identity": "e", "products": {"a,a": "e"}}))
    mp = tmp_path / "m.json"
    mp.write_text(json.dumps({"e": "()", "a": "(0 1)"}))
    assert main(["sofic", "--structure", str(struct), "-n", "2", "--map", str(mp), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["max_defect"] == "0" and out["min_separation"] == "1" and out["heuristic"] is False
    assert main(["folner", "-g", "cyclic(12)", "--A", "0,1", "--epsilon", "1/3", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["|V|"] == 4 and out["holds"] is True
    assert main(["lef", "-g", "cyclic(3)"]) == 1


def test_cli_experiment_list(capsys):
    assert main(["experiment", "list"]) == 0
    out = capsys.readouterr().out
    for name in ("analyze", "jones", "milnor-threshold", "growth", "amenability", "burnside"):
        assert name in out
