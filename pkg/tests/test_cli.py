import json

import numpy as np
import pytest

from cpk import channels as ch
from cpk import formats as fmt
from cpk import process as pm
from cpk.cli import EXIT_INPUT, EXIT_NONCLASSICAL, EXIT_OK, EXIT_OUTSIDE, EXIT_VERIFY, main
from cpk.polytope import ProbTable, uniform_table


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.delenv(fmt.CACHE_ENV, raising=False)
    return tmp_path


def test_simulate_writes_published_table(workdir, table_one, capsys):
    out = workdir / "t.json"
    assert main(["simulate", "--scenario", "cyclic3", "--out", str(out)]) == EXIT_OK
    assert ProbTable.from_json(json.loads(out.read_text())) == table_one
    printed = capsys.readouterr().out
    assert "1/2" in printed


def test_simulate_is_byte_identical(workdir):
    a, b = workdir / "a.json", workdir / "b.json"
    main(["simulate", "--out", str(a), "--seed", "3"])
    main(["simulate", "--out", str(b), "--seed", "3"])
    assert a.read_bytes() == b.read_bytes()


def test_simulate_unnormalized_state(workdir, eta, capsys):
    path = workdir / "eta2x.json"
    fmt.dump(fmt.state_to_json(eta * 2), path)
    assert main(["simulate", "--state", str(path)]) == EXIT_INPUT
    assert "normalization" in capsys.readouterr().err


def test_simulate_with_instrument_file(workdir, table_one):
    from cpk.twotime import measurement_kraus

    kraus = {p: {(a, x): measurement_kraus(a, x) for a in (0, 1) for x in (0, 1)} for p in "ABC"}
    inst, out = workdir / "inst.json", workdir / "t.json"
    fmt.dump(fmt.instruments_to_json(kraus), inst)
    assert main(["simulate", "--instruments", str(inst), "--out", str(out)]) == EXIT_OK
    assert ProbTable.from_json(fmt.load(out)) == table_one


def test_simulate_causal_circuit(workdir):
    out = workdir / "c.json"
    assert main(["simulate", "--scenario", "causal-circuit", "--seed", "1", "--out", str(out)]) in (EXIT_OK, EXIT_INPUT)


def test_certify_published_table(workdir, table_one):
    table, report = workdir / "t.json", workdir / "r.json"
    fmt.dump(table_one.to_json(), table)
    assert main(["certify", "--table", str(table), "--out", str(report)]) == EXIT_NONCLASSICAL
    r = fmt.load(report)
    assert r["classical"] is False
    assert r["certificate"]["kind"] == "separation"
    assert r["last_mover_ok"] is False and r["symmetries"] is True
    assert r["saturated_rank"] == 63


def test_certify_uniform(workdir):
    table = workdir / "u.json"
    fmt.dump(uniform_table(3).to_json(), table)
    assert main(["certify", "--table", str(table)]) == EXIT_OK


def test_certify_unnormalized(workdir, table_one):
    obj = table_one.to_json()
    obj["entries"]["000|000"] = "1"
    table = workdir / "bad.json"
    fmt.dump(obj, table)
    assert main(["certify", "--table", str(table)]) == EXIT_OUTSIDE


@pytest.mark.parametrize("text", ["{not json", '{"parties": 3, "entries": {}}'])
def test_certify_malformed(workdir, text):
    table = workdir / "m.json"
    table.write_text(text)
    assert main(["certify", "--table", str(table)]) == EXIT_INPUT


def test_certify_missing_file(workdir):
    assert main(["certify", "--table", str(workdir / "nope.json")]) == EXIT_INPUT


def test_verify_builtin_eta(workdir):
    assert main(["verify", "--random", "4"]) == EXIT_OK


def test_verify_doubled_state(workdir, eta, capsys):
    path, report = workdir / "eta2x.json", workdir / "r.json"
    fmt.dump(fmt.state_to_json(eta * 2), path)
    assert main(["verify", "--state", str(path), "--random", "4", "--out", str(report)]) == EXIT_VERIFY
    assert fmt.load(report)["linearity"]["worst_deviation"] == pytest.approx(1.0)
    assert "worst deviation 1" in capsys.readouterr().out


def test_verify_causal_circuit_process(workdir):
    path = workdir / "w.json"
    fmt.dump(fmt.pm_to_json(pm.random_causal_circuit(3, 2).process()), path)
    assert main(["verify", "--pm", str(path), "--random", "4"]) == EXIT_OK


def test_vertices_and_cache(workdir, monkeypatch, vertices):
    cache = workdir / "cache"
    cache.mkdir()
    monkeypatch.setenv(fmt.CACHE_ENV, str(cache))
    out = workdir / "v.json"
    assert main(["vertices", "--out", str(out)]) == EXIT_OK
    assert len(fmt.vertices_from_json(fmt.load(out))) == len(vertices)
    cached = list(cache.iterdir())
    assert len(cached) == 1
    assert fmt.load_vertices(3) == vertices


def test_stale_cache_is_rebuilt(workdir, monkeypatch, vertices):
    cache = workdir / "cache"
    cache.mkdir()
    monkeypatch.setenv(fmt.CACHE_ENV, str(cache))
    fmt.load_vertices(3)
    path = next(cache.iterdir())
    obj = fmt.load(path)
    obj["version"] = "stale"
    obj["vertices"] = obj["vertices"][:3]
    fmt.dump(obj, path)
    assert fmt.load_vertices(3) == vertices


def test_sandwich(workdir, capsys):
    path = workdir / "k.json"
    fmt.dump(ch.kraus_to_json([np.array([[0, 1], [1, 0]])]), path)
    assert main(["sandwich", "--kraus", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "trace preserving: True" in out


def test_pm_convert_round_trip(workdir):
    w_path, s_path, back = workdir / "w.json", workdir / "s.json", workdir / "w2.json"
    W = pm.random_causal_circuit(2, 5).process()
    fmt.dump(fmt.pm_to_json(W), w_path)
    assert main(["pm-convert", "--pm", str(w_path), "--out", str(s_path)]) == EXIT_OK
    assert main(["pm-convert", "--state", str(s_path), "--out", str(back)]) == EXIT_OK
    assert np.abs(fmt.pm_from_json(fmt.load(back)).matrix - W.matrix).max() <= 1e-12


def test_negative_seed(workdir):
    assert main(["verify", "--seed", "-1"]) == EXIT_INPUT
