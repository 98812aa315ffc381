import json

import pytest

import cosetlab


def test_registry_lists_core_experiments():
    ids = cosetlab.experiment_ids()
    assert "collapsing-closed-form" in ids
    assert "pfc-correctness" in ids
    assert len(ids) == len(set(ids))


def test_collapsing_closed_form_report():
    rep = cosetlab.run_experiment("collapsing-closed-form", seed="1", params={"n": 4, "k": 2})
    assert rep["schema"] == "v1"
    assert rep["pass"] is True
    (rec,) = rep["records"]
    assert rec["abs_err"] <= 1e-9
    assert rec["closed_form"] == pytest.approx(3 / 16, abs=1e-15)


def test_unknown_experiment_raises():
    with pytest.raises(ValueError):
        cosetlab.run_experiment("no-such-experiment")


def test_reports_are_reproducible(tmp_path):
    a = cosetlab.run_experiment("oss-forgery", seed="ab", trials=200, out=tmp_path / "a.json")
    b = cosetlab.run_experiment("oss-forgery", seed="ab", trials=200, threads=1)
    assert a["records"] == b["records"]
    assert json.loads((tmp_path / "a.json").read_text())["records"] == a["records"]


def test_collapsing_distance_hand_value():
    d = cosetlab.collapsing_distance(1, 1)
    assert d["distance"] == pytest.approx(0.5, abs=1e-12)


def test_wilson_contains_rate():
    lo, hi = cosetlab.wilson(50, 100)
    assert lo < 0.5 < hi


@pytest.mark.parametrize("name", ["and", "parity", "constant0"])
def test_pvqfhe_corpus_round_trip(name):
    circuit = cosetlab.circuit_corpus()[name]
    for x in ["00", "01", "10", "11"]:
        r = cosetlab.pvqfhe_run(circuit, x)
        assert r["verify"] is True
        assert r["output"] == r["expected"]


@pytest.mark.parametrize("tamper", ["ciphertext", "proof", "opening", "signature"])
def test_obf_tamper_rejected(tamper):
    circuit = cosetlab.circuit_corpus()["parity"]
    assert cosetlab.obf_run(circuit, "10")["output"] == 1
    r = cosetlab.obf_run(circuit, "10", tamper=tamper)
    assert r["output"] is None
    assert r["stage"] != "ok"
