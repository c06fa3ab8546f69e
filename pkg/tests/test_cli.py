import json

import pytest

from varlab import __version__
from varlab.cli import RunConfig, main, run, sub_seed
from varlab.corpus import builtin_corpus_path

SMALL = ("abs_pl", "abs_subgrad", "prox_abs")


@pytest.fixture
def small_corpus(tmp_path):
    doc = json.loads(builtin_corpus_path().read_text())
    doc["instances"] = [i for i in doc["instances"] if i["id"] in SMALL]
    path = tmp_path / "small.json"
    path.write_text(json.dumps(doc))
    return path, doc


def test_main_passes_on_small_corpus(small_corpus, tmp_path, capsys):
    path, _ = small_corpus
    out = tmp_path / "r.json"
    assert main(["--corpus", str(path), "--report", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["summary"]["ok"] and rep["summary"]["failed"] == 0
    assert [i["id"] for i in rep["instances"]] == sorted(SMALL)
    assert rep["version"] == __version__


def test_negative_control_flips_exit_code(small_corpus, tmp_path, capsys):
    path, doc = small_corpus
    inst = next(i for i in doc["instances"] if i["id"] == "abs_pl")
    kink = next(p for p in inst["points"] if p["label"] == "kink")
    kink["expected"]["strict_proto"]["value"] = True
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["--corpus", str(bad), "--command", "diagnose", "--format", "text"]) == 1
    text = capsys.readouterr().out
    assert "mismatch: abs_pl/kink/strict_proto: expected True, got False" in text


def test_corpus_errors_and_usage(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text('{"instances": [\n}')
    assert main(["--corpus", str(broken)]) == 3
    assert "line 2" in capsys.readouterr().err
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert main(["--corpus", str(empty)]) == 0
    assert main(["--corpus", str(tmp_path / "missing.json")]) == 2
    assert main(["--tol-eq", "0"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["--command", "bogus"])
    assert info.value.code == 2


def test_reports_are_deterministic(small_corpus, capsys):
    path, _ = small_corpus
    from varlab.corpus import load_corpus

    corpus = load_corpus(path)
    a = run("all", corpus, RunConfig(seed=3)).dumps()
    b = run("all", corpus, RunConfig(seed=3)).dumps()
    assert a == b
    assert "time" not in a


def test_text_format_lists_every_check(small_corpus, capsys):
    path, _ = small_corpus
    assert main(["--corpus", str(path), "--command", "prox", "--format", "text"]) == 0
    text = capsys.readouterr().out
    assert "prox_abs" in text and "two_point_witness" in text
    assert "failed 0" in text


def test_sub_seeds_are_distinct_and_stable():
    seeds = {sub_seed(0, iid, k) for iid in ("a", "b") for k in range(3)}
    assert len(seeds) == 6
    assert sub_seed(7, "abs_pl", 1) == sub_seed(7, "abs_pl", 1)
    assert sub_seed(0, "abs_pl") != sub_seed(1, "abs_pl")


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(seed=-1)
    with pytest.raises(ValueError):
        RunConfig(tol_eq=0.0)
    with pytest.raises(ValueError):
        run("bogus", [])
