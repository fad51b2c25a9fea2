import json
import os

import pytest

from ncdr.cli import main, run

SPECS = os.path.join(os.path.dirname(__file__), os.pardir, "specs")


def spec(name):
    return os.path.join(SPECS, name + ".json")


def report(argv, tmp_path):
    out = tmp_path / "r.json"
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_hh_dual_numbers(tmp_path):
    code, rep = report(["hh", spec("dual_numbers"), "--n-max", "3"], tmp_path)
    assert code == 0 and rep["status"] == "ok"
    assert rep["result"]["dims"] == [2, 1, 1, 1]
    assert rep["result"]["agree"]


def test_hh_ground_field(tmp_path):
    code, rep = report(["hh", spec("ground_field")], tmp_path)
    assert code == 0 and rep["result"]["dims"] == [1, 0, 0, 0]


def test_hp_negative_window(tmp_path):
    code, rep = report(["hp", spec("dual_numbers"), "--window", "-1..3", "--cap", "4"], tmp_path)
    assert code == 0
    assert rep["result"]["variants_agree"] and rep["result"]["intertwiner"]


def test_verify_suites(tmp_path):
    for argv in (["verify", "identities", spec("dual_numbers"), "--n-max", "3"],
                 ["verify", "harmonic", spec("dual_numbers"), "--n-max", "3"],
                 ["verify", "rep", spec("free_xy"), "--dim", "1"],
                 ["verify", "gm", spec("trivial_family")]):
        code, rep = report(argv, tmp_path)
        assert code == 0, (argv, rep["result"])


def test_deform_mc(tmp_path):
    code, rep = report(["deform", "mc", spec("weyl_phi"), "--order", "2"], tmp_path)
    assert code == 0 and rep["status"] == "ok"


def test_gm(tmp_path):
    code, rep = report(["gm", spec("trivial_family")], tmp_path)
    assert code == 0


def test_byte_stable():
    argv = ["hc", spec("dual_numbers"), "--window", "0..2", "--cap", "4"]
    assert run(argv)[0] == run(argv)[0]


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"generators": ["x"],\n "relations": [}')
    code, rep = report(["hh", str(bad)], tmp_path)
    assert code == 2 and "line 2" in rep["result"]["error"]
    assert "ncdr:" in capsys.readouterr().err
    assert report(["hh", str(tmp_path / "missing.json")], tmp_path)[0] == 2
    assert report(["hp", spec("dual_numbers"), "--window", "3..1"], tmp_path)[0] == 2
    assert report(["hh", spec("dual_numbers"), "--n-max", "0"], tmp_path)[0] == 2


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit):
        run(["verify", "nonsense", spec("dual_numbers")])
