import json
from pathlib import Path

import pytest

from tbreach.cli import main
from tbreach.dsl import parse_model
from tbreach.models import fig1, without_edge
from tbreach.dsl import print_model

ROOT = Path(__file__).resolve().parent.parent
FIG1 = str(ROOT / "models" / "fig1.ha")
MACHINES = ROOT / "models" / "machines"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_yes_and_witness_file(capsys, tmp_path):
    w = tmp_path / "w.json"
    code, out, _ = run(capsys, "check", FIG1, "l4", "-T", "1", "--emit-witness", str(w))
    assert code == 0 and out.startswith("YES")
    doc = json.loads(w.read_text())
    assert doc["steps"][-1]["post_state"]["loc"] == "l4"


def test_check_no(capsys, tmp_path):
    m = tmp_path / "cut.ha"
    m.write_text(print_model(without_edge(fig1(), "e01")))
    code, out, _ = run(capsys, "check", str(m), "l4", "--bound", "1")
    assert code == 1 and out.strip() == "NO"
    code, out, _ = run(capsys, "check", FIG1, "l4", "--bound", "139/250")
    assert code == 1


def test_check_output_is_byte_identical(capsys):
    first = run(capsys, "check", FIG1, "l4", "-T", "1")[1]
    second = run(capsys, "check", FIG1, "l4", "-T", "1")[1]
    assert first == second


def test_check_with_oracle(capsys):
    code, out, _ = run(capsys, "check", FIG1, "l1", "-T", "1/2", "--oracle")
    assert code == 0 and "oracle: YES" in out


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.ha"
    bad.write_text("automaton c; var x; init l; loc l { inv x <= ; }")
    code, _, err = run(capsys, "check", str(bad), "l", "-T", "1")
    assert code == 3 and f"{bad}:1:" in err


def test_missing_file(capsys):
    assert run(capsys, "check", "/nonexistent.ha", "l", "-T", "1")[0] == 3


def test_class_rejection(capsys, tmp_path):
    m = tmp_path / "neg.ha"
    code, out, _ = run(capsys, "compile-minsky", str(MACHINES / "transfer.mm"))
    assert code == 0
    m.write_text(out.split("\n", 1)[1])
    goal = out.split("\n", 1)[0].split(": ")[1]
    code, _, err = run(capsys, "check", str(m), goal, "-T", "1")
    assert code == 2 and "rejected" in err
    code, out, _ = run(capsys, "compile-minsky", str(MACHINES / "transfer.mm"), "--target", "diagonal")
    m.write_text(out.split("\n", 1)[1])
    assert run(capsys, "check", str(m), goal, "-T", "1")[0] == 2


def test_normalize_stages_parse_back(capsys):
    for stage in ("dreset", "cbound", "strict"):
        code, out, err = run(capsys, "normalize", FIG1, "--stage", stage, "--goal", "l4")
        assert code == 0 and not err
        parse_model(out)
    assert run(capsys, "normalize", FIG1)[1] == run(capsys, "normalize", FIG1)[1]


def test_simulate_and_contract(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps([{"delay": "1/5", "edge": "e01"}, {"delay": "3/25", "edge": "e10"},
                             {"delay": "19/125", "edge": "e01"}, {"delay": "87/625", "edge": "e10"}]))
    code, out, _ = run(capsys, "simulate", FIG1, str(p))
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and doc["final"] == "l0"
    code, out, _ = run(capsys, "contract", FIG1, str(p), "--mode", "cnt-star")
    doc = json.loads(out)
    assert code == 0 and doc["output_length"] == 2 and doc["iterations"] == 1
    assert doc["path"][0]["delay"] == "44/125"


def test_simulate_rejects_bad_run(capsys, tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps([{"delay": "1/5", "edge": "e01"}, {"delay": "3/25", "edge": "e10"},
                             {"delay": "17/125", "edge": "e03"}, {"delay": "1/10", "edge": "e34"}]))
    code, out, _ = run(capsys, "simulate", FIG1, str(p))
    assert code == 1 and "e03" in json.loads(out)["error"]


def test_cosim(capsys):
    code, out, _ = run(capsys, "cosim", str(MACHINES / "inc3_dec3.mm"), "--steps", "10")
    doc = json.loads(out)
    assert code == 0 and doc["all_passed"] and doc["reached_goal"]
    code, out, _ = run(capsys, "cosim", str(MACHINES / "inc3_dec3.mm"), "--target", "diagonal",
                       "--init-rounds", "4", "--steps", "10")
    assert code == 0 and json.loads(out)["all_passed"]
    assert run(capsys, "cosim", str(MACHINES / "inc3_dec3.mm"), "--target", "diagonal")[0] == 3


def test_machine_parse_error(capsys, tmp_path):
    m = tmp_path / "m.mm"
    m.write_text("init q0\nq0: fly -> q1\n")
    assert run(capsys, "compile-minsky", str(m))[0] == 3


def test_usage_error():
    with pytest.raises(SystemExit):
        main([])
