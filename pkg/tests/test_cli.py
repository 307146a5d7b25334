import json
import subprocess
import sys

import pytest

from cubic_chabauty import cli
from cubic_chabauty.padic import PrecisionError

MINIMAL_RANK1 = """
[curve]
label = "37.a1"
ainvs = [0, 0, 1, -1, 0]
model = "b"
[run]
prime = 7
precision = 6
rank = 1
"""


def test_frobenius_machine_output(capsys):
    assert cli.main(["frobenius", "--example", "37.a1", "--output", "machine"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "frobenius"
    assert "precision_ledger" in doc


def test_text_output_mentions_every_function(capsys):
    assert cli.main(["functions", "--example", "37.a1", "--precision", "6"]) == 0
    out = capsys.readouterr().out
    for name in ("f1", "f2", "f3", "f4"):
        assert f"{name} = " in out


def test_rank1_without_points_is_a_config_error(tmp_path, capsys):
    path = tmp_path / "run.toml"
    path.write_text(MINIMAL_RANK1)
    assert cli.main(["locus", "--config", str(path)]) == cli.EXIT_CONFIG == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_prime_is_unsupported(capsys):
    assert cli.main(["locus", "--example", "37.a1", "--prime", "37"]) == cli.EXIT_UNSUPPORTED == 3
    err = capsys.readouterr().err
    assert "bad reduction" in err and "precision ledger" in err


def test_precision_errors_map_to_exit_four(monkeypatch, capsys):
    def exhausted(ctx):
        raise PrecisionError("ran out of digits")

    monkeypatch.setitem(cli.RUNNERS, "integrals", exhausted)
    assert cli.main(["integrals", "--example", "37.a1"]) == cli.EXIT_PRECISION == 4
    assert "precision exhausted" in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert cli.main(["frobenius", "--config", "/nonexistent.toml"]) == 2


def test_gl_relations_report(capsys):
    assert cli.main(["gl-relations", "--example", "433.a1", "--precision", "6", "--output", "machine"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "gl-relations"


@pytest.mark.slow
def test_jobs_do_not_change_the_answer(capsys):
    outs = []
    for jobs in ("1", "2"):
        assert cli.main(["locus", "--example", "389.a1", "--precision", "8", "--jobs", jobs, "--output", "machine"]) == 0
        outs.append(json.loads(capsys.readouterr().out))
    for doc in outs:
        doc["precision_ledger"].pop("jobs", None)
    assert outs[0]["locus"] == outs[1]["locus"]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cubic_chabauty", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "--jobs" in r.stdout
