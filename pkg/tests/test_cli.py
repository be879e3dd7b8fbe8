import csv
import subprocess
import sys

import pytest

from srzf.cli import main


def test_sumrate_to_file(tmp_path):
    out = tmp_path / "sr.csv"
    assert main(["sumrate", "--trials", "2", "--schemes", "srzf,rzf", "--pt-dbm", "30",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert {r["scheme"] for r in rows} == {"srzf", "rzf"} and len(rows) == 4


def test_sumrate_stdout(capsys):
    assert main(["sumrate", "--trials", "1", "--schemes", "zf", "--pt-dbm", "10,20"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("scheme,pt_dbm") and len(lines) == 5


def test_prop2_stdout(capsys):
    assert main(["prop2", "--config", "desk_prop2", "--trials", "3", "--mu2", "0,1e-2",
                 "--user", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "mu2,gap_min,gap_mean,gap_max,ub_mean,trials"
    assert lines[1] == "0,0,0,0,0,3"


def test_check_exit_codes(capsys):
    assert main(["check", "--config", "degenerate"]) == 0
    assert "EXPECTED_FAILURE" in capsys.readouterr().out
    assert main(["check", "--trials", "2"]) == 0


def test_config_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("K = 2\n")
    assert main(["sumrate", "--config", str(p), "--trials", "1"]) == 2
    assert "N" in capsys.readouterr().err


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["sumrate", "--schemes", "mmse"])
    with pytest.raises(SystemExit):
        main(["prop2", "--mu2", "a,b"])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "srzf", "sumrate", "--trials", "1",
                        "--schemes", "zf", "--pt-dbm", "30"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.count("\n") == 3
