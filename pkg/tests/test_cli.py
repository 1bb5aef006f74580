import subprocess
import sys

import pytest

from mmafdm.cli import codebook_table, main
from mmafdm.experiments import CSV_COLUMNS, BOUND_COLUMNS

CFG = "N = 4\nG = 1\nM = 4\nk = 2\nU = 2\nsnr_db = 10, 20\nmin_frame_errors = 20\nmax_frames = 400\nchunk_frames = 100\n" \
      "geometry_draws = 2\nseed = 1\n"


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text(CFG)
    return p


def test_simulate(cfg, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["simulate", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 3
    assert lines[1].endswith(",3,MM_AFDM_IM")


def test_bound(cfg, tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bound", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(BOUND_COLUMNS)


def test_modes_and_codebook(capsys):
    assert main(["modes", "--m", "4", "--u", "2", "--parent", "qam"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") == 1 + 8 + 2 and "mird achieved=0.8164965" in out
    assert main(["codebook", "--m", "4", "--n", "4", "--k", "2"]) == 0
    out = capsys.readouterr().out
    assert "1\t[M1, M3]\t1\t[S1^(1), S2^(1), S1^(2), S2^(2)]" in out
    assert "N_MAP=6 N_CAP=6 b1=5" in codebook_table(4, 4, 2)


@pytest.mark.parametrize("argv", [["codebook", "--m", "4", "--n", "3", "--k", "2"],
                                  ["modes", "--m", "3", "--u", "2", "--parent", "qam"],
                                  ["simulate", "--config", "/nonexistent.cfg", "--out", "/tmp/x.csv"]])
def test_errors_are_one_line(argv, capsys):
    assert main(argv) != 0
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "error" in err


def test_bad_config_key(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("N = 4\ncolour = red\n")
    assert main(["bound", "--config", str(p), "--out", str(tmp_path / "o.csv")]) != 0
    assert "colour" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mmafdm", "codebook", "--m", "2", "--n", "2", "--k", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "N_MAP=1 N_CAP=2" in r.stdout
    r = subprocess.run([sys.executable, "-m", "mmafdm", "frobnicate"], capture_output=True, text=True)
    assert r.returncode != 0
