import json
import subprocess
import sys

import pytest

from fsisim.cli import main
from fsisim.io import read_snapshot, read_timeseries


def _write(tmp_path, body, name="run.ini"):
    p = tmp_path / name
    p.write_text(body)
    return p


STEADY = """
[grid]
Nx = 8
Nz = 4
L = 2.0
[numerics]
t_end = 0.01
dt = 0.001
window_steps = 5
[output]
snapshot_every = 5
"""

KICK = STEADY + "[initial]\npreset = beam_kick\namplitude = 0.001\n"


def test_steady_run(tmp_path, capsys):
    cfg = _write(tmp_path, STEADY)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert "finished" in capsys.readouterr().out
    rows = read_timeseries(out / "timeseries.csv")
    assert len(rows) == 11 and rows[-1]["t"] == pytest.approx(0.01)
    assert sorted(p.name for p in (out / "snapshots").iterdir()) == [
        "final.txt", "snap_000000.txt", "snap_000005.txt", "snap_000010.txt"]
    state, _ = read_snapshot(out / "snapshots" / "final.txt")
    assert state.t == pytest.approx(0.01)
    kinds = [json.loads(ln)["event"] for ln in (out / "events.jsonl").read_text().splitlines()]
    assert kinds[:2] == ["compatibility", "start"] and kinds[-1] == "finish"
    assert kinds.count("window") == 2


def test_check_compat(tmp_path, capsys):
    assert main(["check-compat", "--config", str(_write(tmp_path, KICK))]) == 0
    assert "satisfied" in capsys.readouterr().out


def test_incompatible_run_refused(tmp_path, capsys, monkeypatch):
    import fsisim.initial as initial

    orig = initial.preset_fields

    def broken(*args):
        rho, u, eta1 = orig(*args)
        u[1] += 1.0
        return rho, u, eta1

    monkeypatch.setattr(initial, "preset_fields", broken)
    cfg = _write(tmp_path, STEADY)
    assert main(["check-compat", "--config", str(cfg)]) == 1
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "incompatible" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 2
    bad = _write(tmp_path, STEADY + "[physics]\nmu = -1\n", "bad.ini")
    assert main(["run", "--config", str(bad)]) == 2
    assert "physics.mu" in capsys.readouterr().err


def test_unknown_subcommand_exits_2():
    proc = subprocess.run([sys.executable, "-m", "fsisim.cli", "explode"], capture_output=True,
                          text=True)
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


def test_beam_oracle_csv(tmp_path, capsys):
    cfg = _write(tmp_path, STEADY)
    assert main(["oracle", "beam", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) > 1 and "," in lines[0]
