import json
import math

import pytest

from qudit_aqec.cli import main, num, to_csv
from qudit_aqec.config import load_config
from qudit_aqec.errors import InvalidArgument

SMALL_LIFETIME = """
[experiment]
seed = 3
trajectories = 20
times_ms = [0.0, 3.0, 6]
cycles = [0, 8, 2]
"""


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_codewords(capsys):
    code, res = run(capsys, "codewords", "--spin", "5/2")
    assert code == 0
    data = json.loads(res.out)
    assert data["zero_L"][1] == 0.5 and data["zero_L"][3] == num(math.sqrt(3) / 2)
    assert data["one_L"][2] == num(math.sqrt(3) / 2) and data["one_L"][4] == 0.5


def test_kl_check_exit_codes(capsys):
    assert run(capsys, "kl-check", "--spin", "5/2", "--errors", "I,Sz")[0] == 0
    assert run(capsys, "kl-check", "--spin", "1", "--errors", "I,Sz")[0] == 2
    assert run(capsys, "kl-check", "--spin", "5/2", "--errors", "I,Sz,Sz2")[0] == 2


def test_bad_flags_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["kl-check", "--bogus"])
    assert exc.value.code == 1
    assert run(capsys, "cycle", "--config", "/nonexistent.toml")[0] == 1
    assert run(capsys, "codewords", "--threads", "0")[0] == 1


def test_ideal_cycle_fidelity(capsys):
    code, res = run(capsys, "cycle", "--ideal", "--start", "E")
    assert code == 0
    assert json.loads(res.out)["F_chi"] == pytest.approx(1.0, abs=1e-10)


def test_rotation_scan_csv(capsys):
    code, res = run(capsys, "rotation-scan", "--format", "csv", "--points", "5")
    lines = res.out.strip().splitlines()
    assert code == 0 and lines[0] == "phi,plus_L,minus_L,plus_E,minus_E" and len(lines) == 6


def test_lifetime_outputs_and_determinism(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(SMALL_LIFETIME)
    outs = []
    for threads in ("1", "3"):
        d = tmp_path / f"out{threads}"
        code, _ = run(capsys, "lifetime", "--config", str(cfg), "--seed", "42", "--threads", threads,
                      "--out", str(d), "--format", "csv")
        assert code in (0, 3)
        outs.append(d)
    a, b = outs
    assert (a / "lifetime.csv").read_bytes() == (b / "lifetime.csv").read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 42 and "lifetime.csv" in manifest["files"]
    assert len(manifest["config_hash"]) == 64
    assert (a / "lifetime.svg").read_text().startswith("<svg")


def test_to_csv_digits():
    text = to_csv(["x"], [[1 / 3]])
    assert text.splitlines()[1] == "0.333333333333"


def test_config_defaults_and_overrides(tmp_path):
    cfg = load_config(None)
    assert cfg.spin == "5/2" and cfg.seed == 0 and cfg.shots is None
    assert cfg.tau_ec == pytest.approx(620e-6)
    sched = cfg.schedule(0.1)
    assert sched.field_sigma == pytest.approx(16e-9)
    assert cfg.imperfections().mode_drift_pp == pytest.approx(2 * math.pi * 200)
    cfg2 = cfg.override("experiment", "seed", 9)
    assert cfg2.seed == 9 and cfg.seed == 0 and cfg2.digest() != cfg.digest()
    assert list(cfg.cycles) == list(range(0, 49, 2))


def test_config_rejects_unknown_keys(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[code]\nspinn = '5/2'\n")
    with pytest.raises(InvalidArgument):
        load_config(p)
    p.write_text("[nope]\n")
    with pytest.raises(InvalidArgument):
        load_config(p)


def test_docstring_example_parses(tmp_path):
    import qudit_aqec.config as mod

    body = mod.__doc__.split("Example::", 1)[1]
    text = "\n".join(line[4:] for line in body.splitlines())
    p = tmp_path / "ex.toml"
    p.write_text(text)
    assert load_config(p).digest() == load_config(None).digest()
