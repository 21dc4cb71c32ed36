import json
import subprocess
import sys

import numpy as np
import pytest

from bmstr.cli import main, parse_grid
from bmstr.code_model import CodeSpec
from bmstr.encoder import encode_frame
from bmstr.simulator import CSV_HEADER


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(CodeSpec(2, 8, 2, 4, 1, interleaver_seed=1, puncture_seed=2).to_json())
    return p


def _run(capsys, *argv):
    assert main([str(a) for a in argv]) == 0
    return capsys.readouterr().out


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("2.5") == [2.5]
    assert parse_grid("1,3") == [1.0, 3.0]


def test_plan(capsys):
    out = json.loads(_run(capsys, "plan", "--rate", "1/2", "--ber", "1e-5", "--K", "100", "--L", "100"))
    assert out["N"] == 2 and out["m"] == 16


def test_encode_with_message_file(capsys, spec_file, tmp_path):
    msg = tmp_path / "msg.txt"
    msg.write_text("1" * 32 + "\n")
    out = json.loads(_run(capsys, "encode", "--spec", spec_file, "--message", msg))
    spec = CodeSpec.from_json(spec_file.read_text())
    ref, lay = encode_frame(spec, np.ones((4, 8), dtype=np.uint8))
    assert out["codeword"] == "".join(map(str, ref)) and out["n"] == lay.n


def test_decode_from_llr_file(capsys, spec_file, tmp_path):
    spec = CodeSpec.from_json(spec_file.read_text())
    u = np.random.default_rng(0).integers(0, 2, size=(4, 8), dtype=np.uint8)
    bits, _ = encode_frame(spec, u)
    f = tmp_path / "llr.txt"
    np.savetxt(f, 20.0 * (1 - 2.0 * bits))
    out = json.loads(_run(capsys, "decode", "--spec", spec_file, "--llr", f))
    assert out["decoded"] == "".join(map(str, u.ravel()))


def test_decode_random_frame(capsys, spec_file):
    out = json.loads(_run(capsys, "decode", "--spec", spec_file, "--snr-db", "30"))
    assert out["bit_errors"] == 0


def test_simulate_writes_csv(spec_file, tmp_path):
    out = tmp_path / "sim.csv"
    main(["simulate", "--spec", str(spec_file), "--snr-db", "0:2:1", "--max-frames", "4", "--out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 4


def test_simulate_ebn0_grid_and_hard_mode(capsys, spec_file):
    lines = _run(capsys, "simulate", "--spec", spec_file, "--ebn0-db", "3", "--mode", "hard",
                 "--max-frames", "2").splitlines()
    assert len(lines) == 2 and float(lines[1].split(",")[1]) == pytest.approx(3.0, abs=1e-5)


def test_wef_spectrum_bounds(capsys, spec_file):
    wef = _run(capsys, "wef", "--spec", spec_file, "--T", "4").splitlines()
    assert wef[0] == "i,j,A_ij" and wef[1] == "0,0,1"
    spec = _run(capsys, "spectrum", "--spec", spec_file, "--T", "6").splitlines()
    assert spec[0] == "s,D_s" and len(spec) > 1
    rows = _run(capsys, "bounds", "--spec", spec_file, "--T", "8", "--snr-db", "0:4:2").splitlines()
    assert rows[0] == "snr_db,lower,upper,r_star" and len(rows) == 4
    for r in rows[1:]:
        _, lo, up, _ = r.split(",")
        assert float(lo) <= float(up)


def test_module_entry_point(spec_file):
    res = subprocess.run([sys.executable, "-m", "bmstr", "oracle", "--spec", str(spec_file)],
                         capture_output=True, text=True, check=True)
    out = json.loads(res.stdout)
    assert out["dmin"] == min(out["dmin_per_bit"]) and len(out["row_weights"]) == 32


def test_bad_grid_rejected(spec_file):
    with pytest.raises(SystemExit):
        main(["simulate", "--spec", str(spec_file)])


def test_short_keys_and_default_seeds(capsys, tmp_path):
    p = tmp_path / "short.json"
    p.write_text('{"N": 2, "K": 4, "Kp": 0, "L": 2, "m": 1}')
    out = json.loads(_run(capsys, "encode", "--spec", p))
    assert out["n"] == 2 * 8 + 4


def test_invalid_spec_reports_error(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"N": 2, "K": 4, "Kp": 4, "L": 2, "m": 1}')
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--spec", str(p)])
    assert exc.value.code == 2 and "error" in capsys.readouterr().err
