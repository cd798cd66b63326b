import json
from pathlib import Path

import numpy as np
import pytest

from rissim.cli import main
from rissim.codebook import PhaseCodebook, codebook_rows, ideal_states
from rissim.control import from_hex

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
COARSE = {"dtheta_deg": 1.0, "dphi_deg": 2.0}


def _cfg(tmp_path, name="far_field_fig12.json", **overrides):
    cfg = json.loads((CONFIGS / name).read_text())
    cfg.update(overrides)
    p = tmp_path / f"cfg_{abs(hash(json.dumps(cfg, sort_keys=True)))}.json"
    p.write_text(json.dumps(cfg))
    return p


def _body(path):
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]


def test_synth_near_field_400_rows(tmp_path, capsys):
    out = tmp_path / "map.csv"
    assert main(["synth", str(CONFIGS / "near_field_fig10.json"), "-o", str(out)]) == 0
    text = out.read_text().splitlines()
    assert text[0].startswith("# rissim ") and "config_sha256=" in text[0]
    assert text[1] == "row,col,ideal_phase_deg,state_index,realized_phase_deg,realized_mag_lin"
    assert len(text) == 402
    assert "state histogram" in capsys.readouterr().out


def test_synth_broadside_constant(tmp_path):
    cfg = _cfg(tmp_path, steer={"theta_deg": 0, "phi_deg": 0})
    out = tmp_path / "map.csv"
    assert main(["synth", str(cfg), "-o", str(out)]) == 0
    ideal = {ln.split(",")[2] for ln in _body(out)[1:]}
    assert len(ideal) == 1


def test_missing_codebook_names_path(tmp_path, capsys):
    cfg = _cfg(tmp_path, quantization={"codebook_csv": "nope/missing.csv"})
    assert main(["synth", str(cfg), "-o", str(tmp_path / "m.csv")]) == 1
    assert "missing.csv" in capsys.readouterr().err


@pytest.mark.parametrize(
    "override, path",
    [
        ({"geometry": {"n_rows": 20, "pitch_m": 0.0046, "frequency_hz": 26e9}}, "geometry.n_cols"),
        ({"quantization": {"bits": 2, "continuous": True}}, "quantization"),
        ({"source": {"kind": "laser"}}, "source.kind"),
        ({"steer": {"theta_deg": 120}}, "steer"),
        ({"grid": {"dtheta_deg": 0.7}}, "grid"),
    ],
)
def test_validation_errors_exit_1(tmp_path, capsys, override, path):
    cfg = _cfg(tmp_path, **override)
    assert main(["synth", str(cfg), "-o", str(tmp_path / "m.csv")]) == 1
    assert path in capsys.readouterr().err


def test_missing_config_exit_1(tmp_path):
    assert main(["synth", str(tmp_path / "none.json")]) == 1


def test_computation_error_exit_2(tmp_path, capsys):
    # a zero-amplitude source radiates nothing, so there is no peak to measure
    cfg = _cfg(tmp_path, source={"kind": "plane", "incidence_deg": [0, 0], "amplitude": 0.0}, grid=COARSE)
    assert main(["pattern", str(cfg), "-o", str(tmp_path / "p")]) == 2
    assert "computation failed" in capsys.readouterr().err


@pytest.mark.parametrize("bits, check", [(1, lambda q: q >= -3.0), (2, lambda q: q <= -10.0)])
def test_pattern_qll(tmp_path, bits, check):
    cfg = _cfg(tmp_path, quantization={"bits": bits})
    out = tmp_path / "p"
    assert main(["pattern", str(cfg), "-o", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert list(metrics)[0] == "_meta"
    assert set(metrics) >= {"peak_theta_deg", "peak_phi_deg", "peak_level_db", "hpbw_deg", "sll_db", "qll_db"}
    assert check(metrics["qll_db"])
    for name in ("pattern.csv", "cut_e_plane.csv", "cut_h_plane.csv"):
        assert (out / name).read_text().startswith("# rissim ")
    assert _body(out / "cut_h_plane.csv")[0] == "angle_deg,power_db_rel"
    assert _body(out / "pattern.csv")[0] == "theta_deg,phi_deg,re,im,power_db_rel"


def test_pattern_deterministic(tmp_path):
    cfg = _cfg(tmp_path, grid=COARSE)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["pattern", str(cfg), "-o", str(a)]) == 0
    assert main(["pattern", str(cfg), "-o", str(b)]) == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_offset_sweep_config(tmp_path, capsys):
    cfg = _cfg(tmp_path, quantization={"bits": 1}, offset_sweep=[0, 45, 90, 135], grid=COARSE)
    assert main(["synth", str(cfg), "-o", str(tmp_path / "m.csv")]) == 0
    assert "offset:" in capsys.readouterr().out


def _write_codebook(path, book):
    header, rows = codebook_rows(book)
    path.write_text(",".join(header) + "\n" + "\n".join(",".join(repr(v) for v in r) for r in rows) + "\n")


def test_codebook_ideal_full_span(tmp_path):
    f = np.linspace(22e9, 30e9, 17)
    csv_path = tmp_path / "ideal.csv"
    _write_codebook(csv_path, PhaseCodebook.constant(ideal_states(2), f))
    out = tmp_path / "cb"
    assert main(["codebook", str(csv_path), "-o", str(out)]) == 0
    bands = json.loads((out / "bands.json").read_text())["bands"]
    assert len(bands) == 1 and bands[0]["f_low_hz"] == 22e9 and bands[0]["f_high_hz"] == 30e9
    nbit = [float(ln.split(",")[1]) for ln in _body(out / "codebook_table.csv")[1:]]
    np.testing.assert_allclose(nbit, 2.0, atol=1e-12)


def test_codebook_one_bit_threshold(tmp_path, capsys):
    f = np.linspace(24e9, 28e9, 9)
    ph = np.array([[0.0, 180.0 - 30.0 * abs(x - 26e9) / 1e9] for x in f])
    csv_path = tmp_path / "cb1.csv"
    _write_codebook(csv_path, PhaseCodebook(f, ph, np.ones_like(ph)))
    out = tmp_path / "cb"
    assert main(["codebook", str(csv_path), "-t", "0.9", "-o", str(out)]) == 0
    bands = json.loads((out / "bands.json").read_text())["bands"]
    assert len(bands) == 1 and bands[0]["f_low_hz"] < 26e9 < bands[0]["f_high_hz"]


def test_codebook_parse_error_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("freq_hz,phase1_deg,phase2_deg,mag1_db,mag2_db\n1e9,0,180,0\n")
    assert main(["codebook", str(p)]) == 1
    assert ":2:" in capsys.readouterr().err


def test_sweep_rows(tmp_path):
    out = tmp_path / "scan.csv"
    cfg = _cfg(tmp_path, "scan_fig25.json", grid=COARSE)
    assert main(["sweep", str(cfg), "-o", str(out)]) == 0
    body = _body(out)
    assert body[0] == "theta_deg,phi_deg,peak_level_db,sll_db,pointing_error_deg,error"
    assert len(body) == 7


def test_sweep_empty_angles(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["sweep", str(CONFIGS / "scan_fig25.json"), "--angles", "-o", str(out)]) == 0
    assert len(_body(out)) == 1


def test_sweep_continuous_pointing(tmp_path):
    out = tmp_path / "scan.csv"
    cfg = _cfg(tmp_path, "scan_fig25.json", quantization={"continuous": True}, element_q=0.0)
    assert main(["sweep", str(cfg), "-o", str(out)]) == 0
    errs = [float(ln.split(",")[4]) for ln in _body(out)[1:]]
    assert len(errs) == 6 and max(errs) <= 0.5 + 1e-9


def test_bitstream_round_trip(tmp_path, capsys):
    cfg = CONFIGS / "near_field_fig10.json"
    m = tmp_path / "map.csv"
    assert main(["synth", str(cfg), "-o", str(m)]) == 0
    hx = tmp_path / "bits.hex"
    assert main(["bitstream", str(cfg), str(m), "-o", str(hx), "--verify"]) == 0
    assert "verify: PASS" in capsys.readouterr().out
    text = hx.read_text()
    assert len(text.strip()) == 400 and text.endswith("\n")
    assert from_hex(text).size == 1600
    side = json.loads(hx.with_suffix(".json").read_text())
    assert side["data_bits"] == 1600 and side["registers"] == 200 and side["n_cells"] == 400


def test_bitstream_mapping_override(tmp_path, capsys):
    cfg = CONFIGS / "near_field_fig10.json"
    m = tmp_path / "map.csv"
    main(["synth", str(cfg), "-o", str(m)])
    mp = tmp_path / "mapping.json"
    table = {"0": ["ON", "ON"], "1": ["ON", "OFF"], "2": ["OFF", "ON"], "3": ["OFF", "OFF"]}
    mp.write_text(json.dumps(table))
    hx = tmp_path / "bits.hex"
    assert main(["bitstream", str(cfg), str(m), "-o", str(hx), "--mapping", str(mp), "--verify"]) == 0
    assert json.loads(hx.with_suffix(".json").read_text())["mapping"] == table


def test_bitstream_rejects_bad_state(tmp_path, capsys):
    cfg = CONFIGS / "near_field_fig10.json"
    m = tmp_path / "map.csv"
    main(["synth", str(cfg), "-o", str(m)])
    lines = m.read_text().splitlines()
    parts = lines[5].split(",")
    parts[3] = "7"
    lines[5] = ",".join(parts)
    m.write_text("\n".join(lines) + "\n")
    assert main(["bitstream", str(cfg), str(m), "-o", str(tmp_path / "b.hex")]) == 1
    assert "state 7" in capsys.readouterr().err


def test_relative_codebook_path(tmp_path):
    f = np.linspace(25e9, 27e9, 5)
    sub = tmp_path / "data"
    sub.mkdir()
    _write_codebook(sub / "cb.csv", PhaseCodebook.constant(ideal_states(2), f))
    cfg = json.loads((CONFIGS / "far_field_fig12.json").read_text())
    cfg["quantization"] = {"codebook_csv": "data/cb.csv", "frequency_hz": 26e9}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    assert main(["synth", str(p), "-o", str(tmp_path / "m.csv")]) == 0
