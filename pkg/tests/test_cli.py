import csv
import io
import json

import pytest

from gncf import cli


GOOD_CONFIG = {
    "spectrum": {"n_channels": 3, "center_thz": 193.05,
                 "spacing_ghz": 100.0, "width_ghz": 86.6,
                 "psd_w_per_hz": 4.6e-17},
    "link": {"spans": [
        {"length_km": 80.0, "gamma_per_w_km": 1.3,
         "alpha0_db_km": 0.2, "beta2_ps2_km": -21.27},
    ]},
}


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_csv_has_one_row_per_channel(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    code, out, _ = run(["compute", cfg, "--no-timestamp"], capsys)
    assert code == 0
    data_lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(data_lines))))
    assert len(rows) == 3
    for row in rows:
        assert float(row["g_nli_w_per_hz"]) > 0.0
        assert row["negative_total"] == "False"


def test_compute_output_is_byte_stable_without_timestamp(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    _, first, _ = run(["compute", cfg, "--no-timestamp"], capsys)
    _, second, _ = run(["compute", cfg, "--no-timestamp"], capsys)
    assert first == second


def test_csv_uses_crlf_line_endings(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    out_path = tmp_path / "out.csv"
    code, _, _ = run(["compute", cfg, "--no-timestamp",
                      "-o", str(out_path)], capsys)
    assert code == 0
    raw = out_path.read_bytes()
    assert b"\r\n" in raw


def test_json_format_round_trips(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    code, out, _ = run(["compute", cfg, "--no-timestamp",
                        "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["rows"]) == 3
    assert doc["rows"][1]["g_nli_w_per_hz"] > 0.0


def test_defaults_are_echoed_in_header(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    code, out, _ = run(["compute", cfg, "--no-timestamp"], capsys)
    assert code == 0
    header = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert any("default" in ln for ln in header)


def test_missing_required_key_exits_2(tmp_path, capsys):
    doc = json.loads(json.dumps(GOOD_CONFIG))
    del doc["link"]["spans"][0]["length_km"]
    cfg = write_config(tmp_path, doc)
    code, _, err = run(["compute", cfg], capsys)
    assert code == 2
    assert "length_km" in err


def test_negative_span_length_exits_2(tmp_path, capsys):
    doc = json.loads(json.dumps(GOOD_CONFIG))
    doc["link"]["spans"][0]["length_km"] = -5.0
    cfg = write_config(tmp_path, doc)
    code, _, err = run(["compute", cfg], capsys)
    assert code == 2
    assert "/link/spans/0/length_km" in err


def test_high_attenuation_warns_but_runs(tmp_path, capsys):
    doc = json.loads(json.dumps(GOOD_CONFIG))
    doc["link"]["spans"][0]["alpha0_db_km"] = 3.5
    cfg = write_config(tmp_path, doc)
    code, _, err = run(["compute", cfg, "--no-timestamp"], capsys)
    assert code == 0
    assert "warning" in err


def test_missing_config_argument_exits_2(capsys):
    code, _, err = run(["compute"], capsys)
    assert code == 2
    assert "config" in err


def test_islands_dump(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    code, out, _ = run(["islands", cfg, "--no-timestamp"], capsys)
    assert code == 0
    data_lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(data_lines))))
    assert len(rows) > 0


def test_fitcheck_reports_fit_quality(capsys):
    code, out, _ = run(["fitcheck", "--no-timestamp", "--grid", "201"],
                       capsys)
    assert code == 0
    assert "fit(0) = 0.997508" in out
    header = [ln for ln in out.splitlines() if ln.startswith("#")]
    max_line = [ln for ln in header if "max abs error" in ln][0]
    assert float(max_line.split("=")[1]) <= 0.01


def test_trace_flag_prints_stage_lines(tmp_path, capsys):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    code, _, err = run(["compute", cfg, "--no-timestamp", "--trace"],
                       capsys)
    assert code == 0
    assert "trace:" in err


def test_engineering_unit_conversion(tmp_path):
    cfg = write_config(tmp_path, GOOD_CONFIG)
    comb, link, quad, defaulted, warnings = cli.parse_config(cfg)
    span = link[0]
    assert span.length == pytest.approx(80e3)
    assert span.gamma == pytest.approx(1.3e-3)
    assert float(span.alpha0(193.05e12)) == pytest.approx(
        2.3025850929940466e-05, rel=1e-14)
    assert span.beta2 == pytest.approx(-21.27e-27)
    assert comb.channels[0].center == pytest.approx(192.95e12)
    assert comb.channels[0].width == pytest.approx(86.6e9)
