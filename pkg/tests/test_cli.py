"""End-to-end tests of the command-line surface through main(argv)."""

import json
import math

import numpy as np
import pytest

from sivodmr.cli import main
from sivodmr.io import read_spectrum_csv, read_sweep_csv, write_sweep_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out), err


def test_simulate_noiseless_minima_near_resonances(tmp_path, capsys):
    out = tmp_path / "spec.csv"
    code, _, err = run(
        capsys, "simulate", "--b0-gauss", "60", "--theta-deg", "0", "--out", str(out)
    )
    assert code == 0
    spec, meta = read_spectrum_csv(str(out))
    assert meta["b0_gauss"] == "60.0"
    step = spec.freq_hz[1] - spec.freq_hz[0]
    for lo, hi, center in ((80e6, 120e6, 98.148e6), (220e6, 260e6, 238.148e6)):
        window = (spec.freq_hz > lo) & (spec.freq_hz < hi)
        peak_f = spec.freq_hz[window][np.argmax(spec.signal[window])]
        assert abs(peak_f - center) <= 0.55 * step


def test_simulate_seeded_outputs_reproducible(tmp_path, capsys):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    for path, seed in ((a, "7"), (b, "7"), (c, "8")):
        code, _, _ = run(
            capsys, "simulate", "--b0-gauss", "60", "--seed", seed, "--out", str(path)
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_simulate_zero_field_single_dip_at_2d(tmp_path, capsys):
    out = tmp_path / "zf.csv"
    code, _, err = run(capsys, "simulate", "--b0-gauss", "0", "--out", str(out))
    assert code == 0
    assert "warning" not in err
    spec, _ = read_spectrum_csv(str(out))
    assert spec.freq_hz[np.argmax(spec.signal)] == pytest.approx(70e6, abs=0.5e6)


def test_simulate_svg_output(tmp_path, capsys):
    out, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    code, _, _ = run(
        capsys, "simulate", "--b0-gauss", "60", "--out", str(out), "--svg", str(svg)
    )
    assert code == 0
    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert "polyline" in text


def test_fit_odmr_roundtrip_noiseless(tmp_path, capsys):
    out = tmp_path / "spec.csv"
    run(capsys, "simulate", "--b0-gauss", "60", "--points", "2001", "--out", str(out))
    payload, _ = run_json(capsys, "fit", "odmr", str(out))
    assert payload["converged"] is True
    assert payload["center1_hz"] == pytest.approx(98.148087e6, rel=1e-5)
    assert payload["center2_hz"] == pytest.approx(238.148087e6, rel=1e-5)
    assert payload["center1_mhz_display"] == pytest.approx(98.148087, rel=1e-5)
    assert payload["sigma_center1_hz"] >= 0.0


def test_fit_saturation_roundtrip_via_sweep(tmp_path, capsys):
    table = tmp_path / "laser.csv"
    code, _, _ = run(capsys, "sweep", "laser", "--out", str(table))
    assert code == 0
    payload, _ = run_json(capsys, "fit", "saturation", str(table))
    assert payload["i_s_cps"] == pytest.approx(935e6, rel=1e-6)
    assert payload["p0_mw"] == pytest.approx(300.0, rel=1e-6)
    assert payload["i_s_mcps_display"] == pytest.approx(935.0, rel=1e-6)
    assert payload["converged"] is True


def test_fit_saturation_flat_data_exits_one(tmp_path, capsys):
    table = tmp_path / "flat.csv"
    write_sweep_csv(
        str(table), ["laser_mw", "rate_cps"], [np.linspace(1, 80, 12), np.full(12, 5e8)]
    )
    code, _, err = run(capsys, "fit", "saturation", str(table))
    assert code == 1
    assert "i_s_cps" in err and "p0_mw" in err


def test_invert_cli_full_and_axial(capsys):
    payload, _ = run_json(capsys, "invert", "--nu1-mhz", "98.148", "--nu2-mhz", "238.148")
    assert payload["b0_gauss_display"] == pytest.approx(60.0, abs=1e-3)
    assert payload["theta_deg_display"] == pytest.approx(0.0, abs=0.05)

    payload, err = run_json(capsys, "invert", "--nu1-mhz", "70", "--nu2-mhz", "70")
    assert payload["degenerate"] is True
    assert payload["b0_gauss_display"] == pytest.approx(0.0, abs=1e-4)
    assert "degenerate" in err

    payload, _ = run_json(
        capsys, "invert", "--axial",
        "--nu1-mhz", "266.2961739592", "--nu2-mhz", "406.2961739592",
    )
    assert payload["b0_gauss_display"] == pytest.approx(120.0, abs=1e-6)
    assert payload["consistency_hz"] == pytest.approx(0.0, abs=1e-2)

    code, _, err = run(capsys, "invert", "--axial", "--nu1-mhz", "70", "--nu2-mhz", "70")
    assert code == 1
    assert "axial" in err


def test_sweep_field_endpoints(tmp_path, capsys):
    out = tmp_path / "field.csv"
    code, _, _ = run(capsys, "sweep", "field", "--out", str(out))
    assert code == 0
    header, cols, meta = read_sweep_csv(str(out))
    assert header == ["b0_gauss", "nu1_hz", "nu2_hz"]
    assert meta["kind"] == "field"
    assert cols[0][0] == 0.0 and cols[0][-1] == 120.0
    assert cols[1][0] == pytest.approx(70e6, abs=1e3)
    assert cols[2][0] == pytest.approx(70e6, abs=1e3)
    assert cols[1][-1] == pytest.approx(266.296174e6, abs=1e3)
    assert cols[2][-1] == pytest.approx(406.296174e6, abs=1e3)


def test_sweep_angle_gap_minimum_in_band(tmp_path, capsys):
    out = tmp_path / "angle.csv"
    code, _, _ = run(capsys, "sweep", "angle", "--b0-gauss", "60", "--out", str(out))
    assert code == 0
    header, cols, _ = read_sweep_csv(str(out))
    assert header == ["theta_deg", "nu1_hz", "nu2_hz"]
    gap = cols[2] - cols[1]
    theta_min = cols[0][int(np.argmin(gap))]
    assert 50.0 <= theta_min <= 60.0


def test_sweep_laser_ratio(tmp_path, capsys):
    out = tmp_path / "laser.csv"
    code, _, _ = run(capsys, "sweep", "laser", "--out", str(out))
    assert code == 0
    _, cols, _ = read_sweep_csv(str(out))
    eta = cols[2]
    assert np.all(np.diff(eta) < 0)
    assert eta[0] / eta[-1] == pytest.approx(8.152, abs=0.01)


def test_sweep_mw_optimum(tmp_path, capsys):
    out = tmp_path / "mw.csv"
    code, _, _ = run(capsys, "sweep", "mw", "--out", str(out))
    assert code == 0
    _, cols, meta = read_sweep_csv(str(out))
    assert 18.8 <= float(meta["optimum_dbm"]) <= 19.2
    eta = cols[3]
    assert eta[0] > eta.min() and eta[-1] > eta.min()


def test_sensitivity_json(capsys):
    payload, _ = run_json(
        capsys, "sensitivity", "--contrast", "1.8e-3", "--fwhm-mhz", "13"
    )
    assert payload["eta_t_per_sqrt_hz"] == pytest.approx(1.3811346e-5, rel=1e-5)
    assert payload["eta_ut_per_sqrt_hz_display"] == pytest.approx(13.811, abs=0.01)
    assert payload["rate_cps"] == pytest.approx(206428571.43, rel=1e-8)


def test_usage_errors_exit_two(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--b0-gauss", "-5", "--out", "-"])
    assert exc.value.code == 2
    code, _, err = run(
        capsys, "sweep", "field", "--bmin-gauss", "50", "--bmax-gauss", "10",
        "--out", str(tmp_path / "x.csv"),
    )
    assert code == 2
    assert "bmax" in err


def test_io_errors_exit_one(tmp_path, capsys):
    code, _, err = run(capsys, "fit", "odmr", str(tmp_path / "missing.csv"))
    assert code == 1

    bad = tmp_path / "bad.csv"
    bad.write_text("# odmr-csv v1\nfrequency_hz,signal\nfoo,bar\n")
    code, _, err = run(capsys, "fit", "odmr", str(bad))
    assert code == 1
    assert ":3:" in err  # names the offending line


def test_config_file_and_env(tmp_path, capsys, monkeypatch):
    env_cfg = tmp_path / "env.cfg"
    env_cfg.write_text("d_mhz = 36.6\n")
    flag_cfg = tmp_path / "flag.cfg"
    flag_cfg.write_text("d_mhz = 30.0  # overrides the env file\n")
    out = tmp_path / "f.csv"

    monkeypatch.setenv("ODMR_CONFIG", str(env_cfg))
    code, _, _ = run(
        capsys, "sweep", "field", "--points", "2", "--bmax-gauss", "1", "--out", str(out)
    )
    assert code == 0
    _, cols, _ = read_sweep_csv(str(out))
    assert cols[1][0] == pytest.approx(2 * 36.6e6, rel=1e-12)

    code, _, _ = run(
        capsys, "--config", str(flag_cfg), "sweep", "field",
        "--points", "2", "--bmax-gauss", "1", "--out", str(out),
    )
    assert code == 0
    _, cols, _ = read_sweep_csv(str(out))
    assert cols[1][0] == pytest.approx(2 * 30e6, rel=1e-12)


def test_unknown_config_key_exits_one(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus_key = 1\n")
    code, _, err = run(
        capsys, "--config", str(cfg), "sensitivity", "--contrast", "1e-3",
        "--fwhm-mhz", "13",
    )
    assert code == 1
    assert "bogus_key" in err


def test_help_available_everywhere(capsys):
    for argv in (["--help"], ["simulate", "--help"], ["fit", "--help"],
                 ["invert", "--help"], ["sweep", "--help"], ["sensitivity", "--help"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        assert "usage" in capsys.readouterr().out.lower()
