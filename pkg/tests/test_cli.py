import json
import math

import numpy as np
import pytest

from nhqc.cli import main
from nhqc.config import ExperimentConfig, build_config, load_config_file
from nhqc.errors import ConfigError
from nhqc.experiments import run


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        build_config({"not_a_key": 1})


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        build_config({"alpha_mode": "sommerfeld"})
    with pytest.raises(ConfigError):
        build_config({"L": "three"})
    with pytest.raises(ConfigError):
        build_config({"formats": ["csv", "pdf"]})


def test_config_toml_sections_flatten(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "[model]\nL = 21\nV1 = 0.5\n\n[numerics]\ninitial_samples = 32\n\n[output]\nout = 'x'\n"
    )
    data = load_config_file(cfg)
    built = build_config(data)
    assert built.L == 21 and built.V1 == 0.5 and built.initial_samples == 32


def test_config_duplicate_keys_across_sections_rejected(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[a]\nL = 21\n[b]\nL = 34\n")
    with pytest.raises(ConfigError):
        load_config_file(cfg)


def test_cli_override_wins_over_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("L = 21\nV1 = 0.5\n")
    out = tmp_path / "out"
    code = main(["spectrum", "--config", str(cfg), "--out", str(out), "--L", "13"])
    assert code == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["config"]["L"] == 13
    assert meta["config"]["V1"] == 0.5
    assert meta["version"]


def test_cli_exit_codes(tmp_path):
    assert main(["spectrum", "--out", str(tmp_path), "--bogus", "1"]) == 2
    # kappa=0 makes H diagonal, so E_B = V_0 = 1 collides exactly
    assert (
        main(
            ["winding", "--out", str(tmp_path), "--L", "8", "--kappa", "0.0",
             "--V1", "1.0", "--eb-re", "1.0"]
        )
        == 3
    )


def test_spectrum_circulant_example(tmp_path):
    # kappa=1, V=0, h=0, L=8: eigenvalues 2*cos(2*pi*k/8)
    code = main(["spectrum", "--out", str(tmp_path), "--L", "8"])
    assert code == 0
    header, rows = read_csv(tmp_path / "spectrum.csv")
    assert header == ["index", "Re_E", "Im_E", "IPR", "label"]
    got = sorted(float(r[1]) for r in rows)
    expected = sorted(2.0 * math.cos(2.0 * math.pi * k / 8) for k in range(8))
    np.testing.assert_allclose(got, expected, atol=1e-8)
    assert all(abs(float(r[2])) < 1e-10 for r in rows)


def test_evolve_qw_translation_example(tmp_path):
    code = main(
        ["evolve-qw", "--out", str(tmp_path), "--L", "55", "--beta", "0.0", "--steps", "20"]
    )
    assert code == 0
    header, rows = read_csv(tmp_path / "spreading.csv")
    assert header == ["t_or_m", "sigma", "com", "log_norm"]
    sigmas = [float(r[1]) for r in rows]
    np.testing.assert_allclose(sigmas, np.arange(21.0), atol=1e-9)


def test_csv_outputs_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    argv = ["--L", "34", "--V1", "0.6", "--V2", "0.3", "--h", "0.2"]
    assert main(["spectrum", "--out", str(out1)] + argv) == 0
    assert main(["spectrum", "--out", str(out2)] + argv) == 0
    assert (out1 / "spectrum.csv").read_bytes() == (out2 / "spectrum.csv").read_bytes()


def test_meta_round_trip_reproduces_outputs(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert (
        main(
            ["evolve-ct", "--out", str(out1), "--L", "34", "--V1", "2.0", "--V2", "1.5",
             "--h", "0.5", "--t-max", "10", "--t-samples", "21"]
        )
        == 0
    )
    assert main(["evolve-ct", "--config", str(out1 / "meta.json"), "--out", str(out2)]) == 0
    assert (out1 / "spreading.csv").read_bytes() == (out2 / "spreading.csv").read_bytes()


def test_winding_map_csv_marks_failures(tmp_path):
    code = main(
        ["winding-map", "--out", str(tmp_path), "--L", "8", "--kappa", "0.0", "--V1", "1.0",
         "--eb-re-min", "1.0", "--eb-re-max", "9.0", "--eb-re-n", "2",
         "--eb-im-min", "0.0", "--eb-im-max", "0.0", "--eb-im-n", "1",
         "--initial-samples", "8"]
    )
    assert code == 0
    header, rows = read_csv(tmp_path / "winding.csv")
    assert header == ["Re_EB", "Im_EB", "W", "quant_err"]
    # E_B = 1 collides with V_0, E_B = 9 is far outside the spectrum
    assert rows[0][2] == "nan"
    assert rows[1][2] == "0"


def test_winding_eb_auto_uses_loop_probes(tmp_path):
    code = main(
        ["winding", "--out", str(tmp_path), "--L", "34", "--h", "0.5", "--eb-auto", "true",
         "--nu", "theta", "--initial-samples", "64"]
    )
    assert code == 0
    header, rows = read_csv(tmp_path / "winding.csv")
    assert len(rows) >= 1
    assert all(int(r[2]) == 1 for r in rows)
    assert all(float(r[3]) <= 0.1 for r in rows)


def test_svg_emitted_only_when_requested(tmp_path):
    out1, out2 = tmp_path / "with", tmp_path / "without"
    assert main(["spectrum", "--out", str(out1), "--L", "13"]) == 0
    assert main(["spectrum", "--out", str(out2), "--L", "13", "--formats", "csv,json"]) == 0
    assert (out1 / "figure.svg").exists()
    assert not (out2 / "figure.svg").exists()
    svg = (out1 / "figure.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_fig1_variant_a_spectra(tmp_path):
    # hermitian run all-real; gauged run has a complex subset
    cfg = ExperimentConfig(experiment="fig1", variant="a", out=str(tmp_path))
    result = run(cfg)
    _, herm = read_csv(tmp_path / "a" / "hermitian" / "spectrum.csv")
    _, gauged = read_csv(tmp_path / "a" / "nonhermitian" / "spectrum.csv")
    herm_im = np.array([float(r[2]) for r in herm])
    gauged_im = np.array([float(r[2]) for r in gauged])
    assert np.abs(herm_im).max() <= 1e-6 * 48.4
    assert (np.abs(gauged_im) > 1e-6 * 48.4).sum() > 0
    assert result["summary"]["a/hermitian"]["complex_states"] == 0


def test_reproduce_only_fig4(tmp_path, monkeypatch):
    monkeypatch.setenv("NHQC_THREADS", "1")
    assert main(["reproduce", "--out", str(tmp_path), "--only", "fig4"]) == 0
    meta_a = json.loads((tmp_path / "fig4" / "a" / "meta.json").read_text())
    meta_b = json.loads((tmp_path / "fig4" / "b" / "meta.json").read_text())
    assert meta_a["summary"]["fit"]["verdict"] == "ballistic"
    assert meta_b["summary"]["fit"]["verdict"] == "pseudo_localized"


def test_reproduce_rejects_unknown_figure(tmp_path):
    assert main(["reproduce", "--out", str(tmp_path), "--only", "fig9"]) == 2
