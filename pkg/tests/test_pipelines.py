"""Output serialization, sweep plumbing, and CLI wiring."""

import json

import numpy as np
import pytest

from antenna_raman import cli, pipelines
from antenna_raman.correlators import SpectrumResult
from antenna_raman.pipelines import (
    PeakInfo,
    run_params,
    run_spectrum,
    run_sweep,
    write_csv,
    write_meta,
)
from antenna_raman.scenario import (
    Scenario,
    scenario_sha256,
    serialize_scenario,
    with_updates,
)


# ---------------------------------------------------------------- csv, meta


def test_csv_format(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["a", "b", "c"], [(1.0, None, "tag"), (0.5, 3, "x")])
    text = path.read_bytes().decode("utf-8")
    lines = text.split("\n")
    assert lines[0] == "a,b,c"
    assert lines[1] == "1.0000000000000000e+00,nan,tag"
    assert lines[2] == "5.0000000000000000e-01,3,x"
    assert text.endswith("\n") and "\r" not in text


def test_meta_sidecar(tmp_path):
    path = tmp_path / "run.meta.json"
    sc = Scenario()
    write_meta(path, sc, {"command": "params", "warnings": []})
    meta = json.loads(path.read_text(encoding="utf-8"))
    assert meta["scenario_sha256"] == scenario_sha256(sc)
    assert meta["command"] == "params"
    assert "package_version" in meta
    # nothing time-dependent may leak into the sidecar
    assert not any("time" in k or "date" in k for k in meta)
    # canonical form: sorted keys, so the bytes are reproducible
    assert list(meta) == sorted(meta)


def test_params_rows_structure():
    res = run_params(Scenario())
    names = [name for name, _, _ in res.rows]
    assert "t_p" in names and "c0_sigma" in names and "eta_prime" in names
    vals = dict((name, value) for name, value, _ in res.rows)
    assert vals["t_p"] == pytest.approx(0.466466953, rel=1e-8)
    assert res.warnings == []


def test_local_maxima_counts():
    omega = np.linspace(-1.0, 1.0, 201)
    two_bumps = np.exp(-((omega + 0.5) ** 2) / 1e-2) + 0.5 * np.exp(
        -((omega - 0.5) ** 2) / 1e-2
    )
    res = SpectrumResult(omega=omega, density=two_bumps, omega_l=0.0)
    found = pipelines._local_maxima(res)
    assert len(found) == 2
    assert found[0].omega == pytest.approx(-0.5, abs=0.02)
    assert found[1].omega == pytest.approx(0.5, abs=0.02)


# -------------------------------------------------------------------- sweep


def test_saturation_sweep_workers_match():
    grid = [1e-3, 1e-2, 1e-1]
    serial = run_sweep(Scenario(), "saturation", intensities=grid, workers=1)
    pooled = run_sweep(Scenario(), "saturation", intensities=grid, workers=2)
    assert [r.population for r in serial] == [r.population for r in pooled]
    assert [r.coherence_sq for r in serial] == [r.coherence_sq for r in pooled]
    # monotone drive response well below saturation
    assert serial[0].population < serial[1].population < serial[2].population


def test_stokes_row_matches_spectrum_pipeline():
    sc = with_updates(Scenario(), intensity_uw_per_um2=1.1e-4)
    row = run_sweep(sc, "stokes", intensities=[1.1e-4])[0]
    out = run_spectrum(sc)
    assert row.stokes == pytest.approx(out.peaks["stokes"].height, rel=1e-9)
    assert row.antistokes == pytest.approx(out.peaks["antistokes"].height, rel=1e-9)
    assert row.attributed_stokes == pytest.approx(row.stokes - row.conv_stokes)
    assert row.population == pytest.approx(out.population, rel=1e-9)


def test_unknown_sweep_mode_rejected():
    from antenna_raman.errors import ConfigError

    with pytest.raises(ConfigError):
        run_sweep(Scenario(), "voltage")


# ---------------------------------------------------------------------- cli


def test_cli_params_writes_outputs(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["params", "--out", str(out)]) == 0
    table = (out / "params.csv").read_text(encoding="utf-8")
    assert table.splitlines()[0] == "name,value,unit"
    assert "t_p," in table
    meta = json.loads((out / "params.meta.json").read_text(encoding="utf-8"))
    assert meta["command"] == "params"


def test_cli_em_default_grid(tmp_path):
    out = tmp_path / "run"
    assert cli.main(["em", "--out", str(out)]) == 0
    lines = (out / "em.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",")[0] == "gap_nm"
    assert len(lines) == 1 + Scenario().gap_points


def test_cli_antenna_spectrum(tmp_path):
    out = tmp_path / "run"
    sc_file = tmp_path / "scen.txt"
    sc_file.write_text(
        serialize_scenario(with_updates(Scenario(), preset="antenna_only")),
        encoding="utf-8",
    )
    code = cli.main(
        ["spectrum", "--scenario", str(sc_file), "--out", str(out), "--points", "801"]
    )
    assert code == 0
    meta = json.loads((out / "spectrum.meta.json").read_text(encoding="utf-8"))
    assert 0.0 < meta["population"] < 0.5
    body = (out / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert body[0] == "frequency_hz,spectral_density"
    assert len(body) == 802


def test_cli_closed_form_models(tmp_path):
    for model in ("linearized", "mollow"):
        out = tmp_path / model
        code = cli.main(
            ["spectrum", "--out", str(out), "--model", model, "--points", "401"]
        )
        assert code == 0
        meta = json.loads((out / "spectrum.meta.json").read_text(encoding="utf-8"))
        assert meta["model"] == model
        body = (out / "spectrum.csv").read_text(encoding="utf-8").splitlines()
        assert len(body) == 402
        dens = np.array([float(line.split(",")[1]) for line in body[1:]])
        assert np.all(dens >= 0.0) and dens.max() > 0.0
    # incoherent weight is tiny at the default drive, so the two sideband
    # models agree at the carrier-free level only in shape, not magnitude
    lin = json.loads((tmp_path / "linearized" / "spectrum.meta.json").read_text())
    mol = json.loads((tmp_path / "mollow" / "spectrum.meta.json").read_text())
    assert lin["scenario_sha256"] == mol["scenario_sha256"]


def test_cli_closed_form_needs_radiating_mode(tmp_path):
    sc_file = tmp_path / "scen.txt"
    sc_file.write_text(
        serialize_scenario(with_updates(Scenario(), preset="antenna_only")),
        encoding="utf-8",
    )
    out = str(tmp_path / "x")
    code = cli.main(
        ["spectrum", "--scenario", str(sc_file), "--out", out, "--model", "linearized"]
    )
    assert code == 2


def test_closed_form_zero_coupling_is_dark():
    sc = with_updates(Scenario(), g0_sigma_hz=0.0, g0_a_hz=0.0)
    out = pipelines.run_closed_form_spectrum(sc, "linearized", points=101)
    assert np.all(out.result.density == 0.0)


def test_cli_config_errors_exit_2(tmp_path):
    out = str(tmp_path / "x")
    assert cli.main(["sweep", "--out", out, "--intensities", "1e-3", "--log-grid", "1,2,3"]) == 2
    assert cli.main(["sweep", "--out", out, "--intensities", "-1.0"]) == 2
    assert cli.main(["spectrum", "--out", out, "--truncation", "8"]) == 2
    assert cli.main(["spectrum", "--out", out, "--window", "5e14,4e14"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("no.such.key = 1\n", encoding="utf-8")
    assert cli.main(["params", "--scenario", str(bad), "--out", out]) == 2


def test_cli_gap_below_validity_exit_4(tmp_path):
    out = str(tmp_path / "x")
    assert cli.main(["em", "--out", out, "--gap-grid", "0.1,0.3,2"]) == 4


def test_cli_strict_escalates_warning(tmp_path):
    sc_file = tmp_path / "hot.txt"
    sc_file.write_text(
        serialize_scenario(with_updates(Scenario(), kappa_hz=3e14)), encoding="utf-8"
    )
    out = str(tmp_path / "x")
    assert cli.main(["params", "--scenario", str(sc_file), "--out", out]) == 0
    assert cli.main(["params", "--scenario", str(sc_file), "--out", out, "--strict"]) == 4


def test_cli_repeat_runs_byte_identical(tmp_path):
    args = ["em", "--out", None, "--gap-grid", "1,20,5"]
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args[2] = str(out)
        assert cli.main(args) == 0
        blobs.append(
            (out / "em.csv").read_bytes() + (out / "em.meta.json").read_bytes()
        )
    assert blobs[0] == blobs[1]
