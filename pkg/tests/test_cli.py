import json

import pytest

from natcopula.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


def _synth(tmp_path, *extra):
    out = tmp_path / "data"
    code = main(["synth", "--out", str(out), *extra])
    assert code == EXIT_OK
    return out / "synth.csv"


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == EXIT_USAGE


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE


def test_estimation_requires_input_or_uniform(tmp_path, capsys):
    code = main(["copula", "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_bad_basis_is_usage_error(tmp_path):
    code = main(["copula", "--uniform", "--basis", "2x", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_zero_volume_side_is_data_error(tmp_path):
    code = main(["synth", "--buy-volume", "0", "--out", str(tmp_path)])
    assert code == EXIT_DATA


def test_malformed_csv_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("price,volume,side\n1.0,oops,buy\n", encoding="utf-8")
    code = main(["fit", str(bad), "--out", str(tmp_path)])
    assert code == EXIT_DATA
    assert "line 2" in capsys.readouterr().err


def test_synth_is_seed_deterministic(tmp_path):
    a = _synth(tmp_path / "a", "--seed", "7")
    b = _synth(tmp_path / "b", "--seed", "7")
    c = _synth(tmp_path / "c", "--seed", "8")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_fit_report_round_trips_synthetic_book(tmp_path):
    csv = _synth(tmp_path, "--seed", "3")
    out = tmp_path / "fit"
    assert main(["fit", str(csv), "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "fit.json").read_text())
    assert payload["schema"] == "natural-copula/1"
    for side in ("buy", "sell"):
        fit = payload["fit"][side]
        assert fit["converged"] is True
        assert fit["residual"] <= fit["baseline_residual"]
        assert len(fit["density_pdf"]) == 101


def test_uniform_copula_report_values(tmp_path):
    out = tmp_path / "cop"
    code = main(
        ["copula", "--uniform", "--basis", "11", "--out", str(out), "--export-n", "11"]
    )
    assert code == EXIT_OK
    payload = json.loads((out / "copula.json").read_text())
    cop = payload["copula"]
    assert abs(cop["C"]) <= 1e-6
    assert len(cop["coefficients"]) == 1
    assert abs(cop["coefficients"][0] - 4.0) <= 1e-6
    assert abs(cop["cost"] - 1.0 / 9.0) <= 1e-6
    assert cop["repair_delta"] == 0
    assert cop["min_tau_recheck"] >= -1e-12
    assert cop["cost"] >= cop["ot_lower_bound"] - 1e-9

    lines = (out / "copula_density.csv").read_text().splitlines()
    assert lines[0] == "x,y,density"
    assert len(lines) == 1 + 11 * 11
    mid = dict(zip(("x", "y", "density"), lines[1 + 5 * 11 + 5].split(",")))
    assert float(mid["x"]) == 0.5 and float(mid["y"]) == 0.5
    assert abs(float(mid["density"]) - 1.0) <= 1e-6


def test_report_bytes_do_not_depend_on_out_dir(tmp_path):
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(["copula", "--uniform", "--out", str(out), "--export-n", "5"])
        assert code == EXIT_OK
        outs.append(out)
    assert (outs[0] / "copula.json").read_bytes() == (outs[1] / "copula.json").read_bytes()
    assert (outs[0] / "copula_density.csv").read_bytes() == (
        outs[1] / "copula_density.csv"
    ).read_bytes()


def test_demo_potential_reports_circulation(tmp_path):
    out = tmp_path / "hydro"
    code = main(
        ["hydro", "--demo-potential", "paraboloid", "--out", str(out), "--export-n", "5"]
    )
    assert code == EXIT_OK
    payload = json.loads((out / "hydro.json").read_text())
    hydro = payload["hydro"]
    assert abs(hydro["gamma"] + 4.0) <= 1e-9
    assert abs(hydro["phi"]) <= 1e-9
    assert hydro["green_residual"] <= 1e-9
    assert hydro["stream_function"] is True

    lines = (out / "vector_field.csv").read_text().splitlines()
    assert lines[0] == "x,y,vx,vy"
    assert len(lines) == 1 + 5 * 5


def test_model_hydro_runs_from_fitted_input(tmp_path):
    csv = _synth(tmp_path, "--seed", "11", "--bins", "48")
    out = tmp_path / "hydro"
    code = main(["hydro", str(csv), "--bins", "48", "--potential", "cdf", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads((out / "hydro.json").read_text())
    assert payload["hydro"]["green_residual"] <= 1e-6
    assert payload["params"]["potential"] == "cdf"


def test_csv_report_format_flattens_keys(tmp_path):
    out = tmp_path / "corr"
    code = main(["corr", "--uniform", "--format", "csv", "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "corr.csv").read_text().splitlines()
    assert lines[0] == "key,value"
    keys = {line.split(",", 1)[0] for line in lines[1:]}
    assert "corr.ct" in keys
    assert "schema" in keys
    assert not (out / "corr.json").exists()


def test_corr_uniform_default_basis_value(tmp_path):
    out = tmp_path / "corr"
    assert main(["corr", "--uniform", "--basis", "11", "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "corr.json").read_text())
    assert abs(payload["corr"]["ct"] - 7.0 / 9.0) <= 1e-6
    assert abs(payload["corr"]["variance_residual"]) <= 1e-9
