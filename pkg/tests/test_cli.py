import csv

import pytest

from spinbath_transport import cli


def _kv(out):
    return dict(line.split("=", 1) for line in out.strip().splitlines() if "=" in line)


def test_appendix(tmp_path, capsys):
    assert cli.run(["appendix", "--out", str(tmp_path), "--grid-points", "20001"]) == 0
    kv = _kv(capsys.readouterr().out)
    assert float(kv["max_scaled_probability"]) < 0.999
    assert float(kv["closed_form_max_abs_error"]) < 1e-9
    rows = list(csv.reader((tmp_path / "appendix_series.csv").open()))
    assert rows[0] == ["t_over_j", "probability", "scaled_probability"]
    assert len(rows) == 20002


def test_validate_passes(tmp_path, capsys):
    assert cli.run(["validate", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert (tmp_path / "validate.csv").exists()


def test_network_symmetric_series(tmp_path, capsys):
    rc = cli.run(["network", "--n", "5", "--j", "1", "--baths", "none", "--window", "1.0",
                  "--grid-points", "2001", "--out", str(tmp_path)])
    assert rc == 0
    kv = _kv(capsys.readouterr().out)
    assert float(kv["peak"]) == pytest.approx(4 / 25, abs=1e-9)
    header = (tmp_path / "network_series.csv").read_text().splitlines()[0]
    assert header == "t_ps,probability"


def test_network_units_cm(tmp_path, capsys):
    args = ["network", "--n", "3", "--baths", "none", "--window", "0.2", "--grid-points", "401", "--out", str(tmp_path)]
    cli.run(args + ["--j", "53.08837"])
    a = _kv(capsys.readouterr().out)
    cli.run(args + ["--j", "10", "--units", "radps"])
    b = _kv(capsys.readouterr().out)
    cli.run(args + ["--j", "53.08837", "--units", "cm"])
    c = _kv(capsys.readouterr().out)
    assert a["argmax_time_ps"] != c["argmax_time_ps"]
    assert float(b["argmax_time_ps"]) == pytest.approx(float(c["argmax_time_ps"]), rel=1e-5)


def test_intermediate_scan(tmp_path, capsys):
    rc = cli.run(["network", "--n", "4", "--baths", "intermediate", "--nspins", "2,2", "--scan-gamma",
                  "--gamma-max", "20", "--gamma-step", "10", "--grid-points", "501", "--out", str(tmp_path)])
    assert rc == 0
    rows = list(csv.reader((tmp_path / "network_gamma_scan.csv").open()))
    assert rows[0] == ["gamma_radps", "max_probability", "argmax_time_ps"]
    assert len(rows) == 4


def test_dimer_surface(tmp_path, capsys):
    rc = cli.run(["dimer", "--nspins", "2,2", "--gamma-max", "10", "--gamma-step", "5",
                  "--grid-points", "501", "--out", str(tmp_path)])
    assert rc == 0
    rows = list(csv.reader((tmp_path / "dimer_surface.csv").open()))
    assert len(rows) == 1 + 9
    kv = _kv(capsys.readouterr().out)
    assert float(kv["peak"]) == pytest.approx(1.0, abs=1e-6)  # gamma = 0 keeps the dimer resonant


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# comment\nn = 6\nbaths = none\nj = 1\nwindow = 1.0\ngrid_points = 1001\n")
    assert cli.run(["network", "--config", str(conf), "--out", str(tmp_path)]) == 0
    assert float(_kv(capsys.readouterr().out)["peak"]) == pytest.approx(4 / 36, abs=1e-9)
    assert cli.run(["network", "--config", str(conf), "--n", "4", "--out", str(tmp_path)]) == 0
    assert float(_kv(capsys.readouterr().out)["peak"]) == pytest.approx(4 / 16, abs=1e-9)


def test_bad_config_key(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("nonsense = 3\n")
    assert cli.run(["network", "--config", str(conf), "--out", str(tmp_path)]) == 2
    assert "nonsense" in capsys.readouterr().err


def test_invalid_input_exit_code(tmp_path, capsys):
    assert cli.run(["network", "--baths", "intermediate", "--nspins", "2", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_fmo_sweep_and_cdf(tmp_path, capsys):
    rc = cli.run(["fmo", "sweep", "--total-spins", "2", "--gamma-max", "20", "--gamma-step", "10",
                  "--units", "cm", "--grid-points", "201", "--jobs", "1", "--out", str(tmp_path)])
    assert rc == 0
    kv = _kv(capsys.readouterr().out)
    assert int(kv["record_count"]) == 7 * 3 * 2
    assert (tmp_path / "fmo_summary_1_3.csv").exists()
    assert cli.run(["fmo", "cdf", "--filter", "n1=2", "--out", str(tmp_path)]) == 0
    kv = _kv(capsys.readouterr().out)
    assert 0.0 <= float(kv["fraction_improved_1_3"]) <= 1.0
    assert (tmp_path / "fmo_cdf_6_3_filtered.csv").exists()


def test_fmo_cdf_missing_records(tmp_path, capsys):
    assert cli.run(["fmo", "cdf", "--out", str(tmp_path)]) == 2


def test_fmo_alpha_scan(tmp_path, capsys):
    rc = cli.run(["fmo", "alpha-scan", "--ratio-max", "1", "--ratio-step", "0.5",
                  "--grid-points", "201", "--out", str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "fmo_alpha_scan.csv").read_text().splitlines()
    assert rows[0] == "alpha_over_kbt,max_probability"
    assert len(rows) == 4


def test_config_parser(tmp_path):
    p = tmp_path / "c.conf"
    p.write_text("a = 1\n\n# x\ngrid-points=5  # trailing\n")
    assert cli.read_config(p) == {"a": "1", "grid_points": "5"}
    p.write_text("novalue\n")
    with pytest.raises(ValueError):
        cli.read_config(p)
