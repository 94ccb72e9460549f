import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rosetta_sim import cli


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    data = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(data))))
    comments = dict(
        line[2:].split("=", 1) for line in text.splitlines() if line.startswith("# ")
    )
    return rows[0], rows[1:], comments


def test_peel_off_json(capsys):
    code, out, _ = run_cli(capsys, "peel-off", "--photons", "2", "--reflectivity", "0.5")
    assert code == 0
    data = json.loads(out)
    assert data["schema_version"] == "1"
    assert data["success_probability"] == 0.0625
    assert data["target_fidelity"] == pytest.approx(1)


def test_peel_off_optimize(capsys):
    code, out, _ = run_cli(capsys, "peel-off", "--photons", "4", "--optimize")
    data = json.loads(out)
    assert code == 0
    assert data["reflectivity_r2"] == 0.25
    assert data["r2_numeric"] == pytest.approx(data["r2_analytic"], abs=1e-6)


def test_lithography_csv(capsys):
    code, out, _ = run_cli(capsys, "lithography", "--photons", "4")
    assert code == 0
    header, rows, comments = parse_csv(out)
    assert header == ["phi", "rate"]
    phi = np.array([float(r[0]) for r in rows])
    rate = np.array([float(r[1]) for r in rows])
    assert len(rows) == 721
    assert np.max(np.abs(rate - (1 + np.cos(4 * phi)) / 2)) < 1e-10
    assert float(comments["period"]) == pytest.approx(math.pi / 2, abs=1e-9)


def test_rosetta_columns(capsys):
    code, out, _ = run_cli(capsys, "rosetta")
    header, rows, comments = parse_csv(out)
    assert code == 0
    assert header == ["phi", "qubit_circuit", "mach_zehnder"]
    diffs = [abs(float(q) - float(o)) for _, q, o in rows]
    assert len(rows) == 101 and max(diffs) < 1e-10
    assert float(comments["offset"]) == pytest.approx(math.pi)


def test_scaling_csv(capsys):
    argv = ["scaling", "--scheme", "noon", "--photons-list", "2", "4", "8", "16",
            "--repetitions", "500", "--seed", "5"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    header, rows, comments = parse_csv(out)
    assert header == ["N", "delta_phi"]
    assert [r[0] for r in rows] == ["2", "4", "8", "16"]
    assert out.splitlines()[-2].startswith("# exponent=")
    assert float(comments["exponent"]) == pytest.approx(-1, abs=0.15)


def test_variance_catalog_json(capsys):
    code, out, _ = run_cli(capsys, "variance-catalog", "--photons", "2")
    data = json.loads(out)
    assert code == 0
    assert {"uniform", "extreme", "binomial"} <= set(data)
    assert data["uniform"] == pytest.approx(2 / 3, abs=1e-12)
    assert data["binomial"] == 0.5


@pytest.mark.parametrize("scheme", cli.SENSITIVITY_SCHEMES)
def test_sensitivity_runs(capsys, scheme):
    n = "3" if scheme == "yurke" else "4"
    code, out, _ = run_cli(capsys, "sensitivity", "--scheme", scheme, "--photons", n,
                           "--phase-points", "24", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["rows"]) == 24
    if scheme == "dual-fock":
        assert data["best_delta_phi"] is None
    else:
        assert data["best_delta_phi"] > 0


def test_sensitivity_noon_reaches_heisenberg(capsys):
    _, out, _ = run_cli(capsys, "sensitivity", "--scheme", "noon", "--photons", "4",
                        "--phase-points", "16", "--format", "json")
    assert json.loads(out)["best_delta_phi"] == pytest.approx(0.25, abs=1e-9)


def test_ghz_and_hom(capsys):
    code, out, _ = run_cli(capsys, "ghz", "--photons", "3")
    data = json.loads(out)
    assert code == 0 and data["fidelity_with_analytic"] == pytest.approx(1)
    assert [r[0] for r in data["rows"]] == ["000", "111"]
    code, out, _ = run_cli(capsys, "hom")
    data = json.loads(out)
    assert data["coincidence_probability"] < 1e-14
    assert data["fidelity_noon2"] == pytest.approx(1)


def test_empty_report_csv():
    text = cli.render(cli.Report(columns=["N", "delta_phi"]), "csv")
    assert text == "N,delta_phi\n"


def test_json_round_trip():
    values = [math.pi, 1 / 3, 2.0 ** -40, 123456789.123456789, -0.0625]
    report = cli.Report({"x": values[0]}, ["v"], [[v] for v in values])
    data = json.loads(cli.render(report, "json"))
    for v, (got,) in zip(values, data["rows"]):
        assert got == float(f"{v:.12g}")
    again = json.loads(cli.render(cli.Report({"x": data["x"]}, ["v"], data["rows"]), "json"))
    assert again == data


def test_non_finite_serialized_as_null():
    data = json.loads(cli.render(cli.Report({"d": math.inf}), "json"))
    assert data["d"] is None


def test_deterministic_output(capsys):
    argv = ["scaling", "--scheme", "separable", "--photons-list", "1", "2", "4", "8",
            "--repetitions", "300", "--seed", "9"]
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run_cli(capsys, "hom", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["schema_version"] == "1"


def test_unwritable_path(tmp_path, capsys):
    code, _, err = run_cli(capsys, "hom", "--output", str(tmp_path / "missing" / "x.json"))
    assert code == 1
    assert "error" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["teleport"],
        ["hom", "--bogus"],
        ["peel-off", "--reflectivity", "1.5"],
        ["lithography", "--photons", "0"],
        ["scaling", "--scheme", "noon"],
        [],
    ],
)
def test_argument_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        cli.run(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["sensitivity", "--scheme", "yurke", "--photons", "4"],
        ["scaling", "--scheme", "noon", "--photons-list", "2", "4"],
        ["peel-off", "--photons", "1"],
    ],
)
def test_runtime_errors_exit_1(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == 1
    assert err.startswith("rosetta-sim: error")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "rosetta_sim", "peel-off", "--photons", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["N"] == 3
    bad = subprocess.run([sys.executable, "-m", "rosetta_sim", "nope"], capture_output=True)
    assert bad.returncode == 2
