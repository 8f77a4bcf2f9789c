import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from spherical_green.cli import SCHEMA, THREADS_ENV, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, text, _ = run(*argv)
    return code, json.loads(text)


def test_constants_power():
    code, doc = run_json("constants", "--n", "3", "--sigma", "1")
    assert code == 0 and doc["schema"] == SCHEMA and doc["command"] == "constants"
    assert doc["extra"]["constant"] == pytest.approx(0.0795775, abs=5e-8)
    assert doc["pass"] is True


def test_constants_critical_pretty():
    code, text, _ = run("--format", "pretty", "constants", "--n", "2", "--critical")
    assert code == 0
    assert text.startswith("PASS") and "0.1591549" in text


def test_constants_kernel_obstruction():
    code, doc = run_json("constants", "--n", "4", "--k", "3")
    assert code == 2
    assert doc["error"]["type"] == "KernelObstruction"
    assert "kernel obstruction" in doc["error"]["message"]
    code, _, err = run("--format", "pretty", "constants", "--n", "4", "--k", "3")
    assert code == 2 and "kernel obstruction" in err


def test_kernel_subcommand():
    assert run("kernel", "--n", "6", "--k", "4")[0] == 2
    code, doc = run_json("kernel", "--n", "4", "--k", "1")
    assert code == 0 and doc["extra"]["status"]


@pytest.mark.parametrize("order", [["--sigma", "1"], ["--critical"]])
def test_green_verify_passes(order):
    n = "3" if order[0] == "--sigma" else "2"
    code, doc = run_json("green-verify", "--n", n, *order, "--kmax", "10")
    assert code == 0 and doc["pass"]
    names = {r["name"] for r in doc["reports"]}
    assert {"coefficient_match", "moment_oracle"} <= names
    assert ("series_vs_closed" in names) or ("series_difference" in names)


def test_near_pole_guard():
    code, doc = run_json("green-verify", "--n", "3", "--sigma", "1.5001", "--near-pole-guard")
    assert code == 2 and doc["error"]["type"] in ("PoleError", "DomainError")


def test_nonconvergence_exit_code():
    code, doc = run_json(
        "green-verify", "--n", "5", "--sigma", "0.5", "--kmax", "2", "--x", "1", "--K", "2000", "--acceleration", "none"
    )
    assert code == 3 and doc["error"]["type"] == "ConvergenceError"


def test_axial_exact_output():
    code, text, _ = run("--format", "pretty", "axial", "--n", "6", "--kmax", "8")
    assert code == 0
    assert "0/1 (exact)" in text
    code, doc = run_json("axial", "--n", "6", "--kmax", "3")
    eig = [r for r in doc["reports"] if r["name"] == "axial_eigenvalue"]
    # (-1)^3 6!/0!
    assert eig[0]["rational"] == "-720/1" and eig[0]["target_rational"] == "-720/1"


def test_axial_rejects_odd():
    assert run("axial", "--n", "5")[0] == 2


def test_flat_identity():
    for n in ("2", "4", "6", "8"):
        assert run("flat-identity", "--n", n)[0] == 0


def test_surface_sphere_all_suites(surface_file):
    code, doc = run_json("surface", surface_file("sphere", 2, radius=2.0), "--points", "50")
    assert code == 0, doc
    names = [r["name"] for r in doc["reports"]]
    assert "green_residual_surface" in names and "laplace_rho_identity_fd" in names
    assert names.count("ray_limits") == 5


def test_surface_ellipsoid_fails_green(surface_file):
    path = surface_file("ellipsoid", 2, horizontal=[1, 2], vertical=1)
    code, doc = run_json("surface", path, "--suite", "green")
    assert code == 1 and not doc["pass"]
    assert doc["reports"][0]["value"] > 1e-3


def test_surface_conformal(surface_file):
    code, doc = run_json("surface", surface_file("sphere", 3), "--suite", "green")
    assert code == 0 and doc["reports"][0]["name"] == "green_residual_conformal"


def test_surface_missing_file(tmp_path):
    code, doc = run_json("surface", str(tmp_path / "nope.json"))
    assert code == 2 and doc["error"]["type"] == "FileNotFoundError"


def test_mass_sphere(surface_file, tmp_path):
    trace = tmp_path / "m.csv"
    code, doc = run_json("mass", surface_file("sphere", 3), "--radii", "20,40,80", "--order", "16", "--trace", str(trace))
    assert code == 0, doc
    assert doc["extra"]["exponent"] == pytest.approx(-3, abs=0.3)
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["r", "m_hat", "quad_order"] and len(rows) == 4


def test_mass_plane(surface_file):
    code, doc = run_json("mass", surface_file("plane", 3), "--radii", "20,40,80", "--order", "8")
    assert code == 0 and doc["extra"]["exact_zero"] is True
    assert doc["extra"]["exponent"] == "nan"


def test_geodesic(surface_file, tmp_path):
    trace = tmp_path / "g.csv"
    path = surface_file("paraboloid", 2, diagonal=[1, 2])
    code, doc = run_json("geodesic", path, "--v", "1,0", "--v", "0,1", "--samples", "1024", "--tol", "1e-3", "--trace", str(trace))
    assert code == 0, doc
    assert len(doc["reports"]) == 2
    assert trace.read_text().startswith("r,rho\n")


def test_series_rigidity():
    code, doc = run_json("series-rigidity", "--c0", "1/4", "--N", "8")
    assert code == 0
    assert doc["extra"]["coefficients"][:4] == ["1/2", "1/8", "1/16", "5/128"]
    coeffs = [r for r in doc["reports"] if r["name"] == "series_coefficient"]
    assert len(coeffs) == 8 and all(r["pass"] for r in coeffs)
    code, doc = run_json("series-rigidity", "--c0", "2", "--N", "5")
    assert code == 0 and all(r["name"] == "back_substitution" for r in doc["reports"])


def test_csv_format():
    code, text, _ = run("--format", "csv", "axial", "--n", "2", "--kmax", "2")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["name", "value", "target", "pass", "params"]
    for row in rows[1:]:
        Fraction(row[1])
        assert row[3] == "True"
        assert json.loads(row[4])["n"] == 2


def test_usage_errors():
    assert run("constants", "--n", "3")[0] == 2
    assert run("constants", "--n", "3", "--critical", "--sigma", "1")[0] == 2
    assert run("nosuchcommand")[0] == 2
    assert run("series-rigidity", "--c0", "x/y")[0] == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "1")
    a = run("green-verify", "--n", "3", "--sigma", "1", "--kmax", "4", "--K", "800")
    monkeypatch.setenv(THREADS_ENV, "3")
    b = run("green-verify", "--n", "3", "--sigma", "1", "--kmax", "4", "--K", "800")
    assert a == b
    monkeypatch.setenv(THREADS_ENV, "zero")
    code, doc = run_json("constants", "--n", "3", "--sigma", "1")
    assert code == 2 and THREADS_ENV in doc["error"]["message"]


def test_deterministic_json(surface_file):
    path = surface_file("ellipsoid", 3, horizontal=[1, 1.5, 2], vertical=1)
    args = ("--seed", "7", "surface", path, "--points", "30", "--suite", "all")
    assert run(*args) == run(*args)
    other = run("--seed", "8", *args[2:])
    assert other[1] != run(*args)[1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "spherical_green", "constants", "--n", "4", "--k", "3"], capture_output=True, text=True
    )
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["error"]["exit_code"] == 2
