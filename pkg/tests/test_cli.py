import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cusp_spectra import cli
from cusp_spectra.cusp_model import ModelCuspPair, relative_trace_exact
from cusp_spectra.surface import build_closed_surface, bundled_surface, save_surface
from cusp_spectra.trace_expansion import ExpansionCoeffs, eval_expansion, expansion_from_geometry


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestGrid:
    def test_geometric(self):
        np.testing.assert_allclose(cli.parse_grid("0.01:10:geometric:4"), [0.01, 0.1, 1, 10])

    def test_linear(self):
        np.testing.assert_allclose(cli.parse_grid("1:2:linear:3"), [1, 1.5, 2])

    def test_default_spacing_is_geometric(self):
        np.testing.assert_allclose(cli.parse_grid("1:100:3"), [1, 10, 100])

    @pytest.mark.parametrize("spec", ["-1", "0:1:geometric:3", "1:2:cubic:3", "1:2:x", "a:b:linear:2"])
    def test_invalid(self, spec):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(spec)


class TestFormatting:
    def test_seventeen_digits(self):
        assert cli.fmt(0.1) == "0.10000000000000001"

    def test_json_round_trip(self):
        doc = {"b": [0.1, 2], "a": {"x": math.pi, "n": None, "flag": True}, "nan": math.nan}
        back = json.loads(cli.dumps(doc))
        assert back["a"]["x"] == math.pi and back["nan"] is None
        assert list(back) == ["a", "b", "nan"]


class TestModelTrace:
    def test_oracle_agreement(self, capsys):
        code, out, _ = run(["model-trace", "--a", "2", "--domain", "full", "--t", "0.01:10:geometric:40"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 40
        assert max(float(r["abs_diff"]) for r in rows) < 1e-8

    def test_identity(self, capsys):
        code, out, _ = run(["model-trace", "--a", "1", "--t", "0.1:1:3"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and all(float(r["exact"]) == 0 == float(r["quadrature"]) for r in rows)

    def test_negative_time(self, capsys):
        code, _, err = run(["model-trace", "--a", "2", "--t", "-1"], capsys)
        assert code == 2 and "usage error" in err

    def test_bad_height_is_contract_error(self, capsys):
        assert run(["model-trace", "--a", "0.5", "--t", "1"], capsys)[0] == 3

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        assert run(["--out", str(out), "model-trace", "--a", "3", "--t", "1:2:linear:2"], capsys)[0] == 0
        assert out.read_text().startswith("t,exact,quadrature,abs_diff\n")


class TestDet:
    def test_builtin(self, capsys):
        code, out, _ = run(["det", "--a", "4"], capsys)
        assert code == 0 and json.loads(out)["determinant"] == pytest.approx(0.5, abs=1e-6)

    def test_identity(self, capsys):
        code, out, _ = run(["det", "--a", "1"], capsys)
        assert code == 0 and json.loads(out)["determinant"] == pytest.approx(1.0, abs=1e-12)

    def test_samples(self, tmp_path, capsys):
        t = np.geomspace(1e-6, 80, 600)
        path = tmp_path / "s.csv"
        np.savetxt(path, np.column_stack([t, relative_trace_exact(ModelCuspPair(4.0), t)]), delimiter=",",
                   fmt="%.17g")
        a10 = -math.log(4) / math.sqrt(4 * math.pi)
        code, out, _ = run(["det", "--samples", str(path), "--coeffs", f"0,{a10!r},0,0"], capsys)
        assert code == 0 and json.loads(out)["determinant"] == pytest.approx(0.5, abs=1e-6)

    def test_mismatch_exits_nonzero(self, tmp_path, capsys):
        t = np.geomspace(1e-6, 80, 600)
        path = tmp_path / "s.csv"
        np.savetxt(path, np.column_stack([t, relative_trace_exact(ModelCuspPair(4.0, "restricted"), t)]),
                   delimiter=",", fmt="%.17g")
        code, _, err = run(["det", "--samples", str(path), "--coeffs", "0,0,0,0"], capsys)
        assert code == 4 and "sqrt(t)" in err

    def test_malformed_csv(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("t,v\n0.1,oops\n")
        assert run(["det", "--samples", str(path), "--coeffs", "0,0,0,0"], capsys)[0] == 2

    def test_missing_coeffs(self, tmp_path, capsys):
        path = tmp_path / "s.csv"
        path.write_text("1,2\n")
        assert run(["det", "--samples", str(path)], capsys)[0] == 2


class TestFitExpansion:
    def write(self, tmp_path, values, t):
        path = tmp_path / "fit.csv"
        path.write_text("t,R\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, values)))
        return str(path)

    def test_exact(self, tmp_path, capsys):
        t = np.geomspace(1e-6, 1e-2, 40)
        c = ExpansionCoeffs(0.3, 0.2, -0.1, 0.05)
        code, out, _ = run(["fit-expansion", self.write(tmp_path, eval_expansion(c, 0, t), t)], capsys)
        assert code == 0
        assert json.loads(out)["coeffs"] == pytest.approx(c.as_dict(), abs=1e-10)

    def test_model_pair(self, tmp_path, capsys):
        t = np.geomspace(1e-6, 1e-2, 40)
        path = self.write(tmp_path, relative_trace_exact(ModelCuspPair(math.e), t), t)
        fitted = json.loads(run(["fit-expansion", path], capsys)[1])["coeffs"]
        assert fitted == pytest.approx({"a0": 0, "a10": -1 / math.sqrt(4 * math.pi), "a11": 0, "a2": 0}, abs=1e-4)

    def test_remainder(self, tmp_path, capsys):
        t = np.geomspace(1e-6, 1e-2, 40)
        c = expansion_from_geometry(4 * math.pi, -1, 1)
        path = self.write(tmp_path, eval_expansion(c, 0, t) + 0.3 * t ** 1.5, t)
        assert json.loads(run(["fit-expansion", path], capsys)[1])["coeffs"] == pytest.approx(c.as_dict(), abs=1e-3)

    def test_ill_conditioned(self, tmp_path, capsys):
        t = np.linspace(1e-4, 1e-2, 8)
        assert run(["fit-expansion", self.write(tmp_path, 1 / t, t)], capsys)[0] == 4


class TestSurfaces:
    def test_polyakov_zero_field(self, tmp_path, capsys):
        surf = bundled_surface("cusp_surface")
        phi = tmp_path / "phi.json"
        phi.write_text(json.dumps([0.0] * surf.n_sites))
        code, out, _ = run(["polyakov", "--surface", "cusp_surface", "--phi", str(phi)], capsys)
        assert code == 0 and json.loads(out)["delta"]["total"] == 0

    def test_polyakov_cocycle(self, capsys):
        code, out, _ = run(["polyakov", "--surface", "synthetic_genus2", "--random-seed", "5", "--cocycle"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["cocycle"]["passed"] and abs(doc["cocycle"]["residual"]) < 1e-7

    def test_missing_surface(self, capsys):
        assert run(["polyakov", "--surface", "/nonexistent/s.json"], capsys)[0] == 2

    def test_uniformize_extremal_start(self, capsys):
        code, out, _ = run(["uniformize", "--surface", "cusp_surface"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["iterations"] == 0 and doc["curvature_mean"] == pytest.approx(-1.0)

    def test_uniformize_perturbed(self, tmp_path, capsys):
        hist = tmp_path / "h.csv"
        code, out, _ = run(["--seed", "3", "uniformize", "--surface", "cusp_surface", "--perturbation", "0.4",
                            "--area-normalization", "--history", str(hist)], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["iterations"] > 0 and doc["relative_stddev"] < 1e-3
        assert hist.read_text().splitlines()[0] == "iteration,phi,grad_norm"

    def test_uniformize_torus(self, capsys):
        assert run(["uniformize", "--surface", "flat_torus"], capsys)[0] == 3

    def test_gauss_bonnet(self, capsys):
        code, out, _ = run(["gauss-bonnet", "--surface", "cusp_surface", "--samples", "4"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["invariance"]["passed"] and len(doc["invariance"]["differences"]) == 4

    def test_surface_file(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        save_surface(build_closed_surface(3, n=8), path)
        code, out, _ = run(["gauss-bonnet", "--surface", str(path)], capsys)
        assert code == 0 and json.loads(out)["euler_char"] == -4

    def test_corrupt_surface(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text('{"sites": 1}')
        assert run(["gauss-bonnet", "--surface", str(path)], capsys)[0] == 2


class TestGlobalFlags:
    def test_threads_env_override(self, monkeypatch):
        monkeypatch.setenv(cli.THREADS_ENV, "6")
        assert cli.resolve_threads(2) == 6
        monkeypatch.setenv(cli.THREADS_ENV, "0")
        with pytest.raises(cli.UsageError):
            cli.resolve_threads(2)

    def test_threads_flag(self, monkeypatch):
        monkeypatch.delenv(cli.THREADS_ENV, raising=False)
        assert cli.resolve_threads(3) == 3

    def test_flags_before_and_after_subcommand(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(["--out", str(a), "--seed", "4", "polyakov", "--surface", "flat_torus"], capsys)[0] == 0
        assert run(["polyakov", "--surface", "flat_torus", "--out", str(b), "--seed", "4"], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_tolerance(self, capsys):
        assert run(["--tol", "-1", "det"], capsys)[0] == 2

    def test_unknown_command(self, capsys):
        assert run(["frobnicate"], capsys)[0] == 2

    def test_deterministic(self, capsys):
        argv = ["gauss-bonnet", "--surface", "synthetic_genus2", "--samples", "3", "--seed", "9"]
        assert run(argv, capsys)[1] == run(argv, capsys)[1]

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "cusp_spectra.cli", "det", "--a", "4"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["determinant"] == pytest.approx(0.5, abs=1e-6)
