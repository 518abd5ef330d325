import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import scipy.sparse as sps

from spdgeom import cli
from spdgeom.core import SparseSpd, random_pattern, random_sparse_spd, random_spd
from spdgeom.errors import NonPositiveResult
from spdgeom.geometry import geodesic_riemannian
from spdgeom.io import read_matrix, write_matrix


def _write(tmp_path, name, M):
    path = tmp_path / name
    write_matrix(M, str(path))
    return str(path)


def _csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def _stdout_csv(text):
    rows = list(csv.reader(text.splitlines()))
    return rows[0], np.array(rows[1:], dtype=float)


class TestDist:
    def test_thompson_diagonal(self, tmp_path, capsys):
        fx = _write(tmp_path, "x.json", np.eye(2))
        fy = _write(tmp_path, "y.json", np.diag([4.0, 1 / 8]))
        assert cli.main(["dist", "thompson", fx, fy]) == 0
        out = capsys.readouterr().out.strip()
        assert out.startswith("2.0794415416")
        assert float(out) == pytest.approx(np.log(8), rel=1e-11)

    @pytest.mark.parametrize("metric", ["riemannian", "hilbert", "thompson"])
    def test_same_matrix(self, tmp_path, capsys, metric):
        fx = _write(tmp_path, "x.json", random_spd(4, seed=1))
        assert cli.main(["dist", metric, fx, fx]) == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_twelve_significant_digits(self, tmp_path, capsys):
        fx = _write(tmp_path, "x.json", np.eye(2))
        fy = _write(tmp_path, "y.json", np.diag([np.e, 1.0]))
        cli.main(["dist", "riemannian", fx, fy])
        assert capsys.readouterr().out.strip() == "1"
        fy = _write(tmp_path, "z.json", np.diag([3.0, 1.0]))
        cli.main(["dist", "riemannian", fx, fy])
        assert capsys.readouterr().out.strip() == f"{np.log(3):.12g}"

    def test_sparse_inputs(self, tmp_path, capsys):
        X = random_sparse_spd(40, 0.1, seed=2)
        Y = random_sparse_spd(40, 0.1, seed=3)
        fx, fy = _write(tmp_path, "x.mtx", X), _write(tmp_path, "y.mtx", Y)
        assert cli.main(["dist", "thompson", fx, fy]) == 0
        w = np.linalg.eigvals(np.linalg.solve(X.toarray(), Y.toarray())).real
        expected = max(np.log(w.max()), -np.log(w.min()))
        assert float(capsys.readouterr().out) == pytest.approx(expected, rel=1e-9)

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"n": 2, "rows": [[1, 0]]}')
        fx = _write(tmp_path, "x.json", np.eye(2))
        assert cli.main(["dist", "thompson", fx, str(bad)]) == 2
        assert "error" in capsys.readouterr().err

    def test_not_spd(self, tmp_path):
        fx = _write(tmp_path, "x.json", np.eye(2))
        bad = tmp_path / "bad.json"
        bad.write_text('{"n": 2, "rows": [[1, 2], [2, 1]]}')
        assert cli.main(["dist", "riemannian", fx, str(bad)]) == 2

    def test_missing_file(self, tmp_path):
        fx = _write(tmp_path, "x.json", np.eye(2))
        assert cli.main(["dist", "hilbert", fx, str(tmp_path / "nope.json")]) == 2

    def test_dimension_mismatch(self, tmp_path):
        fx = _write(tmp_path, "x.json", np.eye(2))
        fy = _write(tmp_path, "y.json", np.eye(3))
        assert cli.main(["dist", "thompson", fx, fy]) == 2


class TestInterpolate:
    def test_riemannian_unit_det(self, tmp_path):
        fx = _write(tmp_path, "x.json", random_spd(4, seed=4, unit_det=True))
        fy = _write(tmp_path, "y.json", random_spd(4, seed=5, unit_det=True))
        out = tmp_path / "out"
        assert cli.main(["interpolate", "riemannian", fx, fy, "--out", str(out)]) == 0
        header, data = _csv(out / "det.csv")
        assert header == ["t", "log_det"]
        assert data.shape == (21, 2)
        assert np.max(np.abs(data[:, 1])) <= 1e-8
        assert len(list(out.glob("point_*.json"))) == 21

    def test_euclidean_midpoint_det(self, tmp_path):
        fx = _write(tmp_path, "x.json", np.eye(2))
        fy = _write(tmp_path, "y.json", np.diag([4.0, 0.25]))
        out = tmp_path / "out"
        assert cli.main(["interpolate", "euclidean", fx, fy, "--t-grid", "0.5",
                         "--out", str(out)]) == 0
        _, data = _csv(out / "det.csv")
        assert data[0, 1] == pytest.approx(np.log(25 / 16), rel=1e-11)
        np.testing.assert_allclose(read_matrix(str(out / "point_000.json")).array,
                                   np.diag([2.5, 0.625]), rtol=1e-15)

    def test_riemannian_points(self, tmp_path):
        X, Y = random_spd(3, seed=6), random_spd(3, seed=7)
        fx, fy = _write(tmp_path, "x.json", X), _write(tmp_path, "y.json", Y)
        out = tmp_path / "out"
        cli.main(["interpolate", "riemannian", fx, fy, "--t-grid", "0,0.3,1", "--out", str(out)])
        got = read_matrix(str(out / "point_001.json")).array
        np.testing.assert_allclose(got, geodesic_riemannian(X, Y, 0.3).array, rtol=1e-14)

    def test_star_keeps_union_pattern(self, tmp_path, rng):
        X = random_sparse_spd(60, 0.05, seed=rng)
        Y = random_sparse_spd(60, 0.05, seed=rng)
        fx, fy = _write(tmp_path, "x.mtx", X), _write(tmp_path, "y.mtx", Y)
        out = tmp_path / "out"
        assert cli.main(["interpolate", "star", fx, fy, "--t-grid", "0,0.25,0.5,1",
                         "--out", str(out)]) == 0
        union = X.pattern | Y.pattern
        for idx in range(4):
            P = read_matrix(str(out / f"point_{idx:03d}.mtx"))
            assert isinstance(P, SparseSpd)
            assert P.pattern == union

    def test_bad_grid(self, tmp_path):
        fx = _write(tmp_path, "x.json", np.eye(2))
        assert cli.main(["interpolate", "euclidean", fx, fx, "--t-grid", "1.5",
                         "--out", str(tmp_path / "o")]) == 2

    def test_solver_failure_exit_code(self, tmp_path, monkeypatch):
        def boom(*args, **kwargs):
            raise NonPositiveResult("forced")

        monkeypatch.setattr(cli, "geodesic", boom)
        fx = _write(tmp_path, "x.json", np.eye(2))
        assert cli.main(["interpolate", "star", fx, fx, "--out", str(tmp_path / "o")]) == 3


class TestExpShrinkage:
    def test_constraints_and_medians(self, capsys):
        medians = {}
        for n in (3, 10):
            assert cli.main(["exp-shrinkage", "--n", str(n), "--count", "1000",
                             "--seed", "7"]) == 0
            header, data = _stdout_csv(capsys.readouterr().out)
            assert header == ["pair_id", "t", "log_det_euclid", "log_det_riem", "log_det_star"]
            assert data.shape == (1000 * 21, 5)
            assert np.max(np.abs(data[:, 3])) <= 1e-8
            assert np.min(data[:, 2]) >= -1e-10
            assert np.max(data[:, 4]) <= 1e-10
            mid = data[np.isclose(data[:, 1], 0.5)]
            medians[n] = np.median(mid[:, 4])
        assert medians[3] < 0
        assert medians[10] < medians[3]

    def test_endpoints_are_zero(self, capsys):
        cli.main(["exp-shrinkage", "--n", "5", "--count", "20"])
        _, data = _stdout_csv(capsys.readouterr().out)
        ends = data[(data[:, 1] == 0.0) | (data[:, 1] == 1.0)]
        assert len(ends) == 40
        np.testing.assert_allclose(ends[:, 2:], 0.0, atol=1e-12)

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert cli.main(["exp-shrinkage", "--count", "30", "--seed", "3",
                             "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_count(self):
        assert cli.main(["exp-shrinkage", "--count", "0"]) == 2


class TestExpMidpoint:
    def test_no_violations(self, tmp_path):
        out = tmp_path / "m.csv"
        assert cli.main(["exp-midpoint", "--n", "4", "--out", str(out)]) == 0
        header, data = _csv(out)
        assert header == ["r", "f", "bound", "marker"]
        assert data.shape == (100_001, 4)
        assert np.all(data[:, 1] <= data[:, 2] + 1e-9)
        assert np.all((data[:, 0] > 0) & (data[:, 0] <= 100))

    def test_two_by_two_is_zero(self, capsys):
        cli.main(["exp-midpoint", "--n", "2", "--count", "500"])
        _, data = _stdout_csv(capsys.readouterr().out)
        assert np.all(data[:, 1] == 0.0)

    def test_marker_attains_bound(self, capsys):
        cli.main(["exp-midpoint", "--n", "3", "--count", "10", "--r-max", "4"])
        _, data = _stdout_csv(capsys.readouterr().out)
        marker = data[data[:, 3] == 1]
        assert marker.shape[0] == 1
        r, f, bound, _ = marker[0]
        assert r == 4.0
        assert abs(f - bound) <= 1e-9
        assert bound == pytest.approx(np.log(np.cosh(2.0)) / 4.0, rel=1e-11)

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            cli.main(["exp-midpoint", "--count", "1000", "--seed", "9", "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()


class TestExpSparsity:
    def test_small_run(self, tmp_path):
        out = tmp_path / "sp"
        assert cli.main(["exp-sparsity", "--n", "60", "--density", "0.05", "--seed", "1",
                         "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        same, distinct = rep["same_pattern"], rep["distinct_pattern"]
        assert same["inductive"]["out_of_pattern"] == 0
        assert same["inductive"]["converged"]
        assert same["karcher"]["out_of_pattern"] > 0
        assert distinct["inductive"]["fill_ratio"] <= distinct["union_fill"]
        M = read_matrix(str(out / "same_pattern_inductive.mtx"))
        Y0 = read_matrix(str(out / "same_pattern_input_0.mtx"))
        assert M.pattern == Y0.pattern
        assert len(list(out.glob("*_input_*.mtx"))) == 10

    def test_deterministic(self, tmp_path):
        for name in ("a", "b"):
            cli.main(["exp-sparsity", "--n", "40", "--k", "3", "--density", "0.08",
                      "--out", str(tmp_path / name)])
        for f in (tmp_path / "a").iterdir():
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_no_convergence_exit_code(self, tmp_path, monkeypatch):
        real = cli.means.inductive_mean
        monkeypatch.setattr(cli.means, "inductive_mean",
                            lambda ys, tol: real(ys, tol=tol, max_cycles=1))
        assert cli.main(["exp-sparsity", "--n", "30", "--k", "3", "--density", "0.1",
                         "--out", str(tmp_path / "o")]) == 4


class TestMean:
    def test_inductive_scalar(self, tmp_path):
        fa = _write(tmp_path, "a.json", np.eye(3))
        fb = _write(tmp_path, "b.json", 4 * np.eye(3))
        out = tmp_path / "m.json"
        assert cli.main(["mean", "inductive", fa, fb, "--out", str(out)]) == 0
        np.testing.assert_allclose(read_matrix(str(out)).array, 2 * np.eye(3), rtol=1e-7)
        rep = json.loads((tmp_path / "m.json.report.json").read_text())
        assert rep["converged"] and rep["method"] in ("sequence", "stationary")

    def test_karcher_two(self, tmp_path):
        X, Y = random_spd(4, seed=8), random_spd(4, seed=9)
        fa, fb = _write(tmp_path, "a.json", X), _write(tmp_path, "b.json", Y)
        out, report = tmp_path / "k.json", tmp_path / "r.json"
        assert cli.main(["mean", "karcher", fa, fb, "--out", str(out),
                         "--report", str(report)]) == 0
        np.testing.assert_allclose(read_matrix(str(out)).array,
                                   geodesic_riemannian(X, Y, 0.5).array, rtol=1e-8)
        assert json.loads(report.read_text())["method"] == "karcher"

    def test_arithmetic(self, tmp_path):
        fa = _write(tmp_path, "a.json", np.eye(2))
        fb = _write(tmp_path, "b.json", 3 * np.eye(2))
        out = tmp_path / "m.json"
        assert cli.main(["mean", "arithmetic", fa, fb, "--out", str(out)]) == 0
        np.testing.assert_array_equal(read_matrix(str(out)).array, 2 * np.eye(2))

    def test_sparse_inductive_writes_mtx(self, tmp_path, rng):
        pattern = random_pattern(30, 0.1, rng)
        files = [_write(tmp_path, f"y{j}.mtx", random_sparse_spd(30, pattern=pattern, seed=rng))
                 for j in range(3)]
        out = tmp_path / "m.mtx"
        assert cli.main(["mean", "inductive", *files, "--out", str(out)]) == 0
        M = read_matrix(str(out))
        assert isinstance(M, SparseSpd)
        assert np.array_equal(M.keys, pattern)

    def test_no_convergence(self, tmp_path):
        files = [_write(tmp_path, f"y{j}.json", random_spd(4, seed=j)) for j in range(3)]
        assert cli.main(["mean", "inductive", *files, "--out", str(tmp_path / "m.json"),
                         "--max-cycles", "1"]) == 4

    def test_mixed_kinds(self, tmp_path):
        fa = _write(tmp_path, "a.json", np.eye(3))
        fb = _write(tmp_path, "b.mtx", SparseSpd(sps.identity(3, format="csr")))
        assert cli.main(["mean", "inductive", fa, fb, "--out", str(tmp_path / "m")]) == 2


class TestGen:
    def test_dense_unit_det(self, tmp_path):
        out = tmp_path / "g.json"
        assert cli.main(["gen", "--n", "5", "--unit-det", "--seed", "4", "--out", str(out)]) == 0
        M = read_matrix(str(out)).array
        assert abs(np.linalg.slogdet(M)[1]) <= 1e-12

    def test_sparse(self, tmp_path):
        out = tmp_path / "g.mtx"
        assert cli.main(["gen", "--n", "50", "--sparse", "--density", "0.1",
                         "--out", str(out)]) == 0
        M = read_matrix(str(out))
        assert isinstance(M, SparseSpd) and M.n == 50

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            cli.main(["gen", "--n", "4", "--seed", "11", "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    fx = _write(tmp_path, "x.json", np.eye(2))
    fy = _write(tmp_path, "y.json", np.diag([np.exp(2.0), np.exp(-1.0)]))
    res = subprocess.run([sys.executable, "-m", "spdgeom", "dist", "hilbert", fx, fy],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(3.0, rel=1e-12)


def test_help_shows_seed_default(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["exp-midpoint", "--help"])
    assert exc.value.code == 0
    assert "default: 0" in capsys.readouterr().out
