import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from spi_solve import cli, mmio, oracle
from spi_solve.errors import OracleError
from spi_solve.solver import verify_spi


def run(*argv):
    return cli.main([str(a) for a in argv])


def load(path):
    with open(path) as fh:
        return json.load(fh)


def validate(report):
    jsonschema.validate(report, cli.load_schema(report["schema"]))


def test_generate_round_trip_verifies(tmp_path):
    assert run("generate", "--m", 4, "--n", 3, "--r", 2, "--s", 1, "--seed", 7, "--out", tmp_path) == 0
    A = mmio.read_matrix(tmp_path / "A.mtx")
    assert A.shape == (4, 3)
    assert verify_spi(A, tol=1e-10).passed
    t = mmio.read_vector(tmp_path / "t.mtx")
    np.testing.assert_allclose(mmio.read_vector(tmp_path / "b.mtx"), A @ t, rtol=1e-14)
    sidecar = load(tmp_path / "spec.json")
    validate(sidecar)
    assert sidecar["spec"]["seed"] == 7 and sidecar["rng_id"]


def test_generate_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run("generate", "--m", 12, "--n", 9, "--r", 4, "--s", 3, "--field", "complex",
                   "--seed", 5, "--out", tmp_path / d) == 0
    assert (tmp_path / "a" / "A.mtx").read_bytes() == (tmp_path / "b" / "A.mtx").read_bytes()
    assert (tmp_path / "a" / "b.mtx").read_bytes() == (tmp_path / "b" / "b.mtx").read_bytes()


def test_generate_blocks_and_block_solve(tmp_path):
    gen = tmp_path / "gen"
    assert run("generate", "--block", "3,2,2,1", "--block", "4,5,3,6", "--seed", 1, "--out", gen) == 0
    A = mmio.read_matrix(gen / "A.mtx")
    assert A.shape == (7, 7)
    assert np.all(A[:3, 2:] == 0) and np.all(A[3:, :2] == 0)
    validate(load(gen / "spec.json"))
    assert run("solve", gen / "A.mtx", gen / "b.mtx", "--blocks", gen / "spec.json", "--out", tmp_path / "s") == 0
    rep = load(tmp_path / "s" / "report.json")
    validate(rep)
    np.testing.assert_allclose(rep["block_alpha_sq"], [1.0, 36.0], rtol=1e-12)
    x = mmio.read_vector(tmp_path / "s" / "x.mtx")
    b = mmio.read_vector(gen / "b.mtx")
    assert np.linalg.norm(x - oracle.pinv_solve(A, b)) <= 1e-11 * np.linalg.norm(x)


def test_solve_identity(tmp_path):
    b = np.array([1.0, -2.0, 3.5])
    mmio.write_matrix(tmp_path / "I.mtx", np.eye(3))
    mmio.write_vector(tmp_path / "b.mtx", b)
    assert run("solve", tmp_path / "I.mtx", tmp_path / "b.mtx", "--out", tmp_path / "out") == 0
    np.testing.assert_array_equal(mmio.read_vector(tmp_path / "out" / "x.mtx"), b)
    rep = load(tmp_path / "out" / "report.json")
    validate(rep)
    assert rep["alpha_sq"] == 1.0 and rep["warning"] is None


@pytest.mark.parametrize("extra", [[], ["--inconsistent"]])
def test_solve_generated_pair(tmp_path, extra):
    gen = tmp_path / "gen"
    assert run("generate", "--m", 40, "--n", 30, "--r", 12, "--s", 10, "--field", "complex",
               "--out", gen, *extra) == 0
    assert run("solve", gen / "A.mtx", gen / "b.mtx", "--out", tmp_path / "s") == 0
    rep = load(tmp_path / "s" / "report.json")
    validate(rep)
    assert rep["consistency"] <= 1e-10
    assert rep["alpha_sq"] == pytest.approx(100.0, rel=1e-12)
    A = mmio.read_matrix(gen / "A.mtx")
    b = mmio.read_vector(gen / "b.mtx")
    x = mmio.read_vector(tmp_path / "s" / "x.mtx")
    assert np.linalg.norm(x - oracle.pinv_solve(A, b)) <= 1e-11 * (1 + np.linalg.norm(x))


def test_solve_non_spi_warns(tmp_path):
    mmio.write_matrix(tmp_path / "D.mtx", np.diag([1.0, 2.0]))
    mmio.write_vector(tmp_path / "b.mtx", np.array([1.0, 1.0]))
    assert run("solve", tmp_path / "D.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 0
    rep = load(tmp_path / "o" / "report.json")
    validate(rep)
    assert rep["consistency"] >= 1e-2
    assert rep["warning"]


def test_solve_exit_codes(tmp_path, capsys):
    (tmp_path / "bad.mtx").write_text("%%MatrixMarket matrix array real general\n2 1\n1.0\noops\n")
    mmio.write_vector(tmp_path / "b.mtx", np.ones(2))
    assert run("solve", tmp_path / "bad.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 4
    assert "bad.mtx:4" in capsys.readouterr().err

    mmio.write_matrix(tmp_path / "A.mtx", np.eye(3))
    assert run("solve", tmp_path / "A.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 3
    assert run("solve", tmp_path / "missing.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 5


def test_verify_cli(tmp_path):
    mmio.write_matrix(tmp_path / "I.mtx", np.eye(5))
    assert run("verify", tmp_path / "I.mtx", "--out", tmp_path / "v.json") == 0
    rep = load(tmp_path / "v.json")
    validate(rep)
    assert rep["verdict"] == "pass" and rep["max_probe_deviation"] == 0.0
    mmio.write_matrix(tmp_path / "D.mtx", np.diag([1.0, 2.0]))
    assert run("verify", tmp_path / "D.mtx", "--tol", 0.1, "--out", tmp_path / "d.json") == 1
    assert load(tmp_path / "d.json")["verdict"] == "fail"


def test_verify_inconclusive_exit_code(tmp_path):
    rng = np.random.default_rng(0)
    z = rng.standard_normal(2)
    mmio.write_matrix(tmp_path / "N.mtx", np.array([[z[1], -z[0]]]))
    assert run("verify", tmp_path / "N.mtx", "--probes", 1, "--seed", 0) == 8


def test_bench_smoke(tmp_path):
    assert run("bench", "--sizes", "1x1", "2x2", "--repeats", 5, "--out", tmp_path / "b.json") == 0
    rep = load(tmp_path / "b.json")
    validate(rep)
    rows = rep["ladders"]["custom"]
    assert rows[0]["median_time"] >= 0 and rows[0]["ratio"] is None
    assert rows[1]["ratio"] is not None


def test_repro_tables_small(tmp_path, capsys):
    assert run("repro-tables", "--trials", 1, "--field", "real", "--out", tmp_path / "t.json") == 0
    rep = load(tmp_path / "t.json")
    validate(rep)
    assert len(rep["records"]) == 4
    assert all(r["mean_residual"] <= 1e-12 for r in rep["records"])
    out = capsys.readouterr().out
    assert "1000 x 200" in out and "real matrices" in out


def test_repro_tables_oracle_failure(tmp_path, monkeypatch):
    def fail(*a, **k):
        raise OracleError("no convergence")

    monkeypatch.setattr(oracle, "pinv_solve", fail)
    assert run("repro-tables", "--trials", 1, "--field", "complex", "--out", tmp_path / "t.json") == 6
    rep = load(tmp_path / "t.json")
    validate(rep)
    assert {r["status"] for r in rep["records"]} == {"oracle-failed"}


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        run("repro-tables", "--trials", 0)
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        run("generate", "--block", "1,2", "--out", "x")


def test_generate_contract_error(tmp_path):
    assert run("generate", "--m", 3, "--n", 2, "--r", 5, "--out", tmp_path) == 3


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SPI_SOLVE_THREADS", "0")
    mmio.write_matrix(tmp_path / "I.mtx", np.eye(2))
    mmio.write_vector(tmp_path / "b.mtx", np.ones(2))
    assert run("solve", tmp_path / "I.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 0
    monkeypatch.setenv("SPI_SOLVE_THREADS", "bogus")
    assert run("solve", tmp_path / "I.mtx", tmp_path / "b.mtx", "--out", tmp_path / "o") == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spi_solve", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "spi-solve" in proc.stdout
