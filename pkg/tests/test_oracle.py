import numpy as np
import pytest

from spi_solve import oracle
from spi_solve.errors import ContractError, OracleError
from spi_solve.generator import GeneratorSpec, generate_spi

from conftest import random_matrix, random_vector


def test_svd_examples():
    np.testing.assert_allclose(oracle.svd(np.diag([3.0, 1.0])).sigma, [3, 1])
    np.testing.assert_array_equal(oracle.svd(np.zeros((3, 2))).sigma, [0, 0])


def test_svd_generated():
    A = generate_spi(GeneratorSpec(20, 10, 4, 5.0, seed=1))
    sigma = oracle.svd(A).sigma
    np.testing.assert_allclose(sigma[:4], 5.0, atol=1e-10)
    assert np.all(sigma[4:] <= 1e-10)


def test_svd_result_invariants(field):
    rng = np.random.default_rng(0)
    for m, n in [(7, 4), (4, 7), (30, 30)]:
        A = random_matrix(rng, m, n, field)
        res = oracle.svd(A)
        k = min(m, n)
        assert np.linalg.norm(res.U.conj().T @ res.U - np.eye(k)) <= 1e-12 * np.sqrt(k)
        assert np.linalg.norm(res.V.conj().T @ res.V - np.eye(k)) <= 1e-12 * np.sqrt(k)
        assert np.linalg.norm(A - (res.U * res.sigma) @ res.V.conj().T) <= 1e-12 * np.linalg.norm(A)
        assert np.all(np.diff(res.sigma) <= 0) and np.all(res.sigma >= 0)


def test_pinv_solve_examples():
    np.testing.assert_allclose(oracle.pinv_solve(np.eye(2), np.array([1.0, 2])), [1, 2])
    np.testing.assert_allclose(oracle.pinv_solve(np.array([[1.0], [1.0]]), np.array([1.0, 3])), [2.0])


def test_pinv_solve_min_norm():
    # x1 + x2 = 2 has minimum-norm solution (1, 1)
    np.testing.assert_allclose(oracle.pinv_solve(np.array([[1.0, 1.0]]), np.array([2.0])), [1, 1])


def test_pseudoinverse_axioms(field):
    rng = np.random.default_rng(1)
    for trial in range(20):
        m, n = (int(v) for v in rng.integers(1, 61, 2))
        r = int(rng.integers(1, min(m, n) + 1))
        A = random_matrix(rng, m, r, field) @ random_matrix(rng, r, n, field)
        P = oracle.pinv(A)
        assert np.linalg.norm(A @ P @ A - A) <= 1e-11 * np.linalg.norm(A)
        assert np.linalg.norm(P @ A @ P - P) <= 1e-11 * np.linalg.norm(P)
        assert np.linalg.norm(A @ P - (A @ P).conj().T) <= 1e-11 * np.linalg.norm(A @ P)
        assert np.linalg.norm(P @ A - (P @ A).conj().T) <= 1e-11 * np.linalg.norm(P @ A)


def test_residual_optimality(field):
    rng = np.random.default_rng(2)
    for _ in range(20):
        m, n = (int(v) for v in rng.integers(1, 30, 2))
        A = random_matrix(rng, m, n, field)
        b = random_vector(rng, m, field)
        x = oracle.pinv_solve(A, b)
        base = np.linalg.norm(A @ x - b)
        for _ in range(5):
            delta = 1e-3 * random_vector(rng, n, field)
            assert np.linalg.norm(A @ (x + delta) - b) >= base - 1e-12


def test_range_complement(field):
    rng = np.random.default_rng(3)
    A = generate_spi(GeneratorSpec(15, 8, 3, 2.0, field, 4))
    w = oracle.range_complement(A, random_vector(rng, 15, field))
    assert np.linalg.norm(A.conj().T @ w) <= 1e-13 * np.linalg.norm(w)
    assert np.linalg.norm(w) > 0.1


def test_oracle_errors(monkeypatch):
    with pytest.raises(ContractError):
        oracle.pinv_solve(np.eye(2), np.ones(3))

    def broken(*a, **k):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(np.linalg, "svd", broken)
    with pytest.raises(OracleError):
        oracle.svd(np.eye(2))
