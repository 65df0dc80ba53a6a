import numpy as np
import pytest

from qtypicality.linalg import (
    MAX_DENSE_DIM,
    NonHermitianError,
    composite_index,
    eigh,
    frobenius_norm_sq,
    hermiticity_defect,
    kron,
    partial_trace_env,
)


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


class TestEigh:
    def test_identity(self):
        w, v = eigh(np.eye(3))
        assert np.allclose(w, [1.0, 1.0, 1.0])
        assert np.allclose(v.conj().T @ v, np.eye(3), atol=1e-12)

    def test_diagonal_sorted_ascending(self):
        w, v = eigh(np.diag([2.0, -1.0]))
        assert np.allclose(w, [-1.0, 2.0])

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        a = random_hermitian(6, rng)
        w, v = eigh(a)
        scale = np.linalg.norm(a)
        assert np.linalg.norm((v * w) @ v.conj().T - a) <= 1e-10 * scale
        assert np.linalg.norm(v.conj().T @ v - np.eye(6)) <= 1e-10
        assert w.dtype.kind == "f"
        assert np.all(np.diff(w) >= 0)

    def test_deterministic_with_phase_fixing(self):
        rng = np.random.default_rng(11)
        a = random_hermitian(5, rng)
        e1 = eigh(a)
        e2 = eigh(a.copy())
        assert np.array_equal(e1.eigenvalues, e2.eigenvalues)
        assert np.array_equal(e1.eigenvectors, e2.eigenvectors)
        # dominant component of each column is real positive
        idx = np.argmax(np.abs(e1.eigenvectors), axis=0)
        dom = e1.eigenvectors[idx, np.arange(5)]
        assert np.all(np.abs(dom.imag) <= 1e-12)
        assert np.all(dom.real > 0)

    def test_rejects_non_hermitian_with_diagnostic(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(NonHermitianError, match="defect"):
            eigh(a)
        assert hermiticity_defect(a) == pytest.approx(np.sqrt(2.0))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            eigh(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_diagonal(self):
        out = kron(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
        assert np.allclose(out, np.diag([3.0, 4.0, 6.0, 8.0]))

    def test_left_factor_is_slow_index(self):
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.eye(3)
        out = kron(a, b)
        # element (0*3+c, 1*3+d) = a[0,1] * b[c,d]
        assert out[1, 4] == 1.0
        assert out[4, 1] == 0.0

    def test_mixed_product_identity(self):
        rng = np.random.default_rng(3)
        a, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2))
        b, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2))
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))

    def test_associativity(self):
        rng = np.random.default_rng(4)
        mats = [rng.normal(size=(2, 2)) for _ in range(3)]
        lhs = kron(kron(mats[0], mats[1]), mats[2])
        rhs = kron(mats[0], kron(mats[1], mats[2]))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_dimension_cap(self):
        big = np.eye(MAX_DENSE_DIM // 2 + 1)
        with pytest.raises(ValueError, match="cap"):
            kron(big, np.eye(2))


class TestPartialTraceEnv:
    def test_product_state(self):
        rng = np.random.default_rng(5)
        rho_s = random_hermitian(2, rng)
        rho_e = random_hermitian(3, rng)
        rho_e /= np.trace(rho_e)
        out = partial_trace_env(kron(rho_s, rho_e), 2, 3)
        assert np.allclose(out, rho_s, atol=1e-12)

    def test_maximally_entangled(self):
        psi = np.zeros(4, dtype=complex)
        psi[composite_index(0, 0, 2)] = 1 / np.sqrt(2)
        psi[composite_index(1, 1, 2)] = 1 / np.sqrt(2)
        out = partial_trace_env(np.outer(psi, psi.conj()), 2, 2)
        assert np.allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_matches_coefficient_matrix(self):
        rng = np.random.default_rng(6)
        psi = rng.normal(size=12) + 1j * rng.normal(size=12)
        psi /= np.linalg.norm(psi)
        gamma = psi.reshape(3, 4)
        out = partial_trace_env(np.outer(psi, psi.conj()), 3, 4)
        assert np.max(np.abs(out - gamma @ gamma.conj().T)) <= 1e-12

    def test_trace_preserved_and_hermitian(self):
        rng = np.random.default_rng(8)
        rho = random_hermitian(12, rng)
        out = partial_trace_env(rho, 3, 4)
        assert abs(np.trace(out) - np.trace(rho)) <= 1e-12 * max(1.0, abs(np.trace(rho)))
        assert np.allclose(out, out.conj().T, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        r1, r2 = random_hermitian(6, rng), random_hermitian(6, rng)
        alpha, beta = 0.7, -1.3
        lhs = partial_trace_env(alpha * r1 + beta * r2, 2, 3)
        rhs = alpha * partial_trace_env(r1, 2, 3) + beta * partial_trace_env(r2, 2, 3)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dim"):
            partial_trace_env(np.eye(6), 2, 2)


class TestFrobeniusNormSq:
    def test_zero_and_identity(self):
        assert frobenius_norm_sq(np.zeros((3, 3))) == 0.0
        assert frobenius_norm_sq(np.eye(5)) == 5.0

    def test_definitional(self):
        rng = np.random.default_rng(10)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert frobenius_norm_sq(a) == pytest.approx(np.trace(a @ a.conj().T).real, abs=1e-12)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        u = random_unitary(5, rng)
        assert frobenius_norm_sq(u @ a @ u.conj().T) == pytest.approx(
            frobenius_norm_sq(a), rel=1e-10
        )


def test_composite_index_convention():
    assert composite_index(0, 0, 4) == 0
    assert composite_index(1, 0, 4) == 4
    assert composite_index(2, 3, 4) == 11
