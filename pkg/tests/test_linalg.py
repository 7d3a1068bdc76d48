import numpy as np
import pytest

from polyres.linalg import (
    PRIMES,
    EigenConvergenceError,
    SingularPivotError,
    eig,
    exact_rank,
    gep_eigenvalues,
    gj_eliminate,
    pep_to_gep,
    schur_complement,
)
from polyres.oracle import univariate_roots

P = PRIMES[0]


class TestExactRank:
    def test_identity(self):
        assert exact_rank(np.eye(3, dtype=np.int64), 2147483629) == 3

    def test_rank_one_outer(self):
        v = np.arange(1, 5, dtype=np.int64)
        assert exact_rank(np.outer(v, v), P) == 1

    def test_permutation_shuffle_oracle(self, rng):
        m = rng.integers(0, P, size=(10, 7))
        r = exact_rank(m, P)
        perm_rows = rng.permutation(10)
        perm_cols = rng.permutation(7)
        assert exact_rank(m[perm_rows][:, perm_cols], P) == r

    def test_transpose_invariant(self, rng):
        m = rng.integers(0, P, size=(6, 9))
        assert exact_rank(m, P) == exact_rank(m.T, P)

    def test_negative_entries_reduced(self):
        m = np.array([[-1, 1], [P - 1, P + 1]], dtype=np.int64)
        assert exact_rank(m, P) == 1


class TestGJEliminate:
    def test_invertible(self):
        res = gj_eliminate(np.array([[2.0, 4.0], [1.0, 3.0]]))
        assert np.allclose(res.matrix, np.eye(2))
        assert res.pivot_cols == (0, 1)

    def test_rank_deficient(self):
        res = gj_eliminate(np.array([[1.0, 2.0], [2.0, 4.0]]))
        assert np.allclose(res.matrix, [[1.0, 2.0], [0.0, 0.0]])
        assert res.pivot_cols == (0,)

    def test_reconstruction(self, rng):
        m = rng.standard_normal((6, 9))
        res = gj_eliminate(m)
        assert len(res.pivot_cols) == 6
        # RREF rows span the same row space: every original row reconstructs
        coeffs = m[:, list(res.pivot_cols)]
        assert np.allclose(coeffs @ res.matrix[:6], m, atol=1e-10)

    def test_field_rref_rank_matches_exact_rank(self, rng):
        m = rng.integers(0, P, size=(8, 5))
        res = gj_eliminate(m, p=P)
        assert len(res.pivot_cols) == exact_rank(m, P)


class TestSchurComplement:
    def test_worked_univariate(self):
        m = np.array([[-2.0, 1.0], [0.0, 1.0]])
        assert np.allclose(schur_complement(m, (1, 1)), [[2.0]])

    def test_zero_a22_returns_a21(self, rng):
        a11 = rng.standard_normal((2, 3))
        a12 = rng.standard_normal((2, 2))
        a21 = rng.standard_normal((4, 3))
        m = np.block([[a11, a12], [a21, np.zeros((4, 2))]])
        assert np.allclose(schur_complement(m, (2, 3)), a21)

    def test_zero_pivot_raises(self):
        m = np.array([[1.0, 0.0], [2.0, 3.0]])
        with pytest.raises(SingularPivotError):
            schur_complement(m, (1, 1))

    def test_determinant_identity(self, rng):
        # det(M) = +/- det(A12) det(X); the sign is the parity of the block
        # column swap that moves the pivot block onto the diagonal
        for _ in range(10):
            c1 = int(rng.integers(1, 7))
            c2 = int(rng.integers(1, 7))
            m = rng.standard_normal((c1 + c2, c1 + c2))
            try:
                x = schur_complement(m, (c2, c1))
            except SingularPivotError:
                continue
            det_m = np.linalg.det(m)
            det_prod = np.linalg.det(m[:c2, c1:]) * np.linalg.det(x)
            sign = (-1.0) ** (c1 * c2)
            assert det_m == pytest.approx(sign * det_prod, rel=1e-6)


class TestEig:
    def test_diagonal(self):
        res = eig(np.diag([2.0, 3.0]))
        assert sorted(res.values.real) == pytest.approx([2.0, 3.0])

    def test_companion_quadratic(self):
        res = eig(np.array([[0.0, 1.0], [-6.0, 5.0]]))
        assert sorted(res.values.real) == pytest.approx([2.0, 3.0], abs=1e-12)

    def test_rotation(self):
        res = eig(np.array([[0.0, -1.0], [1.0, 0.0]]))
        assert sorted(res.values.imag) == pytest.approx([-1.0, 1.0], abs=1e-12)

    def test_residual_invariant_random(self, rng):
        for _ in range(10):
            a = rng.standard_normal((12, 12))
            res = eig(a)
            fro = np.linalg.norm(a)
            for lam, v in res.pairs():
                assert np.linalg.norm(a @ v - lam * v) <= 1e-8 * fro
                assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_companion_matches_oracle(self, rng):
        from helpers import pair_max_dev

        for k in range(2, 9):
            coeffs = rng.standard_normal(k + 1)
            coeffs[-1] = 1.0
            comp = np.zeros((k, k))
            comp[1:, :-1] = np.eye(k - 1)
            comp[:, -1] = -coeffs[:-1]
            assert pair_max_dev(eig(comp).values, univariate_roots(coeffs)) < 1e-8

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_nonconvergence_error_names_index(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(EigenConvergenceError) as exc:
            eig(a, max_sweeps_per_eig=0)
        assert exc.value.index >= 0


class TestPepToGep:
    def test_degree_one(self, rng):
        m0 = rng.standard_normal((3, 3))
        m1 = rng.standard_normal((3, 3)) + 4 * np.eye(3)
        a, b = pep_to_gep([m0, m1])
        got = np.sort_complex(gep_eigenvalues(a, b))
        want = np.sort_complex(eig(-np.linalg.solve(m1, m0)).values)
        assert np.allclose(got, want, atol=1e-8)

    def test_scalar_quadratic(self):
        a, b = pep_to_gep([np.array([[6.0]]), np.array([[-5.0]]), np.array([[1.0]])])
        got = sorted(gep_eigenvalues(a, b).real)
        assert got == pytest.approx([2.0, 3.0], abs=1e-10)

    def test_planted_singular_pencil(self, rng):
        # build M0 + M1 + M2 singular so x = 1 is a generalized eigenvalue
        m1 = rng.standard_normal((2, 2))
        m2 = rng.standard_normal((2, 2)) + 3 * np.eye(2)
        u, v = rng.standard_normal(2), rng.standard_normal(2)
        m0 = np.outer(u, v) - m1 - m2
        a, b = pep_to_gep([m0, m1, m2])
        vals = gep_eigenvalues(a, b)
        assert np.min(np.abs(vals - 1.0)) < 1e-8
        # determinant sweep confirms the planted root
        det_at_one = np.linalg.det(m0 + m1 + m2)
        assert abs(det_at_one) < 1e-12
