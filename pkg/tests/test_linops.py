import numpy as np
import pytest

from traceshift import linops
from traceshift.errors import (
    ClassViolation,
    DimensionMismatch,
    InvalidP,
    NegativeEigenvalue,
    NotNormal,
)

from conftest import selfadjoint, unitary


class TestValidate:
    def test_diagonal_unimodular_is_unitary(self):
        op = linops.validate(np.diag([1.0, 1j]), "unitary", 1e-12)
        assert op.dim == 2

    def test_nilpotent_shift_is_contraction(self):
        linops.validate([[0, 1], [0, 0]], "contraction", 1e-12)

    def test_nonunimodular_diagonal_rejected(self):
        with pytest.raises(ClassViolation) as err:
            linops.validate(np.diag([2.0, 0.0]), "unitary", 1e-12)
        assert err.value.defect > 1.0

    def test_rectangular_rejected(self):
        with pytest.raises(DimensionMismatch):
            linops.validate(np.zeros((2, 3)), "unitary", 1e-12)

    def test_selfadjoint_accepts_hermitian(self):
        m = np.array([[1.0, 2 + 1j], [2 - 1j, -0.5]])
        linops.validate(m, "selfadjoint", 1e-12)


class TestSpectralDecompose:
    def test_diagonal(self):
        dec = linops.spectral_decompose(np.diag([1.0, 1j]))
        vals = sorted(dec.eigenvalues, key=lambda z: z.real)
        assert np.allclose(vals, [1j, 1.0])
        for p in dec.projections:
            assert np.allclose(p @ p, p)
            assert np.allclose(p, p.conj().T)

    def test_identity_clusters_to_one_projection(self):
        dec = linops.spectral_decompose(np.eye(3))
        assert len(dec.eigenvalues) == 1
        assert np.allclose(dec.projections[0], np.eye(3))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_unitary_reconstruction(self, seed):
        u = unitary(seed, 6).matrix
        dec = linops.spectral_decompose(u)
        rebuilt = sum(
            lam * p for lam, p in zip(dec.eigenvalues, dec.projections)
        )
        assert np.max(np.abs(rebuilt - u)) <= 1e-10

    @pytest.mark.parametrize("seed", range(5))
    def test_projection_invariants_random_normal(self, seed):
        u = unitary(seed + 50, 5).matrix
        dec = linops.spectral_decompose(u, cluster_tol=1e-8)
        total = sum(dec.projections)
        assert np.max(np.abs(total - np.eye(5))) <= 1e-12
        for i, p in enumerate(dec.projections):
            for j, q in enumerate(dec.projections):
                expected = p if i == j else 0.0
                assert np.max(np.abs(p @ q - expected)) <= 1e-12

    def test_nonnormal_rejected(self):
        with pytest.raises(NotNormal):
            linops.spectral_decompose([[0, 1], [0, 0]])

    def test_chained_clusters_are_ambiguous(self):
        from traceshift.errors import ClusterAmbiguity

        tol = 1e-3
        lam = np.arange(15) * 0.9 * tol
        with pytest.raises(ClusterAmbiguity):
            linops.spectral_decompose(np.diag(lam), cluster_tol=tol)


class TestMatrixExpI:
    def test_diagonal_pi(self):
        a = linops.validate(np.diag([np.pi, 0.0]), "selfadjoint", 1e-12)
        u = linops.matrix_exp_i(a, 1.0)
        assert np.allclose(u.matrix, np.diag([-1.0, 1.0]))

    def test_s_zero_gives_identity(self):
        a = selfadjoint(3, 4)
        u = linops.matrix_exp_i(a, 0.0)
        assert np.allclose(u.matrix, np.eye(4))

    @pytest.mark.parametrize("seed", range(3))
    def test_group_law(self, seed):
        a = selfadjoint(seed, 4, norm=1.3)
        u = linops.matrix_exp_i(a, 0.4).matrix @ linops.matrix_exp_i(a, 0.35).matrix
        v = linops.matrix_exp_i(a, 0.75).matrix
        assert np.max(np.abs(u - v)) <= 1e-10

    @pytest.mark.parametrize("p", [1, 2, 3, np.inf])
    @pytest.mark.parametrize("seed", range(3))
    def test_exponential_lipschitz_bound(self, seed, p):
        # ||e^{iA} - e^{iB}||_p <= e^{max(||A||, ||B||)} ||A - B||_p
        a = selfadjoint(seed, 4, norm=1.2).matrix
        b = selfadjoint(seed + 17, 4, norm=0.8).matrix
        lhs = linops.schatten_norm(
            linops.matrix_exp_i(a).matrix - linops.matrix_exp_i(b).matrix, p
        )
        bound = np.exp(
            max(linops.operator_norm(a), linops.operator_norm(b))
        ) * linops.schatten_norm(a - b, p)
        assert lhs <= bound * (1 + 1e-12)


class TestSchattenNorm:
    def test_frobenius(self):
        assert linops.schatten_norm(np.diag([3.0, 4.0]), 2) == pytest.approx(5.0)

    def test_trace_norm(self):
        assert linops.schatten_norm(np.diag([3.0, 4.0]), 1) == pytest.approx(7.0)

    def test_operator_norm(self):
        m = np.array([[0, 2.0], [0, 0]])
        assert linops.schatten_norm(m, np.inf) == pytest.approx(2.0)

    def test_invalid_p(self):
        with pytest.raises(InvalidP):
            linops.schatten_norm(np.eye(2), 0.5)

    @pytest.mark.parametrize("seed", range(4))
    def test_monotone_decreasing_in_p(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        ps = [1, 1.5, 2, 3, 7, np.inf]
        norms = [linops.schatten_norm(m, p) for p in ps]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


class TestDefectPair:
    def test_zero_contraction(self):
        dt, dts = linops.defect_pair(np.array([[0.0]]))
        assert dt[0, 0] == pytest.approx(1.0)
        assert dts[0, 0] == pytest.approx(1.0)

    def test_unitary_has_no_defect(self):
        u = unitary(5, 4)
        dt, dts = linops.defect_pair(u.matrix, clamp_tol=1e-9)
        assert np.max(np.abs(dt)) <= 1e-6
        assert np.max(np.abs(dts)) <= 1e-6

    def test_shift_defects(self):
        t = np.array([[0.0, 1.0], [0.0, 0.0]])
        dt, dts = linops.defect_pair(t)
        assert np.allclose(dt, np.diag([1.0, 0.0]))
        assert np.allclose(dts, np.diag([0.0, 1.0]))

    def test_expansion_rejected(self):
        with pytest.raises(NegativeEigenvalue):
            linops.defect_pair(np.diag([1.5, 0.0]))


class TestMatrixJson:
    def test_roundtrip(self, tmp_path, rng):
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        path = tmp_path / "m.json"
        linops.save_matrix(path, m)
        back = linops.load_matrix(path)
        assert np.array_equal(back, m)

    def test_schema_shape(self):
        obj = linops.matrix_to_json(np.eye(2))
        assert obj["dim"] == 2
        assert obj["entries"][0][0] == [1.0, 0.0]
