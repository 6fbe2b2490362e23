import numpy as np
import pytest

from rational_kmatrix.classify import (
    INNER,
    INNER_EQUIVALENT,
    NON_QC,
    OUTER,
    classify_kmatrix,
    extract_involution,
    find_intertwiner,
    solvable_structure,
    structured_subalgebra,
    symmetric_pair_check,
    twist_class,
)
from rational_kmatrix.errors import CbYBEViolationError, NotQuasiClassicalError, OutOfDomainError, UnsupportedRepPairError
from rational_kmatrix.kmatrix import (
    constant_twisted_k,
    diagonal_k,
    nilpotent_k,
    residual_symmetry,
    signature_matrix,
    skew_form,
)
from rational_kmatrix.lie import SubalgebraBasis, build_sl, centralizer, contragredient
from rational_kmatrix.linalg import max_principal_angle

J21 = signature_matrix(2, 1)


def labels(alg, *names):
    return np.array([np.eye(alg.dim)[alg.basis_labels.index(s)] for s in names], dtype=complex)


def quasi_classical_cases():
    cases = []
    for n in range(2, 6):
        for p in range(1, n):
            cases.append((f"J({p},{n - p})", signature_matrix(p, n - p), n, False, p * p + (n - p) ** 2 - 1))
    for n in (2, 3, 4):
        cases.append((f"I sl({n})", np.eye(n), n, True, n * (n - 1) // 2))
    for n in (2, 4):
        cases.append((f"skew sl({n})", skew_form(n), n, True, n * (n + 1) // 2))
    return cases


CASES = quasi_classical_cases()


class TestExtractInvolution:
    def test_aiii(self, sl3):
        _, rho = sl3
        inv = extract_involution(J21, rho, rho)
        assert inv.square_residual() <= 1e-12
        assert (inv.plus_space.dim, inv.minus_space.dim) == (4, 4)

    def test_identity(self, sl3):
        _, rho = sl3
        inv = extract_involution(np.eye(3), rho, rho)
        assert np.allclose(inv.M, np.eye(8))
        assert (inv.plus_space.dim, inv.minus_space.dim) == (8, 0)

    def test_sl2_diagonal(self):
        alg, rho = build_sl(2)
        inv = extract_involution(np.diag([1, -1.0]), rho, rho)
        assert max_principal_angle(inv.plus_space.columns(), labels(alg, "H1").T) <= 1e-12
        assert max_principal_angle(inv.minus_space.columns(), labels(alg, "E12", "E21").T) <= 1e-12

    def test_singular(self, sl3):
        _, rho = sl3
        with pytest.raises(NotQuasiClassicalError):
            extract_involution(np.diag([1, 0, 0.0]), rho, rho)

    def test_non_solution(self, sl3):
        _, rho = sl3
        with pytest.raises(CbYBEViolationError):
            extract_involution(np.array([[1, 2, 0], [0, 1, 0], [0, 0, 1.0]]), rho, rho)

    @pytest.mark.parametrize("name,kappa,n,twisted,dim", CASES, ids=[c[0] for c in CASES])
    def test_matrix_identities(self, name, kappa, n, twisted, dim):
        _, rho = build_sl(n)
        rho2 = contragredient(rho) if twisted else rho
        inv = extract_involution(kappa, rho, rho2)
        assert inv.N_defect <= 1e-10
        assert inv.square_residual() <= 1e-10
        assert inv.automorphism_residual() <= 1e-10
        assert inv.killing_residual() <= 1e-10
        assert inv.plus_space.dim == dim
        assert inv.plus_space.dim + inv.minus_space.dim == rho.algebra.dim
        hf, ff = inv.grading_residuals()
        assert max(hf, ff) <= 1e-11


class TestSymmetricPair:
    def test_pipeline_agreement(self, sl3):
        _, rho = sl3
        h = residual_symmetry(diagonal_k(3, 2, 1, 0.7)).h
        rep = symmetric_pair_check(extract_involution(J21, rho, rho), h)
        assert rep.passed and rep.distance <= 1e-10

    def test_cartan_fails(self, sl3):
        alg, rho = sl3
        cartan = SubalgebraBasis(alg, labels(alg, "H1", "H2"))
        rep = symmetric_pair_check(extract_involution(J21, rho, rho), cartan)
        assert not rep.passed and rep.distance > 0.5

    def test_self(self, sl3):
        _, rho = sl3
        inv = extract_involution(J21, rho, rho)
        assert symmetric_pair_check(inv, inv.plus_space).distance <= 1e-12


class TestTwistClass:
    def test_inner(self, sl3):
        assert twist_class(J21, sl3[1]) == INNER

    def test_outer(self, sl3):
        rho = sl3[1]
        assert twist_class(np.eye(3), rho, contragredient(rho)) == OUTER

    def test_sl2_equivalence(self):
        _, rho = build_sl(2)
        assert twist_class(skew_form(2), rho, contragredient(rho)) == INNER_EQUIVALENT

    def test_intertwiner_for_inner(self, sl3):
        _, rho = sl3
        inv = extract_involution(J21, rho, rho)
        V = find_intertwiner(rho, inv.M)
        assert V is not None
        for x in np.eye(8):
            assert np.allclose(V @ rho.matrix(inv.apply(x)), rho.matrix(x) @ V)

    def test_non_quasi_classical(self, sl3):
        assert twist_class(np.diag([0, 1, 0.0]), sl3[1]) == NON_QC

    def test_unsupported_pair(self, sl3):
        from rational_kmatrix.lie import Representation

        alg, rho = sl3
        other = Representation(alg, 2 * rho.Y)
        with pytest.raises(UnsupportedRepPairError):
            twist_class(np.eye(3), rho, other)


class TestSolvableStructure:
    def test_n4_k1(self):
        st = solvable_structure(4, 1)
        assert [st.dims[k] for k in ("h2", "hD", "h+", "h-", "hr")] == [1, 1, 2, 2, 3]
        assert st.total_dim == 9 == st.centralizer_dim
        assert residual_symmetry(nilpotent_k(4, 1)).h.dim == 9

    def test_n5_k2_counts(self):
        st = solvable_structure(5, 2)
        assert st.dims["hr"] == 0 and st.total_dim == 10

    def test_n5_k2_centralizer_is_larger(self):
        # the structured bases miss the traceless gl(k) ⊗ 1_2 directions
        # (e.g. E13 + E24), so the brute-force centralizer has dimension 12
        st = solvable_structure(5, 2)
        _, rho = build_sl(5)
        alg = rho.algebra
        h = centralizer(rho, nilpotent_k(5, 2).kappa)
        assert st.centralizer_dim == h.dim == 12
        x = labels(alg, "E13")[0] + labels(alg, "E24")[0]
        assert h.contains(x) <= 1e-12
        assert structured_subalgebra(5, 2).contains(x) > 0.5

    @pytest.mark.parametrize("n,k", [(4, 1), (5, 1), (5, 2)])
    def test_bracket_table_exact(self, n, k):
        st = solvable_structure(n, k)
        assert st.relations_hold, [r for r, ok in st.relations.items() if not ok]
        hs_dim = k * k + k + 2 * k * (n - 2 * k)
        assert st.derived_dims == (hs_dim, hs_dim - k, k * k, 0)

    @pytest.mark.parametrize("n,k", [(4, 1), (5, 1), (5, 2)])
    def test_structured_bases_are_symmetries(self, n, k):
        h = centralizer(build_sl(n)[1], nilpotent_k(n, k).kappa)
        s = structured_subalgebra(n, k)
        assert h.contains(s.vectors.T.T) <= 1e-12

    @pytest.mark.parametrize("n,k", [(2, 1), (4, 2)])
    def test_out_of_domain(self, n, k):
        with pytest.raises(OutOfDomainError, match="n - 2k"):
            solvable_structure(n, k)


class TestClassifyKmatrix:
    def test_aiii(self):
        rep = classify_kmatrix(diagonal_k(3, 2, 1, 0.7), samples=20)
        assert rep.quasi_classical and rep.twist_class == INNER
        assert rep.residual_algebra.tag == "reductive" and rep.residual_algebra.dim == 4
        assert rep.symmetric_pair.passed and rep.passed

    def test_nilpotent(self):
        rep = classify_kmatrix(nilpotent_k(4, 1), samples=20)
        a = rep.residual_algebra
        assert not rep.quasi_classical and rep.twist_class == NON_QC
        assert (a.tag, a.solvable_dim, a.reductive_dim) == ("semidirect", 6, 3)
        assert rep.structure.total_dim == 9 and rep.passed

    def test_twisted_so3(self):
        rep = classify_kmatrix(constant_twisted_k(3, np.eye(3)), samples=20)
        assert rep.twist_class == OUTER
        assert rep.residual_algebra.tag == "semisimple" and rep.residual_algebra.dim == 3
        assert rep.symmetric_pair.passed

    @pytest.mark.parametrize("name,kappa,n,twisted,dim", [c for c in CASES if c[2] <= 4], ids=[c[0] for c in CASES if c[2] <= 4])
    def test_fixed_algebra_matches_residual_symmetry(self, name, kappa, n, twisted, dim):
        K = constant_twisted_k(n, kappa) if twisted else diagonal_k(n, *_split(kappa), 0.7)
        rep = classify_kmatrix(K, samples=10)
        assert rep.involution.plus_space.dim == dim
        assert rep.symmetric_pair.distance <= 1e-9


def _split(J):
    p = int(np.sum(np.diag(J).real > 0))
    return p, J.shape[0] - p
