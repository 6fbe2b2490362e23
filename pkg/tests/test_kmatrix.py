import numpy as np
import pytest

from rational_kmatrix.errors import (
    HomomorphismError,
    InvalidDimensionError,
    InvalidSeedError,
    NotQuasiClassicalError,
    PoleError,
)
from rational_kmatrix.kmatrix import (
    KMatrix,
    aiii_kappa,
    block_stack,
    bybe_defect,
    bybe_residual,
    bybe_x_series,
    casimir_set,
    cbybe_defect,
    cbybe_residual,
    center_element,
    classical_perturbative_solve,
    constant_cbybe_residuals,
    constant_kappa,
    constant_twisted_k,
    construct_k1,
    diagonal_k,
    fixed_algebra,
    irreducibility_check,
    k1_structure_check,
    max_bybe_residual,
    max_cbybe_residual,
    nilpotent_k,
    normalized,
    perturbative_solve,
    r_set,
    r_set_for,
    residual_symmetry,
    skew_form,
    symmetry_residual,
    tensor_with_identity,
    unitarity_residual,
)
from rational_kmatrix.lie import build_sl, centralizer, classify_subalgebra
from rational_kmatrix.linalg import max_principal_angle, spectral_pairs
from rational_kmatrix.series import RationalMatrixFn, expand, series_inverse

J21 = np.diag([1, 1, -1.0]).astype(complex)


def label(alg, s):
    return np.eye(alg.dim)[alg.basis_labels.index(s)]


def one_sided_diag(n, p, q, xi, delta):
    """diag((1 + xi/u) I_p, (-1 + (xi + delta)/u) I_q)."""
    J = np.diag([1.0] * p + [-1.0] * q)
    shift = np.diag([xi] * p + [xi + delta] * q)
    fn = RationalMatrixFn([shift, J], [0, 1], "one-sided")
    return diagonal_k(n, p, q, xi).with_fn(fn)


class TestFamilies:
    def test_diagonal_fixed_instance(self):
        K = diagonal_k(3, 2, 1, 0.7)
        assert bybe_residual(r_set(3), K, 1.1, 0.4) <= 1e-11

    def test_diagonal_random_points(self):
        assert max_bybe_residual(diagonal_k(3, 2, 1, 0.7), samples=50) <= 1e-10

    def test_diagonal_constant(self):
        K = diagonal_k(3, 2, 1, 0)
        assert np.allclose(K(0.37), J21)
        assert max_bybe_residual(K, samples=20) <= 1e-12

    def test_signature_squares_to_one(self):
        kap = diagonal_k(4, 2, 2, 0.3).kappa
        assert np.array_equal(kap @ kap, np.eye(4))

    def test_diagonal_bad_split(self):
        with pytest.raises(InvalidDimensionError):
            diagonal_k(3, 2, 2, 0.1)

    @pytest.mark.parametrize("n,kappa", [(2, np.eye(2)), (2, skew_form(2))], ids=["sym", "skew"])
    def test_twisted_constant(self, n, kappa):
        K = constant_twisted_k(n, kappa)
        assert K.twisted
        assert max_bybe_residual(K, samples=20) <= 1e-10

    def test_twisted_validation(self):
        with pytest.raises(InvalidDimensionError):
            constant_twisted_k(3, np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0.0]]))
        with pytest.raises(NotQuasiClassicalError):
            constant_twisted_k(2, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            constant_twisted_k(2, np.array([[1, 2], [0, 1.0]]))

    @pytest.mark.parametrize("u", [0.3, 1.7, 5j])
    def test_nilpotent_unitarity(self, u):
        assert unitarity_residual(nilpotent_k(2, 1), u, -(u**-2)) <= 1e-13

    def test_nilpotent_bybe(self):
        assert max_bybe_residual(nilpotent_k(4, 1), samples=50) <= 1e-10

    def test_nilpotent_not_quasi_classical(self):
        K = nilpotent_k(2, 1)
        assert not K.is_quasi_classical()
        with pytest.raises(NotQuasiClassicalError):
            series_inverse(K.series(2))

    def test_nilpotent_domain(self):
        with pytest.raises(InvalidDimensionError):
            nilpotent_k(3, 2)

    def test_normalization(self):
        K = normalized(diagonal_k(3, 2, 1, 0.7))
        kinv = np.linalg.inv(K.kappa)
        for u in (0.9, 2.1 - 0.4j):
            assert np.trace(K(u) @ kinv) == pytest.approx(3)
        assert max_bybe_residual(K, samples=10) <= 1e-10


class TestBybeResidual:
    def test_identity_boundary(self):
        _, rho = build_sl(3)
        K = KMatrix(RationalMatrixFn.constant(np.eye(3)), (rho, rho))
        assert max(bybe_residual(r_set(3), K, u, v) for u, v in spectral_pairs(0, 10)) <= 1e-14

    def test_one_sided_perturbation_detected(self):
        K = one_sided_diag(3, 2, 1, 0.7, 0.05)
        assert bybe_residual(r_set(3), K, 1.1, 0.4) >= 1e-4

    def test_pole(self):
        with pytest.raises(PoleError):
            bybe_residual(r_set(3), diagonal_k(3, 2, 1, 0.7), 0.5, 0.5)

    def test_scalar_gauge(self):
        K = diagonal_k(3, 2, 1, 0.7)
        Kc = K.with_fn(K.fn.times_polynomial_ratio([0.3, 1.0], [0.0, 1.0]))
        assert max_bybe_residual(Kc, samples=20) <= 1e-10

    def test_classical_limit_matches_cbybe(self, rng):
        # any kappa, solution or not: the x^1 coefficient of the scaled
        # boundary equation is the classical defect of kappa
        _, rho = build_sl(3)
        kappa = rng.standard_normal((3, 3)) + np.eye(3)
        K = KMatrix(RationalMatrixFn.constant(kappa), (rho, rho))
        rs = r_set(3)
        u, v = 0.8 + 0.3j, -0.5 + 1.1j
        series_coeff = bybe_x_series(rs, [kappa], u, v, 1, (3, 3, 1))[1]
        g = lambda x: bybe_defect(rs, K, u / x, v / x) / x
        x1, x2 = 1e-2, 1e-3
        richardson = (x1 * g(x2) - x2 * g(x1)) / (x1 - x2)
        target = cbybe_defect(constant_kappa(kappa), (rho, rho), u, v)
        assert np.linalg.norm(target) > 1e-2
        assert np.linalg.norm(series_coeff - target) <= 1e-12
        assert np.linalg.norm(richardson - target) <= 1e-6 * np.linalg.norm(target)


class TestClassical:
    def test_constant_signature(self, sl3):
        _, rho = sl3
        assert max_cbybe_residual(constant_kappa(J21), (rho, rho)) <= 1e-12
        assert max(constant_cbybe_residuals(J21, (rho, rho))) <= 1e-12

    def test_aiii_solution(self, sl3):
        _, rho = sl3
        kt = aiii_kappa(2, 1, 0.3)
        assert max_cbybe_residual(kt, (rho, rho)) <= 1e-10
        s = expand(kt.fn, 1)
        assert np.allclose(s[0], J21)
        assert np.allclose(s[1], 0.3 * center_element(2, 1) @ J21, atol=1e-14)

    def test_non_solution(self, sl3):
        _, rho = sl3
        kt = constant_kappa(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 2.0]]))
        assert cbybe_residual(kt, (rho, rho), 0.4 + 0.9j, 1.1 - 0.3j) >= 1e-3

    def test_pole(self, sl3):
        _, rho = sl3
        with pytest.raises(PoleError):
            cbybe_residual(constant_kappa(J21), (rho, rho), 0.5, -0.5)

    @pytest.mark.parametrize("a0", [0.5, 2.0, 1 + 1j])
    def test_scaling(self, a0):
        k_a, k_1 = aiii_kappa(2, 1, a0), aiii_kappa(2, 1, 1.0)
        for u in (0.7 + 0.2j, 1.9 - 1.1j, -0.3 + 2.0j):
            assert np.abs(k_a(u) - k_1(u / a0)).max() <= 1e-13

    @pytest.mark.parametrize(
        "kappa,twisted", [(np.eye(3), True), (skew_form(4), True)], ids=["so3", "sp4"]
    )
    def test_semisimple_rigidity(self, kappa, twisted):
        assert classical_perturbative_solve(kappa, 3, twisted=twisted).table == [0, 0, 0]

    def test_aiii_classical_freedom(self):
        sol = classical_perturbative_solve(J21, 3)
        assert sol.table == [1, 0, 0]
        X0J = center_element(2, 1) @ J21
        assert max_principal_angle(sol.orders[0].null_basis.reshape(1, -1).T, X0J.reshape(-1, 1)) <= 1e-8

    def test_twisted_casimirs(self):
        _, rho = build_sl(3)
        cs = casimir_set(constant_twisted_k(3, np.eye(3)).rep_pair)
        assert np.allclose(cs.C11, cs.C22)


class TestPerturbative:
    def test_aiii_table(self):
        sol = perturbative_solve(J21, 3)
        assert sol.table == [1, 0, 0] == sol.predicted_table
        X0J = center_element(2, 1) @ J21
        assert max_principal_angle(sol.orders[0].null_basis.reshape(1, -1).T, X0J.reshape(-1, 1)) <= 1e-8
        assert all(o.consistency <= 1e-10 for o in sol.orders)

    def test_twisted_so3_table(self):
        assert perturbative_solve(np.eye(3), 3, twisted=True).table == [0, 0, 0]

    def test_reproduces_diagonal_family(self):
        K = normalized(diagonal_k(2, 1, 1, 0.7))
        ref = K.series(3).coeffs
        sol = perturbative_solve(np.diag([1, -1.0]), 3, reference=ref)
        for got, want in zip(sol.coefficients, ref):
            assert np.allclose(got, want, atol=1e-10)

    def test_reproduces_unequal_split(self):
        K = normalized(diagonal_k(3, 2, 1, 0.7))
        ref = K.series(3).coeffs
        sol = perturbative_solve(J21, 3, reference=ref)
        for got, want in zip(sol.coefficients, ref):
            assert np.allclose(got, want, atol=1e-10)

    def test_free_parameter(self):
        sol = perturbative_solve(J21, 2, free_params=[[0.4]])
        k1 = sol.coefficients[1]
        assert np.abs(np.trace(k1 @ np.linalg.inv(J21))) <= 1e-10

    def test_invalid_seed(self):
        with pytest.raises(InvalidSeedError):
            perturbative_solve(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 2.0]]), 2)

    def test_singular_seed(self):
        with pytest.raises(NotQuasiClassicalError):
            perturbative_solve(np.array([[0, 1], [0, 0.0]]), 2)


class TestSymmetry:
    def test_inside_and_outside(self):
        alg, _ = build_sl(3)
        K = diagonal_k(3, 2, 1, 0.7)
        assert symmetry_residual(K, label(alg, "E12"), 0, 1.3) <= 1e-12
        assert symmetry_residual(K, label(alg, "E13"), 0, 1.3) >= 1e-2

    def test_identity_commutes(self, sl3):
        alg, rho = sl3
        K = KMatrix(RationalMatrixFn.constant(np.eye(3)), (rho, rho))
        for x in np.eye(alg.dim):
            assert symmetry_residual(K, x, 0, 0.8) == 0

    @pytest.mark.parametrize(
        "K,dim",
        [
            (diagonal_k(3, 2, 1, 0.7), 4),
            (nilpotent_k(4, 1), 9),
            (constant_twisted_k(2, np.eye(2)), 1),
            (constant_twisted_k(3, np.eye(3)), 3),
        ],
        ids=["aiii", "nilpotent", "so2", "so3"],
    )
    def test_residual_symmetry_dims(self, K, dim):
        h = residual_symmetry(K).h
        assert h.dim == dim
        assert h.closure_residual() <= 1e-10

    def test_residual_symmetry_is_fixed_algebra(self):
        K = diagonal_k(3, 2, 1, 0.7)
        h = residual_symmetry(K).h
        assert max_principal_angle(h.columns(), fixed_algebra(J21).columns()) <= 1e-9

    def test_nilpotent_matches_centralizer(self):
        _, rho = build_sl(4)
        h = residual_symmetry(nilpotent_k(4, 1)).h
        c = centralizer(rho, nilpotent_k(4, 1).kappa)
        assert max_principal_angle(h.columns(), c.columns()) <= 1e-9


class TestBoundarySpace:
    def test_dB1_always_irreducible(self):
        assert irreducibility_check(diagonal_k(3, 2, 1, 0.7))

    def test_scalar_extension_reducible(self):
        K = tensor_with_identity(diagonal_k(3, 2, 1, 0.7), 2)
        assert not irreducibility_check(K)
        assert max_bybe_residual(K, samples=5) <= 1e-10

    def test_stacked_families_reducible(self):
        K = block_stack(diagonal_k(3, 2, 1, 0.7), diagonal_k(3, 2, 1, 0.2))
        assert not irreducibility_check(K)

    def test_residual_symmetry_with_boundary(self):
        sym = residual_symmetry(tensor_with_identity(diagonal_k(3, 2, 1, 0.7), 2))
        assert sym.h.dim == 4
        assert np.allclose(sym.boundary_images, 0, atol=1e-10)


class TestFirstOrderStructure:
    @pytest.fixture
    def setup(self, sl3):
        _, rho = sl3
        h = fixed_algebra(J21)
        rhoB = h.matrices(rho)[:, :2, :2]
        return rho, h, rhoB

    def test_constructed_dB2(self, setup):
        rho, h, rhoB = setup
        k1 = construct_k1(rho, h, rhoB)
        rep = k1_structure_check(J21, h, rhoB, k1)
        assert rep.x2a_residual <= 1e-11
        assert rep.decomposition_defect <= 1e-12

    def test_dB1_with_character(self, setup):
        rho, h, _ = setup
        k1 = normalized(diagonal_k(3, 2, 1, 0.7)).series(1)[1]
        rep = k1_structure_check(J21, h, np.zeros((h.dim, 1, 1)), k1, fit_character=True)
        assert rep.decomposition_defect <= 1e-12
        assert rep.x2a_residual <= 1e-12

    def test_dB1_trivial_rep_only_at_special_xi(self, setup):
        rho, h, _ = setup
        k1 = normalized(diagonal_k(3, 2, 1, 0.7)).series(1)[1]
        rep = k1_structure_check(J21, h, np.zeros((h.dim, 1, 1)), k1)
        assert rep.decomposition_defect > 1e-3

    def test_f_direction_detected(self, setup):
        rho, h, rhoB = setup
        alg = rho.algebra
        bad = construct_k1(rho, h, rhoB) + np.kron(rho.matrix(label(alg, "E13")), np.eye(2))
        assert k1_structure_check(J21, h, rhoB, bad).decomposition_defect >= 1e-3

    def test_rejects_non_representation(self, setup):
        rho, h, rhoB = setup
        with pytest.raises(HomomorphismError):
            k1_structure_check(J21, h, rhoB + np.eye(2), construct_k1(rho, h, rhoB))


def test_r_set_selection():
    assert not r_set_for(diagonal_k(3, 2, 1, 0.7)).r12.twisted
    assert r_set_for(constant_twisted_k(3, np.eye(3))).r12.twisted


def test_center_element_normalization():
    X0 = center_element(2, 1)
    assert np.trace(X0) == pytest.approx(0)
    assert np.trace(X0 @ X0) == pytest.approx(1)
    assert classify_subalgebra(fixed_algebra(J21)).center_dim == 1
