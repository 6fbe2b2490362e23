"""K-matrix families, boundary Yang-Baxter residuals, the classical boundary
equation, order-by-order solvers and boundary-symmetry diagnostics.

Every stored K is normalized to ``K(u) = kappa + O(1/u)``. Tensor legs in
the boundary equations are ordered (aux 1, aux 2, boundary).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    CbYBEViolationError,
    HomomorphismError,
    InvalidDimensionError,
    InvalidSeedError,
    NotQuasiClassicalError,
    PoleError,
    SamplingInsufficientError,
    ShapeMismatchError,
)
from .lie import (
    build_sl,
    boundary_casimir,
    classify_subalgebra,
    contragredient,
    intertwining_kernel,
    restricted_casimir,
    split_casimir,
    subalgebra_from_columns,
)
from .linalg import embed, nullspace, orth, ray_points, readable_basis, spectral_pairs
from .rmatrix import crossed_yang, yang_r
from .series import MatrixSeries, RationalMatrixFn, expand, series_mul

SOLVER_RTOL = 1e-8


# ---------------------------------------------------------------- families


@dataclass(frozen=True, eq=False)
class KMatrix:
    fn: RationalMatrixFn
    rep_pair: tuple
    d_B: int = 1
    boundary_rep: Optional[np.ndarray] = None
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, u, name=None):
        return self.fn(u, name or f"K({u})")

    @property
    def d(self):
        return self.rep_pair[0].d

    @property
    def n(self):
        return self.d

    @property
    def twisted(self):
        r1, r2 = self.rep_pair
        return not r1.same_as(r2)

    def series(self, order=4):
        return expand(self.fn, order)

    @property
    def kappa(self):
        return self.series(0)[0]

    def is_quasi_classical(self, cond_limit=1e12):
        s = np.linalg.svd(self.kappa, compute_uv=False)
        return bool(s[0] > 0 and s[-1] > s[0] / cond_limit)

    def with_fn(self, fn, family=None):
        return KMatrix(fn, self.rep_pair, self.d_B, self.boundary_rep, family or self.family, dict(self.params))


def signature_matrix(p, q):
    return np.diag([1.0] * p + [-1.0] * q).astype(complex)


def center_element(p, q):
    """Trace-normalized center of s(gl(p) ⊕ gl(q)): diag(q I_p, -p I_q)/sqrt(pqn)."""
    n = p + q
    return np.diag([q] * p + [-p] * q).astype(complex) / np.sqrt(p * q * n)


def _defining_pair(n, twisted=False):
    _, rho = build_sl(n)
    return (rho, contragredient(rho)) if twisted else (rho, rho)


def diagonal_k(n, p, q, xi):
    """K(u) = J + (xi/u) I with J = diag(I_p, -I_q)."""
    if p + q != n or p < 1 or q < 1:
        raise InvalidDimensionError(f"need p + q = n with p, q >= 1; got p={p}, q={q}, n={n}")
    J = signature_matrix(p, q)
    fn = RationalMatrixFn(np.array([xi * np.eye(n), J]), np.array([0.0, 1.0]), f"diag:sl({n}):{p},{q}:xi={xi}")
    return KMatrix(fn, _defining_pair(n), family="diag", params={"p": p, "q": q, "xi": xi})


def skew_form(n):
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]."""
    if n % 2:
        raise InvalidDimensionError(f"a skew invertible form needs even n, got {n}")
    w = np.zeros((n, n), dtype=complex)
    for a in range(0, n, 2):
        w[a, a + 1], w[a + 1, a] = 1.0, -1.0
    return w


def constant_twisted_k(n, kappa):
    """Constant K = kappa paired with (rho, contragredient rho)."""
    kappa = np.asarray(kappa, dtype=complex)
    if kappa.shape != (n, n):
        raise ShapeMismatchError(f"kappa must be {n}x{n}")
    if np.allclose(kappa, kappa.T):
        kind = "sym"
    elif np.allclose(kappa, -kappa.T):
        if n % 2:
            raise InvalidDimensionError("skew kappa requires even n")
        kind = "skew"
    else:
        raise ValueError("kappa must be symmetric or skew-symmetric")
    if abs(np.linalg.det(kappa)) < 1e-12:
        raise NotQuasiClassicalError("kappa is singular")
    fn = RationalMatrixFn.constant(kappa, f"twist-const:sl({n}):{kind}")
    return KMatrix(fn, _defining_pair(n, twisted=True), family="twist-const", params={"kind": kind})


def jordan_nilpotent(n, k):
    """k Jordan blocks E_{2a-1, 2a}, zero elsewhere."""
    if k < 1 or 2 * k > n:
        raise InvalidDimensionError(f"nilpotent family needs 1 <= k and 2k <= n; got n={n}, k={k}")
    kap = np.zeros((n, n), dtype=complex)
    for a in range(k):
        kap[2 * a, 2 * a + 1] = 1.0
    return kap


def nilpotent_k(n, k):
    """K(u) = kappa + I/u with kappa^2 = 0 (not quasi-classical)."""
    kap = jordan_nilpotent(n, k)
    fn = RationalMatrixFn(np.array([np.eye(n), kap]), np.array([0.0, 1.0]), f"nilpotent:sl({n}):k={k}")
    return KMatrix(fn, _defining_pair(n), family="nilpotent", params={"k": k})


def custom_k(series, twisted=False, meta="custom"):
    """K built from a stored coefficient series, summed exactly."""
    d = series.shape[0]
    fn = RationalMatrixFn.from_series(series, meta)
    return KMatrix(fn, _defining_pair(d, twisted), family="custom")


def normalize_trace(fn, kappa):
    """Rescale so that Tr(K(u) kappa^{-1}) = d identically.

    Done exactly: K_norm = d N(u) / t(u) with t(u) = Tr(N(u) kappa^{-1}),
    which drops the original scalar denominator.
    """
    kinv = np.linalg.inv(kappa)
    d = kappa.shape[0]
    t = np.einsum("kij,ji->k", fn.numerator, kinv)
    return RationalMatrixFn(d * fn.numerator, t, fn.meta)


def normalized(K):
    if not K.is_quasi_classical():
        raise NotQuasiClassicalError("trace normalization needs an invertible leading coefficient")
    kap = K.kappa[: K.d, : K.d] if K.d_B == 1 else K.kappa
    return K.with_fn(normalize_trace(K.fn, kap))


def unitarity_residual(K, u, scalar=None):
    """K(u) K(-u) = s(u) I. Returns the defect against ``scalar`` (if given)
    or against the fitted multiple of the identity."""
    M = K(u) @ K(-u)
    s = np.trace(M) / M.shape[0] if scalar is None else scalar
    return float(np.linalg.norm(M - s * np.eye(M.shape[0])))


# ---------------------------------------------------------------- R sets


@dataclass(frozen=True, eq=False)
class RSet:
    """The three R-matrices of the boundary equation: R^(11), R^(12), R^(22)."""

    r11: object
    r12: object
    r22: object


@lru_cache(maxsize=None)
def r_set(n, twisted=False):
    if twisted:
        return RSet(yang_r(n), crossed_yang(n), yang_r(n, contragredient_pair=True))
    R = yang_r(n)
    return RSet(R, R, R)


def r_set_for(K):
    return r_set(K.d, K.twisted)


# ---------------------------------------------------------------- residuals


def _bybe_sides(Ku, Kv, R11, R12p, R22, dims):
    """Both sides of the boundary equation from evaluated factors."""
    K1u = embed(Ku, (0, 2), dims)
    K2v = embed(Kv, (1, 2), dims)
    lhs = embed(R11, (0, 1), dims) @ K1u @ embed(R12p, (1, 0), dims) @ K2v
    rhs = K2v @ embed(R12p, (0, 1), dims) @ K1u @ embed(R22, (1, 0), dims)
    return lhs, rhs


def bybe_defect(rs, K, u, v):
    """R12^(11)(u-v) K13(u) R21^(12)(u+v) K23(v) - K23(v) R12^(12)(u+v) K13(u) R21^(22)(u-v)."""
    d = K.d
    if K.fn.shape != (d * K.d_B, d * K.d_B):
        raise ShapeMismatchError("K does not act on C^d ⊗ C^dB")
    if rs.r11.dims != (d, d):
        raise ShapeMismatchError("R-matrices and K act on different spaces")
    lhs, rhs = _bybe_sides(
        K(u, f"K(u={u})"),
        K(v, f"K(v={v})"),
        rs.r11(u - v, f"R11(u-v={u - v})"),
        rs.r12(u + v, f"R12(u+v={u + v})"),
        rs.r22(u - v, f"R22(u-v={u - v})"),
        (d, d, K.d_B),
    )
    return lhs - rhs


def bybe_residual(rs, K, u, v):
    """Frobenius norm of :func:`bybe_defect`."""
    return float(np.linalg.norm(bybe_defect(rs, K, u, v)))


def max_bybe_residual(K, rs=None, samples=50, seed=0):
    rs = rs or r_set_for(K)
    return max(bybe_residual(rs, K, u, v) for u, v in spectral_pairs(seed, samples))


@dataclass(frozen=True, eq=False)
class ClassicalKappa:
    """Spectral-dependent classical kappa-matrix κ̃(u)."""

    fn: RationalMatrixFn
    rep_pair: tuple
    a0: Optional[complex] = None

    def __call__(self, u):
        return self.fn(u, f"kappa~({u})")


def constant_kappa(kappa, twisted=False):
    kappa = np.asarray(kappa, dtype=complex)
    return ClassicalKappa(RationalMatrixFn.constant(kappa, "constant"), _defining_pair(kappa.shape[0], twisted))


def aiii_kappa(p, q, a0):
    """Exact classical solution with expansion J + (a0/u) rho(X0) J + O(1/u^2).

    It is the trace-normalized J + (c/u) I with c = a0 sqrt(n) / (2 sqrt(pq)).
    """
    n = p + q
    J = signature_matrix(p, q)
    c = a0 * np.sqrt(n) / (2 * np.sqrt(p * q))
    raw = RationalMatrixFn(np.array([c * np.eye(n), J]), np.array([0.0, 1.0]), f"aiii:{p},{q}:a0={a0}")
    return ClassicalKappa(normalize_trace(raw, J), _defining_pair(n), a0)


def truncated_aiii_kappa(p, q, a0):
    """J + (a0/u) rho(X0) J as a literal two-term matrix function."""
    n = p + q
    J = signature_matrix(p, q)
    X0 = center_element(p, q)
    fn = RationalMatrixFn(np.array([a0 * X0 @ J, J]), np.array([0.0, 1.0]), f"aiii-trunc:{p},{q}:a0={a0}")
    return ClassicalKappa(fn, _defining_pair(n), a0)


@dataclass(frozen=True)
class CasimirSet:
    C11: np.ndarray
    C22: np.ndarray
    C12: np.ndarray
    C21: np.ndarray


def casimir_set(rep_pair):
    r1, r2 = rep_pair
    return CasimirSet(split_casimir(r1, r1), split_casimir(r2, r2), split_casimir(r1, r2), split_casimir(r2, r1))


def _cbybe_terms(cs, k1, k2):
    """(C11 k1 k2 - k1 k2 C22, k1 C21 k2 - k2 C12 k1) for embedded k1, k2."""
    return cs.C11 @ k1 @ k2 - k1 @ k2 @ cs.C22, k1 @ cs.C21 @ k2 - k2 @ cs.C12 @ k1


def cbybe_defect(kappa_fn, rep_pair, u, v):
    """(C11 κ̃1(u)κ̃2(v) - κ̃1κ̃2 C22)/(u-v) + (κ̃1 C21 κ̃2 - κ̃2 C12 κ̃1)/(u+v)."""
    if u == v or u == -v:
        raise PoleError(f"classical boundary equation is singular at u = ±v (u={u}, v={v})", "1/(u∓v)")
    cs = casimir_set(rep_pair)
    I = np.eye(rep_pair[0].d)
    a, b = _cbybe_terms(cs, np.kron(kappa_fn(u), I), np.kron(I, kappa_fn(v)))
    return a / (u - v) + b / (u + v)


def cbybe_residual(kappa_fn, rep_pair, u, v):
    """Frobenius norm of :func:`cbybe_defect`."""
    return float(np.linalg.norm(cbybe_defect(kappa_fn, rep_pair, u, v)))


def constant_cbybe_residuals(kappa, rep_pair):
    """Both constant-kappa constraints: C11 κ1κ2 = κ1κ2 C22 and κ1 C21 κ2 = κ2 C12 κ1."""
    kappa = np.asarray(kappa, dtype=complex)
    d = kappa.shape[0]
    I = np.eye(d)
    a, b = _cbybe_terms(casimir_set(rep_pair), np.kron(kappa, I), np.kron(I, kappa))
    return float(np.linalg.norm(a)), float(np.linalg.norm(b))


def max_cbybe_residual(kappa_fn, rep_pair, samples=20, seed=0):
    return max(cbybe_residual(kappa_fn, rep_pair, u, v) for u, v in spectral_pairs(seed, samples))


# ---------------------------------------------------------------- x-expansions


def _x_series(coeffs, w, order, legs=None, dims=None):
    """Series in x of F(w/x) = sum_c coeffs[c] x^c w^(-c), optionally embedded."""
    out = []
    for c in range(order + 1):
        m = coeffs[c] * w ** (-c) if c < len(coeffs) else np.zeros_like(coeffs[0])
        out.append(embed(m, legs, dims) if legs is not None else m)
    return MatrixSeries(np.array(out))


def _prod(*series):
    acc = series[0]
    for s in series[1:]:
        acc = series_mul(acc, s)
    return acc


def bybe_x_series(rs, kcoeffs, u, v, order, dims, rcoeffs=None):
    """LHS - RHS of the boundary equation at (u/x, v/x) as a series in x.

    ``kcoeffs`` are the 1/u coefficients of K (missing orders count as zero).
    """
    if rcoeffs is None:
        rcoeffs = [expand(r.fn, order).coeffs for r in (rs.r11, rs.r12, rs.r22)]
    c11, c12, c22 = rcoeffs
    K1u = _x_series(kcoeffs, u, order, (0, 2), dims)
    K2v = _x_series(kcoeffs, v, order, (1, 2), dims)
    lhs = _prod(_x_series(c11, u - v, order, (0, 1), dims), K1u, _x_series(c12, u + v, order, (1, 0), dims), K2v)
    rhs = _prod(K2v, _x_series(c12, u + v, order, (0, 1), dims), K1u, _x_series(c22, u - v, order, (1, 0), dims))
    return lhs - rhs


def cbybe_x_series(cs, kcoeffs, u, v, order, d):
    """x^r coefficients of the classical bracket for κ̃(u/x), with the overall
    factor x from 1/(u∓v) removed."""
    I = np.eye(d)
    out = []
    for r in range(order + 1):
        acc = np.zeros((d * d, d * d), dtype=complex)
        for a in range(r + 1):
            b = r - a
            ka = kcoeffs[a] * u ** (-a) if a < len(kcoeffs) else 0 * I
            kb = kcoeffs[b] * v ** (-b) if b < len(kcoeffs) else 0 * I
            t1, t2 = _cbybe_terms(cs, np.kron(ka, I), np.kron(I, kb))
            acc += t1 / (u - v) + t2 / (u + v)
        out.append(acc)
    return MatrixSeries(np.array(out))


# ---------------------------------------------------------------- solvers


@dataclass(frozen=True, eq=False)
class OrderSolution:
    order: int
    coefficient: np.ndarray
    null_basis: np.ndarray
    predicted_nullity: int
    rank: int
    equations: int
    consistency: float

    @property
    def nullity(self):
        return self.null_basis.shape[0]

    @property
    def anomaly(self):
        return self.nullity != self.predicted_nullity


@dataclass(frozen=True, eq=False)
class PerturbativeSolution:
    kappa: np.ndarray
    orders: tuple
    seed_residuals: tuple

    @property
    def table(self):
        return [o.nullity for o in self.orders]

    @property
    def predicted_table(self):
        return [o.predicted_nullity for o in self.orders]

    @property
    def anomalies(self):
        return [o.order for o in self.orders if o.anomaly]

    @property
    def coefficients(self):
        return [self.kappa] + [o.coefficient for o in self.orders]


def _affine_system(func, d):
    """Matrix A and offset b with func(k) = A vec(k) + b, func affine in k (d x d)."""
    b = func(np.zeros((d, d), dtype=complex)).ravel()
    cols = []
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            cols.append(func(E).ravel() - b)
    return np.array(cols).T, b


def _check_seed(kappa, rep_pair, tol):
    s = np.linalg.svd(kappa, compute_uv=False)
    if s[-1] <= s[0] * 1e-12:
        raise NotQuasiClassicalError("seed kappa is singular; the expansion is not quasi-classical")
    ckk, kck = constant_cbybe_residuals(kappa, rep_pair)
    if max(ckk, kck) > tol:
        raise InvalidSeedError(
            f"kappa does not solve the constant classical boundary equation (residuals {ckk:.2e}, {kck:.2e})"
        )
    return ckk, kck


def predicted_nullities(kappa, rep_pair, order):
    """Center dimension of the kappa-fixed algebra at order 1, zero beyond."""
    h = intertwining_kernel(rep_pair[0], rep_pair[1], kappa)
    center = classify_subalgebra(h).center_dim if h.dim else 0
    return [center] + [0] * (order - 1)


def _solve_orders(kappa, rep_pair, order, build_order, reference, free_params, rtol):
    d = kappa.shape[0]
    kinv = np.linalg.inv(kappa)
    norm_row = kinv.T.ravel()[None, :]
    predicted = predicted_nullities(kappa, rep_pair, order)
    coeffs = [kappa]
    solutions = []
    free_params = list(free_params or [])
    for r in range(1, order + 1):
        blocks, offsets = [], []
        for A, b in build_order(coeffs, r):
            blocks.append(A)
            offsets.append(b)
        A = np.vstack(blocks + [norm_row * np.max(np.abs(blocks[0]))])
        b = np.concatenate(offsets + [np.zeros(1)])
        N = nullspace(A, rtol)
        x, *_ = np.linalg.lstsq(A, -b, rcond=None)
        consistency = float(np.linalg.norm(A @ x + b) / max(np.linalg.norm(b), 1.0))
        if N.shape[1]:
            if reference is not None and r < len(reference):
                target = np.asarray(reference[r], dtype=complex).ravel()
                x = x + N @ (N.conj().T @ (target - x))
            elif free_params:
                x = x + readable_basis(N) @ np.asarray(free_params.pop(0), dtype=complex).reshape(-1)
        null = readable_basis(N).T.reshape(-1, d, d) if N.shape[1] else np.zeros((0, d, d), dtype=complex)
        k_r = x.reshape(d, d)
        coeffs.append(k_r)
        solutions.append(
            OrderSolution(
                order=r,
                coefficient=k_r,
                null_basis=null,
                predicted_nullity=predicted[r - 1],
                rank=A.shape[1] - N.shape[1],
                equations=A.shape[0],
                consistency=consistency,
            )
        )
    return tuple(solutions)


def _sample_count(order):
    return 3 * (order + 1) + 6


def perturbative_solve(
    kappa, order=3, twisted=False, reference=None, free_params=None, seed=0, samples=None, rtol=SOLVER_RTOL, tol=1e-9
):
    """Solve the boundary equation order by order around a constant kappa.

    At each order r the x^(r+1) coefficient of the scaled equation is affine in
    k^(r); every coefficient identity at that order is stacked over spectral
    samples, together with Tr(k^(r) kappa^{-1}) = 0. The homogeneous kernel
    is reported per order. Free directions are fixed by projecting the
    coefficients of ``reference`` (a sequence of matrices) or by
    ``free_params``; otherwise the minimum-norm solution is taken.
    """
    kappa = np.asarray(kappa, dtype=complex)
    n = kappa.shape[0]
    rep_pair = _defining_pair(n, twisted)
    seed_res = _check_seed(kappa, rep_pair, tol)
    rs = r_set(n, twisted)
    dims = (n, n, 1)
    rcoeffs = [expand(r.fn, order + 1).coeffs for r in (rs.r11, rs.r12, rs.r22)]
    pairs = spectral_pairs(seed, samples or _sample_count(order))

    def build_order(coeffs, r):
        for u, v in pairs:

            def F(k, u=u, v=v):
                return bybe_x_series(rs, coeffs + [k], u, v, r + 1, dims, rcoeffs)[r + 1]

            yield _affine_system(F, n)

    orders = _solve_orders(kappa, rep_pair, order, build_order, reference, free_params, rtol)
    return PerturbativeSolution(kappa, orders, seed_res)


def classical_perturbative_solve(
    kappa, order=3, twisted=False, reference=None, free_params=None, seed=0, samples=None, rtol=SOLVER_RTOL, tol=1e-9
):
    """The same order-by-order scheme for the classical boundary equation."""
    kappa = np.asarray(kappa, dtype=complex)
    n = kappa.shape[0]
    rep_pair = _defining_pair(n, twisted)
    seed_res = _check_seed(kappa, rep_pair, tol)
    cs = casimir_set(rep_pair)
    pairs = spectral_pairs(seed, samples or _sample_count(order))

    def build_order(coeffs, r):
        for u, v in pairs:

            def F(k, u=u, v=v):
                return cbybe_x_series(cs, coeffs + [k], u, v, r, n)[r]

            yield _affine_system(F, n)

    orders = _solve_orders(kappa, rep_pair, order, build_order, reference, free_params, rtol)
    return PerturbativeSolution(kappa, orders, seed_res)


# ---------------------------------------------------------------- symmetry


def _lift(m, dB):
    return np.kron(m, np.eye(dB))


def symmetry_residual(K, X, rhoB_X, u):
    """‖rho1(X) K(u) - K(u) rho2(X) + [rhoB(X), K(u)]‖ (boundary parts on the last factor)."""
    r1, r2 = K.rep_pair
    dB = K.d_B
    Ku = K(u)
    Z = np.kron(np.eye(K.d), np.atleast_2d(np.asarray(rhoB_X, dtype=complex)).reshape(dB, dB))
    D = _lift(r1.matrix(X), dB) @ Ku - Ku @ _lift(r2.matrix(X), dB) + Z @ Ku - Ku @ Z
    return float(np.linalg.norm(D))


@dataclass(frozen=True, eq=False)
class ResidualSymmetry:
    h: object
    boundary_images: np.ndarray
    kernel_dim: int


def _symmetry_kernel(K, points, rtol):
    r1, r2 = K.rep_pair
    dim = r1.algebra.dim
    d, dB = K.d, K.d_B
    rows = []
    for u in points:
        Ku = K(u)
        xcols = [(_lift(r1.Y[a], dB) @ Ku - Ku @ _lift(r2.Y[a], dB)).ravel() for a in range(dim)]
        zcols = []
        for i in range(dB):
            for j in range(dB):
                E = np.zeros((dB, dB))
                E[i, j] = 1.0
                Z = np.kron(np.eye(d), E)
                zcols.append((Z @ Ku - Ku @ Z).ravel())
        rows.append(np.array(xcols + zcols).T)
    trace_row = np.concatenate([np.zeros(dim), np.eye(dB).ravel()])[None, :]
    A = np.vstack(rows + [trace_row])
    return nullspace(A, rtol)


def residual_symmetry(K, samples=7, recheck=11, rtol=1e-9):
    """Joint kernel of (X, Z) -> rho1(X)K - K rho2(X) + [Z, K] over spectral points.

    The trivial direction (0, I) is removed by requiring Tr Z = 0. The
    kernel is recomputed on a larger sample set and must not change.
    """
    dim = K.rep_pair[0].algebra.dim
    N1 = _symmetry_kernel(K, ray_points(samples), rtol)
    N2 = _symmetry_kernel(K, ray_points(recheck, angle=0.9273, start=0.41, step=0.29), rtol)
    X1, X2 = orth(N1[:dim]), orth(N2[:dim])
    if N1.shape[1] != N2.shape[1] or X1.shape[1] != X2.shape[1]:
        raise SamplingInsufficientError(
            f"symmetry kernel changed from {N1.shape[1]} to {N2.shape[1]} when adding samples"
        )
    h = subalgebra_from_columns(K.rep_pair[0].algebra, X2)
    # boundary image for each basis vector of h: least squares on the kernel
    if N2.shape[1] and h.dim:
        coef, *_ = np.linalg.lstsq(N2[:dim], h.vectors.T, rcond=None)
        dB = K.d_B
        images = (N2[dim:] @ coef).T.reshape(-1, dB, dB)
    else:
        images = np.zeros((h.dim, K.d_B, K.d_B), dtype=complex)
    return ResidualSymmetry(h, images, N2.shape[1])


def commutant_dim(mats, rtol=None):
    """Dimension of {Z : [Z, M] = 0 for all M in mats}."""
    mats = list(mats)
    m = mats[0].shape[0]
    I = np.eye(m)
    A = np.vstack([np.kron(M, I) - np.kron(I, M.T) for M in mats])
    return nullspace(A, rtol).shape[1]


def boundary_blocks(K, u):
    """The d x d array of dB x dB blocks Psi^{ij}(u) of K(u)."""
    d, dB = K.d, K.d_B
    return K(u).reshape(d, dB, d, dB).transpose(0, 2, 1, 3).reshape(d * d, dB, dB)


def irreducibility_check(K, samples=7, rtol=1e-9):
    """True iff the blocks Psi^{ij}(u_s) have only scalars in their common commutant."""
    if K.d_B == 1:
        return True
    blocks = np.concatenate([boundary_blocks(K, u) for u in ray_points(samples)])
    return commutant_dim(blocks, rtol) == 1


def tensor_with_identity(K, dB):
    """Artificial boundary extension K(u) ⊗ I_dB."""
    fn = K.fn.map_coefficients(lambda c: np.kron(c, np.eye(dB)), meta=f"{K.fn.meta}⊗I{dB}")
    return KMatrix(fn, K.rep_pair, dB, None, K.family + "-ext", dict(K.params))


def block_stack(K1, K2):
    """Two scalar-boundary families merged into a dB = 2 boundary:
    K(u) = K1(u) ⊗ E11 + K2(u) ⊗ E22 over a common denominator."""
    if K1.d != K2.d:
        raise ShapeMismatchError("families act on different spaces")
    e1, e2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    a = K1.fn.times_polynomial_ratio(K2.fn.denominator, [1.0])
    b = K2.fn.times_polynomial_ratio(K1.fn.denominator, [1.0])
    L = max(len(a.numerator), len(b.numerator))
    num = np.zeros((L, 2 * K1.d, 2 * K1.d), dtype=complex)
    num[: len(a.numerator)] += np.array([np.kron(c, e1) for c in a.numerator])
    num[: len(b.numerator)] += np.array([np.kron(c, e2) for c in b.numerator])
    den = np.convolve(K1.fn.denominator, K2.fn.denominator)
    fn = RationalMatrixFn(num, den, f"{K1.fn.meta}⊕{K2.fn.meta}")
    return KMatrix(fn, K1.rep_pair, 2, None, "stacked")


# ---------------------------------------------------------------- first-order structure


def subalgebra_structure_constants(h):
    """g_ab^c with [X_a, X_b] = g_ab^c X_c inside h."""
    V = h.vectors
    br = np.einsum("ia,jb,abc->ijc", V, V, h.parent.f).reshape(-1, h.parent.dim)
    coords, *_ = np.linalg.lstsq(V.T, br.T, rcond=None)
    return coords.T.reshape(h.dim, h.dim, h.dim)


def boundary_rep_residual(h, rhoB):
    rhoB = np.asarray(rhoB, dtype=complex)
    g = subalgebra_structure_constants(h)
    lhs = np.einsum("aij,bjk->abik", rhoB, rhoB) - np.einsum("bij,ajk->abik", rhoB, rhoB)
    rhs = np.einsum("abc,cik->abik", g, rhoB)
    return float(np.max(np.abs(lhs - rhs))) if h.dim else 0.0


def character_space(h):
    """Basis (rows) of characters chi of h, i.e. chi vanishing on [h, h]."""
    g = subalgebra_structure_constants(h).reshape(-1, h.dim)
    return nullspace(g).T


def construct_k1(rep, h, rhoB):
    """k̃^(1) = ½ c^(h,1) ⊗ 1 + 2 C^(h,1B)."""
    rhoB = np.asarray(rhoB, dtype=complex)
    dB = rhoB.shape[1]
    cas = restricted_casimir(rep, rep, h).casimir_h
    return 0.5 * np.kron(cas, np.eye(dB)) + 2 * boundary_casimir(rep, h, rhoB)


@dataclass(frozen=True, eq=False)
class K1StructureReport:
    decomposition_defect: float
    x2a_residual: float
    D: np.ndarray
    character: Optional[np.ndarray]


def x2a_residual(rep, h, k1, dB):
    """‖2[C^(h,11)_12, k_23] + [k_13, k_23]‖ on legs (aux 1, aux 2, boundary)."""
    d = rep.d
    dims = (d, d, dB)
    C = embed(restricted_casimir(rep, rep, h).C_h, (0, 1), dims)
    k13 = embed(k1, (0, 2), dims)
    k23 = embed(k1, (1, 2), dims)
    return float(np.linalg.norm(2 * (C @ k23 - k23 @ C) + k13 @ k23 - k23 @ k13))


def k1_structure_check(kappa, h, rhoB, k1, rep=None, fit_character=False, tol=1e-10):
    """Compare a first-order coefficient with ½c^(h,1)⊗1 + 2C^(h,1B) + D⊗1.

    ``D`` ranges over the commutant of rho(g). With ``fit_character`` (only
    for dB = 1) the boundary representation is fitted among the characters of
    h instead of taken from ``rhoB``.
    """
    rep = rep or build_sl(np.asarray(kappa).shape[0])[1]
    rhoB = np.asarray(rhoB, dtype=complex)
    dB = rhoB.shape[1]
    if boundary_rep_residual(h, rhoB) > tol:
        raise HomomorphismError("boundary matrices do not represent the subalgebra")
    d = rep.d
    k1 = np.asarray(k1, dtype=complex)
    target = k1 - construct_k1(rep, h, rhoB)
    I = np.eye(d)
    comm = nullspace(np.vstack([np.kron(Y, I) - np.kron(I, Y.T) for Y in rep.Y]))
    basis = [np.kron(c.reshape(d, d), np.eye(dB)) for c in comm.T]
    chars = None
    if fit_character:
        if dB != 1:
            raise ShapeMismatchError("character fitting applies to a one-dimensional boundary")
        chars = character_space(h)
        for chi in chars:
            basis.append(2 * boundary_casimir(rep, h, chi[:, None, None]))
    A = np.array([b.ravel() for b in basis]).T
    coef, *_ = np.linalg.lstsq(A, target.ravel(), rcond=None)
    defect = float(np.linalg.norm(target.ravel() - A @ coef))
    ncomm = comm.shape[1]
    D = sum((c * m.reshape(d, d) for c, m in zip(coef[:ncomm], comm.T)), np.zeros((d, d), dtype=complex))
    character = None
    if fit_character and len(chars):
        character = coef[ncomm:] @ chars
    return K1StructureReport(defect, x2a_residual(rep, h, k1, dB), D, character)


def fixed_algebra(kappa, twisted=False):
    n = np.asarray(kappa).shape[0]
    r1, r2 = _defining_pair(n, twisted)
    return intertwining_kernel(r1, r2, kappa)


def check_classical_kappa(kappa_fn, tol=1e-10, samples=20, seed=0):
    res = max_cbybe_residual(kappa_fn, kappa_fn.rep_pair, samples, seed)
    if res > tol:
        raise CbYBEViolationError(f"classical boundary residual {res:.2e} exceeds {tol:.0e}")
    return res
