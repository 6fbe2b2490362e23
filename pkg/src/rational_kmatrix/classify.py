"""Involutions hidden in a K-matrix's leading coefficient, symmetric-pair
certification, twist classification, the solvable structure of the
nilpotent family and end-to-end classification reports."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy

from .errors import (
    CbYBEViolationError,
    KMatrixError,
    NotQuasiClassicalError,
    OutOfDomainError,
    StageError,
    UnsupportedRepPairError,
)
from .kmatrix import (
    constant_cbybe_residuals,
    jordan_nilpotent,
    max_bybe_residual,
    r_set_for,
    residual_symmetry,
    unitarity_residual,
)
from .lie import (
    SubalgebraBasis,
    build_sl,
    centralizer,
    classify_subalgebra,
    contragredient,
    subalgebra_from_columns,
    _sl_coordinates,
)
from .linalg import max_principal_angle, nullspace, orth, ray_points

INNER = "inner/untwisted"
OUTER = "outer/twisted"
INNER_EQUIVALENT = "inner-equivalent/twisted"
NON_QC = "non-quasi-classical"

ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)


# ---------------------------------------------------------------- involutions


@dataclass(frozen=True, eq=False)
class Involution:
    """alpha(X_A) = M[A, B] X_B; on coordinate vectors alpha acts by M^T."""

    algebra: object
    M: np.ndarray
    N_defect: float
    plus_space: SubalgebraBasis
    minus_space: SubalgebraBasis

    def square_residual(self):
        return float(np.linalg.norm(self.M @ self.M - np.eye(len(self.M))))

    def automorphism_residual(self):
        f, M = self.algebra.f, self.M
        lhs = np.einsum("ad,be,dec->abc", M, M, f)
        rhs = np.einsum("abe,ec->abc", f, M)
        return float(np.max(np.abs(lhs - rhs)))

    def killing_residual(self):
        """M^{-1} = B M^T B^{-1}, written as M B M^T = B."""
        B = self.algebra.killing
        return float(np.max(np.abs(self.M @ B @ self.M.T - B)))

    def grading_residuals(self):
        return self.plus_space.grading_residuals(self.minus_space.vectors)

    def apply(self, x):
        return self.M.T @ x


def _eigenspace(alg, P):
    Q = orth(P)
    return subalgebra_from_columns(alg, Q)


def extract_involution(kappa, rep1, rep2, tol=1e-10):
    """Read off alpha from Ad_kappa(rho2(X_A)) = rho1(alpha(X_A)).

    The conjugated matrices are projected onto rho1(g) with the trace Gram
    matrix; the leftover component is the N-defect.
    """
    kappa = np.asarray(kappa, dtype=complex)
    s = np.linalg.svd(kappa, compute_uv=False)
    if s[-1] <= s[0] * 1e-12:
        raise NotQuasiClassicalError("kappa is singular")
    alg = rep1.algebra
    kinv = np.linalg.inv(kappa)
    Ad = np.einsum("ij,ajk,kl->ail", kappa, rep2.Y, kinv)
    G = rep1.trace_form()
    T = np.einsum("aij,cji->ac", Ad, rep1.Y)
    M = T @ np.linalg.inv(G)
    N = Ad - np.einsum("ab,bij->aij", M, rep1.Y)
    N_defect = float(np.linalg.norm(N))
    if N_defect > tol:
        raise CbYBEViolationError(f"Ad_kappa leaves rho(g) (defect {N_defect:.2e}); kappa is not a classical solution")
    ckk, kck = constant_cbybe_residuals(kappa, (rep1, rep2))
    if max(ckk, kck) > tol:
        raise CbYBEViolationError(f"constant classical boundary residuals {ckk:.2e}, {kck:.2e} exceed {tol:.0e}")
    I = np.eye(alg.dim)
    plus = _eigenspace(alg, (I + M.T) / 2)
    minus = _eigenspace(alg, (I - M.T) / 2)
    plus = SubalgebraBasis(alg, plus.vectors, minus.vectors)
    inv = Involution(alg, M, N_defect, plus, minus)
    if inv.square_residual() > tol:
        raise CbYBEViolationError(f"M^2 differs from the identity by {inv.square_residual():.2e}")
    return inv


@dataclass(frozen=True)
class SymmetricPairReport:
    distance: float
    grading_hf: float
    grading_ff: float
    passed: bool


def symmetric_pair_check(inv, h_claimed, tol=ANGLE_TOL, grading_tol=1e-10):
    """Compare a claimed subalgebra with the fixed algebra of ``inv``."""
    dist = max_principal_angle(h_claimed.columns(), inv.plus_space.columns())
    hf, ff = h_claimed.grading_residuals(inv.minus_space.vectors)
    ok = dist <= tol and hf <= grading_tol and ff <= grading_tol
    return SymmetricPairReport(dist, hf, ff, bool(ok))


def find_intertwiner(rep, M, rtol=None):
    """Invertible V with V rho(alpha X) = rho(X) V for all X, or None."""
    d = rep.d
    Yalpha = np.einsum("ab,bij->aij", M, rep.Y)
    I = np.eye(d)
    # vec(V A) = (I ⊗ A^T) vec V, vec(B V) = (B ⊗ I) vec V in row-major order
    A = np.vstack([np.kron(I, Ya.T) - np.kron(Y, I) for Ya, Y in zip(Yalpha, rep.Y)])
    Nsp = nullspace(A, rtol)
    if Nsp.shape[1] == 0:
        return None
    rng = np.random.default_rng(0)
    V = (Nsp @ rng.standard_normal(Nsp.shape[1])).reshape(d, d)
    s = np.linalg.svd(V, compute_uv=False)
    return V if s[-1] > 1e-10 * s[0] else None


def twist_class(kappa, rep1, rep2=None, tol=1e-10):
    """inner/untwisted, outer/twisted, inner-equivalent/twisted or non-quasi-classical."""
    rep2 = rep1 if rep2 is None else rep2
    kappa = np.asarray(kappa, dtype=complex)
    s = np.linalg.svd(kappa, compute_uv=False)
    if s[-1] <= s[0] * 1e-12:
        return NON_QC
    if rep2.same_as(rep1):
        return INNER
    if not rep2.same_as(contragredient(rep1)):
        raise UnsupportedRepPairError("second representation must be the first or its contragredient")
    inv = extract_involution(kappa, rep1, rep2, tol)
    return OUTER if find_intertwiner(rep1, inv.M) is None else INNER_EQUIVALENT


# ---------------------------------------------------------------- nilpotent family structure


def _E(n, i, j):
    m = np.zeros((n, n), dtype=np.int64)
    m[i - 1, j - 1] = 1
    return m


def structured_parts(n, k):
    """Integer bases of h2, hD, h+, h-, hr. hD is scaled by n - 2k."""
    if 2 * k >= n:
        raise OutOfDomainError(f"needs 2k < n: the hD basis divides by n - 2k = {n - 2 * k}")
    m = n - 2 * k
    h2 = [_E(n, 2 * a - 1, 2 * b) for a in range(1, k + 1) for b in range(1, k + 1)]
    hD = []
    for a in range(1, k + 1):
        H = m * (_E(n, 2 * a - 1, 2 * a - 1) + _E(n, 2 * a, 2 * a))
        for i in range(2 * k + 1, n + 1):
            H -= 2 * _E(n, i, i)
        hD.append(H)
    hp = [_E(n, 2 * a - 1, i) for a in range(1, k + 1) for i in range(2 * k + 1, n + 1)]
    hm = [_E(n, i, 2 * a) for a in range(1, k + 1) for i in range(2 * k + 1, n + 1)]
    hr = []
    for i in range(2 * k + 1, n + 1):
        for j in range(2 * k + 1, n + 1):
            if i != j:
                hr.append(_E(n, i, j))
    for i in range(2 * k + 1, n):
        hr.append(_E(n, i, i) - _E(n, i + 1, i + 1))
    return {"h2": h2, "hD": hD, "h+": hp, "h-": hm, "hr": hr}


def _exact_rank(mats):
    if not mats:
        return 0
    return sympy.Matrix([[int(x) for x in m.ravel()] for m in mats]).rank()


def _brackets(A, B):
    return [a @ b - b @ a for a in A for b in B]


def _nonzero(mats):
    return [m for m in mats if np.any(m)]


def _inside(mats, span):
    return _exact_rank(list(span) + _nonzero(mats)) == _exact_rank(list(span))


def _same_span(A, B):
    r = _exact_rank(list(A) + list(B))
    return r == _exact_rank(list(A)) == _exact_rank(list(B))


@dataclass(frozen=True, eq=False)
class SolvableStructure:
    n: int
    k: int
    parts: dict
    relations: dict
    dims: dict
    centralizer_dim: int
    derived_dims: tuple

    @property
    def total_dim(self):
        return sum(self.dims.values())

    @property
    def relations_hold(self):
        return all(self.relations.values())

    @property
    def matches_centralizer(self):
        return self.total_dim == self.centralizer_dim


def solvable_structure(n, k):
    """Build the structured bases and verify the bracket table exactly."""
    P = structured_parts(n, k)
    h2, hD, hp, hm, hr = P["h2"], P["hD"], P["h+"], P["h-"], P["hr"]
    hs = h2 + hD + hp + hm
    h1 = h2 + hp + hm
    zero = lambda A, B: not _nonzero(_brackets(A, B))
    rel = {
        "[h2,h2]=0": zero(h2, h2),
        "[h2,h+]=0": zero(h2, hp),
        "[h2,h-]=0": zero(h2, hm),
        "[hD,hD]=0": zero(hD, hD),
        "[h+,h+]=0": zero(hp, hp),
        "[h-,h-]=0": zero(hm, hm),
        "[hD,h2]⊆h2": _inside(_brackets(hD, h2), h2),
        "[hD,h+]⊆h+": _inside(_brackets(hD, hp), hp),
        "[hD,h-]⊆h-": _inside(_brackets(hD, hm), hm),
        "[h+,h-]⊆h2": _inside(_brackets(hp, hm), h2),
        "[hs,hs]=h1": _same_span(_nonzero(_brackets(hs, hs)), h1),
        "[h1,h1]=h2": _same_span(_nonzero(_brackets(h1, h1)), h2),
        "[hs,hr]⊆hs": _inside(_brackets(hs, hr), hs),
        "[hr,hr]=hr": _same_span(_nonzero(_brackets(hr, hr)), hr),
    }
    derived = (_exact_rank(hs), _exact_rank(h1), _exact_rank(h2), _exact_rank(_nonzero(_brackets(h2, h2))))
    _, rho = build_sl(n)
    cdim = centralizer(rho, jordan_nilpotent(n, k)).dim
    dims = {name: len(P[name]) for name in ("h2", "hD", "h+", "h-", "hr")}
    return SolvableStructure(n, k, P, rel, dims, cdim, derived)


def structured_subalgebra(n, k):
    """The span of the structured bases as a SubalgebraBasis of sl(n)."""
    alg, _ = build_sl(n)
    mats = [m for part in structured_parts(n, k).values() for m in part]
    V = np.array([_sl_coordinates(m.astype(complex)) for m in mats])
    return subalgebra_from_columns(alg, orth(V.T))


# ---------------------------------------------------------------- pipeline


@dataclass(eq=False)
class ClassificationReport:
    k_family: str
    quasi_classical: bool
    involution: Optional[Involution]
    residual_algebra: object
    twist_class: str
    checks: list = field(default_factory=list)
    symmetric_pair: Optional[SymmetricPairReport] = None
    structure: Optional[SolvableStructure] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failed_checks(self):
        return [c.name for c in self.checks if not c.passed]


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except KMatrixError as exc:
        raise StageError(name, exc) from exc


def _unitarity_check(K):
    pts = ray_points(5)
    if K.family == "nilpotent":
        res = max(unitarity_residual(K, u, -(u**-2)) for u in pts)
        return Check("unitarity K(u)K(-u)=-u^-2", res, 1e-12)
    return Check("unitarity K(u)K(-u)∝I", max(unitarity_residual(K, u) for u in pts), 1e-10)


def verification_checks(K, tol=1e-10, samples=50, seed=0):
    rs = _stage("r-matrices", r_set_for, K)
    checks = [Check("bybe max residual", _stage("bybe", max_bybe_residual, K, rs, samples, seed), tol)]
    if K.family != "custom":
        checks.append(_unitarity_check(K))
    return checks


def classify_kmatrix(K, tol=1e-10, samples=50, seed=0):
    """Expansion, quasi-classicality, then either the involution route or the
    residual-symmetry route; every residual is recorded as a check."""
    checks = verification_checks(K, tol, samples, seed)
    kappa = _stage("expansion", lambda: K.kappa)
    qc = _stage("quasi-classicality", K.is_quasi_classical)
    sym = _stage("residual-symmetry", residual_symmetry, K)
    h = sym.h
    checks.append(Check("residual symmetry closure", h.closure_residual(), tol))
    algebra = _stage("subalgebra", classify_subalgebra, h)
    report = ClassificationReport(K.fn.meta, qc, None, algebra, NON_QC, checks)
    r1, r2 = K.rep_pair
    if qc:
        d = K.d
        kap = kappa if K.d_B == 1 else kappa.reshape(d, K.d_B, d, K.d_B)[:, 0, :, 0]
        inv = _stage("involution", extract_involution, kap, r1, r2, tol)
        report.involution = inv
        hf, ff = inv.grading_residuals()
        checks += [
            Check("involution N-defect", inv.N_defect, tol),
            Check("involution M^2=I", inv.square_residual(), tol),
            Check("involution automorphism", inv.automorphism_residual(), tol),
            Check("involution killing", inv.killing_residual(), tol),
            Check("grading [h,f]⊆f", hf, tol),
            Check("grading [f,f]⊆h", ff, tol),
        ]
        sp = _stage("symmetric-pair", symmetric_pair_check, inv, h)
        report.symmetric_pair = sp
        checks.append(Check("symmetric pair angle", sp.distance, ANGLE_TOL))
        report.twist_class = _stage("twist", twist_class, kap, r1, r2, tol)
    elif K.family == "nilpotent":
        n, k = K.d, K.params["k"]
        if 2 * k < n:
            st = _stage("solvable-structure", solvable_structure, n, k)
            report.structure = st
            checks.append(Check("structure bracket table", 0.0 if st.relations_hold else 1.0, 0.0))
            checks.append(Check("structure dim vs residual symmetry", abs(st.total_dim - h.dim), 0.0))
        else:
            report.notes.append("structured bases need 2k < n; skipped")
    return report
