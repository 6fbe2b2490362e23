"""sl(n) with an explicit basis, its representations, split Casimirs and
subalgebra diagnostics.

Algebra elements are coordinate vectors in the adjoint basis ``X_A``.
Structure constants follow ``[X_A, X_B] = f[A, B, C] X_C``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    AlgebraMismatchError,
    ClosureError,
    InvalidDimensionError,
    SingularMetricError,
)
from .linalg import nullspace, orth, outside_span, rank, readable_basis

DEFINING = "defining"
CONTRAGREDIENT = "contragredient"
CUSTOM = "custom"


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    dim: int
    basis_labels: tuple
    f: np.ndarray
    killing: np.ndarray
    killing_inv: np.ndarray
    name: str = ""

    def bracket(self, x, y):
        return np.einsum("a,b,abc->c", x, y, self.f)

    def ad(self, x):
        """Matrix of ad_x acting on coordinate vectors."""
        return np.einsum("a,abc->cb", x, self.f)

    def killing_form(self, x, y):
        return x @ self.killing @ y

    def ad_matrices(self):
        return self.f.transpose(0, 2, 1)

    def antisymmetry_residual(self):
        return float(np.max(np.abs(self.f + self.f.transpose(1, 0, 2))))

    def jacobi_residual(self):
        f = self.f
        J = (
            np.einsum("abe,ecd->abcd", f, f)
            + np.einsum("bce,ead->abcd", f, f)
            + np.einsum("cae,ebd->abcd", f, f)
        )
        return float(np.max(np.abs(J)))

    def killing_residual(self):
        ad = self.ad_matrices()
        B = np.einsum("xij,yji->xy", ad, ad)
        return float(np.max(np.abs(B - self.killing)))

    def invariance_residual(self):
        # B([X_A, X_B], X_C) + B(X_B, [X_A, X_C])
        t = np.einsum("abe,ec->abc", self.f, self.killing)
        t = t + np.einsum("ace,be->abc", self.f, self.killing)
        return float(np.max(np.abs(t)))

    def structure_triplets(self, tol=1e-14):
        """Nonzero structure constants as ``(A, B, C, value)`` tuples."""
        idx = np.argwhere(np.abs(self.f) > tol)
        return [(int(a), int(b), int(c), complex(self.f[a, b, c])) for a, b, c in idx]


@dataclass(frozen=True, eq=False)
class Representation:
    algebra: LieAlgebra
    Y: np.ndarray
    kind: str = CUSTOM

    @property
    def d(self):
        return self.Y.shape[1]

    def matrix(self, x):
        return np.einsum("a,aij->ij", x, self.Y)

    def homomorphism_residual(self):
        Y = self.Y
        lhs = np.einsum("aij,bjk->abik", Y, Y) - np.einsum("bij,ajk->abik", Y, Y)
        rhs = np.einsum("abc,cik->abik", self.algebra.f, Y)
        return float(np.max(np.abs(lhs - rhs)))

    def is_faithful(self):
        return rank(self.Y.reshape(self.algebra.dim, -1).T) == self.algebra.dim

    def trace_form(self):
        return np.einsum("aij,bji->ab", self.Y, self.Y)

    def metric_constant(self):
        """Return ``(c, spread)`` with ``Tr(Y_A Y_B) = c B_AB``; spread is the
        relative spread of the ratio over nonzero Killing entries."""
        T = self.trace_form()
        B = self.algebra.killing
        mask = np.abs(B) > 1e-12 * np.max(np.abs(B))
        ratios = T[mask] / B[mask]
        c = ratios.mean()
        spread = float(np.max(np.abs(ratios - c)) / abs(c))
        return complex(c), spread

    def same_as(self, other, tol=1e-12):
        return (
            self.algebra is other.algebra
            and self.Y.shape == other.Y.shape
            and np.max(np.abs(self.Y - other.Y)) <= tol
        )


def _sl_coordinates(M):
    """Exact coordinates of a traceless matrix in the sl(n) basis of build_sl."""
    n = M.shape[0]
    off = [M[i, j] for i in range(n) for j in range(n) if i != j]
    cart = np.cumsum(np.diag(M))[:-1]
    return np.concatenate([np.array(off, dtype=complex), cart])


def sl_basis(n):
    mats, labels = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                E = np.zeros((n, n))
                E[i, j] = 1.0
                mats.append(E)
                labels.append(f"E{i + 1}{j + 1}")
    for i in range(n - 1):
        H = np.zeros((n, n))
        H[i, i], H[i + 1, i + 1] = 1.0, -1.0
        mats.append(H)
        labels.append(f"H{i + 1}")
    return np.array(mats), tuple(labels)


@lru_cache(maxsize=None)
def build_sl(n):
    """sl(n) with basis {E_ij (i != j)} then {E_ii - E_{i+1,i+1}}, plus its
    defining representation.

    Cached, so every caller sees the same algebra object for a given n.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidDimensionError(f"sl(n) needs n >= 2, got {n!r}")
    n = int(n)
    mats, labels = sl_basis(n)
    dim = len(mats)
    f = np.zeros((dim, dim, dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            f[a, b] = _sl_coordinates(mats[a] @ mats[b] - mats[b] @ mats[a])
    ad = f.transpose(0, 2, 1)
    killing = np.einsum("xij,yji->xy", ad, ad)
    alg = LieAlgebra(
        dim=dim,
        basis_labels=labels,
        f=_frozen(f),
        killing=_frozen(killing),
        killing_inv=_frozen(np.linalg.inv(killing)),
        name=f"sl({n})",
    )
    return alg, Representation(alg, _frozen(mats), DEFINING)


def contragredient(rep):
    """X -> -rho(X)^T."""
    kind = {DEFINING: CONTRAGREDIENT, CONTRAGREDIENT: DEFINING}.get(rep.kind, CUSTOM)
    return Representation(rep.algebra, _frozen(-rep.Y.transpose(0, 2, 1)), kind)


def _check_same_algebra(*reps):
    alg = reps[0].algebra
    for r in reps[1:]:
        if r.algebra is not alg:
            raise AlgebraMismatchError("representations belong to different algebras")
    return alg


def split_casimir(rep1, rep2):
    """C^(12) = B^AB rho1(X_A) ⊗ rho2(X_B)."""
    alg = _check_same_algebra(rep1, rep2)
    C = np.einsum("ab,aij,bkl->ikjl", alg.killing_inv, rep1.Y, rep2.Y)
    return C.reshape(rep1.d * rep2.d, rep1.d * rep2.d)


@dataclass(frozen=True, eq=False)
class SubalgebraBasis:
    parent: LieAlgebra
    vectors: np.ndarray
    complement: Optional[np.ndarray] = None

    @property
    def dim(self):
        return self.vectors.shape[0]

    def columns(self):
        return self.vectors.T

    def matrices(self, rep):
        return np.einsum("ka,aij->kij", self.vectors, rep.Y)

    def brackets(self, other=None):
        """All pairwise brackets as columns (dim g x k*m)."""
        other = self.vectors if other is None else other
        br = np.einsum("ia,jb,abc->ijc", self.vectors, other, self.parent.f)
        return br.reshape(-1, self.parent.dim).T

    def closure_residual(self):
        if self.dim == 0:
            return 0.0
        return outside_span(self.brackets(), self.columns())

    def grading_residuals(self, complement=None):
        """Residuals of [h,f] ⊆ f and [f,f] ⊆ h."""
        f = self.complement if complement is None else complement
        if f is None or len(f) == 0:
            return 0.0, 0.0
        F = SubalgebraBasis(self.parent, np.asarray(f))
        hf = outside_span(self.brackets(F.vectors), F.columns()) if self.dim else 0.0
        ff = outside_span(F.brackets(), self.columns())
        return hf, ff

    def contains(self, vectors):
        return outside_span(np.atleast_2d(vectors).T, self.columns())


def subalgebra_from_columns(parent, Q, complement=None):
    B = readable_basis(Q)
    return SubalgebraBasis(parent, _frozen(B.T), complement)


def intertwining_kernel(rep1, rep2, kappa, rtol=None):
    """{X : rho1(X) kappa - kappa rho2(X) = 0}."""
    alg = _check_same_algebra(rep1, rep2)
    kappa = np.asarray(kappa, dtype=complex)
    cols = np.einsum("aij,jk->aik", rep1.Y, kappa) - np.einsum("ij,ajk->aik", kappa, rep2.Y)
    A = cols.reshape(alg.dim, -1).T
    return subalgebra_from_columns(alg, nullspace(A, rtol))


def centralizer(rep, kappa, rtol=None):
    """Basis of {X in g : [rho(X), kappa] = 0}."""
    return intertwining_kernel(rep, rep, kappa, rtol)


def killing_complement(h):
    """Killing-orthogonal complement of h in g, as row vectors."""
    B = h.parent.killing
    return readable_basis(nullspace(h.vectors @ B)).T


@dataclass(frozen=True)
class RestrictedCasimir:
    C_h: np.ndarray
    C_f: np.ndarray
    casimir_h: np.ndarray
    metric_inv: np.ndarray
    split_residual: float


def restricted_metric_inverse(h, cond_limit=1e10):
    Bh = h.vectors @ h.parent.killing @ h.vectors.T
    if h.dim == 0:
        return Bh
    s = np.linalg.svd(Bh, compute_uv=False)
    if s[-1] <= s[0] / cond_limit:
        raise SingularMetricError(
            f"Killing form restricted to the subalgebra is degenerate (sigma_min={s[-1]:.3e})"
        )
    return np.linalg.inv(Bh)


def restricted_casimir(rep1, rep2, h):
    """C^(h,12), C^(f,12) and the quadratic Casimir c^(h,1).

    ``f`` is the given complement of ``h`` or, if absent, its Killing-orthogonal
    complement. ``split_residual`` measures ``C^(12) - C^(h,12) - C^(f,12)``.
    """
    _check_same_algebra(rep1, rep2)
    if h.parent is not rep1.algebra:
        raise AlgebraMismatchError("subalgebra lives in a different algebra")
    Binv_h = restricted_metric_inverse(h)
    Y1 = h.matrices(rep1)
    Y2 = h.matrices(rep2)
    d1, d2 = rep1.d, rep2.d
    C_h = np.einsum("ab,aij,bkl->ikjl", Binv_h, Y1, Y2).reshape(d1 * d2, d1 * d2)
    cas = np.einsum("ab,aij,bjk->ik", Binv_h, Y1, Y1)
    fvec = h.complement if h.complement is not None else killing_complement(h)
    F = SubalgebraBasis(h.parent, np.asarray(fvec))
    if F.dim:
        Binv_f = restricted_metric_inverse(F)
        F1, F2 = F.matrices(rep1), F.matrices(rep2)
        C_f = np.einsum("ab,aij,bkl->ikjl", Binv_f, F1, F2).reshape(d1 * d2, d1 * d2)
    else:
        C_f = np.zeros_like(C_h)
    res = float(np.linalg.norm(split_casimir(rep1, rep2) - C_h - C_f))
    return RestrictedCasimir(C_h, C_f, cas, Binv_h, res)


def boundary_casimir(rep1, h, rhoB):
    """C^(h,1B) = B^ab rho1(X_a) ⊗ rhoB(X_b) for a representation of h given
    as one matrix per basis vector of h."""
    Binv_h = restricted_metric_inverse(h)
    rhoB = np.asarray(rhoB, dtype=complex)
    dB = rhoB.shape[1]
    C = np.einsum("ab,aij,bkl->ikjl", Binv_h, h.matrices(rep1), rhoB)
    return C.reshape(rep1.d * dB, rep1.d * dB)


@dataclass(frozen=True, eq=False)
class EndDecomposition:
    rep: Representation
    sub_basis: np.ndarray
    complement_basis: np.ndarray

    def orthogonality_residual(self):
        if len(self.sub_basis) == 0 or len(self.complement_basis) == 0:
            return 0.0
        return float(np.max(np.abs(np.einsum("aij,bji->ab", self.sub_basis, self.complement_basis))))

    def spans_all(self):
        d = self.rep.d
        allm = np.concatenate([self.sub_basis, self.complement_basis]).reshape(-1, d * d)
        return rank(allm.T) == d * d


def end_decomposition(rep, h=None):
    """Split End(C^d) into rho(h) (or rho(g)) and its trace-orthogonal complement."""
    sub = rep.Y if h is None else h.matrices(rep)
    d = rep.d
    A = sub.transpose(0, 2, 1).reshape(len(sub), d * d)
    comp = nullspace(A)
    comp = readable_basis(comp).T.reshape(-1, d, d)
    return EndDecomposition(rep, np.array(sub), comp)


@dataclass(frozen=True, eq=False)
class SubalgebraReport:
    dim: int
    derived_dims: tuple
    center_dim: int
    radical_dim: int
    levi_dim: int
    tag: str
    abelian: bool
    center: np.ndarray = field(repr=False)
    radical: np.ndarray = field(repr=False)

    @property
    def solvable_dim(self):
        return self.radical_dim

    @property
    def reductive_dim(self):
        return self.levi_dim


def classify_subalgebra(h, tol=1e-9):
    """Derived series, center, radical and a structural tag for h.

    The radical is ``{X in h : B(X, [h,h]) = 0}`` with ``B`` the Killing form
    of the ambient algebra (a faithful trace form). Tags, checked in order:
    ``semisimple`` (radical 0), ``solvable`` (derived series hits 0),
    ``reductive`` (radical = center), otherwise ``semidirect``.
    """
    alg = h.parent
    if h.closure_residual() > tol:
        raise ClosureError("subspace is not closed under the bracket")
    k = h.dim
    Q = orth(h.columns())
    derived = [Q.shape[1]]
    cur = Q
    while cur.shape[1] > 0:
        S = SubalgebraBasis(alg, cur.T)
        nxt = orth(S.brackets(), rtol=tol)
        if nxt.shape[1] == cur.shape[1]:
            break
        derived.append(nxt.shape[1])
        cur = nxt
    if k == 0:
        empty = np.zeros((0, alg.dim), dtype=complex)
        return SubalgebraReport(0, (0,), 0, 0, 0, "semisimple", True, empty, empty)
    V = h.vectors
    br = np.einsum("ia,jb,abc->jci", V, V, alg.f).reshape(k * alg.dim, k)
    center_c = nullspace(br, rtol=tol)
    hh = orth(h.brackets(), rtol=tol)
    if hh.shape[1]:
        rad_c = nullspace(hh.T @ alg.killing.T @ V.T, rtol=tol)
    else:
        rad_c = np.eye(k, dtype=complex)
    center = (center_c.T @ V) if center_c.shape[1] else np.zeros((0, alg.dim))
    radical = (rad_c.T @ V) if rad_c.shape[1] else np.zeros((0, alg.dim))
    rdim, cdim = rad_c.shape[1], center_c.shape[1]
    solvable = derived[-1] == 0
    if rdim == 0:
        tag = "semisimple"
    elif solvable:
        tag = "solvable"
    elif rdim == cdim:
        tag = "reductive"
    else:
        tag = "semidirect"
    return SubalgebraReport(
        dim=k,
        derived_dims=tuple(derived),
        center_dim=cdim,
        radical_dim=rdim,
        levi_dim=k - rdim,
        tag=tag,
        abelian=hh.shape[1] == 0,
        center=center,
        radical=radical,
    )
