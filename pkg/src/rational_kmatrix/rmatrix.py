"""Rational R-matrices for sl(n): the Yang solution, its crossed (twisted)
partner, the classical r-matrix, and Yang-Baxter residuals."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import newton

from .errors import InvalidDimensionError, NotFoundError, ShapeMismatchError, UnsupportedRepPairError
from .lie import CONTRAGREDIENT, DEFINING, build_sl, contragredient, split_casimir
from .linalg import commutator, embed, partial_transpose, spectral_pairs, swap_operator
from .series import RationalMatrixFn


@dataclass(frozen=True, eq=False)
class RMatrix:
    fn: RationalMatrixFn
    rep_pair: tuple
    casimir: np.ndarray
    twisted: bool = False
    crossing: Optional[complex] = None

    def __call__(self, u, name=None):
        return self.fn(u, name)

    @property
    def dims(self):
        return (self.rep_pair[0].d, self.rep_pair[1].d)

    @property
    def name(self):
        return self.fn.meta


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidDimensionError(f"sl(n) needs n >= 2, got {n!r}")


def yang_r(n, contragredient_pair=False):
    """R(u) = (1 - 1/(2n^2 u)) (I + P/(2nu)) on C^n ⊗ C^n.

    The scalar prefactor makes the 1/u coefficient equal to the
    Killing-normalized split Casimir (P - I/n)/(2n). The same matrix serves
    the pair (contragredient, contragredient), whose Casimir coincides.
    """
    _check_n(n)
    _, rho = build_sl(n)
    if contragredient_pair:
        rho = contragredient(rho)
    N = n * n
    I, P = np.eye(N), swap_operator(n)
    # numerator of (2nu - 1/n)(2nu + P) / (4 n^2 u^2), times n
    numerator = np.array([-P, 2 * n * n * P - 2 * n * I, 4 * n**3 * I])
    denominator = np.array([0.0, 0.0, 4.0 * n**3])
    tag = "yang-cg" if contragredient_pair else "yang"
    fn = RationalMatrixFn(numerator, denominator, f"{tag}:sl({n})")
    return RMatrix(fn, (rho, rho), split_casimir(rho, rho))


def _pair_dims(*rs):
    return [r.dims for r in rs]


def ybe_residual(R12, R13, R23, u, v):
    """Frobenius norm of R12(u) R13(u+v) R23(v) - R23(v) R13(u+v) R12(u)."""
    (d1, d2), (e1, d3), (e2, e3) = _pair_dims(R12, R13, R23)
    if (d1, d2, d3) != (e1, e2, e3):
        raise ShapeMismatchError("R-matrices act on incompatible spaces")
    dims = (d1, d2, d3)
    a = embed(R12(u, f"R12(u={u})"), (0, 1), dims)
    b = embed(R13(u + v, f"R13(u+v={u + v})"), (0, 2), dims)
    c = embed(R23(v, f"R23(v={v})"), (1, 2), dims)
    return float(np.linalg.norm(a @ b @ c - c @ b @ a))


def crossed_r(R, gamma):
    """R̄(u) = R(Γ - u)^{T1}, paired with (rho1, contragredient(rho2))."""
    if R.twisted:
        raise UnsupportedRepPairError("crossing is defined for untwisted R-matrices")
    dims = R.dims
    fn = R.fn.compose_affine(gamma, -1).map_coefficients(
        lambda c: partial_transpose(c, 0, dims), meta=f"{R.name}-crossed(gamma={gamma})"
    )
    rho1, rho2 = R.rep_pair
    cg2 = contragredient(rho2)
    return RMatrix(fn, (rho1, cg2), split_casimir(rho1, cg2), twisted=True, crossing=gamma)


def double_crossed(Rbar):
    """Undo a crossing: R̄(Γ - u)^{T2}. Equals the original R for Yang."""
    dims = Rbar.dims
    fn = Rbar.fn.compose_affine(Rbar.crossing, -1).map_coefficients(
        lambda c: partial_transpose(c, 1, dims), meta=f"{Rbar.name}-uncrossed"
    )
    return fn


def _unitarity_defect(Rbar, u):
    """Traceless part of R̄12(u) R̄21(-u), relative to its norm."""
    P = swap_operator(*Rbar.dims)
    M = Rbar(u) @ P @ Rbar(-u) @ P
    s = np.trace(M) / M.shape[0]
    return M - s * np.eye(M.shape[0]), float(np.linalg.norm(M))


def crossing_residual(R, gamma, u):
    """Relative defect of R̄12(u) R̄21(-u) ∝ identity for R̄ = crossed_r(R, gamma)."""
    D, scale = _unitarity_defect(crossed_r(R, gamma), u)
    return float(np.linalg.norm(D) / scale)


_PROBES = (0.7 + 0.3j, 1.3 - 0.8j, 0.45 + 1.9j)


def crossing_landscape(R, lo=-3.0, hi=3.0, steps=601):
    grid = np.linspace(lo, hi, steps)
    vals = np.array([max(crossing_residual(R, g, u) for u in _PROBES) for g in grid])
    return grid, vals


@lru_cache(maxsize=None)
def find_crossing(n, lo=-3.0, hi=3.0, steps=601, tol=1e-10, seed=0):
    """Crossing parameter of the Yang R-matrix for sl(n).

    Γ is fixed by requiring the crossed matrix to be unitary,
    R̄12(u) R̄21(-u) ∝ I. The window is scanned on a grid; each local minimum
    is refined by a secant iteration on the dominant traceless entry and
    then verified at 20 seeded spectral points.
    """
    R = yang_r(n)
    grid, vals = crossing_landscape(R, lo, hi, steps)
    interior = (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])
    candidates = grid[1:-1][interior]
    roots = []
    for g0 in candidates:
        D0, _ = _unitarity_defect(crossed_r(R, g0), _PROBES[0])
        idx = np.unravel_index(np.argmax(np.abs(D0)), D0.shape)

        def component(g):
            D, scale = _unitarity_defect(crossed_r(R, g), _PROBES[0])
            return D[idx] / scale

        try:
            g = complex(newton(component, complex(g0), x1=complex(g0) + 1e-3, tol=1e-15, maxiter=100))
        except (RuntimeError, ZeroDivisionError, ArithmeticError):
            continue
        if abs(g.imag) < 1e-12:
            g = complex(g.real, 0.0)
        pts = [u for u, _ in spectral_pairs(seed, 20)]
        if lo <= g.real <= hi and max(crossing_residual(R, g, u) for u in pts) <= tol:
            if all(abs(g - r) > 1e-8 for r in roots):
                roots.append(g)
    if not roots:
        dump = "\n".join(f"{g:+.3f} {v:.3e}" for g, v in zip(grid[::25], vals[::25]))
        raise NotFoundError(f"no crossing parameter for sl({n}) in [{lo}, {hi}]\n{dump}", (grid, vals))
    if len(roots) > 1:
        raise NotFoundError(f"crossing parameter for sl({n}) is ambiguous: {roots}", (grid, vals))
    g = roots[0]
    return g.real if g.imag == 0 else g


def crossed_yang(n):
    """Yang R-matrix for sl(n) crossed at the searched Γ."""
    return crossed_r(yang_r(n), find_crossing(n))


def classical_r(rep1, rep2):
    """r(u) = C^(12)/u."""
    C = split_casimir(rep1, rep2)
    return RationalMatrixFn(C[None], np.array([0.0, 1.0]), f"classical:{rep1.kind}x{rep2.kind}")


def cybe_residual(r12, r13, r23, u, v, dims):
    """Norm of [r12(u), r13(u+v)] + [r12(u), r23(v)] + [r13(u+v), r23(v)]."""
    a = embed(r12(u, "r12(u)"), (0, 1), dims)
    b = embed(r13(u + v, "r13(u+v)"), (0, 2), dims)
    c = embed(r23(v, "r23(v)"), (1, 2), dims)
    return float(np.linalg.norm(commutator(a, b) + commutator(a, c) + commutator(b, c)))


def unitarity_scalar(R, u):
    """R(u) P R(-u) P = s(u) I: returns (s, relative defect)."""
    P = swap_operator(*R.dims)
    M = R(u) @ P @ R(-u) @ P
    s = np.trace(M) / M.shape[0]
    return complex(s), float(np.linalg.norm(M - s * np.eye(M.shape[0])) / abs(s))


def is_defining_pair(R):
    kinds = tuple(r.kind for r in R.rep_pair)
    return kinds in {(DEFINING, DEFINING), (CONTRAGREDIENT, CONTRAGREDIENT)}
