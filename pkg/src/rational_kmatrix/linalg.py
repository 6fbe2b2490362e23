"""Small numerical helpers: rank-revealing kernels, tensor-leg embeddings,
subspace comparison and spectral sampling."""

from math import prod

import numpy as np
import scipy.linalg

DEFAULT_TOL = 1e-10


def svd_cutoff(s, shape, rtol=None):
    if s.size == 0:
        return 0.0
    if rtol is None:
        return max(shape) * np.finfo(float).eps * s[0]
    return rtol * s[0]


def nullspace(A, rtol=None):
    """Orthonormal basis (as columns) of the kernel of ``A``.

    Singular values below ``max(A.shape) * eps * s_max`` count as zero unless
    ``rtol`` is given, in which case the cutoff is ``rtol * s_max``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[1]
    if A.shape[0] == 0 or not np.any(A):
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > svd_cutoff(s, A.shape, rtol)))
    return vh[rank:].conj().T


def orth(A, rtol=None):
    """Orthonormal basis (as columns) of the column space of ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.size == 0 or not np.any(A):
        return np.zeros((A.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > svd_cutoff(s, A.shape, rtol)))
    return u[:, :rank]


def rank(A, rtol=None):
    return orth(A, rtol).shape[1]


def readable_basis(Q, chop=1e-13):
    """Rotate a column basis so that it is the identity on pivot coordinates.

    Pivots come from a column-pivoted QR of ``Q^H``; columns are sorted by
    pivot index so the result is deterministic.
    """
    Q = np.asarray(Q, dtype=complex)
    k = Q.shape[1]
    if k == 0:
        return Q
    _, _, piv = scipy.linalg.qr(Q.conj().T, pivoting=True, mode="economic")
    piv = np.sort(piv[:k])
    B = Q @ np.linalg.inv(Q[piv, :])
    scale = np.max(np.abs(B))
    B[np.abs(B) < chop * scale] = 0.0
    B.real[np.abs(B.real) < chop * scale] = 0.0
    B.imag[np.abs(B.imag) < chop * scale] = 0.0
    return B


def outside_span(vectors, basis):
    """Largest norm of the components of ``vectors`` (columns) not in span(``basis``)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if vectors.size == 0:
        return 0.0
    Q = orth(basis)
    r = vectors - Q @ (Q.conj().T @ vectors)
    return float(np.max(np.linalg.norm(r, axis=0)))


def max_principal_angle(A, B):
    """Largest principal angle (radians) between the column spans of A and B."""
    A = orth(A)
    B = orth(B)
    if A.shape[1] != B.shape[1]:
        return float(np.pi / 2)
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(A, B)))


def swap_operator(d1, d2=None):
    """Permutation P: a ⊗ b -> b ⊗ a, from C^d1 ⊗ C^d2 to C^d2 ⊗ C^d1."""
    d2 = d1 if d2 is None else d2
    P = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            P[j * d1 + i, i * d2 + j] = 1.0
    return P


def embed(op, legs, dims):
    """Lift ``op`` acting on tensor factors ``legs`` (in that order) to the
    full product space with factor sizes ``dims``.

    ``embed(R, (1, 0), (d, d))`` is ``P R P``; ``embed(R, (0, 2), dims)`` is
    ``P23 (R ⊗ 1) P32``.
    """
    legs = list(legs)
    nd = len(dims)
    rest = [i for i in range(nd) if i not in legs]
    order = legs + rest
    sub = [dims[i] for i in order]
    full = np.kron(op, np.eye(prod(dims[i] for i in rest)))
    T = full.reshape(sub + sub)
    inv = list(np.argsort(order))
    T = T.transpose(inv + [nd + i for i in inv])
    N = prod(dims)
    return T.reshape(N, N)


def partial_transpose(M, leg, dims):
    """Transpose tensor factor ``leg`` of an operator on the product ``dims``."""
    nd = len(dims)
    T = np.asarray(M).reshape(list(dims) + list(dims))
    axes = list(range(2 * nd))
    axes[leg], axes[nd + leg] = axes[nd + leg], axes[leg]
    N = prod(dims)
    return T.transpose(axes).reshape(N, N)


def commutator(a, b):
    return a @ b - b @ a


def spectral_pairs(seed, count, rmin=0.3, rmax=3.0, min_gap=0.2):
    """Seeded (u, v) pairs on the annulus ``rmin <= |u| <= rmax`` off the real
    axis, with ``|u - v|`` and ``|u + v|`` bounded below."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        r = rng.uniform(rmin, rmax, 2)
        phi = rng.uniform(0.15 * np.pi, 0.85 * np.pi, 2) * rng.choice([-1, 1], 2)
        u, v = r * np.exp(1j * phi)
        if abs(u - v) < min_gap or abs(u + v) < min_gap:
            continue
        out.append((complex(u), complex(v)))
    return out


def ray_points(count, angle=0.6180339887, start=0.55, step=0.37):
    """Points on a generic complex ray, used as spectral samples in kernel problems."""
    return [complex((start + step * s) * np.exp(1j * angle)) for s in range(count)]
