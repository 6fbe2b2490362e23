"""Matrix-valued truncated series in 1/u and exactly evaluable rational
matrix functions."""

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import (
    NormalizationRequiredError,
    NotQuasiClassicalError,
    PoleError,
    ShapeMismatchError,
)

DEFAULT_ORDER = 4


@dataclass(frozen=True, eq=False)
class MatrixSeries:
    """sum_r coeffs[r] * u**(-r), valid through ``order``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3:
            raise ShapeMismatchError("coefficients must be a stack of matrices")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def __getitem__(self, r):
        return self.coeffs[r]

    def __len__(self):
        return self.coeffs.shape[0]

    def __call__(self, u):
        return sum(c * u ** (-r) for r, c in enumerate(self.coeffs))

    def truncate(self, order):
        return MatrixSeries(self.coeffs[: order + 1])

    def __add__(self, other):
        return series_add(self, other)

    def __sub__(self, other):
        return series_add(self, other.scale(-1))

    def __matmul__(self, other):
        return series_mul(self, other)

    def scale(self, s):
        return MatrixSeries(self.coeffs * s)

    @classmethod
    def identity(cls, d, order=DEFAULT_ORDER):
        c = np.zeros((order + 1, d, d), dtype=complex)
        c[0] = np.eye(d)
        return cls(c)

    @classmethod
    def constant(cls, m, order=DEFAULT_ORDER):
        m = np.asarray(m, dtype=complex)
        c = np.zeros((order + 1,) + m.shape, dtype=complex)
        c[0] = m
        return cls(c)


def series_add(a, b):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cannot add series of shapes {a.shape} and {b.shape}")
    r = min(a.order, b.order)
    return MatrixSeries(a.coeffs[: r + 1] + b.coeffs[: r + 1])


def series_mul(a, b):
    """Cauchy product, truncated at min(order_a, order_b)."""
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    R = min(a.order, b.order)
    out = np.zeros((R + 1, a.shape[0], b.shape[1]), dtype=complex)
    for r in range(R + 1):
        for s in range(r + 1):
            out[r] += a.coeffs[s] @ b.coeffs[r - s]
    return MatrixSeries(out)


def series_inverse(a, cond_limit=1e12):
    """Two-sided inverse of a square series; needs an invertible leading term."""
    c0 = a.coeffs[0]
    if c0.shape[0] != c0.shape[1]:
        raise ShapeMismatchError("only square series can be inverted")
    s = np.linalg.svd(c0, compute_uv=False)
    if s[0] == 0 or s[-1] <= s[0] / cond_limit:
        raise NotQuasiClassicalError(
            f"leading coefficient is singular (sigma_min={s[-1]:.3e}); expansion is not quasi-classical"
        )
    inv0 = np.linalg.inv(c0)
    out = np.zeros_like(a.coeffs)
    out[0] = inv0
    for r in range(1, a.order + 1):
        acc = sum(a.coeffs[j] @ out[r - j] for j in range(1, r + 1))
        out[r] = -inv0 @ acc
    return MatrixSeries(out)


def _trim(p, axis_norm):
    k = len(p)
    while k > 1 and axis_norm(p[k - 1]) == 0:
        k -= 1
    return p[:k]


@dataclass(frozen=True, eq=False)
class RationalMatrixFn:
    """sum_i numerator[i] u**i divided by the scalar polynomial
    sum_j denominator[j] u**j (coefficients in increasing powers)."""

    numerator: np.ndarray
    denominator: np.ndarray
    meta: str = ""

    def __post_init__(self):
        num = np.array(self.numerator, dtype=complex)
        den = np.array(self.denominator, dtype=complex)
        if num.ndim == 2:
            num = num[None]
        if den.ndim != 1 or not np.any(den):
            raise ValueError("denominator must be a nonzero scalar polynomial")
        num = _trim(num, lambda m: np.max(np.abs(m)))
        den = _trim(den, abs)
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def shape(self):
        return self.numerator.shape[1:]

    def _den(self, u):
        return np.polynomial.polynomial.polyval(u, self.denominator)

    def __call__(self, u, name=None):
        den = self._den(u)
        scale = np.sum(np.abs(self.denominator) * np.abs(u) ** np.arange(len(self.denominator)))
        if abs(den) <= 1e-14 * scale:
            label = name or self.meta or "rational function"
            raise PoleError(f"{label} has a pole at u={u}", factor=label)
        acc = np.zeros(self.shape, dtype=complex)
        for c in self.numerator[::-1]:
            acc = acc * u + c
        return acc / den

    def poles(self):
        if len(self.denominator) < 2:
            return np.array([])
        return np.polynomial.polynomial.polyroots(self.denominator)

    def compose_affine(self, a, b, meta=None):
        """u -> a + b u."""

        def compose(coeffs):
            out = np.zeros_like(coeffs, dtype=complex)
            for i, c in enumerate(coeffs):
                for k in range(i + 1):
                    out[k] = out[k] + comb(i, k) * a ** (i - k) * b ** k * c
            return out

        return RationalMatrixFn(compose(self.numerator), compose(self.denominator), meta or self.meta)

    def map_coefficients(self, func, meta=None):
        return RationalMatrixFn(np.array([func(c) for c in self.numerator]), self.denominator, meta or self.meta)

    def scale(self, s, meta=None):
        return RationalMatrixFn(self.numerator * s, self.denominator, meta or self.meta)

    def times_polynomial_ratio(self, num_poly, den_poly, meta=None):
        """Multiply by the scalar rational function num_poly / den_poly."""
        N = self.numerator
        num = np.zeros((len(N) + len(num_poly) - 1,) + self.shape, dtype=complex)
        for j, pj in enumerate(num_poly):
            num[j : j + len(N)] += pj * N
        den = np.convolve(self.denominator, np.asarray(den_poly, dtype=complex))
        return RationalMatrixFn(num, den, meta or self.meta)

    @classmethod
    def constant(cls, m, meta=""):
        return cls(np.asarray(m, dtype=complex)[None], np.array([1.0]), meta)

    @classmethod
    def from_series(cls, s, meta=""):
        """Exact rational function equal to the finite sum of a series."""
        R = s.order
        return cls(s.coeffs[::-1], np.eye(R + 1)[R], meta)


def expand(f, order=DEFAULT_ORDER):
    """Coefficients of the expansion of ``f`` in powers of 1/u at infinity."""
    num, den = f.numerator, f.denominator
    p, q = len(num) - 1, len(den) - 1
    if p > q:
        raise NormalizationRequiredError(
            f"numerator degree {p} exceeds denominator degree {q}; f is unbounded at infinity"
        )
    # with t = 1/u: f = t**(q-p) * Nt(t) / Dt(t)
    Nt = num[::-1]
    Dt = den[::-1]
    shift = q - p
    n_terms = max(order + 1 - shift, 0)
    S = np.zeros((n_terms,) + f.shape, dtype=complex)
    for k in range(n_terms):
        acc = Nt[k].copy() if k < len(Nt) else np.zeros(f.shape, dtype=complex)
        for j in range(1, min(k, len(Dt) - 1) + 1):
            acc -= Dt[j] * S[k - j]
        S[k] = acc / Dt[0]
    out = np.zeros((order + 1,) + f.shape, dtype=complex)
    if n_terms:
        out[shift:] = S
    return MatrixSeries(out)
