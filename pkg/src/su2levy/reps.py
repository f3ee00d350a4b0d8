"""Irreducible representations of SU(2) and Weyl-formula evaluation.

The spin-k/2 irrep is realized on homogeneous degree-k polynomials in two
variables (the k-th symmetric power of the defining representation) with the
orthonormal basis ``f_j = sqrt(C(k, j)) x1^(k-j) x2^j``, j = 0..k.
"""

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .errors import InvalidRootDatum, NonDominantWeight, NonIntegerDimension, SingularTorusPoint
from .group import BASIS_MATRICES, BASIS_SCALE, GroupElement

CHARACTER_SWITCH = 1e-6


def character(k, theta):
    """chi_k(theta) = sin(2 pi (k+1) theta) / sin(2 pi theta); vectorized in theta.

    Near theta in {0, 1/2} the ratio is replaced by the cosine sum
    ``sum_j cos(2 pi (k - 2j) theta)``.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.sin(2 * np.pi * theta)
    near = np.abs(s) < CHARACTER_SWITCH
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(2 * np.pi * (k + 1) * theta) / np.where(near, 1.0, s)
    if np.any(near):
        th = theta[near]
        m = k - 2 * np.arange(k + 1)
        out = np.array(out, copy=True)
        out[near] = np.cos(2 * np.pi * np.multiply.outer(th, m)).sum(axis=-1)
    return out if out.ndim else float(out)


def normalized_character(k, theta):
    return character(k, theta) / (k + 1)


def angle_weight(theta):
    """Density of the conjugacy angle of a Haar-random element, 4 sin^2(2 pi theta)."""
    return 4.0 * np.sin(2 * np.pi * np.asarray(theta, dtype=float)) ** 2


@lru_cache(maxsize=None)
def _basis_norms(k):
    return np.sqrt(np.array([comb(k, j) for j in range(k + 1)], dtype=float))


@lru_cache(maxsize=None)
def _binomials(k):
    return np.array([[comb(n, s) for s in range(k + 1)] for n in range(k + 1)], dtype=float)


def sym_power(k, m):
    """k-th symmetric power of a 2x2 matrix in the orthonormal monomial basis."""
    m = np.asarray(m, dtype=complex)
    a, c = m[0, 0], m[1, 0]
    b, d = m[0, 1], m[1, 1]
    binom = _binomials(k)
    s_all = np.arange(k + 1)
    pa = a ** s_all
    pb = b ** s_all
    pc = c ** s_all
    pd = d ** s_all
    coef = np.empty((k + 1, k + 1), dtype=complex)
    for j in range(k + 1):
        n1 = k - j
        s = s_all[: n1 + 1]
        first = binom[n1, : n1 + 1] * pa[n1 - s] * pc[s]
        r = s_all[: j + 1]
        second = binom[j, : j + 1] * pb[j - r] * pd[r]
        coef[:, j] = np.convolve(first, second)
    nrm = _basis_norms(k)
    return coef * (nrm[None, :] / nrm[:, None])


def wigner_matrix(k, g):
    """U^k(g), the (k+1)x(k+1) unitary matrix of the spin-k/2 irrep."""
    if isinstance(g, GroupElement):
        g = g.matrix()
    return sym_power(k, g)


def _sym_derivation(k, a):
    """Lie-algebra action of the symmetric power for a 2x2 matrix ``a``."""
    out = np.zeros((k + 1, k + 1), dtype=complex)
    j = np.arange(k + 1)
    out[j, j] = (k - j) * a[0, 0] + j * a[1, 1]
    out[j[:-1] + 1, j[:-1]] = (k - j[:-1]) * a[1, 0]
    out[j[1:] - 1, j[1:]] = j[1:] * a[0, 1]
    nrm = _basis_norms(k)
    return out * (nrm[None, :] / nrm[:, None])


def derived_rep(k, X):
    """d/dt U^k(exp(tX))^* at t = 0 (skew-Hermitian).

    ``X`` is an AlgebraElement or a coordinate 3-vector. Note the adjoint:
    the map X -> derived_rep(k, X) reverses brackets.
    """
    vec = X.vec if hasattr(X, "vec") else np.asarray(X, dtype=float)
    a = np.einsum("j,jab->ab", vec, BASIS_MATRICES)
    return -_sym_derivation(k, a)


@lru_cache(maxsize=64)
def _derived_basis(k):
    mats = np.stack([-_sym_derivation(k, BASIS_MATRICES[j]) for j in range(3)])
    mats.setflags(write=False)
    return mats


def derived_basis(k):
    """Stack of derived_rep(k, X_j) for j = 1, 2, 3, shape (3, k+1, k+1)."""
    return _derived_basis(k)


def casimir_eigenvalue(k):
    return ((k + 1) ** 2 - 1) / (32.0 * np.pi**2)


# ----------------------------------------------------------- root data


@dataclass
class RootDatum:
    """Numeric root data of a compact semisimple group.

    Roots and weights are coordinate vectors in t*, torus points H are
    coordinate vectors in t with ``alpha(H) = alpha . H``; ``gram`` is the
    inner product on t*. Weyl elements act on t as ``H -> W @ H``.
    """

    rank: int
    positive_roots: np.ndarray
    gram: np.ndarray
    weyl: list = field(default_factory=list)  # [(matrix, det), ...]
    rho: np.ndarray = field(init=False)

    def __post_init__(self):
        self.positive_roots = np.atleast_2d(np.asarray(self.positive_roots, dtype=float))
        self.gram = np.atleast_2d(np.asarray(self.gram, dtype=float))
        self.weyl = [(np.atleast_2d(np.asarray(m, dtype=float)), int(d)) for m, d in self.weyl]
        r = self.rank
        if self.positive_roots.shape[1] != r or self.gram.shape != (r, r):
            raise InvalidRootDatum("root/gram shapes do not match rank")
        if not np.allclose(self.gram, self.gram.T, atol=1e-12):
            raise InvalidRootDatum("gram matrix is not symmetric")
        if np.linalg.eigvalsh(self.gram).min() <= 0:
            raise InvalidRootDatum("gram matrix is not positive definite")
        self.rho = 0.5 * self.positive_roots.sum(axis=0)
        roots = np.vstack([self.positive_roots, -self.positive_roots])
        if not self.weyl:
            raise InvalidRootDatum("Weyl group must be supplied")
        for m, d in self.weyl:
            if m.shape != (r, r) or d not in (-1, 1):
                raise InvalidRootDatum("bad Weyl element")
            if abs(np.linalg.det(m) - d) > 1e-9:
                raise InvalidRootDatum("Weyl element determinant does not match its sign")
            image = roots @ m  # alpha o w as row vectors
            for row in image:
                if not np.any(np.all(np.abs(roots - row) < 1e-9, axis=1)):
                    raise InvalidRootDatum("Weyl element does not permute the roots")

    def inner(self, u, v):
        return float(np.asarray(u, dtype=float) @ self.gram @ np.asarray(v, dtype=float))

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(
                rank=int(doc["rank"]),
                positive_roots=doc["positive_roots"],
                gram=doc["gram"],
                weyl=[(w["matrix"], w["det"]) for w in doc["weyl"]],
            )
        except (KeyError, TypeError) as exc:
            raise InvalidRootDatum(f"malformed root datum: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        return {
            "rank": self.rank,
            "positive_roots": self.positive_roots.tolist(),
            "gram": self.gram.tolist(),
            "weyl": [{"matrix": m.tolist(), "det": d} for m, d in self.weyl],
        }


def su2_root_datum():
    """SU(2): H <-> theta, alpha(H) = 2 theta, rho = alpha/2, <rho, rho> = 1/(32 pi^2)."""
    return RootDatum(
        rank=1,
        positive_roots=[[2.0]],
        gram=[[1.0 / (32.0 * np.pi**2)]],
        weyl=[([[1.0]], 1), ([[-1.0]], -1)],
    )


def _check_dominant(rd, beta):
    beta = np.asarray(beta, dtype=float).reshape(rd.rank)
    for alpha in rd.positive_roots:
        if rd.inner(alpha, beta) < -1e-12:
            raise NonDominantWeight(f"weight {beta.tolist()} is not dominant")
    return beta


def weyl_dimension(rd, beta):
    """prod over positive roots of <alpha, beta + rho> / <alpha, rho>, as an int."""
    beta = _check_dominant(rd, beta)
    val = 1.0
    for alpha in rd.positive_roots:
        val *= rd.inner(alpha, beta + rd.rho) / rd.inner(alpha, rd.rho)
    n = round(val)
    if abs(val - n) > 1e-6 or n < 1:
        raise NonIntegerDimension(f"Weyl dimension {val!r} is not a positive integer")
    return int(n)


def weyl_casimir(rd, beta):
    """<beta + rho, beta + rho> - <rho, rho>."""
    beta = np.asarray(beta, dtype=float).reshape(rd.rank)
    return rd.inner(beta + rd.rho, beta + rd.rho) - rd.inner(rd.rho, rd.rho)


def weyl_character_torus(rd, beta, H, tol=1e-9):
    """Weyl character formula f_beta(H) at a regular torus point."""
    beta = np.asarray(beta, dtype=float).reshape(rd.rank)
    H = np.asarray(H, dtype=float).reshape(rd.rank)
    denom = np.exp(2j * np.pi * (rd.rho @ H))
    for alpha in rd.positive_roots:
        denom *= 1.0 - np.exp(-2j * np.pi * (alpha @ H))
    if abs(denom) < tol:
        raise SingularTorusPoint(f"H = {H.tolist()} is singular")
    shifted = beta + rd.rho
    num = sum(d * np.exp(2j * np.pi * (shifted @ (m @ H))) for m, d in rd.weyl)
    return complex(num / denom)
