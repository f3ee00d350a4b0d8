"""SU(2) group elements and su(2) Lie-algebra arithmetic.

Group elements are unit quaternions ``q = (w, x, y, z)`` identified with the
2x2 matrix::

    M(q) = w*I + x*(i sigma_1) + y*(i sigma_2) + z*(i sigma_3)

so ``M(q) = [[w + iz, y + ix], [-y + ix, w - iz]]``. Under this map the
quaternion product that realizes ``M(p) M(q)`` is
``(w w' - v.v', w v' + w' v - v x v')`` (note the sign of the cross term).

Lie-algebra vectors are coordinates in the basis ``X_j = i sigma_j * BASIS_SCALE``
with ``BASIS_SCALE = 1 / (4 sqrt(2) pi)``. With this scale the Laplacian
``sum_j X_j^2`` acts on the spin-k/2 irrep as ``-((k+1)^2 - 1) / (32 pi^2)``.
"""

from dataclasses import dataclass

import numpy as np

BASIS_SCALE = 1.0 / (4.0 * np.sqrt(2.0) * np.pi)
UNIT_TOL = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
# 2x2 matrices of the algebra basis X_1, X_2, X_3
BASIS_MATRICES = 1j * BASIS_SCALE * PAULI


@dataclass(frozen=True)
class GroupElement:
    """Unit quaternion representing an element of SU(2)."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if not np.isfinite(n2) or abs(n2 - 1.0) > 1e-6:
            raise ValueError(f"quaternion is not unit length (|q|^2 = {n2!r})")
        if abs(n2 - 1.0) > UNIT_TOL:
            n = np.sqrt(n2)
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @classmethod
    def from_array(cls, q):
        q = np.asarray(q, dtype=float)
        n = np.linalg.norm(q)
        if n == 0.0:
            raise ValueError("zero quaternion")
        q = q / n
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=complex)
        return cls.from_array([m[0, 0].real, m[0, 1].imag, m[0, 1].real, m[0, 0].imag])

    @property
    def q(self):
        return np.array([self.w, self.x, self.y, self.z])

    def matrix(self):
        return quaternion_to_matrix(self.q)

    def __matmul__(self, other):
        return compose(self, other)

    def isclose(self, other, atol=1e-12):
        return bool(np.allclose(self.q, other.q, rtol=0.0, atol=atol))


IDENTITY = GroupElement(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class AlgebraElement:
    """Coordinates (v1, v2, v3) of a vector in su(2) w.r.t. X_1, X_2, X_3."""

    v1: float = 0.0
    v2: float = 0.0
    v3: float = 0.0

    @classmethod
    def from_array(cls, v):
        v = np.asarray(v, dtype=float).reshape(3)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def vec(self):
        return np.array([self.v1, self.v2, self.v3])

    def matrix(self):
        return np.einsum("j,jab->ab", self.vec, BASIS_MATRICES)

    def norm(self):
        return float(np.linalg.norm(self.vec))

    def __add__(self, other):
        return AlgebraElement.from_array(self.vec + other.vec)

    def __sub__(self, other):
        return AlgebraElement.from_array(self.vec - other.vec)

    def __neg__(self):
        return AlgebraElement(-self.v1, -self.v2, -self.v3)

    def __mul__(self, s):
        return AlgebraElement.from_array(float(s) * self.vec)

    __rmul__ = __mul__


ZERO = AlgebraElement()


def quaternion_to_matrix(q):
    """2x2 SU(2) matrix of a quaternion; broadcasts over leading axes."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = w + 1j * z
    m[..., 0, 1] = y + 1j * x
    m[..., 1, 0] = -y + 1j * x
    m[..., 1, 1] = w - 1j * z
    return m


def algebra_from_matrix(m):
    """Coordinates of a traceless skew-Hermitian 2x2 matrix in the X_j basis."""
    m = np.asarray(m, dtype=complex)
    # Tr(X_j X_l) = -2 BASIS_SCALE^2 delta_jl
    coords = np.array([np.trace(m @ b) for b in BASIS_MATRICES]) / (-2.0 * BASIS_SCALE**2)
    return AlgebraElement.from_array(coords.real)


# ---------------------------------------------------------------- array ops


def qmul(p, q):
    """Quaternion product realizing M(p) M(q); broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, pv = p[..., :1], p[..., 1:]
    qw, qv = q[..., :1], q[..., 1:]
    w = pw * qw - np.sum(pv * qv, axis=-1, keepdims=True)
    v = pw * qv + qw * pv - np.cross(pv, qv)
    return np.concatenate([w, v], axis=-1)


def qnormalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def qconj(q):
    q = np.array(q, dtype=float, copy=True)
    q[..., 1:] *= -1.0
    return q


def qexp(v):
    """Quaternion of exp(sum v_j X_j); broadcasts over leading axes of ``v``."""
    v = np.asarray(v, dtype=float)
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    phi = BASIS_SCALE * s
    # sin(phi)/s, with the s -> 0 limit BASIS_SCALE
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(s > 1e-300, np.sin(phi) / np.where(s > 1e-300, s, 1.0), BASIS_SCALE)
    return np.concatenate([np.cos(phi), ratio * v], axis=-1)


def qangle(q):
    """Conjugacy angle in [0, 1/2] of quaternion(s)."""
    w = np.clip(np.asarray(q, dtype=float)[..., 0], -1.0, 1.0)
    return np.arccos(w) / (2.0 * np.pi)


def adjoint_matrices(q):
    """3x3 matrix of Ad(g) on algebra coordinates; broadcasts over leading axes."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    r = np.empty(q.shape[:-1] + (3, 3))
    r[..., 0, 0] = 1 - 2 * (y * y + z * z)
    r[..., 0, 1] = 2 * (x * y + z * w)
    r[..., 0, 2] = 2 * (x * z - y * w)
    r[..., 1, 0] = 2 * (x * y - z * w)
    r[..., 1, 1] = 1 - 2 * (x * x + z * z)
    r[..., 1, 2] = 2 * (y * z + x * w)
    r[..., 2, 0] = 2 * (x * z + y * w)
    r[..., 2, 1] = 2 * (y * z - x * w)
    r[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return r


def torus_quaternion(theta):
    """Quaternion of diag(e^{2 pi i theta}, e^{-2 pi i theta})."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape + (4,))
    out[..., 0] = np.cos(2 * np.pi * theta)
    out[..., 3] = np.sin(2 * np.pi * theta)
    return out


def haar_quaternions(rng, n):
    """``n`` Haar-distributed unit quaternions, shape (n, 4)."""
    return qnormalize(rng.standard_normal((n, 4)))


# ------------------------------------------------------------ element ops


def compose(g, h):
    return GroupElement.from_array(qmul(g.q, h.q))


def inverse(g):
    return GroupElement(g.w, -g.x, -g.y, -g.z)


def exp_map(X):
    """exp of an algebra element, in closed axis-angle form.

    For ``s = |v|`` the rotation half-angle is ``s * BASIS_SCALE``, hence the
    conjugacy angle is ``s * BASIS_SCALE / (2 pi)`` while that is below 1/2.
    """
    return GroupElement.from_array(qexp(X.vec))


def conjugacy_angle(g):
    return float(qangle(g.q))


def adjoint(g, X):
    return AlgebraElement.from_array(adjoint_matrices(g.q) @ X.vec)


def bracket(X, Y):
    # [i s a.sigma, i s b.sigma] = -2 i s^2 (a x b).sigma
    return AlgebraElement.from_array(-2.0 * BASIS_SCALE * np.cross(X.vec, Y.vec))


def haar_sample(rng):
    """One Haar-distributed element; ``rng`` is a ``numpy.random.Generator``."""
    return GroupElement.from_array(rng.standard_normal(4))


def torus_element(theta):
    return GroupElement.from_array(torus_quaternion(theta))
