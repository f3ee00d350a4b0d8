"""Fourier coefficients, densities and convergence bounds for p_t.

The density of a Levy process at time t with respect to normalized Haar
measure is expanded as::

    p_t(g) = 1 + sum_{k>=1} (k+1) Tr[A_k(t) U^k(g)],   A_k(t) = exp(t L(U^{k*})(e))

For conjugate-invariant generators A_k(t) = a_k(t) I and the series becomes
``1 + sum (k+1) a_k(t) chi_k(theta)``.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.special import erfcx

from .errors import NotConjugateInvariant, NotStable, SmallTimeUnresolved
from .generator import (
    conjugate_rate,
    generator_matrix,
    hypothesis_H,
    is_conjugate_invariant,
    isotropic_constant,
    spectral_gap,
)
from .group import GroupElement
from .reps import angle_weight, character, wigner_matrix

KMAX_CAP = 200
TAIL_TARGET = 1e-10
SMALL_TIME_TAIL = 1e-3
QUAD_POINTS = 2048
IMAG_TOL = 1e-8


# ------------------------------------------------------------- numerics


def matrix_exp_pade(m):
    """Scaling-and-squaring Pade exponential (scipy's expm)."""
    return scipy.linalg.expm(np.asarray(m))


def matrix_exp_hermitian(m):
    """exp of a Hermitian matrix through its eigendecomposition."""
    m = np.asarray(m)
    evals, evecs = np.linalg.eigh(m)
    return (evecs * np.exp(evals)) @ evecs.conj().T


def matrix_exp(m):
    m = np.asarray(m)
    if m.size and np.allclose(m, m.conj().T, rtol=0.0, atol=1e-14 * max(1.0, np.abs(m).max())):
        out = matrix_exp_hermitian(0.5 * (m + m.conj().T))
        return out.real if np.isrealobj(m) else out
    return matrix_exp_pade(m)


@lru_cache(maxsize=8)
def _gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (b - a) * x + 0.5 * (b + a)
    w = 0.5 * (b - a) * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def angle_quadrature(n=QUAD_POINTS):
    """Gauss-Legendre nodes and weights on [0, 1/2]."""
    return _gauss_legendre(n, 0.0, 0.5)


def _neumaier(terms):
    """Compensated sum over the first axis."""
    terms = np.asarray(terms)
    total = np.zeros(terms.shape[1:], dtype=terms.dtype)
    comp = np.zeros_like(total)
    for term in terms:
        s = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - s) + term, (term - s) + total)
        total = s
    return total + comp


def decay_bound(m, n_grid=400):
    """Rate lambda and constant K with ||e^{tM}||_F <= K e^{-lambda t}.

    ``lambda`` sits just below the spectral abscissa; ``K`` is the maximum of
    ``||e^{tM}||_F e^{lambda t}`` over a geometric grid on [0, 50/lambda],
    polished by a bounded scalar search around the best grid point. K is
    empirical, not proved.
    """
    m = np.asarray(m, dtype=complex)
    top = float(np.linalg.eigvals(m).real.max())
    if top >= 0.0:
        raise NotStable(f"spectral abscissa {top!r} is not negative")
    lam = -top - 1e-9 * abs(top)

    def scaled(t):
        return np.linalg.norm(matrix_exp_pade(t * m)) * np.exp(lam * t)

    t_hi = 50.0 / lam
    grid = np.concatenate([[0.0], np.geomspace(1e-6 * t_hi, t_hi, n_grid)])
    vals = np.array([scaled(t) for t in grid])
    i = int(np.argmax(vals))
    K = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = scipy.optimize.minimize_scalar(lambda t: -scaled(t), bounds=(lo, hi), method="bounded",
                                             options={"xatol": 1e-12 * t_hi})
        K = max(K, float(-res.fun))
    return lam, K


# --------------------------------------------------------- coefficients


@dataclass
class CoefficientSet:
    """A_k(t) for k = 1..k_max (``matrices``) or scalars a_k(t) (``scalars``)."""

    t: float
    k_max: int
    mode: str  # "class" or "general"
    matrices: list = field(default_factory=list)
    scalars: Optional[np.ndarray] = None

    def matrix(self, k):
        if self.mode == "class":
            return self.scalars[k - 1] * np.eye(k + 1)
        return self.matrices[k - 1]

    def traces(self):
        """Tr A_k(t), k = 1..k_max."""
        if self.mode == "class":
            return self.scalars * np.arange(2, self.k_max + 2)
        return np.array([np.trace(a) for a in self.matrices])


def coefficients(spec, t, k_max, force_general=False):
    if t <= 0:
        raise ValueError("t must be positive")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if not force_general and is_conjugate_invariant(spec):
        rates = np.array([conjugate_rate(spec, k).real for k in range(1, k_max + 1)])
        return CoefficientSet(t, k_max, "class", scalars=np.exp(t * rates))
    mats = [matrix_exp(t * generator_matrix(spec, k)) for k in range(1, k_max + 1)]
    return CoefficientSet(t, k_max, "general", matrices=mats)


# ------------------------------------------------------- tail estimates


@dataclass(frozen=True)
class TailBound:
    value: float
    certified: bool


def _gaussian_tail(alpha, shift, t, n_first):
    """Bound on sum_{n >= n_first} n^2 exp(-(alpha (n^2 - 1) - shift) t)."""
    s = alpha * t
    offset = (alpha + shift) * t
    n_star = max(n_first, int(np.ceil(1.0 / np.sqrt(s))) + 1)
    n = np.arange(n_first, n_star, dtype=float)
    explicit = float(np.sum(n**2 * np.exp(-s * n**2 + offset)))
    b = n_star - 1.0
    # integral of x^2 exp(-s x^2) from b to infinity, exp(-s b^2) factored out
    rest = b / (2 * s) + np.sqrt(np.pi) / (4 * s**1.5) * erfcx(np.sqrt(s) * b)
    return explicit + float(rest * np.exp(-s * b * b + offset))


def _certified_tail(spec, t, k_max, power=1):
    c = isotropic_constant(spec.diffusion)
    if c is None or c <= 0:
        return None
    alpha = 0.5 * c / (32.0 * np.pi**2)
    return _gaussian_tail(alpha, 2.0 * spec.levy.total_mass, power * t, k_max + 2)


def _term_sizes(coef):
    """(k+1)^{3/2} ||A_k||_F bounds |(k+1) Tr(A_k U^k)|."""
    k = np.arange(1, coef.k_max + 1)
    if coef.mode == "class":
        return (k + 1.0) ** 2 * np.abs(coef.scalars)
    return np.array([(kk + 1.0) ** 1.5 * np.linalg.norm(a) for kk, a in zip(k, coef.matrices)])


def _heuristic_tail(sizes):
    if len(sizes) < 2 or sizes[-1] == 0.0:
        return float(sizes[-1]) if len(sizes) else np.inf
    r = sizes[-1] / sizes[-2] if sizes[-2] > 0 else 0.0
    if r >= 1.0:
        return np.inf
    return float(sizes[-1] * r / (1.0 - r))


def tail_bound(spec, t, k_max, coef=None):
    """Sup-norm truncation error of the k_max partial sum.

    Certified (closed-form comparison with a Gaussian integral) when the
    diffusion matrix is c I with c > 0; otherwise a geometric extrapolation
    of the last computed terms.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    val = _certified_tail(spec, t, k_max)
    if val is not None:
        return TailBound(val, True)
    if coef is None or coef.k_max != k_max:
        coef = coefficients(spec, t, k_max)
    return TailBound(_heuristic_tail(_term_sizes(coef)), False)


def truncation_error(spec, t, k_max):
    return tail_bound(spec, t, k_max).value


def _l2_tail(spec, t, k_max, coef):
    val = _certified_tail(spec, t, k_max, power=2)
    if val is not None:
        return val
    sizes = _term_sizes(coef) ** 2 / (np.arange(2, coef.k_max + 2))
    return _heuristic_tail(sizes)


def choose_k_max(spec, t, target=TAIL_TARGET, cap=KMAX_CAP):
    """Smallest cutoff whose tail estimate is below ``target``."""
    if t <= 0:
        raise ValueError("t must be positive")
    if _certified_tail(spec, t, 1) is not None:
        if _certified_tail(spec, t, cap) > SMALL_TIME_TAIL:
            raise SmallTimeUnresolved(f"t = {t!r} is too small for a {cap}-term series")
        for k in range(1, cap + 1):
            if _certified_tail(spec, t, k) < target:
                return k
        return cap
    coef = None
    conj = is_conjugate_invariant(spec)
    mats = []
    rates = []
    for k in range(1, cap + 1):
        if conj:
            rates.append(conjugate_rate(spec, k).real)
            coef = CoefficientSet(t, k, "class", scalars=np.exp(t * np.array(rates)))
        else:
            mats.append(matrix_exp(t * generator_matrix(spec, k)))
            coef = CoefficientSet(t, k, "general", matrices=list(mats))
        if k >= 3 and _heuristic_tail(_term_sizes(coef)) < target:
            return k
    if _heuristic_tail(_term_sizes(coef)) > SMALL_TIME_TAIL:
        raise SmallTimeUnresolved(f"t = {t!r} is too small for a {cap}-term series")
    return cap


def _resolve(spec, t, k_max, force_general=False):
    if t <= 0:
        raise ValueError("t must be positive")
    if k_max is None:
        k_max = choose_k_max(spec, t)
    else:
        big = _certified_tail(spec, t, KMAX_CAP)
        if big is not None and big > SMALL_TIME_TAIL:
            raise SmallTimeUnresolved(f"t = {t!r} is too small for a {KMAX_CAP}-term series")
    coef = coefficients(spec, t, k_max, force_general=force_general)
    return coef, tail_bound(spec, t, k_max, coef).value


# -------------------------------------------------------------- densities


def density_at(spec, t, g, k_max=None):
    """p_t(g) from the matrix-coefficient series; returns (value, tail_estimate)."""
    coef, tail = _resolve(spec, t, k_max, force_general=True)
    if not isinstance(g, GroupElement):
        g = GroupElement.from_array(g)
    m = g.matrix()
    terms = np.array([(k + 1) * np.trace(coef.matrix(k) @ wigner_matrix(k, m)) for k in range(1, coef.k_max + 1)])
    total = 1.0 + _neumaier(terms)
    if abs(total.imag) > IMAG_TOL:
        raise ArithmeticError(f"density series has imaginary residual {total.imag:.3e}")
    return float(total.real), tail


def _class_series(b, theta):
    """1 + sum_k b_k chi_k(theta), b indexed from k = 1."""
    theta = np.asarray(theta, dtype=float)
    terms = np.array([b[k - 1] * character(k, theta) for k in range(1, len(b) + 1)])
    return 1.0 + _neumaier(terms)


def density_class(spec, t, theta, k_max=None):
    """Character series for a conjugate-invariant spec; (value, tail_estimate)."""
    if not is_conjugate_invariant(spec):
        raise NotConjugateInvariant("density_class needs a conjugate-invariant spec")
    coef, tail = _resolve(spec, t, k_max)
    b = coef.scalars * np.arange(2, coef.k_max + 2)
    val = _class_series(b, theta)
    return (val if np.ndim(val) else float(val)), tail


def class_marginal(spec, t, theta, k_max=None, force_general=False):
    """Haar average of p_t over the conjugacy class of angle theta.

    Averaging U^k over a class gives psi_k I, so the marginal is
    ``1 + sum_k Tr(A_k) chi_k(theta)``; for conjugate-invariant specs this is
    density_class. Returns (value, tail_estimate).
    """
    coef, tail = _resolve(spec, t, k_max, force_general=force_general)
    tr = coef.traces()
    if np.max(np.abs(np.imag(tr)), initial=0.0) > IMAG_TOL:
        raise ArithmeticError("class marginal has a non-real coefficient")
    val = _class_series(np.real(tr), theta)
    return (val if np.ndim(val) else float(val)), tail


def heat_kernel(c, t, theta, n_max=None):
    """Heat kernel of c * Laplacian on SU(2) as a function of the conjugacy angle."""
    if n_max is None:
        n = 1
        while n < 100000:
            nxt = n + 1
            if nxt**2 * np.exp(-c * (nxt**2 - 1) * t / (32 * np.pi**2)) < 1e-14:
                break
            n = nxt
        n_max = n
    theta = np.asarray(theta, dtype=float)
    n = np.arange(1, n_max + 1)
    terms = np.array([nn * np.exp(-c * (nn * nn - 1) * t / (32 * np.pi**2)) * character(nn - 1, theta) for nn in n])
    val = _neumaier(terms)
    return val if val.ndim else float(val)


# ---------------------------------------------------------------- norms


def l2_norm_sq(spec, t, k_max, coef=None):
    """||p_t - 1||_2^2 by Parseval; returns (value, tail_estimate)."""
    if coef is None:
        coef = coefficients(spec, t, k_max)
    k = np.arange(1, coef.k_max + 1)
    if coef.mode == "class":
        terms = (k + 1.0) ** 2 * np.abs(coef.scalars) ** 2
    else:
        terms = np.array([(kk + 1.0) * np.vdot(a, a).real for kk, a in zip(k, coef.matrices)])
    return float(_neumaier(terms)), float(_l2_tail(spec, t, coef.k_max, coef))


def tv_bounds(spec, t, k_max, coef=None):
    """Lower and upper bounds on ||mu_t - Haar||_tv."""
    if coef is None:
        coef = coefficients(spec, t, k_max)
    if coef.mode == "class":
        lower = float(np.abs(coef.scalars).max())
    else:
        lower = float(max(np.abs(np.diag(a)).max() for a in coef.matrices))
    l2, tail = l2_norm_sq(spec, t, k_max, coef)
    upper = float(np.sqrt(l2 + tail))
    return lower, upper


def sup_bound(spec, t, k_max, coef=None):
    """sum_k (k+1)^2 ||A_k||_2 + tail, an upper bound on ||p_t - 1||_inf."""
    if coef is None:
        coef = coefficients(spec, t, k_max)
    k = np.arange(1, coef.k_max + 1)
    if coef.mode == "class":
        s = np.sum((k + 1.0) ** 2 * np.abs(coef.scalars))
    else:
        s = np.sum([(kk + 1.0) ** 2 * np.linalg.norm(a, 2) for kk, a in zip(k, coef.matrices)])
    return float(s) + tail_bound(spec, t, coef.k_max, coef).value


def convergence_report(spec, t, k_max=None):
    if k_max is None:
        k_max = choose_k_max(spec, t)
    coef = coefficients(spec, t, k_max)
    l2, _ = l2_norm_sq(spec, t, k_max, coef)
    lower, upper = tv_bounds(spec, t, k_max, coef)
    if hypothesis_H(spec):
        sg = spectral_gap(spec, k_max)
        gap, certified = sg.gap, sg.certified
    else:
        gap, certified = None, False
    return {"t": t, "k_max": k_max, "l2": l2, "tv_lower": lower, "tv_upper": upper,
            "gap": gap, "certified": certified}


def report_json(report):
    return json.dumps(report)


# -------------------------------------------------------------- profiles


@dataclass
class DensityProfile:
    theta: np.ndarray
    density: np.ndarray
    tail_estimate: float
    k_max: int

    @property
    def weighted_density(self):
        return angle_weight(self.theta) * self.density

    def to_csv(self):
        buf = io.StringIO()
        buf.write("theta,density,weighted_density,tail_estimate\n")
        for th, d, wd in zip(self.theta, self.density, self.weighted_density):
            buf.write(f"{th:.17g},{d:.17g},{wd:.17g},{self.tail_estimate:.17g}\n")
        return buf.getvalue()

    @staticmethod
    def parse_csv(text):
        """Rows of a profile CSV as float arrays (theta, density, weighted, tail)."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["theta", "density", "weighted_density", "tail_estimate"]:
            raise ValueError("not a density profile CSV")
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
        return data.reshape(-1, 4)

    @staticmethod
    def emit_rows(data):
        lines = ["theta,density,weighted_density,tail_estimate"]
        lines += [",".join(f"{v:.17g}" for v in row) for row in data]
        return "\n".join(lines) + "\n"


def density_profile(spec, t, grid, k_max=None, force_general=False):
    theta = np.linspace(0.0, 0.5, grid)
    if not force_general and is_conjugate_invariant(spec):
        coef, tail = _resolve(spec, t, k_max)
        dens = _class_series(coef.scalars * np.arange(2, coef.k_max + 2), theta)
    else:
        coef, tail = _resolve(spec, t, k_max, force_general=True)
        dens = _class_series(np.real(coef.traces()), theta)
    return DensityProfile(theta, np.asarray(dens, dtype=float), float(tail), coef.k_max)


def angle_cdf_terms(k, theta):
    """int_0^theta 4 sin^2(2 pi u) chi_k(u) du in closed form."""
    theta = np.asarray(theta, dtype=float)
    if k == 0:
        return 2.0 * theta - np.sin(4 * np.pi * theta) / (2 * np.pi)
    return np.sin(2 * np.pi * k * theta) / (np.pi * k) - np.sin(2 * np.pi * (k + 2) * theta) / (np.pi * (k + 2))


def marginal_cdf(b, theta):
    """CDF of 4 sin^2(2 pi u) (1 + sum_k b_k chi_k(u)) on [0, theta]."""
    theta = np.asarray(theta, dtype=float)
    terms = [angle_cdf_terms(0, theta)] + [b[k - 1] * angle_cdf_terms(k, theta) for k in range(1, len(b) + 1)]
    return _neumaier(np.array(terms))
