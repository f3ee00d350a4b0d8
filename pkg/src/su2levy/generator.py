"""Hunt generators with finite Levy measure and their irrep matrices.

A generator is ``L f(g) = 1/2 sum a_ij X_i X_j f(g) + X_0 f(g) + int [f(gh) - f(g)] Pi(dh)``
with left-invariant fields X_j and a finite atomic Levy measure Pi. Its
matrix on the irrep k is ``L(U^{k*})(e)``.
"""

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .errors import (
    HypothesisHViolated,
    InconsistencyDetected,
    InvalidSpec,
    NotConjugateInvariant,
    NotPSD,
)
from .group import AlgebraElement, GroupElement, ZERO, bracket, conjugacy_angle
from .reps import casimir_eigenvalue, derived_basis, derived_rep, normalized_character, wigner_matrix

PSD_TOL = 1e-9
SYM_TOL = 1e-12
RANK_TOL = 1e-9
HERMITIAN_TOL = 1e-10
DRIFT_TOL = 1e-10
ISOTROPY_TOL = 1e-10


@dataclass(frozen=True)
class FixedJump:
    """Point mass at a group element; ``quaternion`` is kept verbatim for I/O."""

    quaternion: tuple

    @property
    def element(self):
        return GroupElement.from_array(self.quaternion)


@dataclass(frozen=True)
class ClassJump:
    """Uniform distribution on the conjugacy class of angle ``theta``."""

    theta: float


JumpSpec = Union[FixedJump, ClassJump]


@dataclass(frozen=True)
class LevyAtom:
    weight: float
    jump: JumpSpec


def _is_central(q, tol=1e-12):
    return abs(abs(q[0]) - 1.0) <= tol


@dataclass
class LevyMeasure:
    atoms: list = field(default_factory=list)

    def __post_init__(self):
        self.atoms = list(self.atoms)
        for atom in self.atoms:
            w = atom.weight
            if not (np.isfinite(w) and w > 0):
                raise InvalidSpec(f"Levy atom weight must be positive and finite, got {w!r}")
            jump = atom.jump
            if isinstance(jump, FixedJump):
                q = np.asarray(jump.quaternion, dtype=float)
                if q.shape != (4,) or not np.all(np.isfinite(q)):
                    raise InvalidSpec("fixed jump needs a finite 4-vector quaternion")
                if abs(q @ q - 1.0) > 1e-9:
                    raise InvalidSpec(f"fixed jump quaternion {q.tolist()} is not unit length")
                if q[0] / np.linalg.norm(q) >= 1.0 - 1e-12:
                    raise InvalidSpec("Levy measure may not charge the identity")
            elif isinstance(jump, ClassJump):
                th = jump.theta
                if not (np.isfinite(th) and 0.0 <= th <= 0.5):
                    raise InvalidSpec(f"class angle must lie in [0, 1/2], got {th!r}")
                if th <= 1e-12:
                    raise InvalidSpec("Levy measure may not charge the identity class")
            else:
                raise InvalidSpec(f"unknown jump type {type(jump).__name__}")

    @property
    def total_mass(self):
        return float(sum(a.weight for a in self.atoms))

    def __len__(self):
        return len(self.atoms)


@dataclass
class GeneratorSpec:
    diffusion: np.ndarray
    drift: AlgebraElement = ZERO
    levy: LevyMeasure = field(default_factory=LevyMeasure)

    def __post_init__(self):
        a = np.asarray(self.diffusion, dtype=float)
        if a.shape != (3, 3) or not np.all(np.isfinite(a)):
            raise InvalidSpec("diffusion must be a finite 3x3 matrix")
        if np.abs(a - a.T).max() > SYM_TOL:
            raise InvalidSpec("diffusion matrix is not symmetric")
        if np.linalg.eigvalsh(0.5 * (a + a.T)).min() < -PSD_TOL:
            raise NotPSD("diffusion matrix is not nonnegative definite")
        self.diffusion = a
        if not isinstance(self.drift, AlgebraElement):
            self.drift = AlgebraElement.from_array(self.drift)
        if not np.all(np.isfinite(self.drift.vec)):
            raise InvalidSpec("drift must be finite")
        if not isinstance(self.levy, LevyMeasure):
            self.levy = LevyMeasure(self.levy)

    @classmethod
    def heat(cls, c, levy=None):
        """Isotropic spec with generator c * Laplacian (diffusion matrix 2c I)."""
        return cls(2.0 * c * np.eye(3), ZERO, levy if levy is not None else LevyMeasure())

    # ---- JSON
    @classmethod
    def from_dict(cls, doc):
        try:
            atoms = []
            for raw in doc.get("levy", {}).get("atoms", []):
                kind = raw["type"]
                if kind == "fixed":
                    q = raw["quaternion"]
                    if len(q) != 4:
                        raise InvalidSpec("quaternion must have 4 entries")
                    jump = FixedJump(tuple(float(v) for v in q))
                elif kind == "class":
                    jump = ClassJump(float(raw["theta"]))
                else:
                    raise InvalidSpec(f"unknown atom type {kind!r}")
                atoms.append(LevyAtom(float(raw["weight"]), jump))
            diffusion = np.array(doc["diffusion"], dtype=float)
            drift = doc.get("drift", [0.0, 0.0, 0.0])
            if len(drift) != 3:
                raise InvalidSpec("drift must have 3 entries")
            return cls(diffusion, AlgebraElement(*(float(v) for v in drift)), LevyMeasure(atoms))
        except InvalidSpec:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidSpec(f"malformed generator spec: {exc}") from exc

    def to_dict(self):
        atoms = []
        for atom in self.levy.atoms:
            if isinstance(atom.jump, FixedJump):
                atoms.append({"weight": atom.weight, "type": "fixed", "quaternion": list(atom.jump.quaternion)})
            else:
                atoms.append({"weight": atom.weight, "type": "class", "theta": atom.jump.theta})
        return {
            "diffusion": self.diffusion.tolist(),
            "drift": [self.drift.v1, self.drift.v2, self.drift.v3],
            "levy": {"atoms": atoms},
        }

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidSpec("generator spec must be a JSON object")
        return cls.from_dict(doc)

    def to_json(self):
        return json.dumps(self.to_dict())


def load_spec(path):
    with open(path) as fh:
        return GeneratorSpec.from_json(fh.read())


# ------------------------------------------------------------------ ops


def square_root_rows(a):
    """Rows Y_i of the symmetric square root sigma of ``a`` (sigma^T sigma = a)."""
    a = np.asarray(a, dtype=float)
    evals, evecs = np.linalg.eigh(0.5 * (a + a.T))
    if evals.min() < -PSD_TOL:
        raise NotPSD(f"matrix has eigenvalue {evals.min():.3e} < 0")
    sigma = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    return [AlgebraElement.from_array(row) for row in sigma]


def _span_basis(vectors):
    if len(vectors) == 0:
        return np.zeros((0, 3))
    m = np.asarray(vectors, dtype=float)
    _, s, vt = np.linalg.svd(m, full_matrices=False)
    return vt[s > RANK_TOL]


def lie_span_dimension(ys):
    """Dimension of the Lie subalgebra generated by the given vectors."""
    basis = _span_basis([y.vec for y in ys])
    while 0 < len(basis) < 3:
        elems = [AlgebraElement.from_array(b) for b in basis]
        brackets = []
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                br = bracket(elems[i], elems[j]).vec
                n = np.linalg.norm(br)
                if n > 0:
                    brackets.append(br / n)
        new = _span_basis(list(basis) + brackets)
        if len(new) == len(basis):
            break
        basis = new
    return len(basis)


def hypothesis_H(spec):
    return lie_span_dimension(square_root_rows(spec.diffusion)) == 3


def _jump_matrix(atom, k):
    jump = atom.jump
    if isinstance(jump, ClassJump):
        return normalized_character(k, jump.theta) * np.eye(k + 1)
    return wigner_matrix(k, jump.element).conj().T


def diffusion_part(a, k):
    """-1/2 sum_i Y~_i^* Y~_i, written through a = sigma^T sigma."""
    d = derived_basis(k)
    a = np.asarray(a, dtype=float)
    return -0.5 * np.einsum("jl,jab,lbc->ac", a, d.conj().transpose(0, 2, 1), d)


def generator_matrix(spec, k):
    """L(U^{k*})(e) as a (k+1)x(k+1) complex matrix."""
    if k < 1:
        raise ValueError("irrep index must be >= 1")
    out = diffusion_part(spec.diffusion, k)
    if np.any(spec.drift.vec != 0):
        out = out + derived_rep(k, spec.drift)
    eye = np.eye(k + 1)
    for atom in spec.levy.atoms:
        out = out + atom.weight * (_jump_matrix(atom, k) - eye)
    return out


class SpectralReport(NamedTuple):
    max_real_part: float
    nonpositive: bool
    negative: bool
    hypothesis_H: bool
    violations: tuple


def spectral_check(spec, k, tol=1e-9):
    """Largest real part of the eigenvalues of generator_matrix(spec, k), with flags."""
    ev = np.linalg.eigvals(generator_matrix(spec, k))
    m = float(ev.real.max())
    h = hypothesis_H(spec)
    violations = []
    if m > tol:
        violations.append("eigenvalue with positive real part")
    if h and m >= 0.0:
        violations.append("(H) holds but some eigenvalue real part is not negative")
    return m, SpectralReport(m, m <= tol, m < 0.0, h, tuple(violations))


def _fixed_weight_table(levy):
    table = []
    for atom in levy.atoms:
        if not isinstance(atom.jump, FixedJump):
            continue
        q = np.asarray(atom.jump.element.q)
        for entry in table:
            if np.allclose(entry[0], q, rtol=0, atol=1e-9):
                entry[1] += atom.weight
                break
        else:
            table.append([q, atom.weight])
    return table


def _structural_inverse_invariant(spec):
    if spec.drift.norm() > DRIFT_TOL:
        return False
    table = _fixed_weight_table(spec.levy)
    for q, w in table:
        qinv = q * np.array([1.0, -1.0, -1.0, -1.0])
        partner = [e[1] for e in table if np.allclose(e[0], qinv, rtol=0, atol=1e-9)]
        if not partner or abs(partner[0] - w) > 1e-9 * max(1.0, w):
            return False
    return True


def is_inverse_invariant(spec, k_check=4):
    structural = _structural_inverse_invariant(spec)
    hermitian = True
    for k in range(1, k_check + 1):
        g = generator_matrix(spec, k)
        if np.linalg.norm(g - g.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(g)):
            hermitian = False
            break
    if structural != hermitian:
        raise InconsistencyDetected(
            f"structural inverse-invariance={structural} but Hermitian test={hermitian}"
        )
    return structural


def isotropic_constant(a):
    """c with a == c I (within tolerance), or None."""
    a = np.asarray(a, dtype=float)
    c = float(np.trace(a)) / 3.0
    if np.abs(a - c * np.eye(3)).max() > ISOTROPY_TOL:
        return None
    return c


def is_conjugate_invariant(spec):
    c = isotropic_constant(spec.diffusion)
    if c is None or c < -ISOTROPY_TOL:
        return False
    if spec.drift.norm() > DRIFT_TOL:
        return False
    for atom in spec.levy.atoms:
        if isinstance(atom.jump, FixedJump) and not _is_central(atom.jump.element.q):
            return False
    return True


def _atom_angle(atom):
    if isinstance(atom.jump, ClassJump):
        return atom.jump.theta
    return conjugacy_angle(atom.jump.element)


def lambda_delta(spec, k):
    """(1/(2(k+1))) sum_i Tr(Y~_i^* Y~_i), the diffusion decay rate on irrep k."""
    if not hypothesis_H(spec):
        raise HypothesisHViolated("lambda_delta needs hypothesis (H)")
    return _lambda_delta(spec.diffusion, k)


def _lambda_delta(a, k):
    return float(-np.trace(diffusion_part(a, k)).real / (k + 1))


def conjugate_rate(spec, k):
    """Exponent of a_k(t) = exp(t * rate) for a conjugate-invariant spec."""
    if not is_conjugate_invariant(spec):
        raise NotConjugateInvariant("conjugate_rate needs a conjugate-invariant spec")
    rate = -_lambda_delta(spec.diffusion, k)
    for atom in spec.levy.atoms:
        rate -= atom.weight * (1.0 - normalized_character(k, _atom_angle(atom)))
    return complex(rate)


class SpectralGap(NamedTuple):
    gap: float
    attained_k: int
    certified: bool
    rates: tuple  # slowest decay rate at k = 1..k_max


def decay_rate(spec, k, conjugate=None):
    """Slowest exponential decay rate of A_k(t)."""
    if conjugate is None:
        conjugate = is_conjugate_invariant(spec)
    if conjugate:
        return -conjugate_rate(spec, k).real
    return -float(np.linalg.eigvals(generator_matrix(spec, k)).real.max())


def diffusion_rate_floor(spec, k):
    """Lower bound on the decay rate at level k, valid for isotropic diffusion.

    With a = c I the diffusion part is -(c/2) casimir(k) I; drift is
    skew-Hermitian and the jump part has norm at most 2 lambda_Pi.
    """
    c = isotropic_constant(spec.diffusion)
    if c is None:
        return None
    return 0.5 * c * casimir_eigenvalue(k) - 2.0 * spec.levy.total_mass


def spectral_gap(spec, k_max):
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if not hypothesis_H(spec):
        raise HypothesisHViolated("spectral gap is only defined under hypothesis (H)")
    conj = is_conjugate_invariant(spec)
    rates = tuple(decay_rate(spec, k, conj) for k in range(1, k_max + 1))
    i = int(np.argmin(rates))
    gap = rates[i]
    floor = diffusion_rate_floor(spec, k_max + 1)
    c = isotropic_constant(spec.diffusion)
    certified = bool(c is not None and c > 0 and floor > gap)
    return SpectralGap(float(gap), i + 1, certified, rates)
