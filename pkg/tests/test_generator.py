import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _specs import C_NORM, heat_spec, random_atoms, random_psd, random_spec
from su2levy.errors import HypothesisHViolated, InvalidSpec, NotConjugateInvariant, NotPSD
from su2levy.generator import (
    ClassJump,
    FixedJump,
    GeneratorSpec,
    LevyAtom,
    LevyMeasure,
    conjugate_rate,
    decay_rate,
    generator_matrix,
    hypothesis_H,
    is_conjugate_invariant,
    is_inverse_invariant,
    lambda_delta,
    lie_span_dimension,
    spectral_check,
    spectral_gap,
    square_root_rows,
)
from su2levy.group import AlgebraElement, haar_quaternions, qconj, qmul, torus_quaternion
from su2levy.reps import casimir_eigenvalue, normalized_character, wigner_matrix


def _spec(a=None, drift=(0, 0, 0), atoms=()):
    return GeneratorSpec(np.zeros((3, 3)) if a is None else np.asarray(a, float), drift, LevyMeasure(list(atoms)))


# ---- square roots and (H)


def test_square_root_rows_examples():
    ys = square_root_rows(np.eye(3))
    assert np.allclose([y.vec for y in ys], np.eye(3))
    assert all(y.norm() == 0 for y in square_root_rows(np.zeros((3, 3))))
    ys = np.array([y.vec for y in square_root_rows(np.diag([4.0, 1.0, 0.0]))])
    assert np.allclose(np.abs(ys), np.diag([2.0, 1.0, 0.0]), atol=1e-12)


def test_square_root_reconstructs(rng):
    for _ in range(20):
        a = random_psd(rng, rank=int(rng.integers(1, 4)))
        s = np.array([y.vec for y in square_root_rows(a)])
        assert np.allclose(s.T @ s, a, atol=1e-9 * C_NORM)
    with pytest.raises(NotPSD):
        square_root_rows(np.diag([1.0, -1.0, 0.0]))


def test_hypothesis_H_examples():
    assert hypothesis_H(_spec(np.eye(3)))
    assert not hypothesis_H(_spec())
    assert hypothesis_H(_spec(np.diag([1.0, 1.0, 0.0])))
    # rank one: a single direction generates a torus only
    assert not hypothesis_H(_spec(np.diag([1.0, 0.0, 0.0])))
    assert lie_span_dimension([AlgebraElement(1, 1, 0), AlgebraElement(2, 2, 0)]) == 1


# ---- spec validation and JSON


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        _spec(np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(NotPSD):
        _spec(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidSpec):
        LevyMeasure([LevyAtom(1.0, FixedJump((1.0, 0.0, 0.0, 0.0)))])
    with pytest.raises(InvalidSpec):
        LevyMeasure([LevyAtom(-1.0, ClassJump(0.2))])
    with pytest.raises(InvalidSpec):
        LevyMeasure([LevyAtom(1.0, ClassJump(0.7))])
    with pytest.raises(InvalidSpec):
        LevyMeasure([LevyAtom(1.0, FixedJump((0.5, 0.5, 0.0, 0.0)))])


def test_json_round_trip_bit_exact(rng):
    for _ in range(20):
        spec = random_spec(rng)
        text = spec.to_json()
        back = GeneratorSpec.from_json(text)
        assert back.to_json() == text
        assert np.array_equal(back.diffusion, spec.diffusion)
        assert np.array_equal(back.drift.vec, spec.drift.vec)
        assert back.levy.atoms == spec.levy.atoms


def test_from_json_rejects_garbage():
    with pytest.raises(InvalidSpec):
        GeneratorSpec.from_json("{not json")
    with pytest.raises(InvalidSpec):
        GeneratorSpec.from_json('{"diffusion": [[1, 0], [0, 1]]}')


# ---- generator matrices


@pytest.mark.parametrize("k", range(1, 8))
def test_heat_generator_is_scalar(k):
    c = 2.7
    g = generator_matrix(heat_spec(c), k)
    assert np.abs(g + c * casimir_eigenvalue(k) * np.eye(k + 1)).max() < 1e-12 * max(1, c * casimir_eigenvalue(k))


def test_class_atom_generator_against_monte_carlo():
    lam, th = 1.7, 0.13
    spec = _spec(atoms=[LevyAtom(lam, ClassJump(th))])
    rng = np.random.default_rng(5)
    h = haar_quaternions(rng, 4000)
    jumps = qmul(qmul(h, torus_quaternion(th)), qconj(h))
    from su2levy.group import GroupElement

    for k in (1, 2, 3):
        g = generator_matrix(spec, k)
        assert np.abs(g - lam * (normalized_character(k, th) - 1) * np.eye(k + 1)).max() < 1e-14
        avg = np.mean([wigner_matrix(k, GroupElement.from_array(q)).conj().T for q in jumps], axis=0)
        mc = lam * (avg - np.eye(k + 1))
        assert np.abs(mc - g).max() < 5 * lam / np.sqrt(len(jumps))


def test_zero_spec_generator_and_k_guard():
    assert np.abs(generator_matrix(_spec(), 3)).max() == 0
    with pytest.raises(ValueError):
        generator_matrix(_spec(), 0)


def test_spectral_check_examples(rng):
    c = 5.0
    m, rep = spectral_check(heat_spec(c), 1)
    assert m == pytest.approx(-3 * c / (32 * np.pi**2), rel=1e-12)
    assert rep.negative and rep.hypothesis_H and not rep.violations
    m, rep = spectral_check(_spec(), 2)
    assert m == 0 and rep.nonpositive and not rep.negative
    for _ in range(30):
        spec = random_spec(rng)
        for k in range(1, 7):
            m, rep = spectral_check(spec, k)
            assert m < 0 and not rep.violations


# ---- invariance


def test_inverse_invariance_examples(rng):
    assert is_inverse_invariant(heat_spec(1.0))
    assert not is_inverse_invariant(_spec(np.eye(3), drift=(1.0, 0, 0)))
    q = tuple(haar_quaternions(rng, 1)[0])
    assert not is_inverse_invariant(_spec(np.eye(3), atoms=[LevyAtom(1.0, FixedJump(q))]))
    qi = (q[0], -q[1], -q[2], -q[3])
    assert is_inverse_invariant(_spec(np.eye(3), atoms=[LevyAtom(1.0, FixedJump(q)), LevyAtom(1.0, FixedJump(qi))]))
    # -e is the only non-identity element equal to its own inverse
    assert is_inverse_invariant(_spec(np.eye(3), atoms=[LevyAtom(1.0, FixedJump((-1.0, 0.0, 0.0, 0.0)))]))
    assert not is_inverse_invariant(_spec(np.eye(3), atoms=[LevyAtom(1.0, FixedJump((0.0, 1.0, 0.0, 0.0)))]))


def test_symmetric_specs_are_hermitian(rng):
    for _ in range(30):
        spec = random_spec(rng, symmetric=True)
        assert is_inverse_invariant(spec)
        for k in range(1, 6):
            g = generator_matrix(spec, k)
            assert np.abs(g - g.conj().T).max() < 1e-10


def test_conjugate_invariance_examples(rng):
    assert is_conjugate_invariant(heat_spec(1.0, [LevyAtom(1.0, ClassJump(0.3))]))
    assert not is_conjugate_invariant(_spec(np.diag([1.0, 1.0, 0.0])))
    q = tuple(haar_quaternions(rng, 1)[0])
    assert not is_conjugate_invariant(heat_spec(1.0, [LevyAtom(1.0, FixedJump(q))]))
    assert is_conjugate_invariant(heat_spec(1.0, [LevyAtom(1.0, FixedJump((-1.0, 0.0, 0.0, 0.0)))]))


def test_conjugate_invariant_generators_are_scalar(rng):
    for _ in range(10):
        atoms = [LevyAtom(float(rng.uniform(0.1, 3)), ClassJump(float(rng.uniform(0.01, 0.5)))) for _ in range(3)]
        spec = heat_spec(float(rng.uniform(0.1, 50)), atoms)
        for k in range(1, 6):
            g = generator_matrix(spec, k)
            assert np.abs(g - conjugate_rate(spec, k) * np.eye(k + 1)).max() < 1e-10


# ---- rates


def test_lambda_delta_examples():
    c = 3.3
    for k in range(1, 8):
        assert lambda_delta(heat_spec(c), k) == pytest.approx(c * casimir_eigenvalue(k), rel=1e-12)
    assert lambda_delta(heat_spec(c), 1) == pytest.approx(3 * c / (32 * np.pi**2), rel=1e-12)
    with pytest.raises(HypothesisHViolated):
        lambda_delta(_spec(), 1)


def test_conjugate_rate_examples():
    c, lam = 4.0, 0.8
    assert conjugate_rate(heat_spec(c), 2) == pytest.approx(-c * casimir_eigenvalue(2), rel=1e-12)
    spec = heat_spec(c, [LevyAtom(lam, ClassJump(0.25))])
    assert conjugate_rate(spec, 1).real == pytest.approx(-3 * c / (32 * np.pi**2) - lam, rel=1e-12)
    for k in range(1, 20):
        shift = conjugate_rate(spec, k).real + c * casimir_eigenvalue(k)
        assert -2 * lam - 1e-12 <= shift <= 1e-12
    with pytest.raises(NotConjugateInvariant):
        conjugate_rate(_spec(np.diag([1.0, 1.0, 0.0])), 1)


def test_spectral_gap_heat():
    c = 7.0
    sg = spectral_gap(heat_spec(c), 10)
    assert sg.gap == pytest.approx(3 * c / (32 * np.pi**2), rel=1e-12)
    assert sg.attained_k == 1 and sg.certified
    assert spectral_gap(heat_spec(C_NORM / 2), 5).gap == pytest.approx(1.5, rel=1e-12)


def test_spectral_gap_heat_with_class_jumps():
    c, lam, th = C_NORM, 0.9, 0.2
    sg = spectral_gap(heat_spec(c, [LevyAtom(lam, ClassJump(th))]), 12)
    rates = [c * casimir_eigenvalue(k) + lam * (1 - normalized_character(k, th)) for k in range(1, 13)]
    assert sg.attained_k == int(np.argmin(rates)) + 1 == 1
    assert sg.gap == pytest.approx(3 * c / (32 * np.pi**2) + lam * (1 - np.cos(2 * np.pi * th)), rel=1e-12)
    assert sg.certified


def test_spectral_gap_anisotropic_continuity():
    prev = None
    for eps in [1.0, 0.3, 0.1, 0.03, 0.01, 0.0]:
        spec = _spec(C_NORM * np.diag([1.0, 1.0, eps]))
        sg = spectral_gap(spec, 8)
        oracle = min(-np.linalg.eigvals(generator_matrix(spec, k)).real.max() for k in range(1, 9))
        assert sg.gap == pytest.approx(oracle, rel=1e-12)
        assert sg.gap > 0 and sg.certified == (eps == 1.0)
        if prev is not None:
            assert abs(sg.gap - prev) < 0.5
        prev = sg.gap


def test_spectral_gap_requires_H():
    with pytest.raises(HypothesisHViolated):
        spectral_gap(_spec(atoms=[LevyAtom(1.0, ClassJump(0.2))]), 5)


def test_rate_growth_isotropic(rng):
    for _ in range(5):
        c = float(rng.uniform(1, 100))
        atoms = random_atoms(rng, 2, 1)
        spec = GeneratorSpec(c * np.eye(3), rng.standard_normal(3), LevyMeasure(atoms))
        lam = spec.levy.total_mass
        for k in range(1, 10):
            assert decay_rate(spec, k) >= 0.5 * c * casimir_eigenvalue(k) - 2 * lam - 1e-9


def test_jumps_only_lower_eigenvalues(rng):
    for _ in range(20):
        spec = random_spec(rng, symmetric=True)
        bare = GeneratorSpec(spec.diffusion, spec.drift, LevyMeasure())
        for k in range(1, 6):
            with_j = np.sort(np.linalg.eigvalsh(generator_matrix(spec, k)))
            without = np.sort(np.linalg.eigvalsh(generator_matrix(bare, k)))
            assert np.all(with_j <= without + 1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(0.01, 10.0), st.integers(1, 10))
def test_class_atom_rate_bounded(theta, weight, k):
    spec = _spec(atoms=[LevyAtom(weight, ClassJump(theta))])
    g = generator_matrix(spec, k)
    assert np.all(np.diag(g).real <= 1e-12)
    assert np.all(np.diag(g).real >= -2 * weight - 1e-12)
