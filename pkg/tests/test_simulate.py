import numpy as np
import pytest
from scipy import stats

from _specs import C_NORM, heat_spec, random_spec
from su2levy.errors import EmptyLevyMeasure, TimeMismatch
from su2levy.generator import ClassJump, FixedJump, GeneratorSpec, LevyAtom, LevyMeasure, spectral_gap
from su2levy.group import IDENTITY, AlgebraElement, GroupElement, compose, conjugacy_angle, exp_map, haar_quaternions
from su2levy.simulate import (
    PathConfig,
    SampleSet,
    compare,
    default_dt,
    diffusion_step,
    empirical_angle_hist,
    marginal_coefficients,
    sample_jump,
    simulate_terminal,
)

H = (0.6, 0.0, 0.8, 0.0)

# several tests use a coarse dt on purpose where the scheme is exact
pytestmark = pytest.mark.filterwarnings("ignore:dt = .* exceeds:RuntimeWarning")


def _spec(a=None, drift=(0, 0, 0), atoms=()):
    return GeneratorSpec(np.zeros((3, 3)) if a is None else np.asarray(a, float), drift, LevyMeasure(list(atoms)))


def test_path_config_validation():
    assert PathConfig(1.0, 0.3, 5).n_steps == 4
    assert PathConfig(1.0, 0.25, 5).n_steps == 4
    for bad in [(0.0, 0.1, 5), (1.0, -0.1, 5), (1.0, 2.0, 5), (1.0, 0.1, 0), (1.0, 0.1, 2.5), (1.0, 0.1, 1, -1)]:
        with pytest.raises(ValueError):
            PathConfig(*bad)


def test_default_dt():
    assert default_dt(_spec()) == 1e-3
    assert default_dt(_spec(atoms=[LevyAtom(500.0, ClassJump(0.2))])) == pytest.approx(2e-4)


def test_diffusion_step_examples(rng):
    g = GroupElement.from_array(haar_quaternions(rng, 1)[0])
    assert diffusion_step(g, _spec(), 0.1, rng) == g
    x0 = AlgebraElement(3.0, -1.0, 2.0)
    out = diffusion_step(g, _spec(drift=x0.vec), 0.7, rng)
    assert out.isclose(compose(g, exp_map(0.7 * x0)), atol=1e-14)
    with pytest.raises(ValueError):
        diffusion_step(g, _spec(), 0.0, rng)


def test_sample_jump_examples():
    rng = np.random.default_rng(0)
    assert sample_jump(LevyMeasure([LevyAtom(2.0, FixedJump(H))]), rng).isclose(GroupElement(*H))
    cls = LevyMeasure([LevyAtom(1.0, ClassJump(0.21))])
    for _ in range(50):
        assert conjugacy_angle(sample_jump(cls, rng)) == pytest.approx(0.21, abs=1e-12)
    with pytest.raises(EmptyLevyMeasure):
        sample_jump(LevyMeasure(), rng)


def test_sample_jump_frequencies():
    rng = np.random.default_rng(1)
    other = (0.0, 1.0, 0.0, 0.0)
    lev = LevyMeasure([LevyAtom(1.0, FixedJump(H)), LevyAtom(3.0, FixedJump(other))])
    n = 20_000
    hits = sum(sample_jump(lev, rng).isclose(GroupElement(*H)) for _ in range(n))
    assert abs(hits / n - 0.25) < 4 * np.sqrt(0.25 * 0.75 / n)


def test_determinism_and_chunk_independence():
    spec = heat_spec(C_NORM / 8, [LevyAtom(3.0, ClassJump(0.3)), LevyAtom(1.0, FixedJump(H))])
    cfg = PathConfig(0.2, 0.01, 300, master_seed=42)
    a = simulate_terminal(spec, cfg)
    b = simulate_terminal(spec, cfg)
    assert np.array_equal(a.quaternions, b.quaternions) and np.array_equal(a.jumps, b.jumps)
    c = simulate_terminal(spec, cfg, workers=3, chunk=64)
    assert np.array_equal(a.quaternions, c.quaternions)
    d = simulate_terminal(spec, PathConfig(0.2, 0.01, 300, master_seed=43))
    assert not np.array_equal(a.quaternions, d.quaternions)
    # path i does not depend on how many paths are requested
    e = simulate_terminal(spec, PathConfig(0.2, 0.01, 100, master_seed=42))
    assert np.array_equal(a.quaternions[:100], e.quaternions)


def test_backends_agree():
    spec = random_spec(np.random.default_rng(9))
    cfg = PathConfig(0.1, 0.005, 200, 7)
    a = simulate_terminal(spec, cfg, backend="numba")
    b = simulate_terminal(spec, cfg, backend="numpy")
    assert np.abs(a.quaternions - b.quaternions).max() < 1e-12
    with pytest.raises(ValueError):
        simulate_terminal(spec, cfg, backend="fortran")


def test_terminals_are_unit_quaternions():
    spec = random_spec(np.random.default_rng(2))
    s = simulate_terminal(spec, PathConfig(0.5, 0.01, 500, 1))
    assert np.abs(np.linalg.norm(s.quaternions, axis=1) - 1).max() < 1e-12


def test_drift_only_flow_is_exact():
    x0 = AlgebraElement(10.0, -4.0, 7.0)
    s = simulate_terminal(_spec(drift=x0.vec), PathConfig(0.9, 0.05, 5))
    target = exp_map(0.9 * x0).q
    assert np.abs(s.quaternions - target).max() < 1e-13
    assert np.all(s.jumps == 0)


def test_zero_spec_stays_at_identity():
    s = simulate_terminal(_spec(), PathConfig(1.0, 0.1, 4))
    assert np.array_equal(s.quaternions, np.tile(IDENTITY.q, (4, 1)))


def test_pure_jump_terminal_is_power_of_h():
    lam = 2.0
    s = simulate_terminal(_spec(atoms=[LevyAtom(lam, FixedJump(H))]), PathConfig(1.0, 0.01, 5000, 3))
    h = GroupElement(*H)
    powers = [IDENTITY]
    for _ in range(int(s.jumps.max())):
        powers.append(compose(powers[-1], h))
    expect = np.array([powers[n].q for n in s.jumps])
    assert np.abs(s.quaternions - expect).max() < 1e-12
    assert abs(s.jumps.mean() - lam) < 4 * np.sqrt(lam / len(s))


def test_jump_count_is_poisson():
    lam, t = 3.0, 0.7
    s = simulate_terminal(_spec(atoms=[LevyAtom(lam, ClassJump(0.2))]), PathConfig(t, 0.01, 20_000, 5))
    counts = np.bincount(s.jumps, minlength=12)[:12]
    expect = stats.poisson.pmf(np.arange(12), lam * t) * len(s)
    keep = expect > 5
    obs = counts[keep]
    exp = expect[keep] * obs.sum() / expect[keep].sum()
    assert stats.chisquare(obs, exp).pvalue > 1e-3


def test_inverse_symmetric_spec_gives_symmetric_law():
    """A J-invariant generator gives g and g^{-1} the same law, so x is symmetric about 0."""
    rng = np.random.default_rng(8)
    spec = random_spec(rng, symmetric=True)
    s = simulate_terminal(spec, PathConfig(0.3, 0.003, 20_000, 11))
    x = s.quaternions[:, 1]
    half = len(x) // 2
    assert stats.ks_2samp(x[:half], -x[half:]).pvalue > 1e-3


def test_histogram_examples():
    rng = np.random.default_rng(3)
    q = haar_quaternions(rng, 200_000)
    dens, edges = empirical_angle_hist(q, 25)
    assert np.sum(dens * np.diff(edges)) == pytest.approx(1.0)
    cdf = 2 * edges - np.sin(4 * np.pi * edges) / (2 * np.pi)
    p = np.diff(cdf)
    width = np.diff(edges)
    sigma = np.sqrt(p * (1 - p) / len(q)) / width
    assert np.all(np.abs(dens - p / width) < 4 * sigma)
    dens, edges = empirical_angle_hist(np.tile([1.0, 0, 0, 0], (10, 1)), 10)
    assert dens[0] * (edges[1] - edges[0]) == pytest.approx(1.0) and np.all(dens[1:] == 0)
    with pytest.raises(ValueError):
        empirical_angle_hist(q, 5)


def test_sample_csv_round_trip():
    spec = heat_spec(C_NORM / 8, [LevyAtom(2.0, ClassJump(0.3))])
    s = simulate_terminal(spec, PathConfig(0.1, 0.01, 50, 2))
    back = SampleSet.from_csv(s.to_csv(), 0.1)
    assert np.array_equal(back.quaternions, s.quaternions)
    assert np.array_equal(back.jumps, s.jumps)
    assert back.to_csv() == s.to_csv()
    with pytest.raises(ValueError):
        SampleSet.from_csv("path,w,x,y,z,theta,jumps\n", 0.1)
    with pytest.raises(ValueError):
        SampleSet.from_csv("a,b\n1,2\n", 0.1)


def test_compare_heat_passes_and_detects_wrong_time():
    spec = heat_spec(C_NORM)
    n = 20_000
    s = simulate_terminal(spec, PathConfig(0.3, 1e-3, n, 0))
    rep = compare(spec, 0.3, s)
    assert rep.passed and rep.ks < rep.ks_critical_1pct
    assert rep.ks_critical_1pct == pytest.approx(1.63 / np.sqrt(n))
    assert set(rep.to_dict()) == {"l1", "sup", "ks", "ks_critical_1pct", "n_paths", "bins"}
    # histogram within a few sigma of the exact bin masses
    assert rep.sup < 5 * rep.mc_error.max()
    s2 = simulate_terminal(spec, PathConfig(0.15, 1e-3, n, 0))
    wrong = compare(spec, 0.3, SampleSet(s2.quaternions, s2.jumps, PathConfig(0.3, 1e-3, n, 0)))
    assert not wrong.passed
    with pytest.raises(TimeMismatch):
        compare(spec, 0.15, s)


def test_compare_late_time_against_haar():
    spec = heat_spec(C_NORM, [LevyAtom(1.0, ClassJump(0.4))])
    t = 20 / spectral_gap(spec, 10).gap
    q = haar_quaternions(np.random.default_rng(4), 50_000)
    rep = compare(spec, t, SampleSet(q, np.zeros(len(q), int), PathConfig(t, t, len(q))))
    assert rep.passed


def test_convolution_consistency():
    """Jumps and diffusion commute in law for conjugate-invariant specs: compare against the series."""
    spec = heat_spec(C_NORM / 4, [LevyAtom(2.0, ClassJump(0.25)), LevyAtom(1.0, FixedJump((-1.0, 0, 0, 0)))])
    s = simulate_terminal(spec, PathConfig(0.4, 1e-3, 20_000, 6))
    assert compare(spec, 0.4, s).passed


def test_non_invariant_spec_marginal():
    rng = np.random.default_rng(21)
    spec = random_spec(rng)
    s = simulate_terminal(spec, PathConfig(0.3, 5e-4, 20_000, 13))
    rep = compare(spec, 0.3, s)
    assert rep.passed
    b = marginal_coefficients(spec, 0.3)
    assert np.all(np.isfinite(b))


def test_dt_halving_moves_little():
    spec = GeneratorSpec(C_NORM * np.diag([1.0, 0.5, 0.2]), (5.0, 0.0, -3.0), LevyMeasure())
    a = simulate_terminal(spec, PathConfig(0.3, 2e-3, 20_000, 1))
    b = simulate_terminal(spec, PathConfig(0.3, 1e-3, 20_000, 1))
    assert stats.ks_2samp(a.angles, b.angles).pvalue > 1e-3


def test_large_dt_warns():
    with pytest.warns(RuntimeWarning):
        simulate_terminal(heat_spec(1.0), PathConfig(1.0, 0.5, 2))
