"""Monte Carlo simulation of finite-activity Levy processes on SU(2).

Each path is a geodesic Euler discretization of the continuous part,
``g <- g o exp(sqrt(dt) sum_i xi_i Y_i + dt X_0)``, interlaced with jumps
``g(T_n) = g(T_n-) o sigma_n`` at the event times of a Poisson process of
rate ``lambda_Pi``; the time grid is refined to contain every jump time.

Every path owns a random stream derived from ``(master_seed, path_index)``,
so a SampleSet depends only on the spec and the PathConfig.
"""

import csv
import io
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import stats

from . import _kernels
from .density import choose_k_max, coefficients, marginal_cdf
from .errors import EmptyLevyMeasure, TimeMismatch
from .generator import FixedJump, square_root_rows
from .group import GroupElement, qangle, qconj, qexp, qmul, qnormalize, torus_quaternion

CHUNK = 4096


@dataclass(frozen=True)
class PathConfig:
    t_end: float
    dt: float
    n_paths: int
    master_seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError("t_end must be positive")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError("n_paths must be a positive integer")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ValueError("master_seed must be an unsigned 64-bit integer")

    @property
    def n_steps(self):
        return max(1, int(np.ceil(self.t_end / self.dt - 1e-9)))


def default_dt(spec):
    """min(1e-3, 0.1 / lambda_Pi, 0.1 * 32 pi^2 / (3 c)) with c the largest half-eigenvalue of a."""
    dt = 1e-3
    lam = spec.levy.total_mass
    if lam > 0:
        dt = min(dt, 0.1 / lam)
    c = 0.5 * float(np.linalg.eigvalsh(spec.diffusion).max())
    if c > 0:
        dt = min(dt, 0.1 * 32 * np.pi**2 / (3 * c))
    return dt


def path_rng(master_seed, path_index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(master_seed), spawn_key=(int(path_index),))))


@dataclass
class SampleSet:
    quaternions: np.ndarray  # (n_paths, 4)
    jumps: np.ndarray  # (n_paths,)
    config: PathConfig

    def __len__(self):
        return len(self.jumps)

    @property
    def angles(self):
        return qangle(self.quaternions)

    def elements(self):
        return [GroupElement.from_array(q) for q in self.quaternions]

    def to_csv(self):
        buf = io.StringIO()
        buf.write("path,w,x,y,z,theta,jumps\n")
        for i, (q, th, n) in enumerate(zip(self.quaternions, self.angles, self.jumps)):
            buf.write(f"{i},{q[0]:.17g},{q[1]:.17g},{q[2]:.17g},{q[3]:.17g},{th:.17g},{int(n)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, t_end, dt=None, master_seed=0):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["path", "w", "x", "y", "z", "theta", "jumps"]:
            raise ValueError("not a sample CSV (bad header)")
        body = [r for r in rows[1:] if r]
        if not body:
            raise ValueError("sample CSV has no rows")
        q = np.array([[float(v) for v in r[1:5]] for r in body])
        jumps = np.array([int(r[6]) for r in body])
        if not np.all(np.isfinite(q)):
            raise ValueError("non-finite quaternion in sample CSV")
        cfg = PathConfig(t_end, dt if dt is not None else t_end, len(body), master_seed)
        return cls(q, jumps, cfg)


def diffusion_step(g, spec, dt, rng):
    """One geodesic Euler step g o exp(sqrt(dt) sum xi_i Y_i + dt X_0)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    sigma = np.array([y.vec for y in square_root_rows(spec.diffusion)])
    xi = rng.standard_normal(3)
    v = np.sqrt(dt) * (xi @ sigma) + dt * spec.drift.vec
    return GroupElement.from_array(qmul(g.q, qexp(v)))


def _jump_table(levy):
    weights = np.array([a.weight for a in levy.atoms], dtype=float)
    cum = np.cumsum(weights) / weights.sum()
    cum[-1] = 1.0
    return cum


def _jump_quaternions(levy, choice, haar_normals):
    """Quaternions of the jumps selected by atom index ``choice``."""
    out = np.empty((len(choice), 4))
    for i, atom in enumerate(levy.atoms):
        sel = choice == i
        if not sel.any():
            continue
        if isinstance(atom.jump, FixedJump):
            out[sel] = atom.jump.element.q
        else:
            h = qnormalize(haar_normals[sel])
            u = torus_quaternion(atom.jump.theta)
            out[sel] = qmul(qmul(h, u), qconj(h))
    return out


def sample_jump(levy, rng):
    """Draw one jump from the normalized Levy measure."""
    if len(levy.atoms) == 0 or levy.total_mass <= 0:
        raise EmptyLevyMeasure("cannot sample from an empty Levy measure")
    cum = _jump_table(levy)
    choice = np.array([np.searchsorted(cum, rng.uniform(), side="right")])
    return GroupElement.from_array(_jump_quaternions(levy, choice, rng.standard_normal((1, 4)))[0])


def _draw_path(rng, grid, lam, cum, need_normals):
    """Per-path random inputs: substep lengths, normals, jump positions and picks.

    Jump times are the order statistics of a Poisson(lam * t_end) number of
    uniforms, which is the law of the event times of a rate-lam Poisson
    process on [0, t_end].
    """
    t_end = grid[-1]
    if lam > 0:
        n = int(rng.poisson(lam * t_end))
        times = np.sort(rng.uniform(0.0, t_end, n))
        choice = np.searchsorted(cum, rng.uniform(size=n), side="right")
        haar = rng.standard_normal((n, 4))
    else:
        n = 0
        times = np.empty(0)
        choice = np.empty(0, dtype=np.int64)
        haar = np.empty((0, 4))
    ends = np.concatenate([grid[1:], times])
    order = np.argsort(ends, kind="stable")
    ends = ends[order]
    dts = np.diff(ends, prepend=0.0)
    pos = np.nonzero(order >= len(grid) - 1)[0]
    normals = rng.standard_normal((len(dts), 3)) if need_normals else None
    return dts, normals, pos, choice, haar


def _simulate_chunk(spec, config, first, last, backend):
    n = last - first
    grid = np.linspace(0.0, config.t_end, config.n_steps + 1)
    lam = spec.levy.total_mass
    cum = _jump_table(spec.levy) if lam > 0 else None
    sigma = np.array([y.vec for y in square_root_rows(spec.diffusion)])
    need_normals = bool(np.any(sigma != 0))
    draws = [_draw_path(path_rng(config.master_seed, p), grid, lam, cum, need_normals) for p in range(first, last)]
    n_sub = max(len(d[0]) for d in draws)
    n_jump = np.array([len(d[2]) for d in draws], dtype=np.int64)
    j_max = max(1, int(n_jump.max()))
    dts = np.zeros((n, n_sub))
    normals = np.zeros((n, n_sub, 3))
    jump_pos = np.full((n, j_max), -1, dtype=np.int64)
    jump_q = np.zeros((n, j_max, 4))
    jump_q[:, :, 0] = 1.0
    for i, (d, nr, pos, _, _) in enumerate(draws):
        dts[i, : len(d)] = d
        if nr is not None:
            normals[i, : len(d)] = nr
        jump_pos[i, : len(pos)] = pos
    if n_jump.sum():
        # all jumps of the chunk in one batch, then scattered back per path
        choice = np.concatenate([d[3] for d in draws])
        haar = np.concatenate([d[4] for d in draws])
        rows = np.repeat(np.arange(n), n_jump)
        cols = np.arange(len(rows)) - np.repeat(np.cumsum(n_jump) - n_jump, n_jump)
        jump_q[rows, cols] = _jump_quaternions(spec.levy, choice, haar)
    q = _kernels.evolve(sigma, spec.drift.vec, dts, normals, jump_pos, jump_q, n_jump, backend=backend)
    return q, n_jump


def simulate_terminal(spec, config, backend=None, workers=1, chunk=CHUNK):
    """Terminal values of ``config.n_paths`` independent paths.

    ``backend`` is "numba" or "numpy" (default: numba when available).
    Results do not depend on ``workers`` or ``chunk``.
    """
    lam = spec.levy.total_mass
    if lam > 0 and len(spec.levy.atoms) == 0:
        raise EmptyLevyMeasure("positive mass claimed with no atoms")
    limit = 0.01 * min(1.0, 1.0 / lam) if lam > 0 else 0.01
    if config.dt > limit:
        warnings.warn(f"dt = {config.dt} exceeds the recommended {limit:.3g}", RuntimeWarning, stacklevel=2)
    bounds = [(s, min(s + chunk, config.n_paths)) for s in range(0, config.n_paths, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _simulate_chunk(spec, config, b[0], b[1], backend), bounds))
    else:
        parts = [_simulate_chunk(spec, config, a, b, backend) for a, b in bounds]
    q = np.concatenate([p[0] for p in parts])
    jumps = np.concatenate([p[1] for p in parts])
    return SampleSet(q, jumps, config)


def empirical_angle_hist(samples, bins):
    """Normalized histogram of conjugacy angles on [0, 1/2]; returns (density, edges)."""
    if bins < 10:
        raise ValueError("need at least 10 bins")
    angles = samples.angles if isinstance(samples, SampleSet) else qangle(np.asarray(samples))
    counts, edges = np.histogram(angles, bins=bins, range=(0.0, 0.5))
    return counts / (len(angles) * np.diff(edges)), edges


@dataclass
class ComparisonReport:
    l1: float
    sup: float
    ks: float
    ks_critical_1pct: float
    n_paths: int
    bins: int
    mc_error: Optional[np.ndarray] = None  # per-bin 1-sigma error of the histogram

    @property
    def passed(self):
        return self.ks < self.ks_critical_1pct

    def to_dict(self):
        d = asdict(self)
        d.pop("mc_error")
        return d

    def to_json(self):
        return json.dumps(self.to_dict())


def marginal_coefficients(spec, t, k_max=None, force_general=False):
    """b_k with angle marginal density w(theta) (1 + sum_k b_k chi_k(theta))."""
    if k_max is None:
        k_max = choose_k_max(spec, t)
    coef = coefficients(spec, t, k_max, force_general=force_general)
    return np.real(coef.traces())


def ks_statistic(angles, b):
    return float(stats.kstest(angles, lambda x: marginal_cdf(b, x)).statistic)


def compare(spec, t, samples, k_max=None, bins=50, force_general=False):
    """Distances between simulated angles and the series angle density at time t."""
    if abs(samples.config.t_end - t) > 1e-12 * max(1.0, abs(t)):
        raise TimeMismatch(f"samples were generated at t = {samples.config.t_end}, not {t}")
    b = marginal_coefficients(spec, t, k_max, force_general=force_general)
    angles = samples.angles
    n = len(angles)
    hist, edges = empirical_angle_hist(samples, bins)
    width = np.diff(edges)
    mass = np.diff(marginal_cdf(b, edges))
    expected = mass / width
    diff = np.abs(hist - expected)
    mc = np.sqrt(np.clip(mass * (1 - mass), 0.0, None) / n) / width
    return ComparisonReport(
        l1=float(np.sum(diff * width)),
        sup=float(diff.max()),
        ks=ks_statistic(angles, b),
        ks_critical_1pct=float(1.63 / np.sqrt(n)),
        n_paths=int(n),
        bins=int(bins),
        mc_error=mc,
    )
