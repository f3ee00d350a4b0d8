"""Path-evolution kernels for the simulator.

``evolve_numba`` is the compiled loop (plain Python when numba is off);
``evolve_numpy`` is the vectorized-over-paths twin. Both consume the same
pre-drawn random arrays and apply, for each path and substep j::

    q <- q o exp(sqrt(dt_j) * xi_j @ sigma + dt_j * drift)
    q <- q o jump_j              (only where a jump ends substep j)
"""

import numpy as np

from ._accel import HAS_NUMBA, njit
from .group import BASIS_SCALE, qexp, qmul, qnormalize


@njit
def _evolve_loop(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps, out):
    n_paths, n_sub = dts.shape
    for p in range(n_paths):
        w, x, y, z = 1.0, 0.0, 0.0, 0.0
        r = 0
        for j in range(n_sub):
            dt = dts[p, j]
            if dt > 0.0:
                sq = np.sqrt(dt)
                v0 = dt * drift[0]
                v1 = dt * drift[1]
                v2 = dt * drift[2]
                for i in range(3):
                    xi = sq * normals[p, j, i]
                    v0 += xi * sigma[i, 0]
                    v1 += xi * sigma[i, 1]
                    v2 += xi * sigma[i, 2]
                s = np.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
                phi = BASIS_SCALE * s
                if s > 1e-300:
                    ratio = np.sin(phi) / s
                else:
                    ratio = BASIS_SCALE
                ew = np.cos(phi)
                ex = ratio * v0
                ey = ratio * v1
                ez = ratio * v2
                # (w, u) o (ew, e) = (w ew - u.e, w e + ew u - u x e)
                nw = w * ew - x * ex - y * ey - z * ez
                nx = w * ex + ew * x - (y * ez - z * ey)
                ny = w * ey + ew * y - (z * ex - x * ez)
                nz = w * ez + ew * z - (x * ey - y * ex)
                n = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
                w, x, y, z = nw / n, nx / n, ny / n, nz / n
            while r < n_jumps[p] and jump_pos[p, r] == j:
                jw = jump_q[p, r, 0]
                jx = jump_q[p, r, 1]
                jy = jump_q[p, r, 2]
                jz = jump_q[p, r, 3]
                nw = w * jw - x * jx - y * jy - z * jz
                nx = w * jx + jw * x - (y * jz - z * jy)
                ny = w * jy + jw * y - (z * jx - x * jz)
                nz = w * jz + jw * z - (x * jy - y * jx)
                n = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
                w, x, y, z = nw / n, nx / n, ny / n, nz / n
                r += 1
        out[p, 0] = w
        out[p, 1] = x
        out[p, 2] = y
        out[p, 3] = z
    return out


def evolve_numba(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps):
    out = np.empty((dts.shape[0], 4))
    return _evolve_loop(
        np.ascontiguousarray(sigma, dtype=np.float64),
        np.ascontiguousarray(drift, dtype=np.float64),
        np.ascontiguousarray(dts),
        np.ascontiguousarray(normals),
        np.ascontiguousarray(jump_pos),
        np.ascontiguousarray(jump_q),
        np.ascontiguousarray(n_jumps),
        out,
    )


def evolve_numpy(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps):
    n_paths, n_sub = dts.shape
    q = np.zeros((n_paths, 4))
    q[:, 0] = 1.0
    # substep index -> (path indices, jump quaternions), in per-path jump order
    has = np.arange(jump_pos.shape[1])[None, :] < n_jumps[:, None]
    pp, rr = np.nonzero(has)
    steps = jump_pos[pp, rr]
    order = np.lexsort((rr, pp, steps))
    pp, rr, steps = pp[order], rr[order], steps[order]
    bounds = np.searchsorted(steps, np.arange(n_sub + 1))
    for j in range(n_sub):
        dt = dts[:, j]
        active = dt > 0.0
        if active.all():
            v = np.sqrt(dt)[:, None] * (normals[:, j, :] @ sigma) + dt[:, None] * drift
            q = qnormalize(qmul(q, qexp(v)))
        elif active.any():
            idx = np.nonzero(active)[0]
            dta = dt[idx]
            v = np.sqrt(dta)[:, None] * (normals[idx, j, :] @ sigma) + dta[:, None] * drift
            q[idx] = qnormalize(qmul(q[idx], qexp(v)))
        lo, hi = bounds[j], bounds[j + 1]
        if hi > lo:
            # a path jumps at most once per substep end
            p_idx = pp[lo:hi]
            q[p_idx] = qnormalize(qmul(q[p_idx], jump_q[p_idx, rr[lo:hi]]))
    return q


def evolve(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps, backend=None):
    if backend is None:
        backend = "numba" if HAS_NUMBA else "numpy"
    if backend == "numba":
        return evolve_numba(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps)
    if backend == "numpy":
        return evolve_numpy(sigma, drift, dts, normals, jump_pos, jump_q, n_jumps)
    raise ValueError(f"unknown backend {backend!r}")
