"""Compiled O(n^2) pair-sum kernels.

Everything here is plain loops under numba; the surrounding modules do all
parameter handling.  Conventions shared by the kernels:

* a path is its positions array, rows 0..n (row i = X_{i dt});
* the time square [0,t]^2 is tiled by quadrature cells
  [t_i, t_{i+1}) x [t_j, t_{j+1}), i,j in 0..n-1, each represented by the
  grid pair (i, j);
* `wtab[m]` is the full weight dt^2 * m^p * I(m) attached to a pair whose
  representative positions sit m grid steps apart (see riesz.pair_weight_table),
  chosen so E[wtab[m] |X_{m dt}|^{-sigma}] equals the exact kernel integral
  over the cell -- the estimators are unbiased for every rectangle.

Pairs at coinciding positions contribute inf (0^{-sigma}); that is the
documented sentinel for degenerate inputs, so no fastmath here.
"""

import numpy as np
from numba import njit, prange

__all__ = [
    "pair_sum",
    "pair_sum_shifted",
    "rect_sum",
    "zeta_sum",
    "level_sums",
    "level_and_cell_sums",
    "batch_pair_sum",
    "batch_zeta_sum",
    "batch_level_sums",
    "batch_cell_sums",
    "freq_quadratic",
    "batch_freq_quadratic",
    "theta_pair_sum_1d",
    "theta_pair_sum_2d",
    "xi_values",
]


@njit(cache=True)
def _dist2(pos, i, j, d):
    s = 0.0
    for c in range(d):
        df = pos[j, c] - pos[i, c]
        s += df * df
    return s


@njit(cache=True)
def pair_sum(pos, sigma, wtab, band, n):
    """Sum over ordered pairs i<j (gap >= band) of w(j-i) |X_j - X_i|^{-sigma}.

    i, j run over cell indices 0..n-1 (left endpoints).
    """
    d = pos.shape[1]
    e = -0.5 * sigma
    total = 0.0
    for i in range(n):
        for j in range(i + band, n):
            r2 = _dist2(pos, i, j, d)
            total += wtab[j - i] * r2**e
    return total


@njit(cache=True)
def pair_sum_shifted(pos, z, sigma, wtab, band, n):
    """Like pair_sum but with kernel |X_j - X_i - z|^{-sigma}."""
    d = pos.shape[1]
    e = -0.5 * sigma
    total = 0.0
    for i in range(n):
        for j in range(i + band, n):
            r2 = 0.0
            for c in range(d):
                df = pos[j, c] - pos[i, c] - z[c]
                r2 += df * df
            total += wtab[j - i] * r2**e
    return total


@njit(cache=True)
def rect_sum(pos, sigma, wtab, i0, i1, j0, j1):
    """Pair sum over the index rectangle [i0,i1) x [j0,j1) (requires j0 >= i0+? no:
    only j > i pairs make sense here; callers pass j0 >= i1 so gaps are >= 1)."""
    d = pos.shape[1]
    e = -0.5 * sigma
    total = 0.0
    for i in range(i0, i1):
        for j in range(j0, j1):
            r2 = _dist2(pos, i, j, d)
            total += wtab[j - i] * r2**e
    return total


@njit(cache=True)
def zeta_sum(pos_a, pos_b, sigma, wtab, nu, nv):
    """Mutual-intersection sum over [0, nu*dt] x [0, nv*dt].

    Mixed endpoint convention: the first axis uses right endpoints
    (A_{i+1}, i = 0..nu-1), the second uses left endpoints (B_j, j = 0..nv-1),
    so the representative separation index is m = i+1+j >= 1 and the law of
    the whole sum matches a dyadic corner cell of a single path at equal
    resolution exactly.
    """
    d = pos_a.shape[1]
    e = -0.5 * sigma
    total = 0.0
    for i in range(nu):
        for j in range(nv):
            r2 = 0.0
            for c in range(d):
                df = pos_a[i + 1, c] - pos_b[j, c]
                r2 += df * df
            total += wtab[i + 1 + j] * r2**e
    return total


@njit(cache=True)
def level_sums(pos, sigma, wtab, m_levels):
    """Per-level pair sums of the dyadic corner decomposition.

    n = 2^m_levels cells; every pair i<j belongs to exactly one corner cell:
    with h the index of the highest bit where i and j differ, (i, j) sits in
    the level k = m_levels - 1 - h cell with side 2^h grid units.  Returns
    sums[k] for k = 0..m_levels-1.
    """
    n = 1 << m_levels
    d = pos.shape[1]
    e = -0.5 * sigma
    out = np.zeros(m_levels)
    for i in range(n):
        for j in range(i + 1, n):
            x = i ^ j
            h = 0
            while x > 1:
                x >>= 1
                h += 1
            k = m_levels - 1 - h
            r2 = _dist2(pos, i, j, d)
            out[k] += wtab[j - i] * r2**e
    return out


@njit(cache=True)
def level_and_cell_sums(pos, sigma, wtab, m_levels, k_detail):
    """level_sums plus per-cell sums for levels k <= k_detail.

    Cells are indexed (2^k - 1) + l, l = 0..2^k-1 (breadth-first).
    """
    n = 1 << m_levels
    d = pos.shape[1]
    e = -0.5 * sigma
    level = np.zeros(m_levels)
    cells = np.zeros((1 << (k_detail + 1)) - 1)
    for i in range(n):
        for j in range(i + 1, n):
            x = i ^ j
            h = 0
            while x > 1:
                x >>= 1
                h += 1
            k = m_levels - 1 - h
            r2 = _dist2(pos, i, j, d)
            v = wtab[j - i] * r2**e
            level[k] += v
            if k <= k_detail:
                cells[(1 << k) - 1 + (i >> (h + 1))] += v
    return level, cells


@njit(cache=True, parallel=True)
def batch_pair_sum(paths, sigma, wtab, band, n):
    out = np.empty(paths.shape[0])
    for r in prange(paths.shape[0]):
        out[r] = pair_sum(paths[r], sigma, wtab, band, n)
    return out


@njit(cache=True, parallel=True)
def batch_zeta_sum(paths_a, paths_b, sigma, wtab, nu, nv):
    out = np.empty(paths_a.shape[0])
    for r in prange(paths_a.shape[0]):
        out[r] = zeta_sum(paths_a[r], paths_b[r], sigma, wtab, nu, nv)
    return out


@njit(cache=True, parallel=True)
def batch_level_sums(paths, sigma, wtab, m_levels):
    out = np.empty((paths.shape[0], m_levels))
    for r in prange(paths.shape[0]):
        out[r] = level_sums(paths[r], sigma, wtab, m_levels)
    return out


@njit(cache=True, parallel=True)
def batch_cell_sums(paths, sigma, wtab, m_levels, k_detail):
    nlev = m_levels
    ncell = (1 << (k_detail + 1)) - 1
    lev = np.empty((paths.shape[0], nlev))
    cel = np.empty((paths.shape[0], ncell))
    for r in prange(paths.shape[0]):
        a, b = level_and_cell_sums(paths[r], sigma, wtab, m_levels, k_detail)
        lev[r] = a
        cel[r] = b
    return lev, cel


@njit(cache=True)
def freq_quadratic(pos, dt, nodes, wq, n_cells):
    """sum_g wq[g] * |sum_{i<n_cells} exp(i lam_g . X_i) dt|^2.

    nodes has shape (G, d); wq bundles quadrature weight times spectral weight.
    The inner sum is the left-endpoint Riemann approximation of
    int_0^tau e^{i lam . X_s} ds, exactly dual to the pair sums.
    """
    grid_n, d = nodes.shape
    total = 0.0
    for g in range(grid_n):
        cr = 0.0
        ci = 0.0
        for i in range(n_cells):
            ph = 0.0
            for c in range(d):
                ph += nodes[g, c] * pos[i, c]
            cr += np.cos(ph)
            ci += np.sin(ph)
        total += wq[g] * (cr * cr + ci * ci)
    return total * dt * dt


@njit(cache=True, parallel=True)
def batch_freq_quadratic(paths, dt, nodes, wq, n_cells):
    out = np.empty(paths.shape[0])
    for r in prange(paths.shape[0]):
        out[r] = freq_quadratic(paths[r], dt, nodes, wq, n_cells)
    return out


@njit(cache=True)
def theta_pair_sum_1d(x, dt, table, dx, n_cells):
    """Full-square smoothed pair sum dt^2 sum_{i,j} theta(|x_i - x_j|).

    `table` holds theta on the uniform grid 0, dx, 2dx, ...; linear
    interpolation in between.  Diagonal terms use theta(0) = table[0];
    callers guarantee the table covers the path diameter.
    """
    nt = table.shape[0]
    total = 0.0
    for i in range(n_cells):
        total += table[0]  # j = i
        for j in range(i + 1, n_cells):
            r = abs(x[i] - x[j])
            u = r / dx
            idx = int(u)
            if idx >= nt - 1:
                v = table[nt - 1]
            else:
                f = u - idx
                v = table[idx] * (1.0 - f) + table[idx + 1] * f
            total += 2.0 * v  # (i,j) and (j,i)
    return total * dt * dt


@njit(cache=True)
def theta_pair_sum_2d(pos, dt, table, dx0, dx1, n_cells):
    """2-d analogue with a bilinear table on |x0|, |x1| >= 0 (theta is even
    in each coordinate)."""
    n0, n1 = table.shape
    total = 0.0
    for i in range(n_cells):
        total += table[0, 0]
        for j in range(i + 1, n_cells):
            r0 = abs(pos[i, 0] - pos[j, 0]) / dx0
            r1 = abs(pos[i, 1] - pos[j, 1]) / dx1
            a = int(r0)
            b = int(r1)
            if a >= n0 - 1:
                a = n0 - 2
                r0 = float(n0 - 1)
            if b >= n1 - 1:
                b = n1 - 2
                r1 = float(n1 - 1)
            f0 = r0 - a
            f1 = r1 - b
            v = (
                table[a, b] * (1 - f0) * (1 - f1)
                + table[a + 1, b] * f0 * (1 - f1)
                + table[a, b + 1] * (1 - f0) * f1
                + table[a + 1, b + 1] * f0 * f1
            )
            total += 2.0 * v
    return total * dt * dt


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@njit(cache=True)
def _monotone_leg(lo, hi, tau, p):
    """Integral of dist^{-p} over a time leg of length tau on which the
    distance moves linearly from lo to hi (lo <= hi).  Exact whenever the
    evaluation point lies on the line of the step (always true in d = 1)."""
    if hi - lo <= 1e-12 * (hi + lo):
        return tau * (0.5 * (lo + hi)) ** (-p)
    if abs(p - 1.0) <= 1e-12:
        if lo == 0.0:
            return np.inf
        return tau * (np.log(hi) - np.log(lo)) / (hi - lo)
    return tau * (hi ** (1.0 - p) - lo ** (1.0 - p)) / ((hi - lo) * (1.0 - p))


@njit(cache=True)
def _sinc_pow(psi, p):
    # (sin psi / psi)^{p-2}, stable for small psi
    if psi < 1e-4:
        ratio = 1.0 - psi * psi / 6.0
    else:
        ratio = np.sin(psi) / psi
    return ratio ** (p - 2.0)


@njit(cache=True)
def _angular_primitive(psi_lo, p):
    """Psi(psi_lo) = int_{psi_lo}^{pi/2} sin(psi)^{p-2} dpsi.

    The building block of the exact straight-segment integral
    int_0^W (h^2 + w^2)^{-p/2} dw = h^{1-p} Psi(atan2(h, W)).
    p = 1 has the closed form -log tan(psi/2).  Otherwise the range is cut
    at psi = 1: the outer piece is smooth and Gauss-Legendre handles it
    directly, while on the inner piece the substitution v = psi^{p-1}
    absorbs the psi^{p-2} singularity, leaving the bounded smooth factor
    (sin psi / psi)^{p-2}.
    """
    if abs(p - 1.0) <= 1e-12:
        return -np.log(np.tan(0.5 * psi_lo))
    half_pi = 0.5 * np.pi
    acc = 0.0
    outer_lo = psi_lo if psi_lo > 1.0 else 1.0
    mid = 0.5 * (half_pi + outer_lo)
    half = 0.5 * (half_pi - outer_lo)
    for k in range(_GL_X.shape[0]):
        psi = mid + half * _GL_X[k]
        acc += half * _GL_W[k] * np.sin(psi) ** (p - 2.0)
    if psi_lo < 1.0:
        v_lo = psi_lo ** (p - 1.0)
        v_hi = 1.0
        vm = 0.5 * (v_hi + v_lo)
        vh = 0.5 * (v_hi - v_lo)
        inner = 0.0
        for k in range(_GL_X.shape[0]):
            v = vm + vh * _GL_X[k]
            inner += vh * _GL_W[k] * _sinc_pow(v ** (1.0 / (p - 1.0)), p)
        acc += inner / (p - 1.0)
    return acc


@njit(cache=True)
def _line_leg(h, w0, w1, dt_leg, p):
    """Exact integral of dist^{-p} over a time leg along a straight segment:
    perpendicular distance h > 0, along-line offsets running w0 -> w1 with
    0 <= w0 < w1, leg duration dt_leg."""
    scale = dt_leg / (w1 - w0) * h ** (1.0 - p)
    upper = _angular_primitive(np.arctan2(h, w1), p)
    lower = _angular_primitive(np.arctan2(h, w0), p) if w0 > 0.0 else 0.0
    return scale * (upper - lower)


@njit(cache=True)
def xi_values(pos, dt, p, pts):
    """Time integral int_0^t |X_s - x|^{-p} ds for each x in pts, for the
    piecewise-linear interpolation of the sampled positions.

    Each step is handled by the exact straight-segment rule: with the foot
    of the perpendicular from x at parameter u and distance h, the integral
    splits at the foot (if interior) into legs with closed-form angular
    primitives.  When x is on the step's line (h = 0; always in d = 1) the
    distance is piecewise linear in time and the rule reduces to
    _monotone_leg, exact including crossings.  For p >= 1 a point lying on
    the interpolated path yields inf -- the integral genuinely diverges.
    """
    n = pos.shape[0] - 1
    d = pos.shape[1]
    m = pts.shape[0]
    out = np.empty(m)
    for q in range(m):
        acc = 0.0
        for i in range(n):
            a2 = 0.0
            b2 = 0.0
            ad = 0.0  # (A . D) with A = pos[i] - x, D = pos[i+1] - pos[i]
            l2 = 0.0
            for c in range(d):
                da = pos[i, c] - pts[q, c]
                db = pos[i + 1, c] - pts[q, c]
                a2 += da * da
                b2 += db * db
                ad += da * (db - da)
                l2 += (db - da) * (db - da)
            a = np.sqrt(a2)
            b = np.sqrt(b2)
            if l2 <= 1e-24 * (a2 + b2):
                acc += dt * (0.5 * (a + b)) ** (-p)
                continue
            u = -ad / l2
            h2 = a2 - ad * ad / l2
            if h2 <= 1e-12 * (a2 + b2):
                # on the step's line: |linear| distance, exact closed forms
                if 0.0 < u < 1.0:
                    acc += _monotone_leg(0.0, a, u * dt, p)
                    acc += _monotone_leg(0.0, b, (1.0 - u) * dt, p)
                elif a <= b:
                    acc += _monotone_leg(a, b, dt, p)
                else:
                    acc += _monotone_leg(b, a, dt, p)
                continue
            h = np.sqrt(h2)
            ell = np.sqrt(l2)
            if u <= 0.0:
                acc += _line_leg(h, -u * ell, (1.0 - u) * ell, dt, p)
            elif u >= 1.0:
                acc += _line_leg(h, (u - 1.0) * ell, u * ell, dt, p)
            else:
                acc += _line_leg(h, 0.0, u * ell, u * dt, p)
                acc += _line_leg(h, 0.0, (1.0 - u) * ell, (1.0 - u) * dt, p)
        out[q] = acc
    return out
