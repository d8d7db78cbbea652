"""Computable function-space diagnostics: Besov norms, energy, variation norms.

The 2-variation norm replaces the atomic path-space norm wherever one is
needed: it admits an exact O(M^2) dynamic program over sample times.  The
propagator-twisted surrogate built on it vanishes on exact free waves, so
its size measures the deviation from free evolution.
"""

from dataclasses import dataclass, field

import numpy as np


def besov_norm(grid, u, s):
    """Dyadic Besov norm sum_j 2^(j s) ||P_j u||_L2 (l2 over components)."""
    profile = grid.band_l2_profile(u)
    weights = 2.0 ** (s * np.arange(grid.nbands))
    return float(np.dot(weights, profile))


def besov_sup(grid, u_ts, s):
    """Sup over the leading (time) axis of the Besov norm."""
    return max(besov_norm(grid, u_m, s) for u_m in u_ts)


def data_norm(grid, data):
    """Size of initial data: ||f|| at n/2+1 plus ||g|| at n/2."""
    s = grid.n / 2.0
    return besov_norm(grid, data.f, s + 1.0) + besov_norm(grid, data.g, s)


def solution_norm(grid, G_ts, dG_ts):
    """Sup-in-time size of a solution: ||G|| at n/2 plus ||dG|| at n/2-1."""
    s = grid.n / 2.0
    return besov_sup(grid, G_ts, s) + besov_sup(grid, dG_ts, s - 1.0)


def energy(grid, velocity, G):
    """Quadratic energy 0.5 ||d_t Y||^2 + 0.5 ||grad Y||^2 (L2 norms)."""
    return 0.5 * grid.l2(velocity) ** 2 + 0.5 * grid.l2(G) ** 2


# -- 2-variation by dynamic programming --------------------------------------


def pairwise_sq_dists(path):
    """Squared L2-type distances between all snapshot pairs, via a Gram matrix.

    ``path`` has snapshots along the first axis; trailing axes are flattened.
    Complex snapshots use the Hermitian inner product.  The path is centered
    on its mean snapshot first: distances are unchanged, but the Gram
    cancellation then happens at the fluctuation scale, so nearly constant
    paths come out near zero instead of at the sqrt(eps ||w||^2) floor.
    """
    X = np.ascontiguousarray(path).reshape(len(path), -1).copy()
    X -= X.mean(axis=0)
    gram = (X @ X.conj().T).real
    q = np.diag(gram)
    d2 = q[:, None] + q[None, :] - 2.0 * gram
    return np.maximum(d2, 0.0)


def two_variation_from_dists(d2):
    """Exact sup over partitions of sum of squared increments, O(M^2).

    best[i] = max_{j<i} best[j] + d2[j, i]; appending later samples never
    decreases the sum, so the supremum is attained at the final sample.
    """
    m = d2.shape[0]
    best = np.zeros(m)
    for i in range(1, m):
        best[i] = np.max(best[:i] + d2[:i, i])
    return float(np.sqrt(best[-1]))


def two_variation(path, max_samples=None):
    """2-variation of a sampled path (first axis = time)."""
    path = np.asarray(path)
    if len(path) < 2:
        raise ValueError("a path needs at least 2 samples")
    if max_samples is not None:
        path = _subsample(path, max_samples)
    return two_variation_from_dists(pairwise_sq_dists(path))


def _subsample(path, max_samples):
    m = len(path)
    if m <= max_samples:
        return path
    stride = -(-m // max_samples)  # ceil
    idx = list(range(0, m, stride))
    if idx[-1] != m - 1:
        idx.append(m - 1)
    return path[idx]


# -- propagator-twisted surrogate ---------------------------------------------

VARIATION_MAX_SAMPLES = 256


def s_surrogate(grid, tg, G_ts, dG_ts, s=None, max_samples=VARIATION_MAX_SAMPLES):
    """Iteration-space surrogate: twisted per-band 2-variation plus sup-Besov.

    Per band j and sign, the path w(t) = exp(+-i t |k|)(u +- i |k|^-1 d_t u)
    restricted to the band is constant for exact free waves; its 2-variation
    accumulates only the inhomogeneous part of the evolution.  Bands are
    combined with the weight 2^(j s) and the sup-in-time Besov norm of u is
    added.
    """
    if s is None:
        s = grid.n / 2.0
    idx = _subsample(np.arange(tg.nsamples), max_samples)
    times = tg.times[idx]
    coeff_scale = np.sqrt(grid.cell_volume) / np.sqrt(grid.npoints)
    flat_absk = grid.absk.ravel()
    flat_band = grid.band_of.ravel()
    ncomp = int(np.prod(G_ts.shape[1 : G_ts.ndim - grid.n], dtype=int))

    Gh = np.empty((len(idx), ncomp, grid.npoints), dtype=complex)
    Wh = np.empty_like(Gh)
    for row, m in enumerate(idx):
        Gh[row] = grid.fft(G_ts[m]).reshape(ncomp, -1)
        Wh[row] = grid.fft(dG_ts[m]).reshape(ncomp, -1)
    Wh *= np.where(flat_absk > 0, 1.0, 0.0) / np.where(flat_absk > 0, flat_absk, 1.0)

    variation = 0.0
    for j in range(grid.nbands):
        sel = np.nonzero(flat_band == j)[0]
        if len(sel) == 0:
            continue
        vj = 0.0
        for sign in (+1.0, -1.0):
            twist = np.exp(sign * 1j * times[:, None] * flat_absk[sel])[:, None, :]
            w = (Gh[:, :, sel] + sign * 1j * Wh[:, :, sel]) * twist
            vj += two_variation(w * coeff_scale)
        variation += 2.0 ** (j * s) * vj
    return variation + besov_sup(grid, G_ts, s), variation


@dataclass
class DiagnosticsReport:
    """Per-time diagnostic rows plus run-level summary fields."""

    times: list = field(default_factory=list)
    besov_G: list = field(default_factory=list)
    besov_dG: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    det_residual: list = field(default_factory=list)
    pressure_curl_residual: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    s_surrogate: float = 0.0
    s_variation_part: float = 0.0
    variation_stride: int = 1
    converged: bool = True
    iterations: int = 0
    wall_clock: float = 0.0

    def add_row(self, t, bG, bdG, en, det_res, curl_res):
        self.times.append(float(t))
        self.besov_G.append(float(bG))
        self.besov_dG.append(float(bdG))
        self.energy.append(float(en))
        self.det_residual.append(float(det_res))
        self.pressure_curl_residual.append(float(curl_res))

    CSV_COLUMNS = (
        "t",
        "besov_G",
        "besov_dG",
        "energy",
        "det_residual",
        "pressure_curl_residual",
    )

    def row_arrays(self):
        return (
            self.times,
            self.besov_G,
            self.besov_dG,
            self.energy,
            self.det_residual,
            self.pressure_curl_residual,
        )


# -- sweep analytics -----------------------------------------------------------


@dataclass
class SweepRow:
    epsilon: float
    data_norm: float
    solution_norm: float
    ratio: float
    first_picard_ratio: float
    iterations: int
    converged: bool
    free_deviation: float  # sup-Besov distance to the free-wave trajectory
    monotone: bool = True


def sweep_report(rows):
    """Order rows by amplitude and flag departures from the small-data regime.

    Flags (never raises): non-monotone solution norms and non-converged runs.
    """
    if len(rows) < 3:
        raise ValueError("a sweep needs at least 3 amplitudes")
    rows = sorted(rows, key=lambda r: r.epsilon)
    eps = [r.epsilon for r in rows]
    if len(set(eps)) != len(eps):
        raise ValueError("sweep amplitudes must be distinct")
    for i, r in enumerate(rows):
        r.monotone = all(
            rows[j].solution_norm <= r.solution_norm or not rows[j].converged
            for j in range(i)
        )
    return rows


def loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
