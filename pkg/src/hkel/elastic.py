"""Incompressible Hookean elasticity algebra on Jacobian fields.

A Jacobian field G stores G[a, b] = d_b Y_a (component first, derivative
second).  The incompressibility constraint det(I + G) = 1 expands into
trace(G) plus the principal-minor sums E_k(G), and those minors drive both
the curl-free reconstruction and the compatibility checks.

Minors of true Jacobian fields are null Lagrangians, so their means vanish
in exact arithmetic; the helpers below subtract the rounding-level mean
before applying Riesz multipliers.
"""

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .bandlimited import random_divergence_free, random_scalar
from .spectral import dealiased_product, pad_to_fine, truncate_from_fine


@dataclass
class InitialData:
    """Displacement/velocity pair (f, g) at t = 0."""

    f: np.ndarray  # (n,) + grid.shape
    g: np.ndarray

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.f.shape != self.g.shape:
            raise ValueError("f and g must have the same shape")


def _det_terms(indices):
    """Leibniz terms (sign, [(row, col), ...]) of det(A[ix, ix])."""
    indices = tuple(indices)
    terms = []
    for perm in permutations(range(len(indices))):
        sign = _parity(perm)
        terms.append((sign, [(indices[i], indices[perm[i]]) for i in range(len(indices))]))
    return terms


def _parity(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _accumulate_terms(fine, terms):
    """Sum signed entry products on the fine lattice, in a fixed order."""
    acc = np.zeros(fine.shape[2:])
    for sign, entries in terms:
        prod = fine[entries[0]].copy()
        for rc in entries[1:]:
            prod *= fine[rc]
        acc += sign * prod
    return acc


def _demean(grid, u):
    return u - u.mean(axis=grid.axes, keepdims=True)


def principal_minor_sum(grid, A, k):
    """Sum of all k x k principal minors of a matrix field, dealiased."""
    n = grid.n
    if not 2 <= k <= n:
        raise ValueError(f"minor order must satisfy 2 <= k <= {n}, got {k}")
    fine = pad_to_fine(grid, np.asarray(A), 2)
    terms = []
    for subset in combinations(range(n), k):
        terms.extend(_det_terms(subset))
    return truncate_from_fine(grid, _accumulate_terms(fine, terms), 2)


def minor_sum_total(grid, G, G_fine=None):
    """E_2(G) + ... + E_n(G) with one shared padded transform."""
    n = grid.n
    fine = pad_to_fine(grid, np.asarray(G), 2) if G_fine is None else G_fine
    terms = []
    for k in range(2, n + 1):
        for subset in combinations(range(n), k):
            terms.extend(_det_terms(subset))
    return truncate_from_fine(grid, _accumulate_terms(fine, terms), 2)


def curl_free_gradient(grid, G):
    """Gradient of the curl-free displacement slaved to the constraint.

    C[a, b] = R_a R_b s with s = sum_k E_k(G); symmetric by construction,
    with trace(C) = -s since the squared Riesz multipliers sum to -1.
    """
    s = minor_sum_total(grid, G)
    s = _demean(grid, s)  # rounding-level for Jacobian input (null Lagrangian)
    sh = grid.fft(s)
    C = np.empty((grid.n, grid.n) + s.shape)
    for a in range(grid.n):
        for b in range(a, grid.n):
            C[a, b] = grid.ifft(sh * (-grid.freq[a] * grid.freq[b] * grid.inv_k2))
            if b != a:
                C[b, a] = C[a, b]
    return C


def null_form(grid, G, H, G_fine=None, H_fine=None):
    """Antisymmetric bilinear coupling of G with H = box(G).

    Output O[a, b] = sum_k R_b R_k B[a, k] with the bracket
    B[a, k] = sum_l (G[l, a] H[l, k] - G[l, k] H[l, a]); B is stored
    exactly antisymmetrically so the assembled output has an identically
    vanishing trace contribution.

    Both arguments may carry extra axes between the two component axes and
    the spatial axes (time batching); the output matches.
    """
    n = grid.n
    G = np.asarray(G)
    Gf = pad_to_fine(grid, G, 2) if G_fine is None else G_fine
    Hf = pad_to_fine(grid, np.asarray(H), 2) if H_fine is None else H_fine
    inner = G.shape[2:]
    Bh = np.zeros((n, n) + inner, dtype=complex)
    for a in range(n):
        for k in range(a + 1, n):
            acc = Gf[0, a] * Hf[0, k] - Gf[0, k] * Hf[0, a]
            for l in range(1, n):
                acc += Gf[l, a] * Hf[l, k] - Gf[l, k] * Hf[l, a]
            b_ak = _demean(grid, truncate_from_fine(grid, acc, 2))
            Bh[a, k] = grid.fft(b_ak)
            Bh[k, a] = -Bh[a, k]
    out = np.empty((n, n) + inner)
    for a in range(n):
        for b in range(n):
            acc = np.zeros(inner, dtype=complex)
            for k in range(n):
                acc += Bh[a, k] * (-grid.freq[b] * grid.freq[k] * grid.inv_k2)
            out[a, b] = grid.ifft(acc)
    return out


# -- pointwise matrix algebra ------------------------------------------------


def det_pointwise(M):
    """Pointwise determinant of a matrix field (n in {2, 3})."""
    M = np.asarray(M)
    if M.shape[0] == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return (
        M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
        - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
        + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
    )


def cofactor_pointwise(M):
    M = np.asarray(M)
    n = M.shape[0]
    cof = np.empty_like(M)
    for a in range(n):
        for b in range(n):
            rows = [r for r in range(n) if r != a]
            cols = [c for c in range(n) if c != b]
            if n == 2:
                minor = M[rows[0], cols[0]]
            else:
                minor = (
                    M[rows[0], cols[0]] * M[rows[1], cols[1]]
                    - M[rows[0], cols[1]] * M[rows[1], cols[0]]
                )
            cof[a, b] = (-1) ** (a + b) * minor
    return cof


def inverse_pointwise(M, det_tol=0.5):
    """Pointwise inverse by cofactors; valid only near det = 1.

    Raises if the determinant strays from 1 by more than ``det_tol`` at any
    grid point (large deformation, outside the small-data regime).
    """
    det = det_pointwise(M)
    bad = np.abs(det - 1.0) > det_tol
    if np.any(bad):
        loc = np.unravel_index(int(np.argmax(np.abs(det - 1.0))), det.shape)
        raise ValueError(
            f"pointwise Jacobian determinant {det[loc]:.4f} at grid point {loc} "
            f"is farther than {det_tol} from 1"
        )
    cof = cofactor_pointwise(M)
    return np.swapaxes(cof, 0, 1) / det


# -- compatibility -----------------------------------------------------------


def det_deviation_field(grid, G):
    """det(I + G) - 1 = trace(G) + sum_k E_k(G), with dealiased minors."""
    trace = G[0, 0].copy()
    for a in range(1, grid.n):
        trace += G[a, a]
    return trace + minor_sum_total(grid, G)


def _cofactor_trace_terms(n):
    """Leibniz terms of sum_{a,b} cof(M)[a, b] * A[a, b].

    Each term is (sign, [(r, c) entries of M], (a, b) entry of A); the
    cofactor of M at (a, b) is the signed minor with row a, column b
    removed.
    """
    out = []
    for a in range(n):
        for b in range(n):
            rows = [r for r in range(n) if r != a]
            cols = [c for c in range(n) if c != b]
            for perm in permutations(range(n - 1)):
                sign = _parity(perm) * (-1) ** (a + b)
                entries = [(rows[i], cols[perm[i]]) for i in range(n - 1)]
                out.append((sign, entries, (a, b)))
    return out


def velocity_residual_field(grid, gradX, gradg):
    """d/dt det(grad X) expressed as sum_{a,b} cof(grad X)[a,b] d_b g_a.

    Equals det(grad X) * trace((grad X)^-1 grad g) without ever inverting;
    every summand is a single alias-free product of n factors.
    """
    n = grid.n
    gradXf = pad_to_fine(grid, gradX, 2)  # degree <= 3, pad 2 suffices
    gradgf = pad_to_fine(grid, gradg, 2)
    acc = np.zeros(gradXf.shape[2:])
    for sign, entries, (a, b) in _cofactor_trace_terms(n):
        prod = gradXf[entries[0]].copy()
        for rc in entries[1:]:
            prod *= gradXf[rc]
        prod *= gradgf[a, b]
        acc += sign * prod
    return truncate_from_fine(grid, acc, 2)


def compatibility_residuals(grid, data):
    """Max-norm residuals of the volume and velocity compatibility conditions.

    Returns (r1, r2) with r1 = max|det(I + grad f) - 1| and r2 the max of
    the exact time derivative of det(grad X) at t = 0.  Both maxima are
    taken on the product-resolving fine lattice, where the dealiased
    products are exact point values.
    """
    n = grid.n
    G = grid.jacobian(data.f)
    gradX = G.copy()
    for a in range(n):
        gradX[a, a] += 1.0
    gradXf = pad_to_fine(grid, gradX, 2)  # all products here have degree <= 3
    Gfine = gradXf.copy()
    for a in range(n):
        Gfine[a, a] -= 1.0
    trace = Gfine[0, 0].copy()
    for a in range(1, n):
        trace += Gfine[a, a]
    minor_terms = []
    for k in range(2, n + 1):
        for subset in combinations(range(n), k):
            minor_terms.extend(_det_terms(subset))
    r1 = float(np.abs(trace + _accumulate_terms(Gfine, minor_terms)).max())

    gradgf = pad_to_fine(grid, grid.jacobian(data.g), 2)
    acc = np.zeros(gradXf.shape[2:])
    for sign, entries, (a, b) in _cofactor_trace_terms(n):
        prod = gradXf[entries[0]].copy()
        for rc in entries[1:]:
            prod *= gradXf[rc]
        prod *= gradgf[a, b]
        acc += sign * prod
    r2 = float(np.abs(acc).max())
    return r1, r2


def velocity_residual_transposed(grid, data):
    """Same check with the transposed-inverse convention, for comparison."""
    Gf = grid.jacobian(data.f)
    gradX = Gf.copy()
    for a in range(grid.n):
        gradX[a, a] += 1.0
    gradXT = np.swapaxes(gradX, 0, 1)
    Gg = grid.jacobian(data.g)
    return float(np.abs(velocity_residual_field(grid, gradXT, Gg)).max())


# -- volume-preserving data generators ----------------------------------------


def make_shear_data(grid, amplitude, seed, band=2, nshears=None):
    """Compatible initial data from composed coordinate shears.

    Each shear displaces one coordinate by a band-limited function of the
    others, so its Jacobian is unit-triangular and the composition has
    det(I + grad f) = 1 exactly.  The velocity is g(y) = v(y + f(y)) with
    div v = 0, which zeroes the velocity compatibility residual exactly in
    the continuum and to interpolation accuracy on the lattice.
    """
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    n = grid.n
    if nshears is None:
        nshears = n
    rng = np.random.Generator(np.random.Philox(key=seed))
    points = grid.coords.copy()
    for s in range(nshears):
        axis = s % n
        phi = random_scalar(rng, n, band, exclude_axis=axis)
        points[axis] = points[axis] + amplitude * phi(points)
    f = points - grid.coords
    v = random_divergence_free(rng, n, band)
    g = np.stack([amplitude * comp(points) for comp in v])
    # remove the rounding-level translation mode; gradients are unchanged
    f -= f.mean(axis=grid.axes, keepdims=True)
    g -= g.mean(axis=grid.axes, keepdims=True)
    return InitialData(f, g)


# -- pressure ------------------------------------------------------------------


def recover_pressure(grid, G, boxY):
    """Pressure and curl residual from the momentum balance.

    The elastic acceleration balance reads (I + G^T) box(Y) = -grad p, so
    p = -inv_lap(div w) for w = (I + G^T) box(Y).  The returned residual
    ||leray(w)|| / ||w|| measures how far w is from a pure gradient.
    """
    n = grid.n
    w = boxY.astype(float).copy()
    for b in range(n):
        for l in range(n):
            w[b] += dealiased_product(grid, [G[l, b], boxY[l]])
    w -= w.mean(axis=grid.axes, keepdims=True)  # constant part carries no curl
    p = -grid.inverse_laplacian(grid.divergence(w), check_mean=False)
    wnorm = grid.l2(w)
    if wnorm == 0.0:
        return p, 0.0
    residual = grid.l2(grid.leray_project(w, check_mean=False)) / wnorm
    return p, residual


def vector_from_gradient(grid, M):
    """Recover the mean-free vector field v with grad v = M.

    Least-squares per mode: v_hat_a = -i sum_b xi_b M_hat[a, b] / |xi|^2,
    exact when M is curl-compatible.  The zero mode (a rigid translation)
    is not recoverable and is set to 0.
    """
    Mh = grid.fft(M)
    comps = []
    for a in range(grid.n):
        acc = Mh[a, 0] * (-1j * grid.freq[0] * grid.inv_k2)
        for b in range(1, grid.n):
            acc += Mh[a, b] * (-1j * grid.freq[b] * grid.inv_k2)
        comps.append(grid.ifft(acc))
    return np.stack(comps)


def curl_compatibility_residual(grid, G):
    """Max relative failure of d_k G[a, b] = d_b G[a, k] (gradient check)."""
    n = grid.n
    Gh = grid.fft(G)
    worst = 0.0
    for a in range(n):
        for b in range(n):
            for k in range(b + 1, n):
                diff = grid.ifft(Gh[a, b] * (1j * grid.freq[k]) - Gh[a, k] * (1j * grid.freq[b]))
                worst = max(worst, float(np.abs(diff).max()))
    scale = float(np.abs(G).max())
    return worst / scale if scale > 0 else worst
