"""Periodic grids, Fourier multiplier calculus, and dealiased products.

Fields are plain float64 ndarrays sampled on the 2*pi-periodic lattice.
Spatial axes come last: a scalar field has shape ``grid.shape``, a vector
field ``(n,) + grid.shape`` and a matrix field ``(n, n) + grid.shape``.
Every operation broadcasts over leading (component or time) axes, so the
same code path serves scalars, Jacobians and whole trajectories.

The frequency lattice is the integer dual lattice xi in {-N/2, ..., N/2-1}
per axis.  Multipliers with an inverse power of |xi| set the zero mode to
zero and reject inputs whose mean is not negligible.
"""

import hashlib
import math

import numpy as np

MEAN_FREE_RTOL = 1e-10


class Grid:
    """Uniform periodic lattice on the n-torus with frequency bookkeeping.

    Parameters
    ----------
    n : spatial dimension, 2 or 3.
    size : points per axis N, a power of two, N >= 8.
    """

    def __init__(self, n, size):
        if n not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {n}")
        if size < 8 or size & (size - 1) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {size}")
        self.n = n
        self.size = size
        self.shape = (size,) * n
        self.axes = tuple(range(-n, 0))
        self.npoints = size**n
        # cell volume and L2 weight on the 2*pi torus
        self.cell_volume = (2 * np.pi / size) ** n

        k1 = np.fft.fftfreq(size, d=1.0 / size)  # integer frequencies as floats
        # The lattice window {-N/2..N/2-1} holds the unpaired Nyquist line
        # -N/2.  Real fields are read as symmetric trig interpolants, whose
        # odd-order derivatives vanish at the sample points on that line, so
        # first-order multipliers use dfreq with the Nyquist entry zeroed.
        d1 = np.where(np.abs(k1) == size // 2, 0.0, k1)
        self.freq = []
        self.dfreq = []
        for a in range(n):
            sh = [1] * n
            sh[a] = size
            self.freq.append(k1.reshape(sh))
            self.dfreq.append(d1.reshape(sh))
        self.k2 = sum(k * k for k in self.freq) + np.zeros(self.shape)
        self.absk = np.sqrt(self.k2)
        nonzero = self.k2 > 0
        self.inv_k2 = np.where(nonzero, 1.0 / np.where(nonzero, self.k2, 1.0), 0.0)
        self.inv_absk = np.where(nonzero, 1.0 / np.where(nonzero, self.absk, 1.0), 0.0)

        # sharp dyadic shells 2^j <= |xi| < 2^(j+1); the zero mode gets -1
        self.nbands = int(math.log2(size // 2)) + 1
        with np.errstate(divide="ignore"):
            j = np.floor(np.log2(np.where(nonzero, self.absk, 1.0))).astype(np.int64)
        self.band_of = np.where(nonzero, j, -1)
        assert self.band_of.max() == self.nbands - 1

        # physical window: modes below the unpaired Nyquist line on every axis
        mask = np.ones(self.shape, dtype=bool)
        for a in range(n):
            mask &= np.abs(self.freq[a]) < size // 2
        self.phys_mask = mask

        x1 = 2 * np.pi * np.arange(size) / size
        self.coords = np.stack(np.meshgrid(*([x1] * n), indexing="ij"))

    def __repr__(self):
        return f"Grid(n={self.n}, size={self.size})"

    # -- transforms -------------------------------------------------------

    def fft(self, u):
        return np.fft.fftn(np.asarray(u), axes=self.axes)

    def ifft(self, uh):
        return np.fft.ifftn(uh, axes=self.axes).real

    def mean(self, u):
        return np.asarray(u).mean(axis=self.axes)

    def l2(self, u):
        """L2 norm over the torus, l2 over any leading component axes."""
        u = np.asarray(u)
        return math.sqrt(self.cell_volume * float(np.sum(u * u)))

    def project_physical(self, u, mean_free=True):
        """Drop unpaired Nyquist-plane content (and optionally the mean)."""
        uh = self.fft(u) * self.phys_mask
        if mean_free:
            uh[(Ellipsis,) + (0,) * self.n] = 0.0
        return self.ifft(uh)

    def require_mean_free(self, u, what="field"):
        u = np.asarray(u)
        m = np.abs(self.mean(u))
        scale = np.sqrt(np.mean(u * u, axis=self.axes))
        if np.any(m > MEAN_FREE_RTOL * np.maximum(scale, 1e-300)):
            raise ValueError(
                f"{what} must be mean-free: |mean| = {float(np.max(m)):.3e} "
                f"exceeds {MEAN_FREE_RTOL:g} * rms"
            )

    # -- first-order calculus ---------------------------------------------

    def deriv(self, u, axis):
        """Spectral partial derivative along spatial axis ``axis``."""
        if not 0 <= axis < self.n:
            raise ValueError(f"axis must be in 0..{self.n - 1}, got {axis}")
        return self.ifft(self.fft(u) * (1j * self.dfreq[axis]))

    def gradient(self, u):
        """Stack of all partial derivatives along a new leading axis."""
        uh = self.fft(u)
        return np.stack([self.ifft(uh * (1j * k)) for k in self.dfreq])

    def jacobian(self, v):
        """Jacobian G[a, b] = d_b v_a of a vector field (first axis = component)."""
        vh = self.fft(v)
        return np.stack(
            [self.ifft(vh * (1j * k)) for k in self.dfreq], axis=1
        )

    def divergence(self, v):
        """Divergence of a vector field (first axis = component)."""
        vh = self.fft(v)
        acc = vh[0] * (1j * self.dfreq[0])
        for a in range(1, self.n):
            acc = acc + vh[a] * (1j * self.dfreq[a])
        return self.ifft(acc)

    def laplacian(self, u):
        return self.ifft(self.fft(u) * (-self.k2))

    def inverse_laplacian(self, u, check_mean=True):
        """Solve Delta v = u for mean-free u; the zero mode of v is 0."""
        if check_mean:
            self.require_mean_free(u, "inverse_laplacian input")
        return self.ifft(self.fft(u) * (-self.inv_k2))

    def riesz(self, u, i):
        """Riesz-type operator with multiplier i*xi_i/|xi|, zero mode 0."""
        self.require_mean_free(u, "riesz input")
        return self.ifft(self.fft(u) * (1j * self.dfreq[i] * self.inv_absk))

    def riesz_pair(self, u, i, j):
        """R_i R_j u in one multiplier pass: -xi_i xi_j / |xi|^2."""
        self.require_mean_free(u, "riesz_pair input")
        return self.ifft(self.fft(u) * (-self.freq[i] * self.freq[j] * self.inv_k2))

    def leray_project(self, v, check_mean=True):
        """Divergence-free part of a vector field: v - grad(inv_lap(div v))."""
        v = np.asarray(v)
        if v.shape[0] != self.n:
            raise ValueError("leray_project expects a vector field")
        if check_mean:
            self.require_mean_free(v, "leray_project input")
        vh = self.fft(v)
        kdotv = sum(self.freq[a] * vh[a] for a in range(self.n))
        out = np.empty_like(vh)
        for a in range(self.n):
            out[a] = vh[a] - self.freq[a] * kdotv * self.inv_k2
        return self.ifft(out)

    # -- dyadic shells ------------------------------------------------------

    def dyadic_project(self, u, j):
        """Sharp restriction to the frequency shell 2^j <= |xi| < 2^(j+1)."""
        if not 0 <= j < self.nbands:
            raise ValueError(f"band index must be in 0..{self.nbands - 1}, got {j}")
        return self.ifft(self.fft(u) * (self.band_of == j))

    def band_l2_profile(self, u):
        """Per-band L2 norms ||P_j u||, l2 over leading component axes.

        Computed in frequency space via Parseval; returns shape (nbands,).
        """
        uh = self.fft(u)
        power = np.abs(uh) ** 2
        if power.ndim > self.n:
            power = power.sum(axis=tuple(range(power.ndim - self.n)))
        sums = np.bincount(
            (self.band_of + 1).ravel(), weights=power.ravel(), minlength=self.nbands + 1
        )
        return np.sqrt(sums[1:] * self.cell_volume / self.npoints)


def random_mean_free(grid, rng, band=None):
    """Random mean-free scalar samples on the physical frequency window.

    With ``band`` set, modes are restricted to |xi|_inf <= band; otherwise
    the full window short of the unpaired Nyquist line is used.  RMS is
    normalized to 1.
    """
    u = rng.standard_normal(grid.shape)
    uh = grid.fft(u)
    half = grid.size // 2
    for a in range(grid.n):
        mask = np.abs(grid.freq[a]) >= (half if band is None else band + 1)
        uh = np.where(mask, 0.0, uh)
    uh[(0,) * grid.n] = 0.0
    u = grid.ifft(uh)
    return u / np.sqrt(np.mean(u * u))


# -- dealiased pointwise products ------------------------------------------


def _pad_indices(grid, pad):
    big = pad * grid.size
    idx = (np.fft.fftfreq(grid.size, d=1.0 / grid.size).astype(np.int64)) % big
    return np.ix_(*([idx] * grid.n))


def pad_factor(degree):
    """Padding multiple for an alias-free product of ``degree`` factors."""
    return (degree + 2) // 2


def pad_to_fine(grid, u, pad):
    """Trigonometric interpolation of u onto the pad-times finer lattice."""
    uh = grid.fft(u)
    big = pad * grid.size
    fine = np.zeros(u.shape[: -grid.n] + (big,) * grid.n, dtype=complex)
    fine[(Ellipsis,) + _pad_indices(grid, pad)] = uh
    return np.fft.ifftn(fine, axes=grid.axes).real * pad**grid.n


def truncate_from_fine(grid, u_fine, pad):
    """Project a fine-lattice field back onto the grid's frequency window."""
    fh = np.fft.fftn(u_fine, axes=grid.axes)
    uh = fh[(Ellipsis,) + _pad_indices(grid, pad)] / pad**grid.n
    return grid.ifft(uh)


def _canonical_order(arrays):
    keys = [hashlib.sha256(np.ascontiguousarray(a).tobytes()).digest() for a in arrays]
    return [arrays[i] for i in sorted(range(len(arrays)), key=keys.__getitem__)]


def dealiased_product(grid, factors):
    """Alias-free pointwise product of band-limited fields.

    The factors are interpolated onto a lattice refined by
    ``pad_factor(len(factors))``, multiplied there, and truncated back.
    Factors are multiplied in a canonical content-derived order, so the
    result is bitwise independent of the argument order.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("dealiased_product needs at least one factor")
    if len(factors) == 1:
        return np.asarray(factors[0], dtype=float).copy()
    pad = pad_factor(len(factors))
    fine = _canonical_order([pad_to_fine(grid, f, pad) for f in factors])
    prod = fine[0]
    for f in fine[1:]:
        prod = prod * f
    return truncate_from_fine(grid, prod, pad)
