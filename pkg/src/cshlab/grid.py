"""Periodic 2D pseudospectral engine.

Fields live on an M x M torus of side `box_length` with the frequency
lattice (2 pi / box_length) Z^2 in standard FFT ordering.  Spectral
coefficients follow the synthesis convention u(x) = sum_k c_k e^{i k.x},
so `to_spectral` is fft2/M^2 and Parseval reads
||u||_L2^2 = area * sum |c_k|^2.

Conventions adopted throughout:

* Fourier multipliers D^sigma (|xi|^sigma), the Riesz symbol xi_j/|xi| and
  inverse powers annihilate the xi = 0 mode.
* Littlewood-Paley shells are sharp indicator cutoffs, |xi| in [N, 2N) for
  dyadic N >= 2, with the N = 1 shell absorbing |xi| < 2.  The shells tile
  the lattice exactly.
* Products of total polynomial degree p are dealiased by restricting both
  inputs and the output to the square band |k|_inf <= (M-1)/(p+1) in index
  units, the degree-p generalization of the 2/3 rule.
"""

import numpy as np

_DEFAULT_BOX = 2.0 * np.pi


class GridMismatchError(ValueError):
    pass


class Grid2D:
    """Periodic square grid with cached frequency geometry."""

    def __init__(self, M, box_length=_DEFAULT_BOX):
        if M < 8 or M % 2 != 0:
            raise ValueError("M must be even and at least 8")
        self.M = int(M)
        self.box_length = float(box_length)
        self.area = self.box_length ** 2
        idx = np.fft.fftfreq(self.M, d=1.0 / self.M)  # integer indices
        self.index1 = idx[:, None] * np.ones(self.M)[None, :]
        self.index2 = np.ones(self.M)[:, None] * idx[None, :]
        unit = 2.0 * np.pi / self.box_length
        self.k1 = unit * self.index1
        self.k2 = unit * self.index2
        self.kmag = np.hypot(self.k1, self.k2)
        self._shell_exp = self._shell_exponents()
        self._dealias_masks = {}

    def _shell_exponents(self):
        # dyadic exponent j with |xi| in [2^j, 2^{j+1}), j = 0 absorbing |xi| < 2
        with np.errstate(divide="ignore"):
            e = np.floor(np.log2(np.maximum(self.kmag, 1e-300))).astype(int)
        return np.clip(e, 0, None)

    def shells(self):
        """Sorted dyadic shell values N actually present on the lattice."""
        return [2 ** j for j in np.unique(self._shell_exp)]

    def dealias_mask(self, order):
        if order not in self._dealias_masks:
            kmax = (self.M - 1) // (order + 1)
            mask = (np.abs(self.index1) <= kmax) & (np.abs(self.index2) <= kmax)
            self._dealias_masks[order] = mask
        return self._dealias_masks[order]

    def band_mask(self, kmax_index):
        return (np.abs(self.index1) <= kmax_index) & (np.abs(self.index2) <= kmax_index)

    def __eq__(self, other):
        return (isinstance(other, Grid2D) and other.M == self.M
                and other.box_length == self.box_length)

    def __hash__(self):
        return hash((self.M, self.box_length))


PHYSICAL = "physical"
SPECTRAL = "spectral"


class ScalarField:
    """Complex scalar field tagged with its current representation."""

    def __init__(self, grid, values, rep=PHYSICAL):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.M, grid.M):
            raise ValueError("values must be M x M")
        if rep not in (PHYSICAL, SPECTRAL):
            raise ValueError(f"unknown representation {rep!r}")
        self.grid = grid
        self.values = values
        self.rep = rep

    def copy(self):
        return ScalarField(self.grid, self.values.copy(), self.rep)

    def to_spectral(self):
        if self.rep == SPECTRAL:
            return self
        c = np.fft.fft2(self.values) / self.grid.M ** 2
        return ScalarField(self.grid, c, SPECTRAL)

    def to_physical(self):
        if self.rep == PHYSICAL:
            return self
        u = np.fft.ifft2(self.values) * self.grid.M ** 2
        return ScalarField(self.grid, u, PHYSICAL)

    def l2_norm(self):
        if self.rep == SPECTRAL:
            return float(np.sqrt(self.grid.area * np.sum(np.abs(self.values) ** 2)))
        return float(np.sqrt(self.grid.area * np.mean(np.abs(self.values) ** 2)))

    def lp_norm(self, p):
        u = self.to_physical().values
        return float((self.grid.area * np.mean(np.abs(u) ** p)) ** (1.0 / p))


def transform(values, grid, rep=PHYSICAL):
    return ScalarField(grid, values, rep)


# Fourier multiplier machinery ------------------------------------------------

def _multiplier_array(grid, kind, **params):
    k = grid.kmag
    if kind == "D":
        sigma = params["sigma"]
        if sigma == 0:
            return np.ones_like(k)
        safe = np.where(k > 0, k, 1.0)
        m = safe ** sigma
        m[k == 0] = 0.0
        return m
    if kind == "riesz":
        j = params["j"]
        comp = grid.k1 if j == 1 else grid.k2
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.where(k > 0, comp / np.where(k > 0, k, 1.0), 0.0)
        return m
    if kind == "heat":
        return np.exp(-params["t"] * k ** 2)
    raise ValueError(f"unknown multiplier kind {kind!r}")


def apply_multiplier(u, kind, **params):
    """Apply |xi|^sigma ('D', sigma=...), xi_j/|xi| ('riesz', j=1|2) or a
    heat smoother exp(-t |xi|^2) ('heat', t=...).  Zero modes of D^sigma
    (sigma != 0) and Riesz symbols map to zero."""
    spec = u.to_spectral()
    m = _multiplier_array(u.grid, kind, **params)
    out = ScalarField(u.grid, spec.values * m, SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


def frac_laplacian(u, sigma):
    return apply_multiplier(u, "D", sigma=sigma)


def derivative(u, axis):
    """Spectral partial derivative d/dx_axis (axis = 1 or 2)."""
    spec = u.to_spectral()
    comp = u.grid.k1 if axis == 1 else u.grid.k2
    out = ScalarField(u.grid, 1j * comp * spec.values, SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


def littlewood_paley(u, N):
    """Sharp projection onto the dyadic shell N (see module docstring)."""
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError("N must be a dyadic integer >= 1")
    spec = u.to_spectral()
    j = int(np.log2(N))
    mask = u.grid._shell_exp == j
    out = ScalarField(u.grid, np.where(mask, spec.values, 0.0), SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


def shell_l2_profile(u):
    """L2 mass per dyadic shell, as {N: ||P_N u||_L2}."""
    spec = u.to_spectral()
    power = np.abs(spec.values) ** 2
    out = {}
    for j in np.unique(u.grid._shell_exp):
        mass = np.sum(power[u.grid._shell_exp == j])
        out[2 ** int(j)] = float(np.sqrt(u.grid.area * mass))
    return out


def sobolev_norm(u, s):
    """Dyadic-sum Sobolev norm (sum_N (N^s ||P_N u||_L2)^2)^(1/2)."""
    prof = shell_l2_profile(u)
    return float(np.sqrt(sum((N ** s * v) ** 2 for N, v in prof.items())))


def dealiased_product(u, v, order=2):
    """Pointwise product with degree-`order` anti-aliasing truncation."""
    if u.grid != v.grid:
        raise GridMismatchError("operands live on different grids")
    if order not in (2, 3, 5):
        raise ValueError("order must be one of 2, 3, 5")
    mask = u.grid.dealias_mask(order)
    uu = np.fft.ifft2(u.to_spectral().values * mask) * u.grid.M ** 2
    vv = np.fft.ifft2(v.to_spectral().values * mask) * v.grid.M ** 2
    prod = np.fft.fft2(uu * vv) / u.grid.M ** 2
    out = ScalarField(u.grid, prod * mask, SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


# su(n)-valued fields ----------------------------------------------------------

class LieFieldGrid:
    """Stack of n^2 - 1 scalar components sharing one grid, shape (d, M, M)."""

    def __init__(self, grid, values, rep=PHYSICAL):
        self.grid = grid
        self.values = np.asarray(values, dtype=complex)
        if self.values.ndim != 3 or self.values.shape[1:] != (grid.M, grid.M):
            raise ValueError("values must have shape (d, M, M)")
        self.rep = rep

    @property
    def dim(self):
        return self.values.shape[0]

    def copy(self):
        return LieFieldGrid(self.grid, self.values.copy(), self.rep)

    def component(self, a):
        return ScalarField(self.grid, self.values[a], self.rep)

    def to_spectral(self):
        if self.rep == SPECTRAL:
            return self
        return LieFieldGrid(self.grid, np.fft.fft2(self.values, axes=(1, 2)) / self.grid.M ** 2, SPECTRAL)

    def to_physical(self):
        if self.rep == PHYSICAL:
            return self
        return LieFieldGrid(self.grid, np.fft.ifft2(self.values, axes=(1, 2)) * self.grid.M ** 2, PHYSICAL)

    def dagger(self):
        """Adjoint at coefficient level (Hermitian basis): conjugation."""
        if self.rep == PHYSICAL:
            return LieFieldGrid(self.grid, np.conj(self.values), PHYSICAL)
        return self.to_physical().dagger().to_spectral()

    def l2_norm(self):
        """Component-summed L2 norm, ||F|| = sum_a ||F_a||_L2."""
        return float(sum(self.component(a).l2_norm() for a in range(self.dim)))

    def sobolev_norm(self, s):
        """Component-summed H^s norm."""
        return float(sum(sobolev_norm(self.component(a), s) for a in range(self.dim)))


def lie_zeros(grid, g):
    return LieFieldGrid(grid, np.zeros((g.dim, grid.M, grid.M), dtype=complex))


def zero_mean(field):
    """Project out the xi = 0 mode."""
    spec = field.to_spectral()
    vals = spec.values.copy()
    if isinstance(field, LieFieldGrid):
        vals[:, 0, 0] = 0.0
        out = LieFieldGrid(field.grid, vals, SPECTRAL)
    else:
        vals[0, 0] = 0.0
        out = ScalarField(field.grid, vals, SPECTRAL)
    return out.to_physical() if field.rep == PHYSICAL else out


def random_band_limited(grid, rng, band, zero_mean_field=True, real=False, amplitude=1.0):
    """Random field with spectral support |k|_inf <= band (index units)."""
    c = (rng.standard_normal((grid.M, grid.M))
         + 1j * rng.standard_normal((grid.M, grid.M)))
    c *= grid.band_mask(band)
    if zero_mean_field:
        c[0, 0] = 0.0
    u = ScalarField(grid, c, SPECTRAL)
    if real:
        phys = np.real(u.to_physical().values).astype(complex)
        u = ScalarField(grid, phys, PHYSICAL).to_spectral()
        if zero_mean_field:
            v = u.values.copy()
            v[0, 0] = 0.0
            u = ScalarField(grid, v, SPECTRAL)
    norm = u.l2_norm()
    if norm > 0:
        u = ScalarField(grid, u.values * (amplitude / norm), SPECTRAL)
    return u


def random_lie_field(grid, g, rng, band, real=False, amplitude=1.0):
    comps = [random_band_limited(grid, rng, band, real=real, amplitude=amplitude).values
             for _ in range(g.dim)]
    return LieFieldGrid(grid, np.array(comps), SPECTRAL)


# Hodge-type splitting ---------------------------------------------------------

def df_cf_split(a1, a2):
    """Split a spatial vector field into divergence-free and curl-free parts.

    Returns ((df1, df2), (cf1, cf2)); zero modes are assigned to the
    curl-free part.  Accepts ScalarField components.
    """
    if a1.grid != a2.grid:
        raise GridMismatchError("components live on different grids")
    grid = a1.grid
    c1 = a1.to_spectral().values
    c2 = a2.to_spectral().values
    k1, k2, kmag = grid.k1, grid.k2, grid.kmag
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_k2 = np.where(kmag > 0, 1.0 / np.where(kmag > 0, kmag ** 2, 1.0), 0.0)
    div = k1 * c1 + k2 * c2
    cf1 = k1 * div * inv_k2
    cf2 = k2 * div * inv_k2
    # zero mode: constant vectors are curl free
    cf1[0, 0] = c1[0, 0]
    cf2[0, 0] = c2[0, 0]
    df1 = c1 - cf1
    df2 = c2 - cf2
    fields = [ScalarField(grid, v, SPECTRAL) for v in (df1, df2, cf1, cf2)]
    if a1.rep == PHYSICAL:
        fields = [f.to_physical() for f in fields]
    return (fields[0], fields[1]), (fields[2], fields[3])


def spectral_divergence(a1, a2):
    grid = a1.grid
    c1 = a1.to_spectral().values
    c2 = a2.to_spectral().values
    return ScalarField(grid, 1j * (grid.k1 * c1 + grid.k2 * c2), SPECTRAL)


def spectral_curl(a1, a2):
    grid = a1.grid
    c1 = a1.to_spectral().values
    c2 = a2.to_spectral().values
    return ScalarField(grid, 1j * (grid.k1 * c2 - grid.k2 * c1), SPECTRAL)
