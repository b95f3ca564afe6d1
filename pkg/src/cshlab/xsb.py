"""Discrete space-time Fourier analysis over dyadic cone-distance blocks.

A space-time field lives on an (M_t, M, M) lattice with temporal
frequencies tau on the dual lattice of the time window and spatial
frequencies on the dual lattice of the periodic box.  With the default
window 2*pi and box 2*pi both lattices are the integers, which makes the
dyadic bookkeeping exact.

Blocks are indexed by a sign, a spatial shell N and a modulation shell L:

    K_{N,L}^{s} = { (tau, xi) : |xi| ~ N,  |tau + s |xi|| ~ L }

with |.| ~ N meaning [N, 2N) for N >= 2 and [0, 2) for N = 1.  For each
fixed sign the blocks tile the lattice, so the weighted square sum

    ||u||_{X^{s,b}_sign}^2 = sum_{N,L} (N^s L^b ||P_K u||)^2

is computed pointwise.

Two norm conventions appear below.  Dense fields use the continuum
normalization ||u||^2 = Vol * sum |c|^2.  The bilinear-constant machinery
uses frequency counting measure (cell volume 1), under which the
Cauchy-Schwarz volume bound ||P0(u1 conj(u2))|| <= sqrt(min(#K1, #K2))
||u1|| ||u2|| is exact and directly comparable to the dyadic constants

    C1 ~ (Nmin012 Lmin12)^1/2 (Nmin12 Lmax12)^1/4
    C2 ~ (Nmin012 Lmin0j)^1/2 (Nmin0j Lmax0j)^1/4    (j = 1, 2)
    C3 ~ ((Nmin012)^2 Lmin012)^1/2.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Grid2D


# -- dense space-time fields -----------------------------------------------------


@dataclass
class SpaceTimeField:
    grid: Grid2D
    T_window: float
    values: np.ndarray           # (M_t, M, M)
    rep: str = "physical"
    taper: float = 0.0

    @property
    def M_t(self):
        return self.values.shape[0]

    @property
    def volume(self):
        return self.T_window * self.grid.area

    def tau(self):
        return 2.0 * np.pi / self.T_window * np.fft.fftfreq(self.M_t, d=1.0 / self.M_t)

    def to_spectral(self):
        if self.rep == "spectral":
            return self
        c = np.fft.fftn(self.values) / self.values.size
        return SpaceTimeField(self.grid, self.T_window, c, "spectral", self.taper)

    def to_physical(self):
        if self.rep == "physical":
            return self
        u = np.fft.ifftn(self.values) * self.values.size
        return SpaceTimeField(self.grid, self.T_window, u, "physical", self.taper)

    def l2_norm(self):
        if self.rep == "spectral":
            return float(np.sqrt(self.volume * np.sum(np.abs(self.values) ** 2)))
        return float(np.sqrt(self.volume * np.mean(np.abs(self.values) ** 2)))


def tukey_window(n, taper):
    """Raised-cosine (Tukey) taper with ramp fraction `taper` at each end."""
    if taper <= 0.0:
        return np.ones(n)
    w = np.ones(n)
    ramp = max(1, int(round(taper * n)))
    t = np.arange(ramp) / ramp
    w[:ramp] = 0.5 * (1.0 - np.cos(np.pi * t))
    w[-ramp:] = w[:ramp][::-1]
    return w


def spacetime_transform(frames, grid, T_window, taper=0.0):
    """FFT in time and space of uniformly sampled frames (n_t, M, M).

    A raised-cosine taper (fraction of the window at each end) limits
    leakage of non-window-periodic content; the taper choice is recorded on
    the returned field.
    """
    u = np.asarray(frames, dtype=complex)
    if u.ndim != 3:
        raise ValueError("frames must be (n_t, M, M)")
    w = tukey_window(u.shape[0], taper)
    tapered = u * w[:, None, None]
    field = SpaceTimeField(grid, T_window, tapered, "physical", taper)
    return field.to_spectral()


def _dyadic_exp(x):
    with np.errstate(divide="ignore"):
        e = np.floor(np.log2(np.maximum(x, 1.0))).astype(int)
    return np.clip(e, 0, None)


def modulation(st, sign):
    """|tau + sign |xi|| on the lattice."""
    tau = st.tau()[:, None, None]
    return np.abs(tau + sign * st.grid.kmag[None])


@dataclass(frozen=True)
class DyadicBlock:
    sign: int
    N: int
    L: int

    def __post_init__(self):
        for v in (self.N, self.L):
            if v < 1 or (v & (v - 1)) != 0:
                raise ValueError("N and L must be dyadic integers >= 1")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def block_mask(st, block):
    n_exp = _dyadic_exp(st.grid.kmag)[None]
    l_exp = _dyadic_exp(modulation(st, block.sign))
    return (n_exp == int(np.log2(block.N))) & (l_exp == int(np.log2(block.L)))


def project_block(st, block):
    spec = st.to_spectral()
    return SpaceTimeField(st.grid, st.T_window,
                          np.where(block_mask(st, block), spec.values, 0.0),
                          "spectral", st.taper)


@dataclass
class _Weight:
    """Bare (s, b) weight pair used internally (no regime check)."""

    s: float
    b: float


@dataclass
class XsbParams:
    """Regularity pair (s, b); the wave-regime offsets are s = 1/4 + delta,
    b = 1/2 + eps with 0 < 100 eps < delta << 1 (warned, not enforced)."""

    s: float
    b: float

    def __post_init__(self):
        delta = self.s - 0.25
        eps = self.b - 0.5
        if not (0.0 < 100.0 * eps < delta < 0.2):
            warnings.warn(
                f"(s, b) = ({self.s}, {self.b}) outside the wave regime "
                "0 < 100(b - 1/2) < s - 1/4 << 1", stacklevel=2)

    @property
    def delta(self):
        return self.s - 0.25

    @property
    def eps(self):
        return self.b - 0.5


def xsb_norm(st, params, sign):
    """Dyadic-block weighted norm; equals the block-sum definition exactly
    because the sharp shells tile the lattice."""
    spec = st.to_spectral()
    nval = np.exp2(_dyadic_exp(st.grid.kmag))[None]
    lval = np.exp2(_dyadic_exp(modulation(spec, sign)))
    w = nval ** (2.0 * params.s) * lval ** (2.0 * params.b)
    return float(np.sqrt(spec.volume * np.sum(w * np.abs(spec.values) ** 2)))


# -- sparse block fields and the bilinear constants --------------------------------


def _shell_points(N):
    """Integer xi with |xi| in the dyadic shell of N."""
    hi = 2 * N
    rng = np.arange(-hi + 1, hi)
    x, y = np.meshgrid(rng, rng, indexing="ij")
    r = np.hypot(x, y)
    if N == 1:
        keep = r < 2
    else:
        keep = (r >= N) & (r < 2 * N)
    return np.stack([x[keep], y[keep]], axis=1)


_KEY_BASE = 1 << 20
_KEY_OFF = 1 << 19


def _xi_key(xi):
    return (xi[:, 0].astype(np.int64) + _KEY_OFF) * _KEY_BASE + (xi[:, 1] + _KEY_OFF)


class BlockField:
    """Sparse field supported on one dyadic block.

    Values are stored as a dense tau window per xi point: vals[i, a] is the
    coefficient at (tau0[i] + a, xi[i]); `valid` marks the entries whose
    modulation actually lies in the L shell.
    """

    def __init__(self, block, xi, tau0, vals, valid):
        self.block = block
        order = np.argsort(_xi_key(xi), kind="stable")
        self.xi = xi[order]
        self.tau0 = tau0[order]
        self.vals = vals[order]
        self.valid = valid[order]
        self.key = _xi_key(self.xi)

    @classmethod
    def empty(cls, block):
        xi = _shell_points(block.N)
        r = np.hypot(xi[:, 0], xi[:, 1])
        center = -block.sign * r
        span = 2 * block.L
        tau0 = np.ceil(center - span).astype(np.int64)
        W = int(2 * span + 2)
        taus = tau0[:, None] + np.arange(W)[None, :]
        h = np.abs(taus + block.sign * r[:, None])
        if block.L == 1:
            valid = h < 2
        else:
            valid = (h >= block.L) & (h < 2 * block.L)
        vals = np.zeros((len(xi), W), dtype=complex)
        return cls(block, xi, tau0, vals, valid)

    @classmethod
    def random(cls, block, rng):
        f = cls.empty(block)
        f.vals[f.valid] = (rng.standard_normal(int(f.valid.sum()))
                           + 1j * rng.standard_normal(int(f.valid.sum())))
        return f

    def size(self):
        return int(self.valid.sum())

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.vals[self.valid]) ** 2)))

    def normalize(self):
        n = self.norm()
        if n > 0:
            self.vals /= n
        return self

    def mask_invalid(self):
        self.vals[~self.valid] = 0.0
        return self


def block_convolve(a, b, out, mode, conj_b=True, count_only=False):
    """Accumulate a (cross-)convolution of sparse block fields onto `out`.

    mode 'sub': out(Xa - Xb) += a(Xa) * conj(b(Xb))   (conj_b True)
    mode 'add': out(Xa + Xb) += a(Xa) * b(Xb)

    Returns the number of contributing (xi_a, xi_b) pairs (feasibility).
    """
    a.mask_invalid()
    b.mask_invalid()
    sgn = -1 if mode == "sub" else 1
    # choose the cheapest pair-generation strategy
    na, nb, no = len(a.xi), len(b.xi), len(out.xi)
    best = min((na * nb, "ab"), (na * no, "ao"), (nb * no, "bo"))[1]
    if best == "ab":
        ia = np.repeat(np.arange(na), nb)
        ib = np.tile(np.arange(nb), na)
        xo = a.xi[ia] + sgn * b.xi[ib]
        keys = _xi_key(xo)
        pos = np.searchsorted(out.key, keys)
        pos = np.clip(pos, 0, no - 1)
        hit = out.key[pos] == keys
        ia, ib, io = ia[hit], ib[hit], pos[hit]
    elif best == "ao":
        ia = np.repeat(np.arange(na), no)
        io = np.tile(np.arange(no), na)
        xb = sgn * (out.xi[io] - a.xi[ia])
        keys = _xi_key(xb)
        pos = np.searchsorted(b.key, keys)
        pos = np.clip(pos, 0, nb - 1)
        hit = b.key[pos] == keys
        ia, io, ib = ia[hit], io[hit], pos[hit]
    else:
        ib = np.repeat(np.arange(nb), no)
        io = np.tile(np.arange(no), nb)
        xa = out.xi[io] - sgn * b.xi[ib]
        keys = _xi_key(xa)
        pos = np.searchsorted(a.key, keys)
        pos = np.clip(pos, 0, na - 1)
        hit = a.key[pos] == keys
        ib, io, ia = ib[hit], io[hit], pos[hit]
    if len(ia) == 0:
        return 0
    Wa, Wb, Wo = a.vals.shape[1], b.vals.shape[1], out.vals.shape[1]
    base = a.tau0[ia] + sgn * b.tau0[ib] - out.tau0[io]
    vb = np.conj(b.vals) if (conj_b and mode == "sub") else b.vals
    va = a.vals if not count_only else a.valid.astype(complex)
    vb = vb if not count_only else b.valid.astype(complex)
    contributed = 0
    for aa in range(Wa):
        for bb in range(Wb):
            t = base + aa + sgn * bb
            ok = (t >= 0) & (t < Wo)
            if not np.any(ok):
                continue
            prod = va[ia[ok], aa] * vb[ib[ok], bb]
            np.add.at(out.vals, (io[ok], t[ok]), prod)
            contributed += int(np.sum(ok))
    return contributed


def theoretical_constants(K0, K1, K2):
    """The three dyadic constants (and their minimum)."""
    N = {0: K0.N, 1: K1.N, 2: K2.N}
    L = {0: K0.L, 1: K1.L, 2: K2.L}
    nmin012 = min(N.values())
    c1 = np.sqrt(nmin012 * min(L[1], L[2])) * (min(N[1], N[2]) * max(L[1], L[2])) ** 0.25
    c2 = []
    for j in (1, 2):
        c2.append(np.sqrt(nmin012 * min(L[0], L[j]))
                  * (min(N[0], N[j]) * max(L[0], L[j])) ** 0.25)
    c3 = np.sqrt(nmin012 ** 2 * min(L.values()))
    cs = {"C1": float(c1), "C2_1": float(c2[0]), "C2_2": float(c2[1]), "C3": float(c3)}
    cs["min"] = min(cs.values())
    return cs


def _product_norm(u1, u2, K0):
    out = BlockField.empty(K0)
    pairs = block_convolve(u1, u2, out, "sub")
    out.vals[~out.valid] = 0.0
    return out, pairs


def measure_bilinear_constant(K0, K1, K2, trials=8, seed=0, mode="gaussian",
                              power_iters=40):
    """Empirical restricted-product constant against the dyadic bounds.

    Gaussian mode draws random block data; power mode runs alternating
    ascent on ||P0(u1 conj(u2))|| (adjoint updates through the same sparse
    convolution), which approaches the sharp discrete constant.
    """
    rng = np.random.default_rng(seed)
    theory = theoretical_constants(K0, K1, K2)
    ones1 = BlockField.empty(K1)
    ones1.vals[ones1.valid] = 1.0
    ones2 = BlockField.empty(K2)
    ones2.vals[ones2.valid] = 1.0
    counter = BlockField.empty(K0)
    pairs = block_convolve(ones1, ones2, counter, "sub", count_only=True)
    feasible = pairs > 0 and float(np.sum(np.abs(counter.vals[counter.valid]))) > 0
    report = {
        "K0": K0, "K1": K1, "K2": K2,
        "feasible": bool(feasible),
        "theory": theory,
        "empirical": 0.0,
        "ratio": 0.0,
        "trivial_bound": float(np.sqrt(min(ones1.size(), ones2.size()))),
        "mode": mode,
    }
    if not feasible:
        return report
    best = 0.0
    if mode == "gaussian":
        for _ in range(trials):
            u1 = BlockField.random(K1, rng).normalize()
            u2 = BlockField.random(K2, rng).normalize()
            out, _ = _product_norm(u1, u2, K0)
            best = max(best, out.norm())
    else:
        starts = ["counts"] + ["random"] * max(0, trials - 1)
        for kind in starts:
            if kind == "counts":
                # concentrate the start where the pair count is largest
                w = BlockField.empty(K0)
                block_convolve(ones1, ones2, w, "sub", count_only=True)
                w.mask_invalid()
                u1 = ones1
                u2 = ones2
            else:
                w, _ = _product_norm(BlockField.random(K1, rng).normalize(),
                                     BlockField.random(K2, rng).normalize(), K0)
                u1 = BlockField.random(K1, rng)
                u2 = BlockField.random(K2, rng)
            value = 0.0
            for _ in range(power_iters):
                if w.norm() == 0:
                    break
                w.normalize()
                new1 = BlockField.empty(K1)
                block_convolve(w, u2, new1, "add", conj_b=False)
                u1 = new1.mask_invalid().normalize()
                new2 = BlockField.empty(K2)
                block_convolve(u1, w, new2, "sub")
                u2 = new2.mask_invalid().normalize()
                w, _ = _product_norm(u1, u2, K0)
                value = w.norm()
            best = max(best, value)
    report["empirical"] = float(best)
    report["ratio"] = float(best / theory["min"])
    return report


def bilinear_scaling_scan(N_values, seed=0, mode="power", trials=3, power_iters=30,
                          signs=(1, -1), sign0=1):
    """High-high to low scan: N1 = N2 = N, N0 = 1, L1 = L2 = 1, opposite
    signs.  The requested L0 = 1 output is geometrically infeasible (the
    product modulation is ~ 2N), so the lowest feasible L0 is used and
    reported per scale."""
    rows = []
    for N in N_values:
        K1 = DyadicBlock(signs[0], int(N), 1)
        K2 = DyadicBlock(signs[1], int(N), 1)
        L0, rep = 1, None
        while L0 <= 8 * max(int(N), 1):
            rep = measure_bilinear_constant(DyadicBlock(sign0, 1, L0), K1, K2,
                                            trials=trials, seed=seed, mode=mode,
                                            power_iters=power_iters)
            if rep["feasible"]:
                break
            L0 *= 2
        rows.append({"N": int(N), "L0": int(L0),
                     "requested_L0_feasible": bool(L0 == 1),
                     **{k: rep[k] for k in ("feasible", "empirical", "ratio")},
                     "theory_min": rep["theory"]["min"]})
    return rows


def fit_loglog(x, y):
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return {"slope": float(slope), "intercept": float(intercept),
            "rms_residual": float(np.sqrt(np.mean(resid ** 2))),
            "points": int(keep.sum()), "excluded": int((~keep).sum())}


# -- interaction geometry -----------------------------------------------------------


def check_interaction_geometry(samples, seed=0, signs=None, radius_range=(0.1, 100.0)):
    """Sharpest-case scan of the modulation lower bounds.

    Samples bilinear interactions X0 = X1 - X2 with both inputs exactly on
    their cones (h1 = h2 = 0), so max |h_j| = |h_0|.  Reports the minimum of

        r1 = max|h| / (min(|xi1|, |xi2|) theta^2)

    over nondegenerate samples, the second-branch ratio
    r2 = max|h| |xi0| / (|xi1||xi2| theta^2) where it applies, and the
    angle statistics of the high-high opposite-sign regime.
    """
    rng = np.random.default_rng(seed)
    lo, hi = radius_range
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(samples, 2)))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=(samples, 2))
    xi1 = np.stack([r[:, 0] * np.cos(ang[:, 0]), r[:, 0] * np.sin(ang[:, 0])], axis=1)
    xi2 = np.stack([r[:, 1] * np.cos(ang[:, 1]), r[:, 1] * np.sin(ang[:, 1])], axis=1)
    if signs is None:
        s = rng.choice([-1.0, 1.0], size=(samples, 3))
    else:
        s = np.tile(np.asarray(signs, dtype=float), (samples, 1))
    s0, s1, s2 = s[:, 0], s[:, 1], s[:, 2]
    n1 = np.linalg.norm(xi1, axis=1)
    n2 = np.linalg.norm(xi2, axis=1)
    tau1 = -s1 * n1
    tau2 = -s2 * n2
    xi0 = xi1 - xi2
    n0 = np.linalg.norm(xi0, axis=1)
    h0 = np.abs(tau1 - tau2 + s0 * n0)
    v1 = s1[:, None] * xi1
    v2 = s2[:, None] * xi2
    cross = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
    dot = np.sum(v1 * v2, axis=1)
    theta = np.arctan2(np.abs(cross), dot)
    nmin = np.minimum(n1, n2)
    degenerate = (theta < 1e-6) | (n0 < 1e-9)
    good = ~degenerate
    r1 = h0[good] / (nmin[good] * theta[good] ** 2)
    # dichotomy: high-high with opposite signs and small output frequency
    hh = good & (s1 != s2) & (n0 <= 0.25 * nmin) & (n1 / n2 < 2) & (n2 / n1 < 2)
    second = good & ~hh
    r2 = (h0[second] * n0[second]) / (n1[second] * n2[second] * theta[second] ** 2)
    report = {
        "samples": int(samples),
        "degenerate": int(np.sum(degenerate)),
        "min_ratio": float(np.min(r1)) if r1.size else float("nan"),
        "min_second_branch_ratio": float(np.min(r2)) if r2.size else float("nan"),
        "high_high_count": int(np.sum(hh)),
        "high_high_theta_min": float(np.min(theta[hh])) if np.any(hh) else float("nan"),
        "high_high_theta_max": float(np.max(theta[hh])) if np.any(hh) else float("nan"),
    }
    return report


# -- multilinear ratio measurements ---------------------------------------------------


def _lattice_sizes(kind, N):
    degree = {"5": 2, "6": 3, "7.1": 3, "7.2": 5}[kind if kind.startswith("7")
                                                  else kind.split(".")[0]]
    M = 4 * degree * N + 8
    Mt = 4 * degree * N + 8 * degree + 8
    M += M % 2
    Mt += Mt % 2
    return degree, M, Mt


def _block_dense_field(st_shape, grid, T_window, block, rng):
    field = SpaceTimeField(grid, T_window, np.zeros(st_shape, dtype=complex), "spectral")
    mask = block_mask(field, block)
    npts = int(mask.sum())
    vals = np.zeros(st_shape, dtype=complex)
    vals[mask] = rng.standard_normal(npts) + 1j * rng.standard_normal(npts)
    field.values = vals
    return field


def _st_derivative(spec, field, which):
    """which in {'t', 1, 2} acting on spectral values."""
    if which == "t":
        return 1j * field.tau()[:, None, None] * spec
    comp = field.grid.k1 if which == 1 else field.grid.k2
    return 1j * comp[None] * spec


def _apply_inv_d(spec, field):
    k = field.grid.kmag[None]
    inv = np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)
    return inv * spec


def measure_multilinear_ratio(kind, params, N_values, seed=0,
                              input_signs=None, j_index=1):
    """Left-norm over product-of-right-norms for the nonlinear estimates.

    kind: '5.1'..'5.6' (null-form bilinear), '6.1'/'6.2' (trilinear),
    '7.1'/'7.2' (cubic / quintic).  Ratios are tabulated over the scale
    scan; callers fit the trend (no growth expected).
    """
    rng = np.random.default_rng(seed)
    rows = []
    for N in N_values:
        degree, M, Mt = _lattice_sizes(kind, int(N))
        grid = Grid2D(M)
        Twin = 2.0 * np.pi
        shape = (Mt, M, M)

        def new(sign, scale_weight):
            f = _block_dense_field(shape, grid, Twin, DyadicBlock(sign, int(N), 1), rng)
            return f, xsb_norm(f, scale_weight, sign)

        if kind.startswith("5"):
            signs = input_signs or (1, -1)
            wA = _Weight(params.s, params.b)
            wphi = _Weight(params.s + 0.5, params.b)
            if kind in ("5.1", "5.2"):
                u, nu = new(signs[0], wA)
                v, nv = new(signs[1], wphi)
                lhs_w = _Weight(params.s - 0.5, params.b - 1.0)
            elif kind in ("5.3", "5.4"):
                u, nu = new(signs[0], wA)
                v, nv = new(signs[1], wA)
                lhs_w = _Weight(params.s - 1.0, params.b - 1.0)
            else:
                u, nu = new(signs[0], wphi)
                v, nv = new(signs[1], wphi)
                lhs_w = _Weight(params.s - 1.0, params.b - 1.0)
            us = _apply_inv_d(u.values, u) if kind in ("5.1", "5.2", "5.3", "5.4") \
                else np.conj(u.to_physical().values)
            if kind in ("5.5", "5.6"):
                us = np.fft.fftn(us) / us.size
            vs = v.values
            if kind in ("5.1", "5.3", "5.5"):
                d_a, d_b = 1, 2
            else:
                d_a, d_b = j_index, "t"
            ua = np.fft.ifftn(_st_derivative(us, u, d_a)) * us.size
            ub = np.fft.ifftn(_st_derivative(us, u, d_b)) * us.size
            va = np.fft.ifftn(_st_derivative(vs, v, d_a)) * vs.size
            vb = np.fft.ifftn(_st_derivative(vs, v, d_b)) * vs.size
            prod = ua * vb - ub * va
            rhs = nu * nv
        elif kind.startswith("6"):
            signs = input_signs or (1, -1, 1)
            wA = _Weight(params.s, params.b)
            wphi = _Weight(params.s + 0.5, params.b)
            if kind == "6.1":
                f1, n1_ = new(signs[0], wA)
                f2, n2_ = new(signs[1], wA)
                f3, n3_ = new(signs[2], wphi)
                lhs_w = _Weight(params.s - 0.5, params.b - 1.0)
                prod = (f1.to_physical().values * f2.to_physical().values
                        * f3.to_physical().values)
            else:
                f1, n1_ = new(signs[0], wphi)
                f2, n2_ = new(signs[1], wA)
                f3, n3_ = new(signs[2], wphi)
                lhs_w = _Weight(params.s, params.b - 1.0)
                prod = (np.conj(f1.to_physical().values) * f2.to_physical().values
                        * f3.to_physical().values)
            rhs = n1_ * n2_ * n3_
        else:
            count = 3 if kind == "7.1" else 5
            signs = input_signs or tuple((-1) ** i for i in range(count))
            wphi = _Weight(params.s + 0.5, params.b)
            fields, norms = zip(*(new(signs[i], wphi) for i in range(count)))
            prod = fields[0].to_physical().values.copy()
            for f in fields[1:]:
                prod = prod * f.to_physical().values
            rhs = float(np.prod(norms))
            lhs_w = _Weight(params.s - 0.5, params.b - 1.0)
        out = SpaceTimeField(grid, Twin, prod, "physical").to_spectral()
        lhs = max(xsb_norm(out, lhs_w, 1), xsb_norm(out, lhs_w, -1))
        rows.append({"N": int(N), "lhs": float(lhs), "rhs": float(rhs),
                     "ratio": float(lhs / rhs) if rhs > 0 else 0.0})
    return rows
