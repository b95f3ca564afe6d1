"""Null forms, their symbols, and the Lorenz-gauge null decomposition.

Index conventions.  Greek indices run over 0,1,2 and are raised with the
(+,-,-) metric wherever a d'Alembertian right-hand side is assembled; the
Riesz/divergence/curl machinery below uses plain Euclidean spatial indices
(R^j = R_j = D^-1 d_j, div A = d_1 A_1 + d_2 A_2), which is the convention
under which the gauge identities hold exactly.  The Lorenz relation then
reads  d_t A_0 = div A.

The standard null forms are

    Q_0(u, v)          = d_t u d_t v - grad u . grad v
    Q_{ab}(u, v)       = d_a u d_b v - d_b u d_a v

and their commutator versions replace products with matrix brackets, which
in coefficient space contract through i f^{ab}_c.  Time derivatives are
supplied as explicit companion fields; the identities are snapshot
statements and need no time grid.
"""

from dataclasses import dataclass

import numpy as np

from .grid import (
    LieFieldGrid,
    PHYSICAL,
    SPECTRAL,
    ScalarField,
    GridMismatchError,
    random_lie_field,
)
from .lie import bracket_fields


class GaugePreconditionError(ValueError):
    """Raised when a snapshot fails the Lorenz relation d_t A_0 = div A."""

    def __init__(self, residual):
        super().__init__(f"Lorenz gauge precondition violated, residual {residual:.3e}")
        self.residual = residual


# scalar null forms ------------------------------------------------------------


def _as_pair(u, du, grid):
    us = u.to_spectral().values
    dus = np.zeros_like(us) if du is None else du.to_spectral().values
    return us, dus


def _deriv(spec_vals, grid, alpha, dt_vals):
    """Spectral d_alpha; alpha = 0 returns the supplied companion."""
    if alpha == 0:
        return dt_vals.copy()
    comp = grid.k1 if alpha == 1 else grid.k2
    return 1j * comp * spec_vals


def _masked_phys(spec_vals, grid, order):
    return np.fft.ifft2(spec_vals * grid.dealias_mask(order), axes=(-2, -1)) * grid.M ** 2


def _spec_masked(phys_vals, grid, order):
    return np.fft.fft2(phys_vals, axes=(-2, -1)) / grid.M ** 2 * grid.dealias_mask(order)


def q0(u, du, v, dv, order=2):
    """Q_0(u, v) = d_t u d_t v - sum_j d_j u d_j v via dealiased products."""
    if u.grid != v.grid:
        raise GridMismatchError("operands live on different grids")
    grid = u.grid
    us, dus = _as_pair(u, du, grid)
    vs, dvs = _as_pair(v, dv, grid)
    acc = _masked_phys(dus, grid, order) * _masked_phys(dvs, grid, order)
    for axis in (1, 2):
        acc -= (_masked_phys(_deriv(us, grid, axis, dus), grid, order)
                * _masked_phys(_deriv(vs, grid, axis, dvs), grid, order))
    out = ScalarField(grid, _spec_masked(acc, grid, order), SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


def q_form(alpha, beta, u, du, v, dv, order=2):
    """Q_{alpha beta}(u, v) = d_a u d_b v - d_b u d_a v."""
    if u.grid != v.grid:
        raise GridMismatchError("operands live on different grids")
    grid = u.grid
    us, dus = _as_pair(u, du, grid)
    vs, dvs = _as_pair(v, dv, grid)
    ua = _masked_phys(_deriv(us, grid, alpha, dus), grid, order)
    ub = _masked_phys(_deriv(us, grid, beta, dus), grid, order)
    va = _masked_phys(_deriv(vs, grid, alpha, dvs), grid, order)
    vb = _masked_phys(_deriv(vs, grid, beta, dvs), grid, order)
    out = ScalarField(grid, _spec_masked(ua * vb - ub * va, grid, order), SPECTRAL)
    return out.to_physical() if u.rep == PHYSICAL else out


# commutator null forms ---------------------------------------------------------


def _lie_pair(U, dU):
    us = U.to_spectral().values
    dus = np.zeros_like(us) if dU is None else dU.to_spectral().values
    return us, dus


def q_form_bracket(alpha, beta, U, dU, V, dV, g, order=2):
    """Commutator null form through the structure-constant contraction."""
    grid = U.grid
    us, dus = _lie_pair(U, dU)
    vs, dvs = _lie_pair(V, dV)
    ua = _masked_phys(_deriv(us, grid, alpha, dus), grid, order)
    ub = _masked_phys(_deriv(us, grid, beta, dus), grid, order)
    va = _masked_phys(_deriv(vs, grid, alpha, dvs), grid, order)
    vb = _masked_phys(_deriv(vs, grid, beta, dvs), grid, order)
    acc = bracket_fields(ua, vb, g) - bracket_fields(ub, va, g)
    return LieFieldGrid(grid, _spec_masked(acc, grid, order), SPECTRAL)


def q_form_bracket_matrix(alpha, beta, U, dU, V, dV, g, order=2):
    """Matrix-level route: reconstruct, multiply pointwise, re-project."""
    grid = U.grid
    us, dus = _lie_pair(U, dU)
    vs, dvs = _lie_pair(V, dV)

    def mats(spec):
        phys = _masked_phys(spec, grid, order)
        return np.einsum("axy,aij->xyij", phys, g.generators)

    ua, ub = mats(_deriv(us, grid, alpha, dus)), mats(_deriv(us, grid, beta, dus))
    va, vb = mats(_deriv(vs, grid, alpha, dvs)), mats(_deriv(vs, grid, beta, dvs))
    m = (np.einsum("xyij,xyjk->xyik", ua, vb) - np.einsum("xyij,xyjk->xyik", vb, ua)
         - np.einsum("xyij,xyjk->xyik", ub, va) + np.einsum("xyij,xyjk->xyik", va, ub))
    coeffs = np.einsum("xyij,aji->axy", m, g.generators) / 2.0
    return LieFieldGrid(grid, _spec_masked(coeffs, grid, order), SPECTRAL)


# symbols ------------------------------------------------------------------------


@dataclass
class NullSymbolSample:
    xi1: np.ndarray
    xi2: np.ndarray
    q_j0: np.ndarray  # (2,) for j = 1, 2
    q_jk: float       # the (1,2) component
    angle: float


def null_symbols(xi1, xi2):
    """Symbols q_{j0} and q_{12} plus the angle, vectorized over rows."""
    xi1 = np.atleast_2d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_2d(np.asarray(xi2, dtype=float))
    r1 = np.linalg.norm(xi1, axis=1)
    r2 = np.linalg.norm(xi2, axis=1)
    q10 = -xi1[:, 0] * r2 + r1 * xi2[:, 0]
    q20 = -xi1[:, 1] * r2 + r1 * xi2[:, 1]
    q12 = -xi1[:, 0] * xi2[:, 1] + xi1[:, 1] * xi2[:, 0]
    cross = xi1[:, 0] * xi2[:, 1] - xi1[:, 1] * xi2[:, 0]
    dot = np.sum(xi1 * xi2, axis=1)
    angle = np.arctan2(np.abs(cross), dot)
    return q10, q20, q12, angle


def null_symbol_bound_scan(samples, seed=0, radius_range=(1e-2, 1e2)):
    """Empirical constants in |q| <= C |xi1||xi2| angle over random pairs."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = radius_range
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(samples, 2)))
    th = rng.uniform(0.0, 2.0 * np.pi, size=(samples, 2))
    xi1 = np.stack([r[:, 0] * np.cos(th[:, 0]), r[:, 0] * np.sin(th[:, 0])], axis=1)
    xi2 = np.stack([r[:, 1] * np.cos(th[:, 1]), r[:, 1] * np.sin(th[:, 1])], axis=1)
    q10, q20, q12, angle = null_symbols(xi1, xi2)
    scale = np.linalg.norm(xi1, axis=1) * np.linalg.norm(xi2, axis=1)
    degenerate = angle < 1e-12
    flagged = int(np.sum(degenerate & (np.abs(q12) + np.abs(q10) + np.abs(q20)
                                       > 1e-9 * scale)))
    good = ~degenerate
    denom = scale[good] * angle[good]
    report = {
        "samples": int(samples),
        "max_ratio_q_j0": float(np.max(np.maximum(np.abs(q10[good]), np.abs(q20[good])) / denom)),
        "max_ratio_q_jk": float(np.max(np.abs(q12[good]) / denom)),
        "degenerate_skipped": int(np.sum(degenerate)),
        "degenerate_flagged": flagged,
    }
    report["finite"] = bool(np.isfinite(report["max_ratio_q_j0"])
                            and np.isfinite(report["max_ratio_q_jk"]))
    return report


# Lorenz snapshots and the gauge identities --------------------------------------


@dataclass
class GaugeSnapshot:
    """Gauge potential (A_0, A_1, A_2) with time-derivative companions."""

    A: list       # three LieFieldGrid, spectral
    dA: list      # three LieFieldGrid, spectral

    @property
    def grid(self):
        return self.A[0].grid


@dataclass
class MatterSnapshot:
    phi: LieFieldGrid
    dphi: LieFieldGrid


def gauge_residual(snap):
    """L2 norm of d_t A_0 - div A (the Euclidean-index Lorenz relation)."""
    grid = snap.grid
    div = (1j * grid.k1 * snap.A[1].to_spectral().values
           + 1j * grid.k2 * snap.A[2].to_spectral().values)
    res = snap.dA[0].to_spectral().values - div
    return LieFieldGrid(grid, res, SPECTRAL).l2_norm()


def make_lorenz_snapshot(seed, grid, g, band=None):
    """Random band-limited zero-mean gauge data with d_t A_0 := div A."""
    rng = np.random.default_rng(seed)
    band = band if band is not None else max(2, grid.M // 8)
    A = [random_lie_field(grid, g, rng, band) for _ in range(3)]
    dA = [None] * 3
    dA[1] = random_lie_field(grid, g, rng, band)
    dA[2] = random_lie_field(grid, g, rng, band)
    div = (1j * grid.k1 * A[1].values + 1j * grid.k2 * A[2].values)
    dA[0] = LieFieldGrid(grid, div, SPECTRAL)
    return GaugeSnapshot(A=A, dA=dA)


def make_matter_snapshot(seed, grid, g, band=None):
    rng = np.random.default_rng(seed)
    band = band if band is not None else max(2, grid.M // 8)
    return MatterSnapshot(phi=random_lie_field(grid, g, rng, band),
                          dphi=random_lie_field(grid, g, rng, band))


def _potentials(snap):
    """u_j = D^-2 d_j A_0 and w = D^-2 curl A, with their time derivatives."""
    grid = snap.grid
    k1, k2, kmag = grid.k1, grid.k2, grid.kmag
    inv2 = np.where(kmag > 0, 1.0 / np.where(kmag > 0, kmag ** 2, 1.0), 0.0)
    a0, da0 = snap.A[0].values, snap.dA[0].values
    u = [LieFieldGrid(grid, inv2 * 1j * k * a0, SPECTRAL) for k in (k1, k2)]
    du = [LieFieldGrid(grid, inv2 * 1j * k * da0, SPECTRAL) for k in (k1, k2)]
    curl = 1j * (k1 * snap.A[2].values - k2 * snap.A[1].values)
    dcurl = 1j * (k1 * snap.dA[2].values - k2 * snap.dA[1].values)
    w = LieFieldGrid(grid, inv2 * curl, SPECTRAL)
    dw = LieFieldGrid(grid, inv2 * dcurl, SPECTRAL)
    return u, du, w, dw


def _lie_dx(F, axis):
    grid = F.grid
    comp = grid.k1 if axis == 1 else grid.k2
    return LieFieldGrid(grid, 1j * comp * F.values, SPECTRAL)


def _bracket_masked(X, Y, g, order=2):
    grid = X.grid
    xp = _masked_phys(X.values, grid, order)
    yp = _masked_phys(Y.values, grid, order)
    return LieFieldGrid(grid, _spec_masked(bracket_fields(xp, yp, g), grid, order), SPECTRAL)


def null_decomposition_sides(snap, matter, g, order=2):
    """Both sides of the gauge null identities.

    Returns (matter_lhs, matter_rhs, gauge_lhs[3], gauge_rhs[3]) where
    the matter identity expresses [A^mu, d_mu phi] through Q_{12} and Q_{j0}
    acting on the reduced potentials, and the gauge identity does the same for
    [d^nu A_mu, A_nu].
    """
    u, du, w, dw = _potentials(snap)
    phi, dphi = matter.phi.to_spectral(), matter.dphi.to_spectral()
    A = [f.to_spectral() for f in snap.A]
    dA = [f.to_spectral() for f in snap.dA]

    def minkowski_contraction(target, dtarget):
        # [A_0, d_t target] - sum_j [A_j, d_j target]
        acc = _bracket_masked(A[0], dtarget, g, order).values
        for j in (1, 2):
            acc = acc - _bracket_masked(A[j], _lie_dx(target, j), g, order).values
        return LieFieldGrid(target.grid, acc, SPECTRAL)

    def q_sides(target, dtarget):
        q12 = q_form_bracket(1, 2, w, dw, target, dtarget, g, order)
        qj0 = np.zeros_like(q12.values)
        for j in (1, 2):
            qj0 = qj0 + q_form_bracket(j, 0, u[j - 1], du[j - 1], target, dtarget, g, order).values
        return q12, LieFieldGrid(target.grid, qj0, SPECTRAL)

    matter_lhs = minkowski_contraction(phi, dphi)
    q12, qj0 = q_sides(phi, dphi)
    matter_rhs = LieFieldGrid(phi.grid, q12.values - qj0.values, SPECTRAL)

    gauge_lhs, gauge_rhs = [], []
    for mu in range(3):
        lhs_mu = minkowski_contraction(A[mu], dA[mu])
        gauge_lhs.append(LieFieldGrid(phi.grid, -lhs_mu.values, SPECTRAL))
        q12m, qj0m = q_sides(A[mu], dA[mu])
        gauge_rhs.append(LieFieldGrid(phi.grid, -q12m.values + qj0m.values, SPECTRAL))
    return matter_lhs, matter_rhs, gauge_lhs, gauge_rhs


def verify_null_decomposition(snap, matter, g, order=2, gauge_tol=1e-12):
    """Relative L2 residuals of the Lorenz-gauge null identities.

    Rejects snapshots violating the gauge relation beyond `gauge_tol`
    (relative to the gauge field size).
    """
    gres = gauge_residual(snap)
    scale = max(sum(f.l2_norm() for f in snap.dA), 1e-30)
    if gres > gauge_tol * scale:
        raise GaugePreconditionError(gres / scale)
    matter_lhs, matter_rhs, gauge_lhs, gauge_rhs = null_decomposition_sides(
        snap, matter, g, order)

    def rel(a, b):
        diff = LieFieldGrid(a.grid, a.values - b.values, SPECTRAL).l2_norm()
        return diff / max(a.l2_norm(), b.l2_norm(), 1e-30)

    report = {
        "gauge_residual": gres / scale,
        "matter_identity_residual": rel(matter_lhs, matter_rhs),
        "gauge_identity_residuals": [rel(a, b) for a, b in zip(gauge_lhs, gauge_rhs)],
        "matter_identity_lhs_norm": matter_lhs.l2_norm(),
    }
    report["max_residual"] = max([report["matter_identity_residual"]] + report["gauge_identity_residuals"])
    return report
