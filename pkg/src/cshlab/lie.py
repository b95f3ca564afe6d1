"""su(n) generator bases, structure constants, and the sextic Higgs potential.

The generator basis is the generalized Gell-Mann family, rescaled so that
Tr(T^a T^b) = 2 delta^{ab}.  For n = 2 this is exactly the three Pauli
matrices.  Structure constants are recovered once from the trace identity
f^{ab}_c = Tr([T^a, T^b] T^c) / (2i) and cached, together with a sparse
triplet form used by the grid kernels.

All Lie-algebra-valued quantities are carried as coefficient vectors over
the basis (phi = phi_a T^a).  Because the T^a are Hermitian, the adjoint of
an element is simple coefficient conjugation.
"""

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import _kernels

_TOL = 1e-12


class LieDimensionError(ValueError):
    pass


def _gellmann_matrices(n):
    """Generalized Gell-Mann basis of traceless Hermitian n x n matrices."""
    mats = []
    for k in range(2, n + 1):
        for j in range(1, k):
            sym = np.zeros((n, n), dtype=complex)
            sym[j - 1, k - 1] = 1.0
            sym[k - 1, j - 1] = 1.0
            mats.append(sym)
            ant = np.zeros((n, n), dtype=complex)
            ant[j - 1, k - 1] = -1.0j
            ant[k - 1, j - 1] = 1.0j
            mats.append(ant)
        ell = k - 1
        diag = np.zeros(n)
        diag[:ell] = 1.0
        diag[ell] = -ell
        mats.append(sqrt(2.0 / (ell * (ell + 1))) * np.diag(diag).astype(complex))
    return np.array(mats)


@dataclass
class GeneratorSet:
    """Basis T^a of su(n) (Hermitian, traceless, Tr(T^aT^b) = 2 delta^{ab})
    together with the structure-constant tensor f^{ab}_c."""

    n: int
    generators: np.ndarray          # (d, n, n) complex
    structure_constants: np.ndarray  # (d, d, d) real
    _sparse: tuple = field(default=None, repr=False, compare=False)
    _g4: tuple = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.n * self.n - 1

    def f_sparse(self):
        """Nonzero structure constants as (a, b, c, value) index arrays."""
        if self._sparse is None:
            a, b, c = np.nonzero(np.abs(self.structure_constants) > _TOL)
            vals = self.structure_constants[a, b, c]
            self._sparse = (a.astype(np.int64), b.astype(np.int64),
                            c.astype(np.int64), vals.astype(np.float64))
        return self._sparse

    def g4_sparse(self):
        """Sparse form of G[a,b,c,e] = sum_d f^{ab}_d f^{dc}_e."""
        if self._g4 is None:
            g4 = np.einsum("abd,dce->abce", self.structure_constants,
                           self.structure_constants)
            a, b, c, e = np.nonzero(np.abs(g4) > _TOL)
            self._g4 = (a.astype(np.int64), b.astype(np.int64),
                        c.astype(np.int64), e.astype(np.int64),
                        g4[a, b, c, e].astype(np.float64))
        return self._g4

    def to_matrix(self, coeffs):
        """Reconstruct matrices from coefficient arrays (last axis = basis)."""
        coeffs = np.asarray(coeffs)
        return np.einsum("...a,aij->...ij", coeffs, self.generators)

    def from_matrix(self, mats):
        """Project matrices onto the basis: c_a = Tr(M T^a) / 2."""
        mats = np.asarray(mats)
        return np.einsum("...ij,aji->...a", mats, self.generators) / 2.0


@dataclass
class LieElement:
    """Coefficient vector of an algebra element phi = phi_a T^a."""

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    def dagger(self):
        return LieElement(np.conj(self.coeffs))


@dataclass
class PhysicsParams:
    """Symmetry-breaking scale v (> 0) and the derived mass m^2 = 2 v^4."""

    v: float
    kappa: float = 1.0

    def __post_init__(self):
        if self.v <= 0:
            raise ValueError("symmetry-breaking scale v must be positive")

    @property
    def m(self):
        return sqrt(2.0) * self.v ** 2

    @property
    def m2(self):
        return 2.0 * self.v ** 4


def build_su_n_basis(n):
    """Construct the rescaled Gell-Mann basis and its structure constants."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise LieDimensionError(f"matrix dimension must be an integer >= 2, got {n!r}")
    gens = _gellmann_matrices(int(n))
    d = n * n - 1
    comms = np.einsum("aij,bjk->abik", gens, gens)
    comms = comms - np.transpose(comms, (1, 0, 2, 3))
    f_complex = np.einsum("abij,cji->abc", comms, gens) / 2.0j
    if np.max(np.abs(f_complex.imag)) > _TOL:
        raise RuntimeError("structure constants not real; basis is inconsistent")
    f = f_complex.real.copy()
    gset = GeneratorSet(n=int(n), generators=gens, structure_constants=f)
    _validate_basis(gset)
    return gset


def _validate_basis(g):
    gens, f, d = g.generators, g.structure_constants, g.dim
    if np.max(np.abs(gens - np.conj(np.transpose(gens, (0, 2, 1))))) > _TOL:
        raise RuntimeError("generators are not Hermitian")
    if np.max(np.abs(np.trace(gens, axis1=1, axis2=2))) > _TOL:
        raise RuntimeError("generators are not traceless")
    gram = np.einsum("aij,bji->ab", gens, gens)
    if np.max(np.abs(gram - 2.0 * np.eye(d))) > _TOL:
        raise RuntimeError("trace normalization Tr(T^aT^b) = 2 delta violated")
    rebuilt = 1j * np.einsum("abc,cij->abij", f, gens)
    comms = np.einsum("aij,bjk->abik", gens, gens)
    comms = comms - np.transpose(comms, (1, 0, 2, 3))
    if np.max(np.abs(rebuilt - comms)) > _TOL:
        raise RuntimeError("stored structure constants do not reproduce commutators")


def commutator(x, y, g):
    """Coefficient-space commutator: result_c = i f^{ab}_c x_a y_b."""
    xc = x.coeffs if isinstance(x, LieElement) else np.asarray(x, dtype=complex)
    yc = y.coeffs if isinstance(y, LieElement) else np.asarray(y, dtype=complex)
    if xc.shape[-1] != g.dim or yc.shape[-1] != g.dim:
        raise LieDimensionError(
            f"coefficient length must be {g.dim} for su({g.n})")
    out = 1j * np.einsum("abc,...a,...b->...c", g.structure_constants, xc, yc)
    return LieElement(out) if isinstance(x, LieElement) else out


def bracket_fields(x, y, g, out=None):
    """Commutator of component-stacked fields, shape (d, ...) -> (d, ...).

    Dispatches to the compiled kernel; this is the hot loop of the evolution
    right-hand sides.
    """
    d = g.dim
    shape = x.shape
    xf = np.ascontiguousarray(x.reshape(d, -1), dtype=complex)
    yf = np.ascontiguousarray(y.reshape(d, -1), dtype=complex)
    of = np.zeros_like(xf) if out is None else out.reshape(d, -1)
    ia, ib, ic, fv = g.f_sparse()
    _kernels.bracket(ia, ib, ic, fv, xf, yf, of)
    return of.reshape(shape)


def _higgs_terms_fields(phi, g, p):
    d = g.dim
    shape = phi.shape
    pf = np.ascontiguousarray(phi.reshape(d, -1), dtype=complex)
    grad = np.zeros_like(pf)
    pot = np.zeros(pf.shape[1], dtype=float)
    ga, gb, gc, ge, gv = g.g4_sparse()
    _kernels.higgs_terms(ga, gb, gc, ge, gv, pf, p.v ** 2, grad, pot)
    return grad.reshape(shape), pot.reshape(shape[1:])


def higgs_fields(phi, g, p):
    """Potential density and gradient for a component-stacked field phi."""
    return _higgs_terms_fields(phi, g, p)


def higgs_potential(phi, g, p):
    """V(phi, phi+) >= 0 evaluated through the coefficient formula.

    Agrees with the matrix-trace form
    Tr((([phi,phi+],phi] - v^2 phi)+ ([[phi,phi+],phi] - v^2 phi))
    which is used as an independent oracle in the tests.
    """
    coeffs = phi.coeffs if isinstance(phi, LieElement) else np.asarray(phi, dtype=complex)
    _, pot = _higgs_terms_fields(coeffs.reshape(-1, 1), g, p)
    return float(pot[0])


def higgs_gradient(phi, g, p):
    """Gradient dV/d(phi_a*) with linear (2v^4 phi), cubic and quintic parts."""
    is_elem = isinstance(phi, LieElement)
    coeffs = phi.coeffs if is_elem else np.asarray(phi, dtype=complex)
    grad, _ = _higgs_terms_fields(coeffs.reshape(-1, 1), g, p)
    grad = grad[:, 0]
    return LieElement(grad) if is_elem else grad


def higgs_potential_matrix(phi, g, p):
    """Matrix-trace route for V, used as the oracle for the coefficient route."""
    coeffs = phi.coeffs if isinstance(phi, LieElement) else np.asarray(phi, dtype=complex)
    m = g.to_matrix(coeffs)
    md = np.conj(m.T)
    b = (m @ md - md @ m) @ m - m @ (m @ md - md @ m)
    # [[phi, phi+], phi] = (phi phi+ - phi+ phi) phi - phi (phi phi+ - phi+ phi)
    b = b - p.v ** 2 * m
    return float(np.real(np.trace(np.conj(b.T) @ b)))


def check_casimir_commutation(g):
    """Entrywise norm of [T^a, T^b T^b] with b summed (quadratic Casimir).

    The summed square commutes with every generator in any su(n).  Fixed-pair
    residuals [T^a, (T^b)^2] are reported as well; those vanish for n = 2 and
    for pairs inside one embedded su(2) block, but not for general pairs when
    n >= 3.
    """
    gens = g.generators
    sq = np.einsum("bij,bjk->bik", gens, gens)
    casimir = np.sum(sq, axis=0)
    comm_cas = np.einsum("aij,jk->aik", gens, casimir) - np.einsum("ij,ajk->aik", casimir, gens)
    comm = np.einsum("aij,bjk->abik", gens, sq) - np.einsum("bij,ajk->abik", sq, gens)
    per_pair = np.max(np.abs(comm), axis=(2, 3))
    max_res = float(np.max(np.abs(comm_cas)))
    return {
        "n": g.n,
        "max_residual": max_res,
        "casimir_residuals": np.max(np.abs(comm_cas), axis=(1, 2)),
        "pair_residuals": per_pair,
        "passed": bool(max_res <= _TOL),
    }


def jacobi_residual(g):
    """Max residual of f^{ab}_d f^{dc}_e + f^{bc}_d f^{da}_e + f^{ca}_d f^{db}_e."""
    f = g.structure_constants
    s = (np.einsum("abd,dce->abce", f, f)
         + np.einsum("bcd,dae->abce", f, f)
         + np.einsum("cad,dbe->abce", f, f))
    return float(np.max(np.abs(s)))


def invariant_report(g):
    """Residuals of every basis invariant, for the lie-info CLI output."""
    gens, f, d = g.generators, g.structure_constants, g.dim
    gram = np.einsum("aij,bji->ab", gens, gens)
    rebuilt = 1j * np.einsum("abc,cij->abij", f, gens)
    comms = np.einsum("aij,bjk->abik", gens, gens)
    comms = comms - np.transpose(comms, (1, 0, 2, 3))
    return {
        "n": g.n,
        "dim": d,
        "hermiticity": float(np.max(np.abs(gens - np.conj(np.transpose(gens, (0, 2, 1)))))),
        "tracelessness": float(np.max(np.abs(np.trace(gens, axis1=1, axis2=2)))),
        "trace_normalization": float(np.max(np.abs(gram - 2.0 * np.eye(d)))),
        "commutator_consistency": float(np.max(np.abs(rebuilt - comms))),
        "f_antisymmetry": float(np.max(np.abs(f + np.transpose(f, (1, 0, 2))))),
        "jacobi": jacobi_residual(g),
        "casimir_commutation": check_casimir_commutation(g)["max_residual"],
    }
