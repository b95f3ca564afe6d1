"""Pure-numpy fallback for the contraction kernels (einsum based)."""

import numpy as np


def bracket(ia, ib, ic, fv, x, y, out):
    for a, b, c, g in zip(ia, ib, ic, fv):
        out[c] += 1j * g * x[a] * y[b]
    return out


def higgs_terms(ga, gb, gc, ge, gv, phi, v2, grad, pot):
    d, npts = phi.shape
    W = v2 * phi.copy()
    np.add.at(W, ge, gv[:, None] * phi[ga] * np.conj(phi[gb]) * phi[gc])
    pot += 2.0 * np.sum(np.abs(W) ** 2, axis=0)
    grad += 2.0 * v2 * W
    np.add.at(grad, ga, 2.0 * gv[:, None] * phi[gb] * np.conj(phi[gc]) * W[ge])
    np.add.at(grad, gc, 2.0 * gv[:, None] * np.conj(phi[ga]) * phi[gb] * W[ge])
    np.add.at(grad, gb, 2.0 * gv[:, None] * phi[ga] * phi[gc] * np.conj(W[ge]))
    return grad, pot
