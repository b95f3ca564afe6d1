# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused contraction kernels for su(n)-valued grid fields.

These are the pointwise hot loops of the evolution right-hand sides: the
structure-constant bracket and the sextic-potential gradient.  Both exploit
the sparsity of the structure constants instead of materialising dense
einsum temporaries.
"""

import numpy as np

cimport cython


def bracket(long[::1] ia, long[::1] ib, long[::1] ic, double[::1] fv,
            complex[:, ::1] x, complex[:, ::1] y, complex[:, ::1] out):
    """out[c] += i * f[a,b,c] * x[a] * y[b], pointwise over the last axis."""
    cdef Py_ssize_t nnz = fv.shape[0]
    cdef Py_ssize_t npts = x.shape[1]
    cdef Py_ssize_t t, p, a, b, c
    cdef double complex coef
    for t in range(nnz):
        a = ia[t]
        b = ib[t]
        c = ic[t]
        coef = 1j * fv[t]
        for p in range(npts):
            out[c, p] = out[c, p] + coef * x[a, p] * y[b, p]
    return np.asarray(out)


def higgs_terms(long[::1] ga, long[::1] gb, long[::1] gc, long[::1] ge,
                double[::1] gv, complex[:, ::1] phi, double v2,
                complex[:, ::1] grad, double[::1] pot):
    """Sextic potential density and its conjugate-coefficient gradient.

    With W_e = G[a,b,c,e] phi_a conj(phi_b) phi_c + v2*phi_e (G the
    double-structure-constant tensor given in sparse form):

        pot      = 2 * sum_e |W_e|^2
        grad[al] = 2 * sum_e [ (dW*_e/dphi*_al) W_e + W*_e (dW_e/dphi*_al) ]
    """
    cdef Py_ssize_t nnz = gv.shape[0]
    cdef Py_ssize_t d = phi.shape[0]
    cdef Py_ssize_t npts = phi.shape[1]
    cdef Py_ssize_t t, p, e
    cdef long a, b, c
    cdef double g
    cdef double complex w, pa, pb, pc
    W = np.zeros((d, npts), dtype=np.complex128)
    cdef complex[:, ::1] Wm = W
    for e in range(d):
        for p in range(npts):
            Wm[e, p] = v2 * phi[e, p]
    for t in range(nnz):
        a = ga[t]
        b = gb[t]
        c = gc[t]
        e = ge[t]
        g = gv[t]
        for p in range(npts):
            Wm[e, p] = Wm[e, p] + g * phi[a, p] * phi[b, p].conjugate() * phi[c, p]
    for e in range(d):
        for p in range(npts):
            w = Wm[e, p]
            pot[p] += 2.0 * (w.real * w.real + w.imag * w.imag)
            grad[e, p] = grad[e, p] + 2.0 * v2 * w
    # dW*_e/dphi*_al picks the a and c slots, dW_e/dphi*_al the b slot.
    for t in range(nnz):
        a = ga[t]
        b = gb[t]
        c = gc[t]
        e = ge[t]
        g = gv[t]
        for p in range(npts):
            w = Wm[e, p]
            pa = phi[a, p]
            pb = phi[b, p]
            pc = phi[c, p]
            grad[a, p] = grad[a, p] + 2.0 * g * pb * pc.conjugate() * w
            grad[c, p] = grad[c, p] + 2.0 * g * pa.conjugate() * pb * w
            grad[b, p] = grad[b, p] + 2.0 * g * pa * pc * w.conjugate()
    return np.asarray(grad), np.asarray(pot)
