# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled joint eigen-sum contraction kernel.

Hot loop of the multilinear operator integral: accumulates

    out[p0, pk] += phi[c0(p0), ..., ck(pk)] * W0[p0, p1] * ... * W{k-1}[p{k-1}, pk]

over all coordinate paths, where phi is the symbol tensor at cluster
level and the maps c_i send coordinates to cluster indices.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"

DEF MAX_DEPTH = 16


def moi_contract(
    cnp.complex128_t[::1] phi,
    cnp.intp_t[::1] nclus,
    cnp.intp_t[:, ::1] cmaps,
    cnp.complex128_t[:, :, ::1] w,
):
    """Contract the cluster-level symbol tensor against the slot matrices.

    Parameters
    ----------
    phi : flattened C-order tensor of shape ``tuple(nclus)``
    nclus : cluster counts per slot, length k+1
    cmaps : (k+1, d) coordinate-to-cluster maps
    w : (k, d, d) slot matrices in adjacent eigenbases

    Returns
    -------
    (d, d) complex array in eigen-coordinates.
    """
    cdef Py_ssize_t k = w.shape[0]
    cdef Py_ssize_t d = w.shape[1]
    if k + 1 != nclus.shape[0] or k + 1 != cmaps.shape[0]:
        raise ValueError("inconsistent slot counts")
    if k + 1 > MAX_DEPTH:
        raise ValueError(f"arity {k + 1} exceeds kernel depth limit {MAX_DEPTH}")

    out_arr = np.zeros((d, d), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] out = out_arr

    cdef Py_ssize_t p[MAX_DEPTH]
    cdef Py_ssize_t off[MAX_DEPTH]
    cdef cnp.complex128_t prod[MAX_DEPTH]
    cdef Py_ssize_t depth = 0
    cdef cnp.complex128_t factor

    p[0] = -1
    while depth >= 0:
        p[depth] += 1
        if p[depth] >= d:
            depth -= 1
            continue
        if depth == 0:
            prod[0] = 1.0
            off[0] = cmaps[0, p[0]]
        else:
            factor = w[depth - 1, p[depth - 1], p[depth]]
            if factor == 0:
                continue
            prod[depth] = prod[depth - 1] * factor
            off[depth] = off[depth - 1] * nclus[depth] + cmaps[depth, p[depth]]
        if depth == k:
            out[p[0], p[depth]] += phi[off[depth]] * prod[depth]
        else:
            depth += 1
            p[depth] = -1
    return out_arr
