# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled state-vector kernels.

Both kernels address amplitudes through a ``(base, off)`` gather pair: the
amplitude of local basis index ``x`` in block ``r`` lives at
``amps[base[r] + off[x]]``.  See ``sqpc.quantum.state.gather_indices``.
"""
from libc.math cimport sqrt

cdef enum:
    MAXK = 64


def apply_matrix(double complex[::1] amps, Py_ssize_t[::1] base,
                 Py_ssize_t[::1] off, double complex[:, ::1] mat):
    cdef Py_ssize_t nb = base.shape[0]
    cdef Py_ssize_t k = off.shape[0]
    cdef Py_ssize_t r, i, j, b
    cdef double complex acc
    cdef double complex buf[MAXK]
    if k > MAXK:
        raise ValueError("operator acts on more than 64 local amplitudes")
    for r in range(nb):
        b = base[r]
        for i in range(k):
            buf[i] = amps[b + off[i]]
        for i in range(k):
            acc = 0
            for j in range(k):
                acc = acc + mat[i, j] * buf[j]
            amps[b + off[i]] = acc


def outcome_probabilities(double complex[::1] amps, Py_ssize_t[::1] base,
                          Py_ssize_t[::1] off, double complex[:, ::1] basis):
    cdef Py_ssize_t nb = base.shape[0]
    cdef Py_ssize_t k = off.shape[0]
    cdef Py_ssize_t m = basis.shape[0]
    cdef Py_ssize_t r, j, x, b
    cdef double complex c
    out = [0.0] * m
    cdef double p
    for j in range(m):
        p = 0.0
        for r in range(nb):
            b = base[r]
            c = 0
            for x in range(k):
                c = c + basis[j, x].conjugate() * amps[b + off[x]]
            p += c.real * c.real + c.imag * c.imag
        out[j] = p
    return out


def measure(double complex[::1] amps, Py_ssize_t[::1] base,
            Py_ssize_t[::1] off, double complex[:, ::1] basis,
            double u, double cutoff):
    """Sample one outcome of the projective measurement and collapse in place."""
    cdef Py_ssize_t nb = base.shape[0]
    cdef Py_ssize_t k = off.shape[0]
    cdef Py_ssize_t m = basis.shape[0]
    cdef Py_ssize_t r, j, x, b, chosen
    cdef double complex c
    cdef double probs[MAXK]
    cdef double total = 0.0, target, cum, scale
    if m > MAXK:
        raise ValueError("basis has more than 64 outcomes")
    for j in range(m):
        probs[j] = 0.0
        for r in range(nb):
            b = base[r]
            c = 0
            for x in range(k):
                c = c + basis[j, x].conjugate() * amps[b + off[x]]
            probs[j] += c.real * c.real + c.imag * c.imag
        if probs[j] < cutoff:
            probs[j] = 0.0
        total += probs[j]
    if total < cutoff:
        raise ArithmeticError("degenerate state norm during measurement")
    target = u * total
    cum = 0.0
    chosen = -1
    for j in range(m):
        if probs[j] == 0.0:
            continue
        cum += probs[j]
        chosen = j
        if target < cum:
            break
    scale = 1.0 / sqrt(probs[chosen])
    for r in range(nb):
        b = base[r]
        c = 0
        for x in range(k):
            c = c + basis[chosen, x].conjugate() * amps[b + off[x]]
        c = c * scale
        for x in range(k):
            amps[b + off[x]] = basis[chosen, x] * c
    return chosen
