# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled marching loop for one memory stage.

Every space bin applies the same real linear map to the vector
``(c, b, a_1, ..., a_s)``: the medium amplitudes at the start of the time
step and the field entering the bin at the ``s`` stage times. The map
returns the advanced medium and the field leaving the bin.
"""

import numpy as np

cdef enum:
    MAXDIM = 8


def march_stage(const double complex[:, ::1] inputs,
                double complex[:, ::1] b,
                double complex[:, ::1] c,
                const double[:, ::1] transfer,
                int stages):
    """Advance ``b`` and ``c`` in place; return the exit field, shaped like ``inputs``."""
    cdef Py_ssize_t n_batch = inputs.shape[0]
    cdef Py_ssize_t n_t = inputs.shape[1]
    cdef Py_ssize_t n_z = b.shape[1]
    cdef Py_ssize_t dim = 2 + stages
    if stages < 1 or dim > MAXDIM or transfer.shape[0] != dim or transfer.shape[1] != dim:
        raise ValueError("transfer matrix does not match the stage count")
    if n_t % stages:
        raise ValueError("time samples are not a whole number of steps")
    if b.shape[0] != n_batch or c.shape[0] != n_batch or c.shape[1] != n_z:
        raise ValueError("state and input batch shapes differ")

    out_arr = np.zeros((n_batch, n_t), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef double complex v[MAXDIM]
    cdef double complex w[MAXDIM]
    cdef double complex acc
    cdef Py_ssize_t k, step, j, r, q, base

    with nogil:
        for k in range(n_batch):
            for step in range(n_t // stages):
                base = step * stages
                for r in range(stages):
                    v[2 + r] = inputs[k, base + r]
                for j in range(n_z):
                    v[0] = c[k, j]
                    v[1] = b[k, j]
                    for r in range(dim):
                        acc = 0
                        for q in range(dim):
                            acc = acc + transfer[r, q] * v[q]
                        w[r] = acc
                    c[k, j] = w[0]
                    b[k, j] = w[1]
                    for r in range(stages):
                        v[2 + r] = w[2 + r]
                for r in range(stages):
                    out[k, base + r] = v[2 + r]
    return out_arr
