"""Vectorized fallback for the stage marching loop.

Same per-bin transfer matrix as the compiled core. Within a time step the
field recurrence along z is linear with a constant matrix, so after
diagonalizing that matrix it becomes a set of first-order IIR filters run
over the whole batch at once.
"""

import numpy as np
from scipy.signal import lfilter

_CONDITION_LIMIT = 1e8


def march_stage(inputs, b, c, transfer, stages):
    inputs = np.asarray(inputs, dtype=complex)
    transfer = np.asarray(transfer, dtype=float)
    n_batch, n_t = inputs.shape
    n_z = b.shape[1]
    medium_medium = transfer[:2, :2]
    medium_field = transfer[:2, 2:]
    field_medium = transfer[2:, :2]
    field_field = transfer[2:, 2:]
    eigvals, vecs = np.linalg.eig(field_field)
    if np.linalg.cond(vecs) > _CONDITION_LIMIT:
        return _march_loop(inputs, b, c, transfer, stages)
    inv_vecs = np.linalg.inv(vecs)

    out = np.zeros((n_batch, n_t), dtype=complex)
    source = np.empty((stages, n_batch, n_z + 1), dtype=complex)
    for step in range(n_t // stages):
        window = slice(step * stages, (step + 1) * stages)
        medium = np.stack([c, b])  # (2, batch, z)
        source[:, :, 0] = inv_vecs @ inputs[:, window].T
        source[:, :, 1:] = np.einsum("ij,jk,kbz->ibz", inv_vecs, field_medium, medium)
        modal = np.stack([lfilter([1.0], [1.0, -eigvals[r]], source[r], axis=1)
                          for r in range(stages)])
        fields = np.einsum("ij,jbz->ibz", vecs, modal)  # (stages, batch, z+1)
        advanced = (np.einsum("ij,jbz->ibz", medium_medium, medium)
                    + np.einsum("ij,jbz->ibz", medium_field, fields[:, :, :-1]))
        c[...] = advanced[0]
        b[...] = advanced[1]
        out[:, window] = fields[:, :, -1].T
    return out


def _march_loop(inputs, b, c, transfer, stages):
    n_batch, n_t = inputs.shape
    out = np.zeros((n_batch, n_t), dtype=complex)
    for step in range(n_t // stages):
        window = slice(step * stages, (step + 1) * stages)
        fields = inputs[:, window].T.copy()
        for j in range(b.shape[1]):
            state = np.vstack([c[:, j], b[:, j], fields])
            new = transfer @ state
            c[:, j], b[:, j] = new[0], new[1]
            fields = new[2:]
        out[:, window] = fields.T
    return out
