"""Small numeric helpers shared across modules."""

import numpy as np

# Rows per chunk are capped so the (rows, n_out, n_in) temporary stays small.
_CHUNK_ELEMS = 4_000_000


def rowwise_affine(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Compute x @ w.T + b with a per-row reduction order that does not
    depend on the batch size, so batch and single-sample evaluation agree
    bitwise (BLAS gemm/gemv may not).
    """
    n_out, n_in = w.shape
    rows = x.shape[0]
    chunk = max(1, _CHUNK_ELEMS // max(1, n_out * n_in))
    out = np.empty((rows, n_out), dtype=np.float64)
    for start in range(0, rows, chunk):
        stop = min(rows, start + chunk)
        out[start:stop] = (x[start:stop, None, :] * w[None, :, :]).sum(axis=2)
    out += b
    return out
