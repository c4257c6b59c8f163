"""Pure numpy implementations of the truncated-product kernels.

Both functions take the sparse multiplication table of a jet space as three
index arrays ``I, J, K``: coefficient ``I[t]`` of the left operand times
coefficient ``J[t]`` of the right lands in output coefficient ``K[t]``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _scatter(K_bytes: bytes, nout: int) -> np.ndarray:
    K = np.frombuffer(K_bytes, dtype=np.intp)
    S = np.zeros((K.size, nout))
    S[np.arange(K.size), K] = 1.0
    return S


def mul_rows(a, b, I, J, K, nout):
    prods = a[:, I] * b[:, J]
    return prods @ _scatter(K.tobytes(), nout)


def contract_rows(a, b, pa, pb, po, nrows_out, I, J, K, nout):
    prods = mul_rows(a[pa], b[pb], I, J, K, nout)
    # pairs are generated output-major with a uniform group size
    if nrows_out and pa.size % nrows_out == 0:
        group = pa.size // nrows_out
        return prods.reshape(nrows_out, group, nout).sum(axis=1)
    out = np.zeros((nrows_out, nout))
    np.add.at(out, po, prods)
    return out
