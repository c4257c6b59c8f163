"""Dense tensors whose entries may be jets, and jet-aware contraction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .jets import align, space, space_of


@dataclass(frozen=True, eq=False)
class TensorValue:
    """Components of a tensor at a point.

    ``variance`` has one character per slot, ``"u"`` (upper) or ``"l"`` (lower).
    When ``jets`` is true the data carries a trailing coefficient axis.
    """

    variance: str
    data: np.ndarray
    dim: int
    jets: bool = False

    def __post_init__(self):
        expected = (self.dim,) * len(self.variance)
        shape = self.data.shape[:-1] if self.jets else self.data.shape
        if shape != expected:
            raise ValueError(f"tensor data shape {self.data.shape} does not match "
                             f"variance {self.variance!r} in dimension {self.dim}")
        if set(self.variance) - {"u", "l"}:
            raise ValueError(f"bad variance string {self.variance!r}")

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def order(self) -> int | None:
        return space_of(self.dim, self.data).order if self.jets else None

    @property
    def values(self) -> np.ndarray:
        return self.data[..., 0] if self.jets else self.data

    def __getitem__(self, idx):
        return self.values[idx]

    def truncated(self, order: int) -> "TensorValue":
        if not self.jets:
            raise ValueError("tensor carries no jets")
        return TensorValue(self.variance, self.data[..., : space(self.dim, order).ncoef],
                           self.dim, True)

    def as_values(self) -> "TensorValue":
        return TensorValue(self.variance, np.array(self.values), self.dim, False)

    def max_abs(self) -> float:
        v = self.values
        return float(np.max(np.abs(v))) if v.size else 0.0


@lru_cache(maxsize=256)
def _pairs(subscripts: str, dim: int):
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    letters = list(out) + sorted(set(sa + sb) - set(out))
    grids = np.indices((dim,) * len(letters)).reshape(len(letters), -1)
    pos = {c: grids[k] for k, c in enumerate(letters)}

    def flat(sub):
        if not sub:
            return np.zeros(grids.shape[1], dtype=np.intp)
        return np.ravel_multi_index([pos[c] for c in sub], (dim,) * len(sub)).astype(np.intp)

    return flat(sa), flat(sb), flat(out), dim ** len(out)


def jeinsum(subscripts: str, a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    """Two-operand einsum over tensor axes where entries are jets.

    Only explicit index letters are supported (no ellipsis); both operands must
    carry a trailing coefficient axis.  The result is truncated to the lower of
    the two operand orders.
    """
    sp, (a, b) = align(dim, a, b)
    pa, pb, po, nout = _pairs(subscripts, dim)
    a2 = np.ascontiguousarray(a.reshape(-1, sp.ncoef))
    b2 = np.ascontiguousarray(b.reshape(-1, sp.ncoef))
    I, J, K = sp.table
    res = _backend.kernels.contract_rows(a2, b2, pa, pb, po, nout, I, J, K, sp.ncoef)
    out_rank = len(subscripts.split("->")[1].strip())
    return np.asarray(res).reshape((dim,) * out_rank + (sp.ncoef,))


def jmul(a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    """Broadcasting elementwise product of jet arrays."""
    sp, (a, b) = align(dim, a, b)
    return sp.mul(a, b)


@lru_cache(maxsize=None)
def permutation_symbol(dim: int) -> np.ndarray:
    """Levi-Civita permutation symbol with entries in {-1, 0, 1}."""
    eps = np.zeros((dim,) * dim)
    for perm in itertools.permutations(range(dim)):
        inversions = sum(1 for i in range(dim) for j in range(i + 1, dim) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    eps.setflags(write=False)
    return eps


def symmetrize(t: np.ndarray, axes=(0, 1)) -> np.ndarray:
    """Symmetric part over two tensor axes (jet axis untouched)."""
    return 0.5 * (t + np.swapaxes(t, *axes))
