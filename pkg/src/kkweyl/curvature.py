"""Riemannian machinery at a point, with exact derivatives carried as jets.

Conventions (stated once, used everywhere):

* ``Gamma^l_{mn} = 1/2 g^{ls} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})``
* ``R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns}
  - Gamma^r_{nl} Gamma^l_{ms}`` and ``R_{sn} = R^m_{smn}``; the unit 2-sphere
  has scalar curvature +2.
* ``D_w`` adds ``+Gamma^a_{wz}`` per upper slot and ``-Gamma^z_{wb}`` per lower
  slot; the derivative index becomes the new leftmost (lower) slot.
* epsilon is the permutation symbol (``eps^{012} = +1`` in declared coordinate
  order) divided by ``sqrt|det g|``.  With that convention the 3D round trip
  vector -> 2-form -> vector is the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dsl import MetricSpec, metric_jets
from .jets import JetSpace, align, space, space_of
from .tensors import TensorValue, jeinsum, jmul, permutation_symbol

DEGENERATE_TOL = 1e-12
ANTISYM_TOL = 1e-10

_LETTERS = "abcdefgh"


class GeometryError(ValueError):
    """Base class for point-level geometric failures."""


class DegenerateMetricError(GeometryError):
    pass


class SignatureMismatchError(GeometryError):
    pass


@dataclass(frozen=True, eq=False)
class PointFrame:
    spec: MetricSpec
    point: tuple
    order: int
    g: np.ndarray  # (dim, dim, ncoef)
    ginv: np.ndarray  # (dim, dim, ncoef)
    det: np.ndarray  # (ncoef,)
    sqrt_det: np.ndarray  # (ncoef,) jets of sqrt|det g|
    det_sign: int
    signature_ok: bool

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def space(self) -> JetSpace:
        return space(self.dim, self.order)

    @property
    def metric(self) -> np.ndarray:
        return self.g[..., 0]

    @property
    def inverse(self) -> np.ndarray:
        return self.ginv[..., 0]

    @property
    def volume(self) -> float:
        return float(self.sqrt_det[0])

    @cached_property
    def christoffel(self) -> TensorValue:
        dg = self.space.grad(self.g)  # dg[c, a, b] = d_c g_ab
        lowered = 0.5 * (np.einsum("msn...->smn...", dg) + np.einsum("nsm...->smn...", dg) - dg)
        return TensorValue("ull", jeinsum("ls,smn->lmn", self.ginv, lowered, self.dim),
                           self.dim, True)

    @cached_property
    def riemann(self) -> TensorValue:
        return TensorValue("ulll", riemann_from_connection(self.christoffel.data, self.dim),
                           self.dim, True)

    @cached_property
    def ricci(self) -> tuple[TensorValue, TensorValue]:
        ric = np.einsum("msmn...->sn...", self.riemann.data)
        scal = jeinsum("sn,sn->", self.ginv, ric, self.dim)
        return TensorValue("ll", ric, self.dim, True), TensorValue("", scal, self.dim, True)

    @cached_property
    def riemann_scale(self) -> float:
        """``max |R^r_{smn}| + 1``: the normaliser for 'vanishing' residuals."""
        return self.riemann.max_abs() + 1.0


def _jet_det(m: np.ndarray, dim: int) -> np.ndarray:
    sp = space_of(dim, m)
    total = np.zeros(sp.ncoef)
    for perm in itertools.permutations(range(dim)):
        sign = permutation_symbol(dim)[perm]
        term = m[0, perm[0]]
        for r in range(1, dim):
            term = sp.mul(term, m[r, perm[r]])
        total = total + sign * term
    return total


def _jet_inverse(m: np.ndarray, dim: int) -> np.ndarray:
    sp = space_of(dim, m)
    m0inv = np.linalg.inv(m[..., 0])
    e = m.copy()
    e[..., 0] = 0.0
    x = -np.einsum("ab,bc...->ac...", m0inv, e)
    term = np.zeros_like(m)
    term[..., 0] = m0inv
    inv = term.copy()
    for _ in range(sp.order):
        term = jeinsum("ab,bc->ac", x, term, dim)
        inv = inv + term
    return inv


def build_frame(spec: MetricSpec, point, order: int = 3, check_signature: bool = True) -> PointFrame:
    """Evaluate metric jets at ``point`` and derive inverse and volume element.

    Raises :class:`~kkweyl.dsl.EvaluationError` when a component cannot be
    evaluated, :class:`DegenerateMetricError` when ``|det g| < 1e-12`` and
    :class:`SignatureMismatchError` when the sign of the determinant disagrees
    with the declared signature (unless ``check_signature`` is false).
    """
    point = tuple(float(x) for x in point)
    if len(point) != spec.dim:
        raise ValueError(f"point must have {spec.dim} coordinates")
    g = metric_jets(spec, point, order)
    det = _jet_det(g, spec.dim)
    if not np.isfinite(det[0]) or abs(det[0]) < DEGENERATE_TOL:
        raise DegenerateMetricError(f"degenerate metric at {point} (det = {det[0]:.3g})")
    sign = 1 if det[0] > 0 else -1
    expected = -1 if spec.minus_count % 2 else 1
    ok = sign == expected
    if check_signature and not ok:
        raise SignatureMismatchError(
            f"det g has sign {sign:+d} at {point}, declared signature implies {expected:+d}")
    sp = space(spec.dim, order)
    sqrt_det = sp.apply("sqrt", sign * det)
    return PointFrame(spec, point, order, g, _jet_inverse(g, spec.dim), det, sqrt_det, sign, ok)


def riemann_from_connection(conn: np.ndarray, dim: int) -> np.ndarray:
    """``R^r_{smn}`` of an arbitrary connection given as jets ``conn[l, m, n]``."""
    sp = space_of(dim, conn)
    d = sp.grad(conn)  # d[m, r, n, s] = d_m conn^r_{ns}
    quad = jeinsum("rml,lns->rmns", conn, conn, dim)
    n = sp.lower.ncoef
    quad = quad[..., :n]
    return (np.einsum("mrns...->rsmn...", d) - np.einsum("nrms...->rsmn...", d)
            + np.einsum("rmns...->rsmn...", quad) - np.einsum("rnms...->rsmn...", quad))


def christoffel(frame: PointFrame) -> TensorValue:
    if frame.order < 1:
        raise GeometryError("Christoffel symbols need a frame of order >= 1")
    return frame.christoffel


def riemann(frame: PointFrame) -> TensorValue:
    if frame.order < 2:
        raise GeometryError("the Riemann tensor needs a frame of order >= 2")
    return frame.riemann


def ricci(frame: PointFrame) -> tuple[TensorValue, TensorValue]:
    if frame.order < 2:
        raise GeometryError("the Ricci tensor needs a frame of order >= 2")
    return frame.ricci


def ricci_scalar(frame: PointFrame) -> float:
    return float(ricci(frame)[1].values)


def _sum_aligned(dim: int, arrays) -> np.ndarray:
    _, arrays = align(dim, *arrays)
    return sum(arrays[1:], arrays[0])


def covariant_derivative(frame: PointFrame, tensor: TensorValue,
                         connection: np.ndarray | None = None) -> TensorValue:
    """``D_w T``; the result has one more (leftmost, lower) slot and one order less."""
    if not tensor.jets:
        raise GeometryError("covariant derivative needs a tensor carrying jets")
    dim = frame.dim
    conn = frame.christoffel.data if connection is None else connection
    sp = space_of(dim, tensor.data)
    if sp.order < 1:
        raise GeometryError("covariant derivative needs jets of order >= 1")
    slots = _LETTERS[: tensor.rank]
    terms = [sp.grad(tensor.data)]
    for k, var in enumerate(tensor.variance):
        s = slots[k]
        replaced = slots[:k] + "z" + slots[k + 1:]
        if var == "u":
            terms.append(jeinsum(f"{s}wz,{replaced}->w{slots}", conn, tensor.data, dim))
        else:
            terms.append(-jeinsum(f"zw{s},{replaced}->w{slots}", conn, tensor.data, dim))
    return TensorValue("l" + tensor.variance, _sum_aligned(dim, terms), dim, True)


def _metric_for(frame: PointFrame, tensor: TensorValue, upper: bool):
    m = frame.ginv if upper else frame.g
    if tensor.jets:
        return m, tensor.data
    return m[..., 0], tensor.data


def change_variance(frame: PointFrame, tensor: TensorValue, slot: int, to: str) -> TensorValue:
    """Raise (``to="u"``) or lower (``to="l"``) one slot with the frame metric."""
    if tensor.variance[slot] == to:
        return tensor
    m, data = _metric_for(frame, tensor, upper=(to == "u"))
    slots = _LETTERS[: tensor.rank]
    sub_t = slots[:slot] + "z" + slots[slot + 1:]
    subs = f"{slots[slot]}z,{sub_t}->{slots}"
    if tensor.jets:
        out = jeinsum(subs, m, data, frame.dim)
    else:
        out = np.einsum(subs, m, data)
    variance = tensor.variance[:slot] + to + tensor.variance[slot + 1:]
    return TensorValue(variance, out, frame.dim, tensor.jets)


def raise_all(frame: PointFrame, tensor: TensorValue) -> TensorValue:
    for k in range(tensor.rank):
        tensor = change_variance(frame, tensor, k, "u")
    return tensor


def lower_all(frame: PointFrame, tensor: TensorValue) -> TensorValue:
    for k in range(tensor.rank):
        tensor = change_variance(frame, tensor, k, "l")
    return tensor


def _times_scalar_jet(dim: int, data: np.ndarray, scalar: np.ndarray, jets: bool) -> np.ndarray:
    if jets:
        return jmul(data, scalar, dim)
    return data * scalar[0]


def levi_civita_dual(frame: PointFrame, tensor: TensorValue, mode: str) -> TensorValue:
    """Hodge-type duals built from the permutation symbol over ``sqrt|det g|``.

    Modes: ``"3d-vector-from-2form"`` (``v^m = eps^{mab} w_ab / (2 sqrt|g|)``),
    ``"2d-scalar-from-2form"`` (``f = eps^{mn} w_mn / (2 sqrt|g|)``) and
    ``"3d-2form-from-vector"`` (``w_ab = sqrt|g| eps_{abm} v^m``).
    """
    dim = frame.dim
    inv_vol = frame.space.reciprocal(frame.sqrt_det)
    if mode in ("3d-vector-from-2form", "2d-scalar-from-2form"):
        want = 3 if mode.startswith("3d") else 2
        if dim != want or tensor.variance != "ll":
            raise GeometryError(f"{mode} needs a lower 2-form in {want} dimensions")
        v = tensor.values
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(v + v.T)) > ANTISYM_TOL * scale:
            raise GeometryError("input is not antisymmetric")
        eps = permutation_symbol(dim)
        if want == 3:
            raw = 0.5 * np.einsum("mab,ab...->m...", eps, tensor.data)
            variance = "u"
        else:
            raw = 0.5 * np.einsum("ab,ab...->...", eps, tensor.data)
            variance = ""
        return TensorValue(variance, _times_scalar_jet(dim, raw, inv_vol, tensor.jets), dim, tensor.jets)
    if mode == "3d-2form-from-vector":
        if dim != 3 or tensor.variance != "u":
            raise GeometryError(f"{mode} needs an upper vector in 3 dimensions")
        raw = np.einsum("abm,m...->ab...", permutation_symbol(3), tensor.data)
        return TensorValue("ll", _times_scalar_jet(dim, raw, frame.sqrt_det, tensor.jets), dim, tensor.jets)
    raise ValueError(f"unknown dual mode {mode!r}")



def identity_residuals(frame: PointFrame) -> dict:
    """Max violations of the algebraic curvature identities at the frame point.

    Keys: ``pair_antisymmetry`` (both pairs of R_{rsmn}), ``pair_exchange``,
    ``bianchi`` (first Bianchi identity), ``ricci_symmetry`` and
    ``metric_compatibility`` (D g).  Raw values, not normalised.
    """
    low = lower_all(frame, frame.riemann.as_values()).values
    ric = frame.ricci[0].values
    bianchi = low + np.einsum("rsmn->rmns", low) + np.einsum("rsmn->rnsm", low)
    dg = covariant_derivative(frame, TensorValue("ll", frame.g, frame.dim, True)).values
    return {
        "pair_antisymmetry": float(max(np.max(np.abs(low + np.swapaxes(low, 0, 1))),
                                       np.max(np.abs(low + np.swapaxes(low, 2, 3))))),
        "pair_exchange": float(np.max(np.abs(low - np.einsum("rsmn->mnrs", low)))),
        "bianchi": float(np.max(np.abs(bianchi))),
        "ricci_symmetry": float(np.max(np.abs(ric - ric.T))),
        "metric_compatibility": float(np.max(np.abs(dg))),
    }
