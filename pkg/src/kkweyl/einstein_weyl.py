"""Weyl connections, their curvature and the 3D Einstein-Weyl residual.

The Weyl connection ``W^l_mn = G^l_mn + W^l g_mn - W_m d^l_n - W_n d^l_m``
satisfies ``Dw g_mn = 2 W_w g_mn`` (conformal class preserved).  Its curvature
uses the same formula as :func:`~kkweyl.curvature.riemann_from_connection`,
which matches ``[Dw_m, Dw_n] V_a = -R^b_{amn} V_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conventions as cv
from .curvature import (GeometryError, PointFrame, build_frame, covariant_derivative,
                        riemann_from_connection)
from .dsl import (CovectorSpec, MetricFile, MetricSpec, VectorSpec, add, evaluate_field, mul,
                  zero_covector)
from .jets import align
from .tensors import TensorValue, jeinsum


@dataclass(frozen=True)
class WeylStructure:
    metric: MetricSpec
    weyl_potential: CovectorSpec

    @classmethod
    def from_file(cls, mf: MetricFile) -> "WeylStructure":
        w = mf.weyl if mf.weyl is not None else zero_covector(mf.metric)
        return cls(mf.metric, w)

    def frame(self, point, order: int = 3, check_signature: bool = True) -> PointFrame:
        return build_frame(self.metric, point, order, check_signature)


def _w_lower(ws: WeylStructure, frame: PointFrame) -> np.ndarray:
    return evaluate_field(ws.weyl_potential, frame.point, frame.order)


def _connection(frame: PointFrame, w_low: np.ndarray) -> np.ndarray:
    dim = frame.dim
    gam = frame.christoffel.data
    sp, (gam, w_low, g, ginv) = align(dim, gam, w_low, frame.g, frame.ginv)
    w_up = jeinsum("ls,s->l", ginv, w_low, dim)
    eye = np.eye(dim)[..., None] * sp.constant(1.0)
    return (gam + jeinsum("l,mn->lmn", w_up, g, dim)
            - jeinsum("m,ln->lmn", w_low, eye, dim) - jeinsum("n,lm->lmn", w_low, eye, dim))


def weyl_connection(ws: WeylStructure, point, order: int = 3,
                    frame: PointFrame | None = None) -> TensorValue:
    """``W^l_{mn}`` with jets of order ``order - 1``."""
    frame = frame or ws.frame(point, order)
    conn = _connection(frame, _w_lower(ws, frame))
    return TensorValue("ull", conn, frame.dim, True)


def compatibility_residual(ws: WeylStructure, point, frame: PointFrame | None = None) -> np.ndarray:
    """``d_w g_mn - W^l_{wm} g_ln - W^l_{wn} g_ml - 2 W_w g_mn`` as ``[w, m, n]``."""
    frame = frame or ws.frame(point, 1)
    conn = weyl_connection(ws, point, frame=frame).values
    g = frame.metric
    dg = frame.space.grad(frame.g)[..., 0]
    w = _w_lower(ws, frame)[:, 0]
    return (dg - np.einsum("lwm,ln->wmn", conn, g) - np.einsum("lwn,ml->wmn", conn, g)
            - 2 * np.einsum("w,mn->wmn", w, g))


@dataclass(frozen=True)
class WeylCurvature:
    riemann: TensorValue  # W R^b_{amn}
    ricci: TensorValue  # W R_{mn} = W R^a_{man}, not symmetric in general
    scalar: float

    @property
    def ricci_symmetric(self) -> np.ndarray:
        r = self.ricci.values
        return 0.5 * (r + r.T)


def weyl_curvature(ws: WeylStructure, point, order: int = 3,
                   frame: PointFrame | None = None) -> WeylCurvature:
    frame = frame or ws.frame(point, order)
    if frame.order < 2:
        raise GeometryError("Weyl curvature needs a frame of order >= 2")
    conn = weyl_connection(ws, point, frame=frame).data
    riem = riemann_from_connection(conn, frame.dim)
    ric = np.einsum("amab...->mb...", riem)
    scal = float(np.einsum("mn,mn->", frame.inverse, ric[..., 0]))
    return WeylCurvature(TensorValue("ulll", riem, frame.dim, True),
                         TensorValue("ll", ric, frame.dim, True), scal)


def commutator_residual(ws: WeylStructure, covector: CovectorSpec, point, order: int = 3) -> float:
    """Max |[Dw_m, Dw_n] V_a + W R^b_{amn} V_b| for a covector field ``V``."""
    frame = ws.frame(point, order)
    conn = weyl_connection(ws, point, frame=frame).data
    v = TensorValue("l", evaluate_field(covector, frame.point, frame.order), frame.dim, True)
    d1 = covariant_derivative(frame, v, conn)  # [n, a]
    d2 = covariant_derivative(frame, d1, conn).values  # [m, n, a]
    comm = d2 - np.swapaxes(d2, 0, 1)
    riem = weyl_curvature(ws, point, frame=frame).riemann.values
    rhs = -np.einsum("bamn,b->mna", riem, v.values)
    return float(np.max(np.abs(comm - rhs)))


@dataclass(frozen=True)
class _WTerms:
    w: np.ndarray  # W_m
    w2: float  # W^l W_l
    dw: np.ndarray  # D_m W_n
    sym: np.ndarray  # D_(m W_n)
    div: float  # D^l W_l


def _w_terms(ws: WeylStructure, frame: PointFrame) -> _WTerms:
    wj = _w_lower(ws, frame)
    w = wj[:, 0]
    dw = covariant_derivative(frame, TensorValue("l", wj, frame.dim, True)).values
    sym = cv.SYMMETRIZATION * (dw + dw.T)
    gi = frame.inverse
    return _WTerms(w, float(w @ gi @ w), dw, sym, float(np.einsum("mn,mn->", gi, dw)))


def symmetric_ricci_closed_form(ws: WeylStructure, point, order: int = 3,
                                frame: PointFrame | None = None) -> np.ndarray:
    """``R_mn + D_(m W_n) + W_m W_n + g_mn (D_l W^l - W_l W^l)`` (3D)."""
    frame = frame or ws.frame(point, order)
    t = _w_terms(ws, frame)
    ric = frame.ricci[0].values
    return ric + t.sym + np.outer(t.w, t.w) + frame.metric * (t.div - t.w2)


@dataclass
class EWResidual:
    full: np.ndarray
    gauge_fixed: np.ndarray
    sym_dw: np.ndarray  # D_(m W_n)
    divergence: float  # D^m W_m
    sign: int = 1

    def max_abs(self, which: str = "gauge_fixed") -> float:
        return float(np.max(np.abs(getattr(self, which))))


def ew_residual(ws: WeylStructure, point, sign: int = 1, order: int = 3,
                frame: PointFrame | None = None) -> EWResidual:
    """Trace-free Einstein-Weyl combination; ``sign`` multiplies the W-bilinear block.

    full: ``R - g R/3 + s (W W - g W.W/3) + D_(W) - g D.W/3``;
    gauge fixed: the same without the last two terms.
    """
    frame = frame or ws.frame(point, order)
    if frame.dim != 3:
        raise GeometryError("the Einstein-Weyl residual is implemented in 3 dimensions")
    t = _w_terms(ws, frame)
    g = frame.metric
    ric, scal = frame.ricci
    curv = ric.values - g * float(scal.values) / 3
    bil = np.outer(t.w, t.w) - g * t.w2 / 3
    fixed = curv + sign * bil
    full = fixed + t.sym - g * t.div / 3
    return EWResidual(full, fixed, t.sym, t.div, sign)


def lower_vector(metric: MetricSpec, vec: VectorSpec) -> CovectorSpec:
    """``W_m = g_mn f^n`` as expression trees."""
    exprs = []
    for m in range(metric.dim):
        e = None
        for n in range(metric.dim):
            term = mul(metric.component(m, n), vec.exprs[n])
            e = term if e is None else add(e, term)
        exprs.append(e)
    return CovectorSpec(tuple(exprs), metric.coord_names, dict(metric.params))


def from_reduction(base: MetricSpec, f_vec: VectorSpec, mode: str = "indefinite"):
    """Einstein-Weyl data from a reduction solution: ``W_m = f_m``.

    Returns ``(structure, sign)``; ``sign`` is the factor on the W-bilinear
    block under which the reduction equation and the gauge-fixed
    Einstein-Weyl equation coincide (see :mod:`kkweyl.conventions`).
    """
    if mode not in cv.EW_SIGN:
        raise ValueError(f"mode must be one of {sorted(cv.EW_SIGN)}")
    if base.dim != 3:
        raise GeometryError("from_reduction needs a 3-dimensional base")
    return WeylStructure(base, lower_vector(base, f_vec)), cv.EW_SIGN[mode]


@dataclass
class GauduchonReport:
    tolerance: float
    divergence: list = field(default_factory=list)  # (point, |D.W|)
    symmetric: list = field(default_factory=list)  # (point, max|D_(m W_n)|)
    skipped: list = field(default_factory=list)

    @property
    def gauge_fixed(self) -> bool:
        vals = [v for _, v in self.divergence] + [v for _, v in self.symmetric]
        return bool(self.divergence) and max(vals) < self.tolerance


def gauduchon_check(ws: WeylStructure, points, tolerance: float = 1e-9) -> GauduchonReport:
    from .conformal import POINT_ERRORS

    rep = GauduchonReport(tolerance)
    for p in points:
        try:
            frame = ws.frame(p, 1)
            t = _w_terms(ws, frame)
        except POINT_ERRORS as exc:
            rep.skipped.append((tuple(p), str(exc)))
            continue
        rep.divergence.append((tuple(p), abs(t.div)))
        rep.symmetric.append((tuple(p), float(np.max(np.abs(t.sym)))))
    return rep
