"""Schouten, Weyl and Cotton tensors; Chern-Simons densities; flatness reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import conventions as cv
from .curvature import (GeometryError, PointFrame, build_frame, change_variance,
                        covariant_derivative, lower_all, raise_all)
from .dsl import (Call, EvaluationError, Expr, MetricSpec, Num, ScalarSpec, is_zero, mul,
                  parse_expression)
from .jets import JetError, space_of
from .tensors import TensorValue, jmul, permutation_symbol


def schouten(frame: PointFrame) -> TensorValue:
    """``S^{NL} = R^{NL} - g^{NL} R / (2(n-1))`` with both indices up."""
    n = frame.dim
    if n < 3:
        raise GeometryError("the Schouten combination needs dim >= 3")
    ric, scal = frame.ricci
    ric_up = raise_all(frame, ric.as_values()).values
    return TensorValue("uu", ric_up - frame.inverse * float(scal.values) / (2 * (n - 1)), n)


def weyl(frame: PointFrame) -> TensorValue:
    """Weyl tensor ``C^{KLMN}`` (all indices up)."""
    n = frame.dim
    if n < 4:
        raise GeometryError("the Weyl tensor needs dim >= 4")
    riem_low = lower_all(frame, frame.riemann.as_values())
    r_up = raise_all(frame, riem_low).values
    s = schouten(frame).values
    gi = frame.inverse
    combo = (np.einsum("km,nl->klmn", gi, s) - np.einsum("kn,ml->klmn", gi, s)
             - np.einsum("lm,nk->klmn", gi, s) + np.einsum("ln,mk->klmn", gi, s))
    return TensorValue("uuuu", r_up - combo / (n - 2), n)


def cotton(frame: PointFrame) -> TensorValue:
    """Cotton tensor ``C^{KL} = (eps^{KMN} D_M R^L_N + eps^{LMN} D_M R^K_N) / (2 sqrt g)``.

    The result carries jets of order ``frame.order - 3`` so that its divergence
    can be taken exactly when the frame was built at order 4.
    """
    if frame.dim != 3:
        raise GeometryError("the Cotton tensor is defined in 3 dimensions")
    if frame.order < 3:
        raise GeometryError("the Cotton tensor needs a frame of order >= 3")
    ric, _ = frame.ricci
    mixed = change_variance(frame, ric, 0, "u")  # R^L_N
    d = covariant_derivative(frame, mixed).data  # [M, L, N]
    t = np.einsum("kmn,mln...->kl...", permutation_symbol(3), d)
    sym = t + np.swapaxes(t, 0, 1)
    inv_vol = frame.space.reciprocal(frame.sqrt_det)
    return TensorValue("uu", 0.5 * jmul(sym, inv_vol, 3), 3, True)


def cotton_divergence(frame: PointFrame) -> np.ndarray:
    """``D_K C^{KL}`` from exact jets; needs a frame of order 4."""
    if frame.order < 4:
        raise GeometryError("exact Cotton divergence needs order-4 jets")
    dc = covariant_derivative(frame, cotton(frame)).values  # [M, K, L]
    return np.einsum("kkl->l", dc)


def conformal_rescale(spec: MetricSpec, sigma) -> MetricSpec:
    """Multiply every component by ``exp(2 sigma)`` as an expression tree."""
    if isinstance(sigma, str):
        sigma = parse_expression(sigma, spec.coord_names, spec.params)
    elif isinstance(sigma, ScalarSpec):
        sigma = sigma.expr
    if not isinstance(sigma, Expr):
        raise TypeError("sigma must be an expression, ScalarSpec or source string")
    if is_zero(sigma):
        return spec
    factor = Call("exp", mul(Num(2.0), sigma))
    comps = {k: mul(factor, e) for k, e in spec.components.items()}
    return replace(spec, components=comps)


def cs_density_3d(frame: PointFrame) -> float:
    """Pointwise Chern-Simons integrand (a density: no ``sqrt g`` factor).

    ``eps^{KLM} (1/2 G^R_{KS} d_L G^S_{MR} + 1/3 G^R_{KS} G^S_{LT} G^T_{MR})``.
    Not a scalar: it changes under coordinate changes, e.g. flat space in a
    curvilinear chart gives a nonzero value.
    """
    if frame.dim != 3:
        raise GeometryError("the Chern-Simons density is 3-dimensional")
    if frame.order < 2:
        raise GeometryError("the Chern-Simons density needs order >= 2")
    conn = frame.christoffel.data
    sp = space_of(3, conn)
    gam = conn[..., 0]
    dgam = sp.grad(conn)[..., 0]  # [L, S, M, R]
    eps = permutation_symbol(3)
    quad = np.einsum("klm,rks,lsmr->", eps, gam, dgam)
    cubic = np.einsum("klm,rks,slt,tmr->", eps, gam, gam, gam)
    return float(0.5 * quad + cubic / 3.0)


def reduced_cs_density_2d(frame: PointFrame, f, curvature_sign: int = cv.CURVATURE_SIGN_2D,
                          allow_euclidean: bool = False) -> float:
    """``-(1/8 pi^2) sqrt(-g) (f r + f^3)`` for a 2D frame and scalar ``f``.

    ``curvature_sign`` converts the library's Ricci scalar to the sign used by
    the reduced equations (see :mod:`kkweyl.conventions`).
    """
    if frame.dim != 2:
        raise GeometryError("the reduced density lives in 2 dimensions")
    if frame.det_sign > 0 and not allow_euclidean:
        raise GeometryError("sqrt(-g) needs a Lorentzian 2-metric (det < 0)")
    fv = float(np.asarray(f)[..., 0]) if np.ndim(f) else float(f)
    r = curvature_sign * float(frame.ricci[1].values)
    return -(fv * r + fv**3) * frame.volume / (8 * math.pi**2)


# -- flatness reports ---------------------------------------------------------

POINT_ERRORS = (GeometryError, EvaluationError, JetError, np.linalg.LinAlgError)


@dataclass
class ConformalReport:
    tensor: str
    tolerance: float
    residuals: list = field(default_factory=list)  # (point, normalized residual)
    skipped: list = field(default_factory=list)  # (point, reason)

    @property
    def max_residual(self) -> float:
        return max((r for _, r in self.residuals), default=float("nan"))

    @property
    def flat(self) -> bool:
        return bool(self.residuals) and all(r < self.tolerance for _, r in self.residuals)


def conformal_residual(frame: PointFrame) -> float:
    """Max |Weyl| (4D) or |Cotton| (3D) normalised by ``max|Riemann| + 1``."""
    if frame.dim == 4:
        c = weyl(frame)
    elif frame.dim == 3:
        c = cotton(frame)
    else:
        raise GeometryError("all 2-dimensional spaces are locally conformally flat; "
                            "there is no conformal tensor to evaluate")
    return c.max_abs() / frame.riemann_scale


def conformal_report(spec: MetricSpec, points, tolerance: float = 1e-8) -> ConformalReport:
    if spec.dim == 2:
        raise GeometryError("all 2-dimensional spaces are locally conformally flat; "
                            "there is no conformal tensor to evaluate")
    report = ConformalReport("weyl" if spec.dim == 4 else "cotton", tolerance)
    order = 2 if spec.dim == 4 else 3
    for p in points:
        try:
            frame = build_frame(spec, p, order)
            report.residuals.append((tuple(p), conformal_residual(frame)))
        except POINT_ERRORS as exc:
            report.skipped.append((tuple(p), str(exc)))
    return report


def cotton_divergence_fd(spec: MetricSpec, point, step: float = 1e-4) -> np.ndarray:
    """``D_K C^{KL}`` with ``d_K C`` from central differences across nearby points."""
    point = np.asarray(point, dtype=float)
    frame = build_frame(spec, point, 3)
    c0 = cotton(frame).values
    dc = np.zeros((3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = step
        cp = cotton(build_frame(spec, point + e, 3)).values
        cm = cotton(build_frame(spec, point - e, 3)).values
        dc[k] = (cp - cm) / (2 * step)
    gam = frame.christoffel.values
    return (np.einsum("kkl->l", dc) + np.einsum("kkm,ml->l", gam, c0)
            + np.einsum("lkm,km->l", gam, c0))
