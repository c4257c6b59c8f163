"""Kaluza-Klein lift and the reduced Weyl (4 -> 3) and Cotton (3 -> 2) formulas.

The lifted metric is

    g_MN = exp(2 sigma) [[g_mn - a_m a_n, -a_m], [-a_n, -1]]

with the fibre coordinate appended last and nothing depending on it.  A
fibre sign ``s = +1`` gives ``[[g + a a, a], [a, 1]]`` instead; the reduced
formulas below are for the default ``s = -1``.  Greek
indices below run over the base; ``-`` denotes the fibre slot.  The reduced
formulas are evaluated from base data only, so they never see sigma; the
direct tensors of the lift agree after multiplying by ``exp(w sigma)`` with the
weights in :mod:`kkweyl.conventions`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conventions as cv
from .conformal import cotton, weyl
from .curvature import (GeometryError, PointFrame, build_frame, change_variance,
                        covariant_derivative, levi_civita_dual)
from .dsl import (ONE, ZERO, BinOp, Call, Coord, CovectorSpec, Expr, Integral, MetricFile,
                  MetricSpec, Neg, Num, ScalarSpec, add, evaluate, evaluate_field, identifiers,
                  is_zero, mul, sub, zero_covector, zero_scalar)
from .jets import space, space_of
from .tensors import TensorValue, jmul, permutation_symbol

COMPLETION_TOL = 1e-10


@dataclass(frozen=True)
class KKData:
    """Base metric, potential a_mu and conformal factor sigma."""

    base: MetricSpec
    potential: CovectorSpec
    sigma: ScalarSpec
    fibre: str = cv.FIBRE_COORD
    fibre_sign: int = -1

    def __post_init__(self):
        if self.fibre_sign not in (-1, 1):
            raise ValueError("fibre_sign must be -1 or +1")
        if self.base.dim not in (2, 3):
            raise ValueError("the base of a reduction must be 2- or 3-dimensional")
        for blk in (self.potential, self.sigma):
            if tuple(blk.coord_names) != tuple(self.base.coord_names):
                raise ValueError("potential and sigma must share the base coordinates")
        if len(self.potential.exprs) != self.base.dim:
            raise ValueError("potential needs one component per base coordinate")
        if self.fibre in self.base.coord_names:
            raise ValueError(f"fibre coordinate {self.fibre!r} clashes with a base coordinate")

    @property
    def n(self) -> int:
        return self.base.dim + 1

    @classmethod
    def from_file(cls, mf: MetricFile) -> "KKData":
        base = mf.metric
        pot = mf.potential if mf.potential is not None else zero_covector(base)
        sig = mf.conformal if mf.conformal is not None else zero_scalar(base)
        fibre = cv.FIBRE_COORD
        while fibre in base.coord_names:
            fibre += "_"
        return cls(base, pot, sig, fibre)

    @classmethod
    def trivial(cls, base: MetricSpec) -> "KKData":
        return cls(base, zero_covector(base), zero_scalar(base))

    def with_potential(self, exprs) -> "KKData":
        pot = CovectorSpec(tuple(exprs), self.base.coord_names, dict(self.base.params))
        return KKData(self.base, pot, self.sigma, self.fibre, self.fibre_sign)

    def with_sigma(self, expr: Expr) -> "KKData":
        sig = ScalarSpec((expr,), self.base.coord_names, dict(self.base.params))
        return KKData(self.base, self.potential, sig, self.fibre, self.fibre_sign)

    def with_fibre_sign(self, sign: int) -> "KKData":
        return KKData(self.base, self.potential, self.sigma, self.fibre, sign)


def lift_metric(kk: KKData) -> MetricSpec:
    """The n-dimensional metric as expression trees."""
    d = kk.base.dim
    a = kk.potential.exprs
    sig = kk.sigma.expr
    factor = ONE if is_zero(sig) else Call("exp", mul(Num(2.0), sig))
    plus = kk.fibre_sign > 0
    comps = {}
    for i in range(d):
        for j in range(i, d):
            aa = mul(a[i], a[j])
            g = kk.base.component(i, j)
            comps[(i, j)] = mul(factor, add(g, aa) if plus else sub(g, aa))
        if not is_zero(a[i]):
            comps[(i, d)] = mul(factor, a[i] if plus else Neg(a[i]))
    comps[(d, d)] = factor if plus else Neg(factor)
    params = {**kk.base.params, **kk.potential.params, **kk.sigma.params}
    return MetricSpec(d + 1, kk.base.signature + (kk.fibre_sign,), kk.base.coord_names + (kk.fibre,),
                      comps, params)


def lifted_metric_values(kk: KKData, point) -> np.ndarray:
    """Numeric lift at ``point`` with sigma = 0 (enough for trace constraints)."""
    d = kk.base.dim
    pt = tuple(point)[:d]
    g = np.array(build_frame(kk.base, pt, 0, check_signature=False).metric)
    a = evaluate_field(kk.potential, pt, 0)[:, 0]
    s = float(kk.fibre_sign)
    out = np.empty((d + 1, d + 1))
    out[:d, :d] = g + s * np.outer(a, a)
    out[:d, d] = out[d, :d] = s * a
    out[d, d] = s
    return out


# -- field strength and its duals ------------------------------------------------

def _potential_jets(kk: KKData, point, order: int) -> np.ndarray:
    return evaluate_field(kk.potential, tuple(point)[: kk.base.dim], order)


def field_strength(kk: KKData, point, order: int = 3) -> TensorValue:
    """``f_mn = d_m a_n - d_n a_m`` with jets of order ``order - 1``."""
    aj = _potential_jets(kk, point, order)
    da = space(kk.base.dim, order).grad(aj)  # da[m, n] = d_m a_n
    return TensorValue("ll", da - np.swapaxes(da, 0, 1), kk.base.dim, True)


def _base_frame(kk: KKData, point, order: int) -> PointFrame:
    return build_frame(kk.base, tuple(point)[: kk.base.dim], order)


def dual_field_3d(kk: KKData, point, order: int = 3, frame: PointFrame | None = None) -> TensorValue:
    """``f^m = eps^{mab} f_ab / (2 sqrt g)``."""
    if kk.base.dim != 3:
        raise GeometryError("dual_field_3d needs a 3-dimensional base")
    frame = frame or _base_frame(kk, point, order)
    return levi_civita_dual(frame, field_strength(kk, point, frame.order), "3d-vector-from-2form")


def dual_field_2d(kk: KKData, point, order: int = 3, frame: PointFrame | None = None) -> TensorValue:
    """``f = eps^{mn} f_mn / (2 sqrt(-g))``."""
    if kk.base.dim != 2:
        raise GeometryError("dual_field_2d needs a 2-dimensional base")
    frame = frame or _base_frame(kk, point, order)
    return levi_civita_dual(frame, field_strength(kk, point, frame.order), "2d-scalar-from-2form")


# -- inverting the dual under a static, circularly symmetric ansatz ------------------

def _radial_index(base: MetricSpec) -> int:
    off = [k for k in base.components if k[0] != k[1]]
    if off:
        raise GeometryError("potential_from_dual needs a diagonal base metric")
    deps = set()
    for e in base.components.values():
        deps |= identifiers(e) & set(base.coord_names)
    if len(deps) > 1:
        raise GeometryError(f"metric depends on several coordinates {sorted(deps)}; "
                            "the ansatz needs a single radial coordinate")
    if not deps:
        return 1 if base.dim > 1 else 0
    return base.coord_names.index(deps.pop())


def _volume_expr(base: MetricSpec, r: int, at: float) -> Expr:
    """``sqrt |det g|`` with the sign read off at radius ``at`` (charts may flip it)."""
    prod = ONE
    for i in range(base.dim):
        prod = mul(prod, base.component(i, i))
    sp0 = space(base.dim, 0)
    pt = np.zeros(base.dim)
    pt[r] = at
    try:
        det = float(evaluate(prod, sp0, sp0.coordinates(pt), base.params)[0])
    except (ValueError, ArithmeticError):
        det = -1.0 if base.minus_count % 2 else 1.0
    return Call("sqrt", prod if det > 0 else Neg(prod))


def _poly_expr(coeffs, var: Coord) -> Expr:
    out = ZERO
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        term = Num(float(c)) if k == 0 else mul(Num(float(c)), var if k == 1 else BinOp("^", var, Num(float(k))))
        out = term if is_zero(out) else BinOp("+", out, term)
    return out


def _polynomial_fit(f, lo: float, hi: float, max_degree: int = 8):
    """Coefficients of a polynomial matching ``f`` on [lo, hi] or ``None``."""
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.linspace(0, math.pi, 41))
    vals = np.array([f(x) for x in nodes])
    scale = float(np.max(np.abs(vals))) + 1.0
    for deg in range(max_degree + 1):
        coef = np.polynomial.polynomial.polyfit(nodes, vals, deg)
        # snap to a short decimal so the expression prints cleanly
        coef = np.round(coef, 9)
        if np.max(np.abs(np.polynomial.polynomial.polyval(nodes, coef) - vals)) < 1e-11 * scale:
            return coef
    return None


def potential_from_dual(base: MetricSpec, target, lower: float | None = None,
                        domain: tuple[float, float] | None = None) -> CovectorSpec:
    """A potential whose 3D dual is the constant vector ``target``.

    ``target`` has one nonzero constant component ``k`` in a non-radial slot
    ``m``.  With a single radial coordinate ``r``, the ansatz ``a_b(r)`` for the
    remaining slot ``b`` gives ``f^m = eps^{m r b} a_b' / sqrt g``, hence
    ``a_b = k eps^{m r b} int sqrt g dr``.  The antiderivative is returned in
    closed form when ``sqrt g`` is a parameter-independent polynomial over
    ``domain``; otherwise as an ``integral(...)`` node starting at ``lower``.
    """
    if base.dim != 3:
        raise GeometryError("potential_from_dual works on 3-dimensional bases")
    target = [float(x) for x in target]
    if len(target) != 3:
        raise ValueError("target needs three components")
    nonzero = [i for i, v in enumerate(target) if v != 0.0]
    if not nonzero:
        return zero_covector(base)
    r = _radial_index(base)
    if len(nonzero) > 1 or nonzero[0] == r:
        raise GeometryError("target must have a single nonzero, non-radial component")
    m = nonzero[0]
    b = 3 - m - r
    k = float(target[m] * permutation_symbol(3)[m, r, b])
    var = Coord(base.coord_names[r], r)
    lo, hi = domain or (0.5, 2.0)
    vol = _volume_expr(base, r, 0.5 * (lo + hi))
    sp0 = space(3, 0)

    def sqrt_g(x, params):
        pt = np.zeros(3)
        pt[r] = x
        return evaluate(vol, sp0, sp0.coordinates(pt), params)[0]

    antider = None
    try:
        coef = _polynomial_fit(lambda x: sqrt_g(x, base.params), lo, hi)
        if coef is not None and base.params:
            shifted = {p: v * 1.1 + 0.05 for p, v in base.params.items()}
            other = _polynomial_fit(lambda x: sqrt_g(x, shifted), lo, hi)
            if other is None or not np.allclose(other, coef, atol=1e-9):
                coef = None
        if coef is not None:
            integ = np.concatenate([[0.0], coef / np.arange(1, len(coef) + 1)])
            antider = _poly_expr(k * integ, var)
    except (ValueError, ArithmeticError):
        antider = None
    if antider is None:
        start = lo if lower is None else lower
        antider = Integral(vol, var, float(start))
        antider = antider if k == 1.0 else mul(Num(k), antider)
    exprs = [ZERO] * 3
    exprs[b] = antider
    return CovectorSpec(tuple(exprs), base.coord_names, dict(base.params))


# -- traceless completion -----------------------------------------------------------

def _weyl_basis(n: int, unknown_pairs):
    """Unit tensors with Weyl symmetries for C^{-l-n} = M[l, n] (symmetric)."""
    f = n - 1
    basis = []
    for lam, nu in unknown_pairs:
        e = np.zeros((n,) * 4)
        for p, q in {(lam, nu), (nu, lam)}:
            e[f, p, f, q] = 1.0
            e[p, f, f, q] = -1.0
            e[f, p, q, f] = -1.0
            e[p, f, q, f] = 1.0
        basis.append(e)
    return basis


def _weyl_traces(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.einsum("km,klmn->ln", g, t)


def traceless_completion(partial: np.ndarray, metric: np.ndarray, pattern: str) -> TensorValue:
    """Fill the components with two or more fibre indices from tracelessness.

    ``partial`` is the full array; entries with two or more fibre indices are
    ignored and recomputed.  ``metric`` is the lifted metric (lower indices)
    at the point; any conformal factor drops out.  Raises
    :class:`GeometryError` when the remaining trace constraints cannot all be
    met, which means the supplied components are not those of a traceless
    tensor.
    """
    partial = np.asarray(partial, dtype=float)
    g = np.asarray(metric, dtype=float)
    n = g.shape[0]
    f = n - 1
    if pattern == "cotton-3d":
        if n != 3 or partial.shape != (3, 3):
            raise ValueError("cotton-3d completion needs a 3x3 tensor")
        t = partial.copy()
        t[f, f] = 0.0
        basis = [np.zeros((3, 3))]
        basis[0][f, f] = 1.0
        traces = lambda x: np.array([np.einsum("kl,kl->", g, x)])  # noqa: E731
        variance = "uu"
    elif pattern == "weyl-4d":
        if n != 4 or partial.shape != (4,) * 4:
            raise ValueError("weyl-4d completion needs a 4x4x4x4 tensor")
        t = partial.copy()
        idx = np.indices(t.shape)
        t[(idx == f).sum(axis=0) >= 2] = 0.0
        pairs = [(i, j) for i in range(f) for j in range(i, f)]
        basis = _weyl_basis(n, pairs)
        traces = lambda x: _weyl_traces(x, g).ravel()  # noqa: E731
        variance = "uuuu"
    else:
        raise ValueError(f"unknown completion pattern {pattern!r}")
    rhs = -traces(t)
    mat = np.stack([traces(e) for e in basis], axis=1)
    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    full = t + sum(c * e for c, e in zip(sol, basis))
    scale = float(np.max(np.abs(partial))) + 1.0
    bad = float(np.max(np.abs(traces(full))))
    if bad > COMPLETION_TOL * scale * 1e2:
        raise GeometryError(f"inconsistent trace constraints (residual {bad:.3g}); "
                            "supplied components are not traceless-completable")
    return TensorValue(variance, full, n)


# -- 4 -> 3 -------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedWeyl4to3:
    point: tuple
    f: np.ndarray  # f^m
    c: np.ndarray  # c^{mn}
    weyl3: np.ndarray  # C^{mnlt}, base range
    minus: np.ndarray  # C^{-lmn} as [l, m, n]
    full: np.ndarray  # completed 4D tensor


def _weyl_from_c(gi: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``C^{mnlt} = g^{ml} c^{tn} - g^{mt} c^{ln} - g^{nl} c^{tm} + g^{nt} c^{lm}``."""
    return (np.einsum("ml,tn->mnlt", gi, c) - np.einsum("mt,ln->mnlt", gi, c)
            - np.einsum("nl,tm->mnlt", gi, c) + np.einsum("nt,lm->mnlt", gi, c))


def reduced_weyl_4to3(kk: KKData, point, minus_factor: float = cv.WEYL_MINUS_EPS_FACTOR) -> ReducedWeyl4to3:
    """Weyl tensor of the 4D lift from 3D data only.

    ``c^{mn} = 1/2 (r^{mn} - g^{mn} r/3 - f^m f^n + g^{mn} f^2/3)`` with
    ``f^2 = f^a f_a``, the base-range block from ``c`` and
    ``C^{-lmn} = k eps^{mnt} (d^l f_t + d_t f^l) / sqrt g - a_t C^{tlmn}`` with
    ``k = minus_factor``.
    """
    _require_default_fibre(kk)
    if kk.n != 4:
        raise GeometryError("reduced_weyl_4to3 needs a 3-dimensional base")
    pt = tuple(float(x) for x in point)[:3]
    frame = _base_frame(kk, pt, 2)
    gi, g = frame.inverse, frame.metric
    ric, scal = frame.ricci
    r_up = gi @ ric.values @ gi
    r = float(scal.values)
    fu = dual_field_3d(kk, pt, frame=frame)
    fv = fu.values
    f2 = float(fv @ g @ fv)
    c = 0.5 * (r_up - gi * r / 3 - np.outer(fv, fv) + gi * f2 / 3)
    c9 = _weyl_from_c(gi, c)
    f_low = change_variance(frame, fu, 0, "l")
    df = covariant_derivative(frame, f_low).values  # df[w, t] = D_w f_t
    sym = np.einsum("lw,wt->lt", gi, df) + np.einsum("lk,tk->lt", gi, df)
    a0 = _potential_jets(kk, pt, 0)[:, 0]
    eps = permutation_symbol(3)
    minus = (minus_factor * np.einsum("mnt,lt->lmn", eps, sym) / frame.volume
             - np.einsum("t,tlmn->lmn", a0, c9))
    partial = np.zeros((4,) * 4)
    partial[:3, :3, :3, :3] = c9
    partial[3, :3, :3, :3] = minus
    partial[:3, 3, :3, :3] = -minus
    partial[:3, :3, 3, :3] = np.einsum("lmn->mnl", minus)
    partial[:3, :3, :3, 3] = -np.einsum("lmn->mnl", minus)
    full = traceless_completion(partial, lifted_metric_values(kk, pt), "weyl-4d").values
    return ReducedWeyl4to3(pt, fv, c, c9, minus, full)


# -- 3 -> 2 -------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedCotton3to2:
    point: tuple
    f: float
    r: float  # reduced-equation sign, see conventions.CURVATURE_SIGN_2D
    C_lower: np.ndarray  # C_mn in the printed form
    C_upper: np.ndarray  # normalised to the lift's Cotton
    minus: np.ndarray  # C^{-m}
    full: np.ndarray  # completed 3D tensor


def reduced_cotton_3to2(kk: KKData, point, factor: float = cv.COTTON_3TO2_FACTOR,
                        minus_factor: float = cv.COTTON_MINUS_EPS_FACTOR) -> ReducedCotton3to2:
    """Cotton tensor of the 3D lift from 2D data only.

    ``C_mn = g_mn (d^2 f - f^3 - r f / 2) - d_m d_n f`` (``r`` with the sign of
    the reduced equations), ``C^{mn} = factor * g^{ma} g^{nb} C_ab`` and
    ``C^{-m} = minus_factor * eps^{mn} d_n (r + 3 f^2) / sqrt(-g) - a_n C^{mn}``.
    """
    _require_default_fibre(kk)
    if kk.n != 3:
        raise GeometryError("reduced_cotton_3to2 needs a 2-dimensional base")
    pt = tuple(float(x) for x in point)[:2]
    frame = _base_frame(kk, pt, 3)
    gi, g = frame.inverse, frame.metric
    fj = dual_field_2d(kk, pt, frame=frame).data  # order 2
    d1 = covariant_derivative(frame, TensorValue("", fj, 2, True))
    dd = covariant_derivative(frame, d1).values
    lap = float(np.einsum("mn,mn->", gi, dd))
    f0 = float(fj[0])
    rj = cv.CURVATURE_SIGN_2D * frame.ricci[1].data  # order 1
    r = float(rj[0])
    c_low = g * (lap - f0**3 - 0.5 * r * f0) - dd
    c_up = factor * gi @ c_low @ gi
    q = rj + 3.0 * jmul(fj, fj, 2)[: rj.shape[-1]]
    dq = space_of(2, q).grad(q)[:, 0]
    a0 = _potential_jets(kk, pt, 0)[:, 0]
    minus = minus_factor * permutation_symbol(2) @ dq / frame.volume - c_up @ a0
    partial = np.zeros((3, 3))
    partial[:2, :2] = c_up
    partial[2, :2] = partial[:2, 2] = minus
    full = traceless_completion(partial, lifted_metric_values(kk, pt), "cotton-3d").values
    return ReducedCotton3to2(pt, f0, r, c_low, c_up, minus, full)


# -- cross-validation against the lift -------------------------------------------------

def _lift_point(kk: KKData, point) -> tuple:
    return tuple(float(x) for x in point)[: kk.base.dim] + (0.0,)


def _sigma_value(kk: KKData, point) -> float:
    pt = tuple(point)[: kk.base.dim]
    sp0 = space(kk.base.dim, 0)
    return float(evaluate(kk.sigma.expr, sp0, sp0.coordinates(pt), kk.sigma.params)[0])


def _require_default_fibre(kk: KKData) -> None:
    if kk.fibre_sign != -1:
        raise GeometryError("the reduced formulas are implemented for fibre sign -1")


def validate_reduction(kk: KKData, point) -> dict:
    """Normalised max differences between reduced formulas and the direct lift.

    Keys: ``"base"`` (pure base-range block), ``"minus"`` (single fibre index),
    ``"completion"`` (the whole completed tensor).  Each difference is divided
    by ``max|Riemann of the lift| + 1``.
    """
    lifted = lift_metric(kk)
    lp = _lift_point(kk, point)
    s = _sigma_value(kk, point)
    if kk.n == 4:
        red = reduced_weyl_4to3(kk, point)
        frame = build_frame(lifted, lp, 2)
        direct = weyl(frame).values * math.exp(cv.WEIGHT_WEYL_4TO3 * s)
        parts = {"base": (red.weyl3, direct[:3, :3, :3, :3]),
                 "minus": (red.minus, direct[3, :3, :3, :3]),
                 "completion": (red.full, direct)}
    else:
        red = reduced_cotton_3to2(kk, point)
        frame = build_frame(lifted, lp, 3)
        direct = cotton(frame).values * math.exp(cv.WEIGHT_COTTON_3TO2 * s)
        parts = {"base": (red.C_upper, direct[:2, :2]),
                 "minus": (red.minus, direct[2, :2]),
                 "completion": (red.full, direct)}
    scale = frame.riemann_scale
    return {k: float(np.max(np.abs(a - b))) / scale for k, (a, b) in parts.items()}
