"""Embedding equations, the static circularly symmetric solutions and the kinks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import conventions as cv
from .conformal import POINT_ERRORS
from .curvature import PointFrame, build_frame, change_variance, covariant_derivative
from .dsl import MetricFile, MetricSpec, ScalarSpec, VectorSpec, evaluate_field, parse_metric_file
from .jets import jet_apply, jet_coordinate
from .tensors import TensorValue, jmul, permutation_symbol

FIXTURES = ("minkowski4", "conformally_flat4", "conformally_flat3", "generic4", "sphere2",
            "sphere3", "solution_a", "solution_b", "solution_b_euclidean", "static2d",
            "kk_generic3", "kk_generic2")


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("kkweyl.fixtures").joinpath(f"{name}.metric").read_text("utf-8")


def load_fixture(name: str, **params) -> MetricFile:
    mf = parse_metric_file(fixture_text(name))
    return mf.with_params(**params) if params else mf


# -- 3D embedding equations -----------------------------------------------------------

def _frame(metric: MetricSpec, point, order: int) -> PointFrame:
    # solution charts may flip the signature for some parameter values (e.g. a < 0)
    return build_frame(metric, point, order, check_signature=False)


def _vector(frame: PointFrame, vec: VectorSpec) -> TensorValue:
    return TensorValue("u", evaluate_field(vec, frame.point, frame.order), frame.dim, True)


def residual_traceless(metric: MetricSpec, f_vec: VectorSpec, point) -> np.ndarray:
    """``r^{mn} - g^{mn} r/3 - f^m f^n + g^{mn} f^a f_a / 3``."""
    frame = _frame(metric, point, 2)
    gi, g = frame.inverse, frame.metric
    ric, scal = frame.ricci
    f = _vector(frame, f_vec).values
    f2 = float(f @ g @ f)
    return gi @ ric.values @ gi - gi * float(scal.values) / 3 - np.outer(f, f) + gi * f2 / 3


def residual_killing(metric: MetricSpec, vec: VectorSpec, point) -> np.ndarray:
    """``d_m v_n + d_n v_m`` of the lowered vector."""
    frame = _frame(metric, point, 1)
    low = change_variance(frame, _vector(frame, vec), 0, "l")
    d = covariant_derivative(frame, low).values
    return d + d.T


def dual_killing(metric: MetricSpec, f_vec: VectorSpec, point, order: int = 2) -> TensorValue:
    """``F^m = eps^{mnl} d_n f_l / sqrt g`` (jets of order ``order - 1``)."""
    frame = _frame(metric, point, order)
    low = change_variance(frame, _vector(frame, f_vec), 0, "l")
    d = covariant_derivative(frame, low).data  # [n, l]
    raw = np.einsum("mnl,nl...->m...", permutation_symbol(3), d)
    inv_vol = frame.space.reciprocal(frame.sqrt_det)
    return TensorValue("u", jmul(raw, inv_vol, 3), 3, True)


def dual_killing_residual(metric: MetricSpec, f_vec: VectorSpec, point) -> np.ndarray:
    """Killing residual of ``F`` itself, from exact jets of ``F``."""
    frame = _frame(metric, point, 3)
    fvec = dual_killing(metric, f_vec, point, order=3)
    low = change_variance(frame, fvec, 0, "l")
    d = covariant_derivative(frame, low).values
    return d + d.T


def proportionality(vec: np.ndarray, target) -> tuple[float, float]:
    """``(ratio, off)`` with ``vec ~ ratio * target``; ``off`` is the orthogonal remainder."""
    target = np.asarray(target, dtype=float)
    ratio = float(vec @ target / (target @ target))
    return ratio, float(np.max(np.abs(vec - ratio * target)))


@dataclass
class ConstancyReport:
    values: list = field(default_factory=list)  # (point, value)
    skipped: list = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean([v for _, v in self.values])) if self.values else float("nan")

    @property
    def deviation(self) -> float:
        if not self.values:
            return float("nan")
        return max(abs(v - self.mean) for _, v in self.values)


def constraint_r_5f2(metric: MetricSpec, f_vec: VectorSpec, points) -> ConstancyReport:
    """``r + 5 f^a f_a`` across samples; constant on solutions."""
    rep = ConstancyReport()
    for p in points:
        try:
            frame = _frame(metric, p, 2)
            f = _vector(frame, f_vec).values
            val = float(frame.ricci[1].values) + 5 * float(f @ frame.metric @ f)
        except POINT_ERRORS as exc:
            rep.skipped.append((tuple(p), str(exc)))
            continue
        rep.values.append((tuple(p), val))
    return rep


# -- 2D embedding equations -----------------------------------------------------------

@dataclass(frozen=True)
class Embedding2D:
    traceless: np.ndarray  # (d_m d_n - g_mn d^2 / 2) f
    trace: float  # d^2 f - 2 f^3 - r f
    constraint: float  # r + 3 f^2 (constant c)
    combined: float  # d^2 f + f^3 - c f
    r: float  # sign of the reduced equations
    f: float
    laplacian: float

    def combined_with(self, c: float) -> float:
        return self.laplacian + self.f**3 - c * self.f


def residual_embedding_2d(metric: MetricSpec, f: ScalarSpec, point, c: float | None = None) -> Embedding2D:
    """Residuals of the 2D embedding equations; ``c`` defaults to ``r + 3 f^2`` here."""
    frame = _frame(metric, point, 2)
    fj = evaluate_field(f, frame.point, 2)[0]
    d1 = covariant_derivative(frame, TensorValue("", fj, 2, True))
    dd = covariant_derivative(frame, d1).values
    lap = float(np.einsum("mn,mn->", frame.inverse, dd))
    f0 = float(fj[0])
    r = cv.CURVATURE_SIGN_2D * float(frame.ricci[1].values)
    const = r + 3 * f0**2
    c = const if c is None else c
    return Embedding2D(dd - frame.metric * lap / 2, lap - 2 * f0**3 - r * f0, const,
                       lap + f0**3 - c * f0, r, f0, lap)


@dataclass
class Embedding2DReport:
    records: list = field(default_factory=list)  # (point, Embedding2D)
    skipped: list = field(default_factory=list)

    @property
    def c(self) -> float:
        return float(np.mean([e.constraint for _, e in self.records])) if self.records else float("nan")

    @property
    def max_traceless(self) -> float:
        return max((float(np.max(np.abs(e.traceless))) for _, e in self.records), default=float("nan"))

    @property
    def max_trace(self) -> float:
        return max((abs(e.trace) for _, e in self.records), default=float("nan"))

    @property
    def constraint_deviation(self) -> float:
        return max((abs(e.constraint - self.c) for _, e in self.records), default=float("nan"))

    @property
    def max_combined(self) -> float:
        """``d^2 f + f^3 - c f`` with ``c`` the mean over samples."""
        c = self.c
        return max((abs(e.combined_with(c)) for _, e in self.records), default=float("nan"))


def embedding_2d_report(metric: MetricSpec, f: ScalarSpec, points) -> Embedding2DReport:
    rep = Embedding2DReport()
    for p in points:
        try:
            e = residual_embedding_2d(metric, f, p)
        except POINT_ERRORS as exc:
            rep.skipped.append((tuple(p), str(exc)))
            continue
        rep.records.append((tuple(p), e))
    return rep


# -- kinks ----------------------------------------------------------------------------

def kink_profile(c: float, x: float) -> tuple[float, float]:
    """``f = sqrt(c) tanh(sqrt(c) x / 2)``, ``r = 2c + 3c / cosh^2(sqrt(c) x / 2)``."""
    if c <= 0:
        raise ValueError("the kink needs c > 0")
    u = math.sqrt(c) * x / 2
    return math.sqrt(c) * math.tanh(u), 2 * c + 3 * c / math.cosh(u) ** 2


@dataclass
class KinkReport:
    c: float
    constants: list  # (x, r + 3 f^2)
    f_at_zero: float
    limits: tuple  # (f(-inf), f(+inf), r(+inf)) from large |x|
    vacuum: dict  # f = sqrt(c): r under both readings

    @property
    def constant(self) -> float:
        return float(np.mean([k for _, k in self.constants]))

    @property
    def deviation(self) -> float:
        return max(abs(k - self.constant) for _, k in self.constants)

    @property
    def ratio(self) -> float:
        """Constant in ``r = -3 f^2 + K`` divided by c (5 for the displayed kink)."""
        return self.constant / self.c

    @property
    def note(self) -> str:
        return (f"r + 3 f^2 = {self.constant:.12g} = {self.ratio:.12g} c, not c: the kink profile "
                "and the constraint r = -3 f^2 + c disagree by a constant (and the vacuum "
                "r = 2c matches r = -3 f^2 + 5c, while r = -3 f^2 + c gives -2c)")


def kink_relation_check(c: float, points) -> KinkReport:
    if c <= 0:
        raise ValueError("the kink needs c > 0")
    consts = []
    for x in points:
        f, r = kink_profile(c, float(x))
        consts.append((float(x), r + 3 * f * f))
    big = 80.0 / math.sqrt(c)
    lim = (kink_profile(c, -big)[0], kink_profile(c, big)[0], kink_profile(c, big)[1])
    vac = {"r_vacuum": 2 * c, "minus3f2_plus_5c": -3 * c + 5 * c, "minus3f2_plus_c": -3 * c + c}
    return KinkReport(c, consts, kink_profile(c, 0.0)[0], lim, vac)


@dataclass
class FlatKinkReport:
    c: float
    residuals: list  # (x, -psi'' + psi^3 - c psi)
    curved_scale: float  # coefficient of x inside tanh for the curved kink
    flat_scale: float

    @property
    def max_residual(self) -> float:
        return max(abs(r) for _, r in self.residuals)

    @property
    def note(self) -> str:
        return (f"curved kink tanh(sqrt(c) x / 2), flat kink tanh(sqrt(c/2) x): "
                f"scales {self.curved_scale:.12g} vs {self.flat_scale:.12g}, ratio "
                f"{self.flat_scale / self.curved_scale:.12g} = sqrt(2)")


def flat_kink_check(c: float, points) -> FlatKinkReport:
    """``psi = sqrt(c) tanh(sqrt(c/2) x)`` against ``-psi'' + psi^3 - c psi = 0`` via jets."""
    if c <= 0:
        raise ValueError("the kink needs c > 0")
    k = math.sqrt(c / 2)
    res = []
    for x in points:
        xj = jet_coordinate(0, (float(x),), 1, 2)
        psi = math.sqrt(c) * jet_apply("tanh", k * xj)
        d2 = psi.derivative((2,))
        p0 = psi.value
        res.append((float(x), -d2 + p0**3 - c * p0))
    return FlatKinkReport(c, res, math.sqrt(c) / 2, k)
