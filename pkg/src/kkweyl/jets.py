"""Truncated multivariate Taylor arithmetic ("jets").

A jet of a scalar function at a point stores the Taylor-normalised
coefficients ``d^alpha f / alpha!`` for every multi-index ``|alpha| <= order``.
Coefficients are laid out densely in graded-lexicographic order: all degree-0
terms, then degree 1 in coordinate order, then degree 2 in the order produced
by ``itertools.combinations_with_replacement`` and so on.  For three
coordinates at order 2 the layout is::

    1, x0, x1, x2, x0^2, x0 x1, x0 x2, x1^2, x1 x2, x2^2

Because the ordering is graded, truncating a jet to a lower order is a prefix
slice of its coefficient array.

Most of the library works on raw ``numpy`` arrays whose *last* axis holds the
coefficients, so that whole tensors of jets can be multiplied in a single
kernel call.  :class:`Jet` is a thin immutable wrapper for scalar use.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property, lru_cache

import numpy as np

from . import _backend

MAX_ORDER = 4
ZERO_TOL = 1e-12

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt")


class JetError(ValueError):
    """Raised for arithmetic that has no Taylor expansion at the point."""


class JetSpace:
    """Monomial bookkeeping for jets in ``dim`` variables truncated at ``order``."""

    def __init__(self, dim: int, order: int):
        if not 1 <= dim <= 6:
            raise ValueError(f"jet dimension must be in 1..6, got {dim}")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        self.dim = dim
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(dim), deg):
                alpha = [0] * dim
                for c in combo:
                    alpha[c] += 1
                monos.append(tuple(alpha))
        self.monomials: tuple[tuple[int, ...], ...] = tuple(monos)
        self.index = {m: i for i, m in enumerate(monos)}
        self.ncoef = len(monos)

    def __repr__(self) -> str:
        return f"JetSpace(dim={self.dim}, order={self.order})"

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        I, J, K = [], [], []
        for i, a in enumerate(self.monomials):
            for j, b in enumerate(self.monomials):
                s = tuple(x + y for x, y in zip(a, b))
                k = self.index.get(s)
                if k is not None:
                    I.append(i)
                    J.append(j)
                    K.append(k)
        return (np.array(I, dtype=np.intp), np.array(J, dtype=np.intp),
                np.array(K, dtype=np.intp))

    @cached_property
    def factorials(self) -> np.ndarray:
        return np.array([math.prod(math.factorial(k) for k in m) for m in self.monomials],
                        dtype=float)

    @cached_property
    def lower(self) -> "JetSpace":
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        return space(self.dim, self.order - 1)

    @cached_property
    def _deriv_maps(self) -> list[tuple[np.ndarray, np.ndarray]]:
        maps = []
        low = self.lower
        for i in range(self.dim):
            src, fac = [], []
            for beta in low.monomials:
                up = list(beta)
                up[i] += 1
                src.append(self.index[tuple(up)])
                fac.append(beta[i] + 1)
            maps.append((np.array(src, dtype=np.intp), np.array(fac, dtype=float)))
        return maps

    # -- constructors ---------------------------------------------------
    def constant(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.ncoef,))
        out[..., 0] = value
        return out

    def coordinates(self, point) -> np.ndarray:
        """Jets of all coordinate functions at ``point``, shape ``(dim, ncoef)``."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point must have {self.dim} coordinates")
        out = np.zeros((self.dim, self.ncoef))
        out[:, 0] = point
        if self.order >= 1:
            out[np.arange(self.dim), 1 + np.arange(self.dim)] = 1.0
        return out

    # -- arithmetic on coefficient arrays ---------------------------------
    def mul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        a2 = np.ascontiguousarray(np.broadcast_to(a, shape + (self.ncoef,)).reshape(-1, self.ncoef))
        b2 = np.ascontiguousarray(np.broadcast_to(b, shape + (self.ncoef,)).reshape(-1, self.ncoef))
        I, J, K = self.table
        out = _backend.kernels.mul_rows(a2, b2, I, J, K, self.ncoef)
        return np.asarray(out).reshape(shape + (self.ncoef,))

    def compose(self, a, coeffs) -> np.ndarray:
        """Evaluate ``sum_k coeffs[..., k] * (a - a(0))^k`` (Horner)."""
        a = np.asarray(a, dtype=float)
        h = a.copy()
        h[..., 0] = 0.0
        out = self.constant(coeffs[..., self.order])
        for k in range(self.order - 1, -1, -1):
            out = self.mul(out, h)
            out[..., 0] += coeffs[..., k]
        return out

    def reciprocal(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        u0 = a[..., 0]
        if np.any(np.abs(u0) < ZERO_TOL):
            raise JetError("division by a jet with zero value")
        k = np.arange(self.order + 1)
        coeffs = (-1.0) ** k / u0[..., None] ** (k + 1)
        return self.compose(a, coeffs)

    def div(self, a, b) -> np.ndarray:
        return self.mul(a, self.reciprocal(b))

    def ipow(self, a, n: int) -> np.ndarray:
        """Integer power by repeated squaring (valid for any base value)."""
        if n < 0:
            return self.reciprocal(self.ipow(a, -n))
        a = np.asarray(a, dtype=float)
        result = self.constant(np.ones(a.shape[:-1]))
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return result

    def rpow(self, a, p: float) -> np.ndarray:
        """Real constant power; needs a positive base unless ``p`` is integral."""
        if float(p).is_integer():
            return self.ipow(a, int(p))
        a = np.asarray(a, dtype=float)
        u0 = a[..., 0]
        if np.any(u0 <= 0):
            raise JetError(f"non-integer power {p} of a nonpositive value")
        coeffs = np.empty(u0.shape + (self.order + 1,))
        falling = 1.0
        for k in range(self.order + 1):
            coeffs[..., k] = falling * u0 ** (p - k) / math.factorial(k)
            falling *= p - k
        return self.compose(a, coeffs)

    def apply(self, name: str, a) -> np.ndarray:
        """Apply one of the whitelisted elementary functions."""
        a = np.asarray(a, dtype=float)
        if name == "sqrt":
            if np.any(a[..., 0] <= 0):
                raise JetError("sqrt of a nonpositive value")
            return self.rpow(a, 0.5)
        derivs = _derivatives(name, a[..., 0], self.order)
        fact = np.array([math.factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.compose(a, derivs / fact)

    def deriv(self, a, i: int) -> np.ndarray:
        """Partial derivative along coordinate ``i``; result lives in ``self.lower``."""
        src, fac = self._deriv_maps[i]
        return np.asarray(a)[..., src] * fac

    def grad(self, a) -> np.ndarray:
        """All partials stacked on a new leading axis."""
        return np.stack([self.deriv(a, i) for i in range(self.dim)])

    def truncate(self, a, order: int) -> np.ndarray:
        return np.asarray(a)[..., : space(self.dim, order).ncoef]

    def derivatives(self, a) -> np.ndarray:
        """Raw partial derivatives ``d^alpha f`` from Taylor coefficients."""
        return np.asarray(a) * self.factorials

    def from_derivatives(self, d) -> np.ndarray:
        return np.asarray(d, dtype=float) / self.factorials


@lru_cache(maxsize=None)
def space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


def order_of(dim: int, ncoef: int) -> int:
    for order in range(MAX_ORDER + 1):
        if math.comb(dim + order, order) == ncoef:
            return order
    raise ValueError(f"{ncoef} coefficients is not a jet size in dimension {dim}")


def space_of(dim: int, a) -> JetSpace:
    return space(dim, order_of(dim, np.shape(a)[-1]))


def align(dim: int, *arrays):
    """Truncate coefficient arrays to their common (lowest) order."""
    n = min(np.shape(x)[-1] for x in arrays)
    return space_of(dim, np.empty(n)), [np.asarray(x)[..., :n] for x in arrays]


# -- univariate derivative tables ------------------------------------------

@lru_cache(maxsize=None)
def _tan_polys(sign: int) -> tuple[np.ndarray, ...]:
    # d/du P(t) = P'(t) * (1 + sign * t^2) for t = tan u (sign=+1) or tanh u (-1)
    polys = [np.polynomial.Polynomial([0.0, 1.0])]
    factor = np.polynomial.Polynomial([1.0, 0.0, float(sign)])
    for _ in range(MAX_ORDER):
        polys.append(polys[-1].deriv() * factor)
    return tuple(p.coef for p in polys)


def _derivatives(name: str, u0: np.ndarray, order: int) -> np.ndarray:
    out = np.empty(u0.shape + (order + 1,))
    if name == "exp":
        e = np.exp(u0)
        for k in range(order + 1):
            out[..., k] = e
    elif name in ("sin", "cos"):
        s, c = np.sin(u0), np.cos(u0)
        cycle = [s, c, -s, -c] if name == "sin" else [c, -s, -c, s]
        for k in range(order + 1):
            out[..., k] = cycle[k % 4]
    elif name in ("sinh", "cosh"):
        s, c = np.sinh(u0), np.cosh(u0)
        pair = [s, c] if name == "sinh" else [c, s]
        for k in range(order + 1):
            out[..., k] = pair[k % 2]
    elif name in ("tan", "tanh"):
        if name == "tan" and np.any(np.abs(np.cos(u0)) < ZERO_TOL):
            raise JetError("tan at a pole")
        t = np.tan(u0) if name == "tan" else np.tanh(u0)
        polys = _tan_polys(1 if name == "tan" else -1)
        for k in range(order + 1):
            out[..., k] = np.polynomial.polynomial.polyval(t, polys[k])
    elif name == "log":
        if np.any(u0 <= 0):
            raise JetError("log of a nonpositive value")
        out[..., 0] = np.log(u0)
        for k in range(1, order + 1):
            out[..., k] = (-1.0) ** (k - 1) * math.factorial(k - 1) / u0**k
    else:
        raise JetError(f"unknown function {name!r}")
    return out


# -- scalar wrapper -----------------------------------------------------------

class Jet:
    """Immutable scalar jet with operator overloading."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space_: JetSpace, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (space_.ncoef,):
            raise ValueError(f"expected {space_.ncoef} coefficients, got shape {coeffs.shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "space", space_)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, alpha) -> float:
        return float(self.coeffs[self.space.index[tuple(alpha)]])

    def derivative(self, alpha) -> float:
        """``d^alpha f`` at the expansion point."""
        alpha = tuple(alpha)
        return self.coefficient(alpha) * math.prod(math.factorial(k) for k in alpha)

    def partial(self, i: int) -> "Jet":
        return Jet(self.space.lower, self.space.deriv(self.coeffs, i))

    def _other(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets must share dimension and order")
            return other.coeffs
        return self.space.constant(float(other))

    def __add__(self, other):
        return Jet(self.space, self.coeffs + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Jet(self.space, self.coeffs - self._other(other))

    def __rsub__(self, other):
        return Jet(self.space, self._other(other) - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.space.mul(self.coeffs, self._other(other)))
        return Jet(self.space, self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return Jet(self.space, self.space.div(self.coeffs, other.coeffs))
        return Jet(self.space, self.coeffs / float(other))

    def __rtruediv__(self, other):
        return Jet(self.space, self.space.div(self._other(other), self.coeffs))

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __pow__(self, other):
        if isinstance(other, Jet):
            if np.any(other.coeffs[1:]):
                return jet_apply("^", self, other)
            other = other.value
        return Jet(self.space, self.space.rpow(self.coeffs, float(other)))

    def __eq__(self, other):
        return (isinstance(other, Jet) and other.space is self.space
                and np.array_equal(other.coeffs, self.coeffs))

    def __hash__(self):
        return hash((self.dim, self.order, self.coeffs.tobytes()))

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value!r})"


def jet_constant(value: float, dim: int, order: int = 3) -> Jet:
    sp = space(dim, order)
    return Jet(sp, sp.constant(value))


def jet_coordinate(index: int, point, dim: int, order: int = 3) -> Jet:
    if not 0 <= index < dim:
        raise IndexError(f"coordinate index {index} out of range for dimension {dim}")
    if len(point) != dim:
        raise ValueError(f"point must have {dim} coordinates")
    sp = space(dim, order)
    return Jet(sp, sp.coordinates(point)[index])


def jet_apply(function: str, *args: Jet) -> Jet:
    """Apply an arithmetic operator or elementary function to jets."""
    if not args or not all(isinstance(a, Jet) for a in args):
        raise TypeError("jet_apply needs Jet arguments")
    sp = args[0].space
    if any(a.space is not sp for a in args):
        raise ValueError("jets must share dimension and order")
    binary = {"+", "-", "*", "/", "^"}
    if function in binary:
        if len(args) != 2:
            raise TypeError(f"{function!r} takes two arguments")
        a, b = args
        if function == "+":
            return a + b
        if function == "-":
            return a - b
        if function == "*":
            return a * b
        if function == "/":
            return a / b
        if not np.any(b.coeffs[1:]):
            return Jet(sp, sp.rpow(a.coeffs, b.value))
        if a.value <= 0:
            raise JetError("non-constant exponent with a nonpositive base")
        return Jet(sp, sp.apply("exp", sp.mul(b.coeffs, sp.apply("log", a.coeffs))))
    if len(args) != 1:
        raise TypeError(f"{function!r} takes one argument")
    if function == "neg":
        return -args[0]
    if function not in FUNCTIONS:
        raise JetError(f"unknown function {function!r}")
    return Jet(sp, sp.apply(function, args[0].coeffs))
