"""Metric definition files.

A metric file is line oriented; ``#`` starts a comment.  Example::

    dim 3
    signature + - -
    coords t rho theta
    params A = 1, B = 1
    define w = 0.25*rho^4 + A*rho^2 + B
    g[0][0] = w
    g[1][1] = -1/w
    g[2][2] = -rho^2
    potential[0] = -rho^2/2
    killing[2] = 1
    domain rho = [0.5, 3]

Statements
----------
``dim N``, ``signature s...``, ``coords name...``, ``param(s) NAME = number, ...``,
``define NAME = expr`` (inlined macro), ``g[i][j] = expr`` (``g[i,j]`` also
accepted), ``potential[i] = expr`` (covector a_mu), ``conformal = expr``
(scalar sigma), ``killing[i] = expr`` (vector f^mu), ``weyl[i] = expr``
(covector W_mu), ``field = expr`` (scalar) and ``domain NAME = [lo, hi]``.

Expression grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ "^" unary ] ;              (* right associative *)
    atom    = NUMBER | NAME | NAME "(" args ")" | "(" expr ")" ;
    args    = expr { "," expr } ;
    NUMBER  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;

Functions: sin cos tan sinh cosh tanh exp log sqrt (one argument) and
``integral(expr, NAME, lower)`` for a one-variable quadrature.  ``pi`` is a
builtin constant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from dataclasses import field as dc_field
from typing import Iterable, Mapping

import numpy as np
from scipy import integrate

from .jets import FUNCTIONS, JetError, JetSpace, space

__all__ = [
    "ParseError", "EvaluationError", "Expr", "Num", "Coord", "Param", "Neg",
    "BinOp", "Call", "Integral", "MetricSpec", "CovectorSpec", "VectorSpec",
    "ScalarSpec", "MetricFile", "parse_metric_file", "parse_expression",
    "to_source", "evaluate", "evaluate_component", "evaluate_field",
    "load_metric_file",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}")


class EvaluationError(ValueError):
    """A jet-level domain error surfaced while evaluating an expression."""


# -- expression trees ------------------------------------------------------

class Expr:
    __slots__ = ()

    def __add__(self, other):
        return BinOp("+", self, _lift(other))

    def __radd__(self, other):
        return BinOp("+", _lift(other), self)

    def __sub__(self, other):
        return BinOp("-", self, _lift(other))

    def __rsub__(self, other):
        return BinOp("-", _lift(other), self)

    def __mul__(self, other):
        return BinOp("*", self, _lift(other))

    def __rmul__(self, other):
        return BinOp("*", _lift(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, _lift(other))

    def __rtruediv__(self, other):
        return BinOp("/", _lift(other), self)

    def __pow__(self, other):
        return BinOp("^", self, _lift(other))

    def __neg__(self):
        return Neg(self)

    def __str__(self) -> str:
        return to_source(self)


def _lift(x) -> "Expr":
    return x if isinstance(x, Expr) else Num(float(x))


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Coord(Expr):
    name: str
    index: int


@dataclass(frozen=True, eq=True)
class Param(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr


@dataclass(frozen=True, eq=True)
class Integral(Expr):
    """``int_lower^var integrand d var``; the integrand may depend on ``var`` only."""

    integrand: Expr
    var: Coord
    lower: float


ZERO = Num(0.0)
ONE = Num(1.0)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0


def mul(a: Expr, b: Expr) -> Expr:
    if is_zero(a) or is_zero(b):
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return BinOp("*", a, b)


def add(a: Expr, b: Expr) -> Expr:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if is_zero(b):
        return a
    if is_zero(a):
        return Neg(b)
    return BinOp("-", a, b)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace coordinate references by name."""
    if isinstance(e, Coord):
        return mapping.get(e.name, e)
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    if isinstance(e, Integral):
        if e.var.name in mapping:
            raise ValueError("cannot substitute the integration variable")
        return e
    return e


def identifiers(e: Expr) -> set[str]:
    if isinstance(e, (Coord, Param)):
        return {e.name}
    if isinstance(e, Neg):
        return identifiers(e.arg)
    if isinstance(e, BinOp):
        return identifiers(e.left) | identifiers(e.right)
    if isinstance(e, Call):
        return identifiers(e.arg)
    if isinstance(e, Integral):
        return identifiers(e.integrand) | {e.var.name}
    return set()


# -- pretty printer -----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def _num(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def to_source(e: Expr) -> str:
    """Render an expression so that parsing the text gives back ``e``."""
    if isinstance(e, Num):
        s = _num(e.value)
        return f"({s})" if e.value < 0 or s.startswith("-") else s
    if isinstance(e, (Coord, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Integral):
        return f"integral({to_source(e.integrand)}, {e.var.name}, {_num(e.lower)})"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    assert isinstance(e, BinOp)
    p = _PREC[e.op]
    left, right = to_source(e.left), to_source(e.right)
    if e.op == "^":
        if _prec(e.left) < 5:
            left = f"({left})"
        if _prec(e.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    if p == 1:
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


# -- tokenizer / parser ---------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),=\[\]])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            toks.append(Token(m.lastgroup, m.group(), line, col0 + pos))
        pos = m.end()
    toks.append(Token("end", "", line, col0 + len(text)))
    return toks


class _ExprParser:
    def __init__(self, toks: list[Token], env: "_Env"):
        self.toks = toks
        self.i = 0
        self.env = env

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            found = self.tok.text or "end of line"
            self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.next().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.next().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.next()
            return Neg(self.unary())
        if self.tok.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text == "^":
            self.next()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.next()
            return Num(float(tok.text))
        if tok.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.next()
            if self.tok.text == "(":
                return self.call(tok)
            return self.env.resolve(tok)
        self.error(f"unexpected {tok.text or 'end of line'!r}")

    def call(self, name_tok: Token) -> Expr:
        name = name_tok.text
        if name not in FUNCTIONS and name != "integral":
            raise ParseError(f"unknown function {name!r}", name_tok.line, name_tok.col)
        self.expect("(")
        args: list = [self.expr()]
        arg_toks = []
        while self.tok.text == ",":
            self.next()
            arg_toks.append(self.tok)
            if name == "integral" and len(args) == 1:
                var_tok = self.next()
                var = self.env.resolve(var_tok) if var_tok.kind == "name" else None
                if not isinstance(var, Coord):
                    raise ParseError("integral variable must be a coordinate",
                                     var_tok.line, var_tok.col)
                args.append(var)
            else:
                args.append(self.expr())
        self.expect(")")
        if name == "integral":
            if len(args) != 3:
                raise ParseError(f"integral takes 3 arguments, got {len(args)}",
                                 name_tok.line, name_tok.col)
            lower = _const_value(args[2])
            if lower is None:
                raise ParseError("integral lower limit must be a number",
                                 arg_toks[1].line, arg_toks[1].col)
            return Integral(args[0], args[1], lower)
        if len(args) != 1:
            raise ParseError(f"{name} takes 1 argument, got {len(args)}",
                             name_tok.line, name_tok.col)
        return Call(name, args[0])


def _const_value(e: Expr) -> float | None:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        v = _const_value(e.arg)
        return None if v is None else -v
    return None


@dataclass
class _Env:
    coords: tuple[str, ...] = ()
    params: dict = dc_field(default_factory=dict)
    defines: dict = dc_field(default_factory=dict)

    def resolve(self, tok: Token) -> Expr:
        name = tok.text
        if name in self.defines:
            return self.defines[name]
        if name in self.coords:
            return Coord(name, self.coords.index(name))
        if name in self.params:
            return Param(name)
        if name == "pi":
            return Num(math.pi)
        raise ParseError(f"unknown identifier {name!r}", tok.line, tok.col)


def parse_expression(text: str, coords: Iterable[str] = (), params: Iterable[str] = (),
                     line: int = 1, col: int = 1) -> Expr:
    env = _Env(tuple(coords), {p: 0.0 for p in params})
    return _ExprParser(tokenize(text, line, col), env).parse()


# -- specs --------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSpec:
    dim: int
    signature: tuple[int, ...]
    coord_names: tuple[str, ...]
    components: dict  # {(i, j) with i <= j: Expr}
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if not 2 <= self.dim <= 4:
            raise ValueError(f"dimension must be 2..4, got {self.dim}")
        if len(self.signature) != self.dim:
            raise ValueError("signature length must equal dim")
        if len(self.coord_names) != self.dim:
            raise ValueError("need one coordinate name per dimension")
        comps = {}
        for (i, j), e in self.components.items():
            key = (min(i, j), max(i, j))
            if not (0 <= key[0] and key[1] < self.dim):
                raise ValueError(f"component {key} out of range")
            if key in comps and comps[key] != e:
                raise ValueError(f"conflicting definitions of g[{i}][{j}]")
            if not is_zero(e):
                comps[key] = e
        object.__setattr__(self, "components", comps)
        known = set(self.coord_names) | set(self.params)
        for e in comps.values():
            missing = identifiers(e) - known
            if missing:
                raise ValueError(f"unknown identifiers {sorted(missing)}")
        for i in range(self.dim):
            if not any((min(i, j), max(i, j)) in comps for j in range(self.dim)):
                raise ValueError(f"metric row {i} is identically zero (degenerate)")

    def component(self, i: int, j: int) -> Expr:
        return self.components.get((min(i, j), max(i, j)), ZERO)

    def with_params(self, **overrides) -> "MetricSpec":
        unknown = set(overrides) - set(self.params)
        if unknown:
            raise KeyError(f"unknown parameters {sorted(unknown)}")
        return replace(self, params={**self.params, **{k: float(v) for k, v in overrides.items()}})

    @property
    def minus_count(self) -> int:
        return sum(1 for s in self.signature if s < 0)


@dataclass(frozen=True)
class _FieldSpec:
    exprs: tuple
    coord_names: tuple[str, ...]
    params: dict = dc_field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def __post_init__(self):
        object.__setattr__(self, "exprs", tuple(self.exprs))

    def with_params(self, **overrides):
        return replace(self, params={**self.params, **{k: float(v) for k, v in overrides.items()}})


class CovectorSpec(_FieldSpec):
    """Covector field (lower index), e.g. the potential a_mu or W_mu."""


class VectorSpec(_FieldSpec):
    """Vector field (upper index), e.g. a Killing vector f^mu."""


class ScalarSpec(_FieldSpec):
    """Scalar field; ``exprs`` has exactly one entry."""

    @property
    def expr(self) -> Expr:
        return self.exprs[0]


def zero_covector(spec: MetricSpec) -> CovectorSpec:
    return CovectorSpec((ZERO,) * spec.dim, spec.coord_names, dict(spec.params))


def zero_scalar(spec: MetricSpec) -> ScalarSpec:
    return ScalarSpec((ZERO,), spec.coord_names, dict(spec.params))


@dataclass(frozen=True)
class MetricFile:
    metric: MetricSpec
    potential: CovectorSpec | None = None
    conformal: ScalarSpec | None = None
    killing: VectorSpec | None = None
    weyl: CovectorSpec | None = None
    field: ScalarSpec | None = None
    domain: dict = dc_field(default_factory=dict)  # name -> (Expr, Expr)

    def with_params(self, **overrides) -> "MetricFile":
        kw = {"metric": self.metric.with_params(**overrides)}
        for name in ("potential", "conformal", "killing", "weyl", "field"):
            blk = getattr(self, name)
            if blk is not None:
                kw[name] = blk.with_params(**overrides)
        return replace(self, **kw)

    def domain_bounds(self, default=(-1.0, 1.0)) -> list[tuple[float, float]]:
        params = self.metric.params
        out = []
        for name in self.metric.coord_names:
            if name in self.domain:
                lo, hi = (evaluate_constant(e, params) for e in self.domain[name])
                out.append((lo, hi))
            else:
                out.append(default)
        return out


_BLOCKS = {"potential": CovectorSpec, "killing": VectorSpec, "weyl": CovectorSpec}
_COMPONENT = re.compile(r"^g\s*\[\s*(\d+)\s*\]\s*\[\s*(\d+)\s*\]\s*=|^g\s*\[\s*(\d+)\s*,\s*(\d+)\s*\]\s*=")
_INDEXED = re.compile(r"^(potential|killing|weyl)\s*\[\s*(\d+)\s*\]\s*=")


def _split_comment(raw: str) -> str:
    return raw.split("#", 1)[0].rstrip()


def parse_metric_file(text: str) -> MetricFile:
    """Parse a metric file; raises :class:`ParseError` with a line/column."""
    env = _Env()
    dim = None
    dim_loc = (0, 0)
    signature = None
    sig_loc = (0, 0)
    comps: dict = {}
    blocks: dict = {k: {} for k in _BLOCKS}
    scalars: dict = {}
    domain: dict = {}
    deferred: list = []

    lines = text.splitlines()
    # header pass: everything but expression statements, which need the full env
    for lineno, raw in enumerate(lines, start=1):
        line = _split_comment(raw)
        stripped = line.lstrip()
        if not stripped:
            continue
        indent = len(line) - len(stripped)
        word = stripped.split(None, 1)[0]
        rest = stripped[len(word):]
        rest_col = indent + len(word) + 1
        if word == "dim":
            try:
                dim = int(rest.strip())
            except ValueError:
                raise ParseError("dim expects an integer", lineno, rest_col) from None
            if not 2 <= dim <= 4:
                raise ParseError(f"dimension must be 2..4, got {dim}", lineno, rest_col)
            dim_loc = (lineno, indent + 1)
        elif word == "signature":
            signs = []
            for m in re.finditer(r"\S+", rest):
                tok = m.group()
                col = rest_col + m.start()
                if set(tok) <= {"+", "-"} and tok:
                    signs.extend(1 if ch == "+" else -1 for ch in tok)
                elif tok in ("+1", "-1", "1"):
                    signs.append(-1 if tok.startswith("-") else 1)
                else:
                    raise ParseError(f"bad signature entry {tok!r}", lineno, col)
            signature = tuple(signs)
            sig_loc = (lineno, indent + 1)
        elif word == "coords":
            names = rest.split()
            for m in re.finditer(r"\S+", rest):
                if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", m.group()):
                    raise ParseError(f"bad coordinate name {m.group()!r}", lineno, rest_col + m.start())
            if len(set(names)) != len(names):
                raise ParseError("duplicate coordinate name", lineno, rest_col)
            env.coords = tuple(names)
        elif word in ("param", "params"):
            for m in re.finditer(r"[^,]+", rest):
                item = m.group()
                col = rest_col + m.start()
                pm = re.fullmatch(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(\S.*?)\s*", item)
                if not pm:
                    raise ParseError("expected NAME = number", lineno, col)
                name, val = pm.group(1), pm.group(2)
                try:
                    env.params[name] = float(val)
                except ValueError:
                    raise ParseError(f"parameter value {val!r} is not a number",
                                     lineno, col + item.index(val)) from None
                if name in env.coords or name in FUNCTIONS:
                    raise ParseError(f"parameter {name!r} shadows a name", lineno, col)
        else:
            deferred.append((lineno, indent, stripped))

    if dim is None:
        raise ParseError("missing 'dim' statement", 1, 1)
    if signature is None:
        signature = (1,) + (-1,) * (dim - 1)
    elif len(signature) != dim:
        raise ParseError(f"signature has {len(signature)} entries, dim is {dim}", *sig_loc)
    if not env.coords:
        env.coords = tuple(f"x{i}" for i in range(dim))
    elif len(env.coords) != dim:
        raise ParseError(f"{len(env.coords)} coordinates declared, dim is {dim}", *dim_loc)

    for lineno, indent, stmt in deferred:
        col0 = indent + 1

        def expr_after(prefix_len: int) -> Expr:
            toks = tokenize(stmt[prefix_len:], lineno, col0 + prefix_len)
            return _ExprParser(toks, env).parse()

        word = re.match(r"[A-Za-z_]\w*", stmt)
        word = word.group() if word else ""
        if word == "define":
            m = re.match(r"define\s+([A-Za-z_]\w*)\s*=", stmt)
            if not m:
                raise ParseError("expected 'define NAME = expr'", lineno, col0)
            name = m.group(1)
            if name in env.coords or name in env.params:
                raise ParseError(f"define {name!r} shadows a coordinate or parameter", lineno, col0)
            env.defines[name] = expr_after(m.end())
        elif word == "g":
            m = _COMPONENT.match(stmt)
            if not m:
                raise ParseError("expected 'g[i][j] = expr'", lineno, col0)
            i, j = (int(x) for x in (m.group(1, 2) if m.group(1) else m.group(3, 4)))
            if i >= dim or j >= dim:
                raise ParseError(f"component index out of range for dim {dim}", lineno, col0 + 2)
            e = expr_after(m.end())
            key = (min(i, j), max(i, j))
            if key in comps:
                prev_loc, prev = comps[key]
                if (i, j) == prev_loc[2] or prev != e:
                    raise ParseError(f"duplicate definition of g[{i}][{j}]", lineno, col0)
            comps[key] = ((lineno, col0, (i, j)), e)
        elif word in _BLOCKS:
            m = _INDEXED.match(stmt)
            if not m:
                raise ParseError(f"expected '{word}[i] = expr'", lineno, col0)
            i = int(m.group(2))
            if i >= dim:
                raise ParseError(f"{word} index {i} out of range", lineno, col0)
            if i in blocks[word]:
                raise ParseError(f"duplicate definition of {word}[{i}]", lineno, col0)
            blocks[word][i] = expr_after(m.end())
        elif word in ("conformal", "field"):
            m = re.match(rf"{word}\s*=", stmt)
            if not m:
                raise ParseError(f"expected '{word} = expr'", lineno, col0)
            if word in scalars:
                raise ParseError(f"duplicate '{word}' block", lineno, col0)
            scalars[word] = expr_after(m.end())
        elif word == "domain":
            m = re.match(r"domain\s+([A-Za-z_]\w*)\s*=\s*\[(.*)\]\s*$", stmt)
            if not m:
                raise ParseError("expected 'domain NAME = [lo, hi]'", lineno, col0)
            name = m.group(1)
            if name not in env.coords:
                raise ParseError(f"domain for unknown coordinate {name!r}", lineno, col0 + 7)
            body_col = col0 + m.start(2)
            parts = m.group(2).split(",")
            if len(parts) != 2:
                raise ParseError("domain needs exactly two bounds", lineno, body_col)
            bounds = []
            offset = 0
            for part in parts:
                e = _ExprParser(tokenize(part, lineno, body_col + offset),
                                _Env((), env.params, {})).parse()
                bounds.append(e)
                offset += len(part) + 1
            domain[name] = tuple(bounds)
        else:
            raise ParseError(f"unknown statement {word or stmt.split()[0]!r}", lineno, col0)

    params = dict(env.params)
    try:
        metric = MetricSpec(dim, signature, env.coords,
                            {k: v[1] for k, v in comps.items()}, params)
    except ValueError as exc:
        raise ParseError(str(exc), *dim_loc) from None

    def block(kind, cls):
        if not blocks[kind]:
            return None
        return cls(tuple(blocks[kind].get(i, ZERO) for i in range(dim)), env.coords, params)

    def scalar(kind):
        return ScalarSpec((scalars[kind],), env.coords, params) if kind in scalars else None

    return MetricFile(
        metric=metric,
        potential=block("potential", CovectorSpec),
        conformal=scalar("conformal"),
        killing=block("killing", VectorSpec),
        weyl=block("weyl", CovectorSpec),
        field=scalar("field"),
        domain=domain,
    )


def load_metric_file(path) -> MetricFile:
    with open(path, encoding="utf-8") as fh:
        return parse_metric_file(fh.read())


def to_file_text(mf: MetricFile) -> str:
    """Serialise a :class:`MetricFile` back to the file format."""
    m = mf.metric
    out = [f"dim {m.dim}",
           "signature " + " ".join("+" if s > 0 else "-" for s in m.signature),
           "coords " + " ".join(m.coord_names)]
    if m.params:
        out.append("params " + ", ".join(f"{k} = {_num(v)}" for k, v in m.params.items()))
    for (i, j), e in sorted(m.components.items()):
        out.append(f"g[{i}][{j}] = {to_source(e)}")
    for kind in ("potential", "killing", "weyl"):
        blk = getattr(mf, kind)
        if blk is not None:
            out.extend(f"{kind}[{i}] = {to_source(e)}" for i, e in enumerate(blk.exprs) if not is_zero(e))
    for kind in ("conformal", "field"):
        blk = getattr(mf, kind)
        if blk is not None:
            out.append(f"{kind} = {to_source(blk.expr)}")
    for name, (lo, hi) in mf.domain.items():
        out.append(f"domain {name} = [{to_source(lo)}, {to_source(hi)}]")
    return "\n".join(out) + "\n"


# -- evaluation -----------------------------------------------------------------

def evaluate_constant(e: Expr, params: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Param):
        return float(params[e.name])
    sp = space(1, 0)
    return float(evaluate(e, sp, np.zeros((1, 1)), params)[0])


def evaluate(e: Expr, sp: JetSpace, coords: np.ndarray, params: Mapping[str, float]) -> np.ndarray:
    """Evaluate ``e`` to a coefficient array given coordinate jets ``coords``."""
    try:
        return _eval(e, sp, coords, params)
    except JetError as exc:
        raise EvaluationError(f"{exc} in {to_source(e)!r}") from None


def _eval(e: Expr, sp: JetSpace, coords: np.ndarray, params) -> np.ndarray:
    if isinstance(e, Num):
        return sp.constant(e.value)
    if isinstance(e, Coord):
        return coords[e.index]
    if isinstance(e, Param):
        return sp.constant(params[e.name])
    if isinstance(e, Neg):
        return -_eval(e.arg, sp, coords, params)
    if isinstance(e, Call):
        return sp.apply(e.func, _eval(e.arg, sp, coords, params))
    if isinstance(e, Integral):
        return _eval_integral(e, sp, coords, params)
    a = _eval(e.left, sp, coords, params)
    if e.op == "^":
        if isinstance(e.right, Num):
            return sp.rpow(a, e.right.value)
        b = _eval(e.right, sp, coords, params)
        if not np.any(b[1:]):
            return sp.rpow(a, b[0])
        if a[0] <= 0:
            raise JetError("non-constant exponent with a nonpositive base")
        return sp.apply("exp", sp.mul(b, sp.apply("log", a)))
    b = _eval(e.right, sp, coords, params)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return sp.mul(a, b)
    return sp.div(a, b)


def _eval_integral(e: Integral, sp: JetSpace, coords, params) -> np.ndarray:
    i = e.var.index
    x = coords[i][0]
    base = coords[:, 0].copy()
    sp0 = space(sp.dim, 0)

    def integrand(t):
        pt = base.copy()
        pt[i] = t
        return _eval(e.integrand, sp0, sp0.coordinates(pt), params)[0]

    value, _ = integrate.quad(integrand, e.lower, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    out = sp.constant(value)
    if sp.order >= 1:
        h = _eval(e.integrand, sp, coords, params)
        unit = [0] * sp.dim
        for k in range(1, sp.order + 1):
            unit[i] = k - 1
            prev = h[sp.index[tuple(unit)]]
            unit[i] = k
            out[sp.index[tuple(unit)]] = prev / k
            unit[i] = 0
    return out


def evaluate_component(spec: MetricSpec, i: int, j: int, point, order: int = 3) -> "Jet":
    from .jets import Jet

    if len(point) != spec.dim:
        raise ValueError(f"point must have {spec.dim} coordinates")
    sp = space(spec.dim, order)
    return Jet(sp, evaluate(spec.component(i, j), sp, sp.coordinates(point), spec.params))


def metric_jets(spec: MetricSpec, point, order: int) -> np.ndarray:
    """All metric components as a ``(dim, dim, ncoef)`` coefficient array."""
    sp = space(spec.dim, order)
    coords = sp.coordinates(point)
    g = np.zeros((spec.dim, spec.dim, sp.ncoef))
    for (i, j), e in spec.components.items():
        g[i, j] = g[j, i] = evaluate(e, sp, coords, spec.params)
    return g


def evaluate_field(fs: _FieldSpec, point, order: int) -> np.ndarray:
    """Field components as a ``(n_components, ncoef)`` coefficient array."""
    sp = space(fs.dim, order)
    coords = sp.coordinates(point)
    return np.stack([evaluate(e, sp, coords, fs.params) for e in fs.exprs])
