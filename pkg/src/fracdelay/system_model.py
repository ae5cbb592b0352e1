"""System definition: the delayed coupled model, initial data, validation,
and the time-expression mini-language used for delays and forcing terms.

A system couples a multi-order Caputo differential equation for x with a
discrete difference equation for y:

    D^alpha_i x_i(t) = [A x(t) + B x(t - tau1(t)) + E y(t - tau2(t)) + f(t)]_i
    y(t)             = C x(t) + D y(t - tau3(t)) + g(t)

with continuous initial functions psi (for x) and phi (for y) on [-r, 0].
Delays and forcing terms are closed arithmetic expressions in the single
variable t, parsed once and evaluated purely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import matrix_analysis as ma
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    ExprEvalError,
    ExprSyntaxError,
)

__all__ = [
    "TimeExpr",
    "parse_time_expr",
    "eval_time_expr",
    "constant_expr",
    "MultiOrder",
    "MultiOrderSystem",
    "InitialData",
    "ValidationReport",
    "validate_system",
    "derive_initial_phi",
    "derived_initial_data",
    "load_config",
    "system_from_config",
    "CONFIG_KEYS",
]


# --------------------------------------------------------------------------
# Time-expression mini-language
#
# expr   := term (('+'|'-') term)*
# term   := factor (('*'|'/') factor)*
# factor := ('-'|'+') factor | power
# power  := atom ('^' factor)?          -- right associative
# atom   := NUMBER | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
# --------------------------------------------------------------------------

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_NUM = ("num",)
_VAR = ("var",)


class _Node:
    __slots__ = ()


class _Num(_Node):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value


class _Var(_Node):
    __slots__ = ()


class _Unary(_Node):
    __slots__ = ("operand",)

    def __init__(self, operand: _Node):
        self.operand = operand


class _Binary(_Node):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: _Node, right: _Node):
        self.op = op
        self.left = left
        self.right = right


class _Call(_Node):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: _Node):
        self.name = name
        self.arg = arg


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def error(self, message: str, expected: Iterable[str] = ()):
        raise ExprSyntaxError(message, self.pos, tuple(expected))

    def skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.source[self.pos] if self.pos < len(self.source) else ""

    def take_number(self) -> float:
        start = self.pos
        src = self.source
        n = len(src)
        while self.pos < n and src[self.pos].isdigit():
            self.pos += 1
        if self.pos < n and src[self.pos] == ".":
            self.pos += 1
            while self.pos < n and src[self.pos].isdigit():
                self.pos += 1
        if self.pos < n and src[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < n and src[self.pos] in "+-":
                self.pos += 1
            if self.pos < n and src[self.pos].isdigit():
                while self.pos < n and src[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # bare 'e' is the Euler constant, not an exponent
        text = src[start:self.pos]
        try:
            return float(text)
        except ValueError:
            self.pos = start
            self.error(f"malformed number {text!r}", ("number",))

    def take_ident(self) -> str:
        start = self.pos
        src = self.source
        while self.pos < len(src) and (src[self.pos].isalnum() or src[self.pos] == "_"):
            self.pos += 1
        return src[start:self.pos]


class _Parser:
    def __init__(self, source: str):
        self.tk = _Tokenizer(source)

    def parse(self) -> _Node:
        node = self.expr()
        if self.tk.peek():
            self.tk.error(f"unexpected {self.tk.peek()!r}", ("end of input", "operator"))
        return node

    def expr(self) -> _Node:
        node = self.term()
        while True:
            ch = self.tk.peek()
            if ch and ch in "+-":
                self.tk.pos += 1
                node = _Binary(ch, node, self.term())
            else:
                return node

    def term(self) -> _Node:
        node = self.factor()
        while True:
            ch = self.tk.peek()
            if ch and ch in "*/":
                self.tk.pos += 1
                node = _Binary(ch, node, self.factor())
            else:
                return node

    def factor(self) -> _Node:
        ch = self.tk.peek()
        if ch == "-":
            self.tk.pos += 1
            return _Unary(self.factor())
        if ch == "+":
            self.tk.pos += 1
            return self.factor()
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        if self.tk.peek() == "^":
            self.tk.pos += 1
            return _Binary("^", base, self.factor())
        return base

    def atom(self) -> _Node:
        ch = self.tk.peek()
        if not ch:
            self.tk.error("unexpected end of input", ("number", "t", "function", "("))
        if ch == "(":
            self.tk.pos += 1
            node = self.expr()
            if self.tk.peek() != ")":
                self.tk.error("unbalanced parenthesis", (")",))
            self.tk.pos += 1
            return node
        if ch.isdigit() or ch == ".":
            return _Num(self.tk.take_number())
        if ch.isalpha() or ch == "_":
            name = self.tk.take_ident()
            if name == "t":
                return _Var()
            if name in _CONSTANTS:
                return _Num(_CONSTANTS[name])
            if name in _FUNCTIONS:
                if self.tk.peek() != "(":
                    self.tk.error(f"function {name!r} needs an argument list", ("(",))
                self.tk.pos += 1
                arg = self.expr()
                nxt = self.tk.peek()
                if nxt == ",":
                    self.tk.error(f"function {name!r} takes exactly one argument", (")",))
                if nxt != ")":
                    self.tk.error("unbalanced parenthesis", (")",))
                self.tk.pos += 1
                return _Call(name, arg)
            self.tk.pos -= len(name)
            self.tk.error(f"unknown identifier {name!r}", ("t", "pi", "e", "function"))
        self.tk.error(f"unexpected {ch!r}", ("number", "t", "function", "("))


def _eval_node(node: _Node, t: float) -> float:
    if type(node) is _Num:
        return node.value
    if type(node) is _Var:
        return t
    if type(node) is _Unary:
        return -_eval_node(node.operand, t)
    if type(node) is _Binary:
        left = _eval_node(node.left, t)
        right = _eval_node(node.right, t)
        op = node.op
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if op == "/":
            if right == 0.0:
                raise ExprEvalError(f"division by zero at t = {t!r}")
            return left / right
        # '^': math.pow rejects the negative-base fractional-exponent case
        # instead of drifting into complex values like the builtin does.
        try:
            return math.pow(left, right)
        except (ValueError, OverflowError) as exc:
            raise ExprEvalError(f"invalid power {left!r} ^ {right!r} at t = {t!r}") from exc
    # _Call
    arg = _eval_node(node.arg, t)
    try:
        return _FUNCTIONS[node.name](arg)
    except ValueError as exc:
        raise ExprEvalError(f"{node.name}({arg!r}) undefined at t = {t!r}") from exc
    except OverflowError as exc:
        raise ExprEvalError(f"{node.name}({arg!r}) overflowed at t = {t!r}") from exc


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _format_node(node: _Node) -> str:
    if type(node) is _Num:
        return repr(node.value)
    if type(node) is _Var:
        return "t"
    if type(node) is _Unary:
        inner = _format_node(node.operand)
        if isinstance(node.operand, _Binary):
            inner = f"({inner})"
        return f"-{inner}"
    if type(node) is _Call:
        return f"{node.name}({_format_node(node.arg)})"
    op = node.op
    prec = _PRECEDENCE[op]
    left = _format_node(node.left)
    right = _format_node(node.right)
    if isinstance(node.left, _Binary) and _PRECEDENCE[node.left.op] < prec:
        left = f"({left})"
    if isinstance(node.left, _Unary):
        left = f"({left})"
    # conservative parenthesization on the right keeps '-' and '/' exact
    if isinstance(node.right, (_Binary, _Unary)) and op != "^":
        right = f"({right})"
    elif isinstance(node.right, _Binary) and op == "^":
        right = f"({right})"
    return f"{left} {op} {right}" if op in "+-" else f"{left}{op}{right}"


@dataclass(frozen=True)
class TimeExpr:
    """Parsed arithmetic expression in the single variable t.

    Immutable; evaluation is pure and bit-for-bit reproducible for
    identical (source, t) pairs.
    """

    source: str
    ast: _Node = field(compare=False, hash=False, repr=False)

    def __call__(self, t: float) -> float:
        return eval_time_expr(self, t)

    def to_source(self) -> str:
        """Canonical re-rendering of the parsed tree."""
        return _format_node(self.ast)

    @property
    def is_zero_literal(self) -> bool:
        """Syntactic zero test (literal 0, possibly negated)."""
        node = self.ast
        while type(node) is _Unary:
            node = node.operand
        return type(node) is _Num and node.value == 0.0


def parse_time_expr(source: str) -> TimeExpr:
    """Parse an expression; raises ExprSyntaxError with byte offset."""
    if not isinstance(source, str):
        raise ExprSyntaxError(f"expected an expression string, got {type(source).__name__}", 0)
    ast = _Parser(source).parse()
    return TimeExpr(source=source, ast=ast)


def eval_time_expr(expr: TimeExpr, t: float) -> float:
    """Evaluate at time t; non-finite results are evaluation errors."""
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t!r}")
    value = _eval_node(expr.ast, t)
    if not math.isfinite(value):
        raise ExprEvalError(f"expression {expr.source!r} is not finite at t = {t!r}")
    return value


def constant_expr(value: float) -> TimeExpr:
    """TimeExpr wrapping a numeric constant at full precision."""
    return parse_time_expr(repr(float(value)))


# --------------------------------------------------------------------------
# System data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiOrder:
    """Vector of Caputo orders, one per x-component, each in (0, 1]."""

    alpha: tuple[float, ...]

    def __post_init__(self):
        if len(self.alpha) < 1:
            raise DimensionError("order vector must have at least one component")
        for i, a in enumerate(self.alpha):
            if not (0.0 < a <= 1.0):
                raise DomainError(f"order component {i} must lie in (0, 1], got {a!r}")

    def __len__(self) -> int:
        return len(self.alpha)


def _exprs(items, what: str) -> tuple[TimeExpr, ...]:
    out = []
    for i, item in enumerate(items):
        if isinstance(item, TimeExpr):
            out.append(item)
        else:
            try:
                out.append(parse_time_expr(item))
            except ExprSyntaxError as exc:
                raise ExprSyntaxError(f"{what}[{i}]: {exc.args[0]}", exc.offset, exc.expected) from exc
    return tuple(out)


@dataclass(frozen=True)
class MultiOrderSystem:
    """Full coefficient tuple of the coupled system plus delays and forcing."""

    order: MultiOrder
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    C: np.ndarray
    D: np.ndarray
    f: tuple[TimeExpr, ...]
    g: tuple[TimeExpr, ...]
    tau1: TimeExpr
    tau2: TimeExpr
    tau3: TimeExpr
    r: float

    def __post_init__(self):
        d = len(self.order)
        object.__setattr__(self, "A", ma.as_matrix(self.A, "A"))
        object.__setattr__(self, "B", ma.as_matrix(self.B, "B"))
        object.__setattr__(self, "E", ma.as_matrix(self.E, "E"))
        object.__setattr__(self, "C", ma.as_matrix(self.C, "C"))
        object.__setattr__(self, "D", ma.as_matrix(self.D, "D"))
        n = self.E.shape[1]
        expect = {
            "A": (d, d),
            "B": (d, d),
            "E": (d, n),
            "C": (n, d),
            "D": (n, n),
        }
        for name, shape in expect.items():
            got = getattr(self, name).shape
            if got != shape:
                raise DimensionError(f"{name} must have shape {shape}, got {got}")
        if len(self.f) != d:
            raise DimensionError(f"f must have {d} components, got {len(self.f)}")
        if len(self.g) != n:
            raise DimensionError(f"g must have {n} components, got {len(self.g)}")
        if not (self.r > 0.0 and math.isfinite(self.r)):
            raise DomainError(f"history horizon r must be positive and finite, got {self.r!r}")

    @property
    def dim_x(self) -> int:
        return len(self.order)

    @property
    def dim_y(self) -> int:
        return self.E.shape[1]

    def forcing_is_zero(self) -> bool:
        """True when every f and g component is a syntactic zero."""
        return all(e.is_zero_literal for e in self.f) and all(e.is_zero_literal for e in self.g)

    def eval_f(self, t: float) -> np.ndarray:
        return np.array([e(t) for e in self.f])

    def eval_g(self, t: float) -> np.ndarray:
        return np.array([e(t) for e in self.g])


@dataclass(frozen=True)
class InitialData:
    """Initial functions psi (x-history) and phi (y-history) on [-r, 0]."""

    psi: tuple[TimeExpr, ...]
    phi: tuple[TimeExpr, ...]
    phi_mode: str = "explicit"

    def __post_init__(self):
        if self.phi_mode not in ("explicit", "derived"):
            raise DomainError(f"phi_mode must be 'explicit' or 'derived', got {self.phi_mode!r}")

    def eval_psi(self, s: float) -> np.ndarray:
        return np.array([e(s) for e in self.psi])

    def eval_phi(self, s: float) -> np.ndarray:
        return np.array([e(s) for e in self.phi])


def derive_initial_phi(system: MultiOrderSystem, psi0: np.ndarray, g0: np.ndarray) -> np.ndarray:
    """Constant y-history consistent with the difference equation at t = 0.

    Returns (I - D)^{-1} (C psi0 + g0); using this constant on [-r, 0]
    satisfies the compatibility condition whenever tau3(0) >= 0 and g
    holds its t = 0 value on the relevant backward interval.
    """
    psi0 = np.asarray(psi0, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    n = system.dim_y
    if psi0.shape != (system.dim_x,):
        raise DimensionError(f"psi0 must have shape ({system.dim_x},), got {psi0.shape}")
    if g0.shape != (n,):
        raise DimensionError(f"g0 must have shape ({n},), got {g0.shape}")
    return ma.solve(np.eye(n) - system.D, system.C @ psi0 + g0, name="I - D")


def derived_initial_data(system: MultiOrderSystem, psi) -> InitialData:
    """InitialData with phi synthesized as the constant (I-D)^{-1}(C psi(0) + g(0))."""
    psi_exprs = _exprs(psi, "psi")
    psi0 = np.array([e(0.0) for e in psi_exprs])
    phi0 = derive_initial_phi(system, psi0, system.eval_g(0.0))
    phi_exprs = tuple(constant_expr(v) for v in phi0)
    return InitialData(psi=psi_exprs, phi=phi_exprs, phi_mode="derived")


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

COMPAT_TOL = 1e-9
_T1_SAMPLES = 10_000


@dataclass
class ValidationReport:
    """Verdicts for the pre-simulation hypotheses.

    The delay conditions are checked by dense sampling, so they are
    labelled accordingly: t1 is 'sampled', t4 is 'heuristic'.  t2 (strictly
    positive delays at 0) is recorded but never required.
    """

    c1_ok: bool
    d1_ok: bool
    c1_row_sums: np.ndarray
    d1_row_sums: np.ndarray
    compat_ok: bool
    compat_residual: float
    t1_ok: bool
    delays_nonnegative: bool
    t4_ok: bool
    t2_holds: bool
    horizon: float
    labels: dict = field(default_factory=lambda: {"t1": "sampled", "t4": "heuristic"})

    @property
    def existence_uniqueness_ok(self) -> bool:
        return self.c1_ok and self.d1_ok

    @property
    def all_ok(self) -> bool:
        return (
            self.c1_ok
            and self.d1_ok
            and self.compat_ok
            and self.t1_ok
            and self.delays_nonnegative
            and self.t4_ok
        )

    def failures(self) -> list[str]:
        out = []
        if not self.c1_ok:
            out.append("(c1): some row of C has absolute sum >= 1")
        if not self.d1_ok:
            out.append("(d1): some row of D has absolute sum >= 1")
        if not self.compat_ok:
            out.append(f"(K): compatibility residual {self.compat_residual:.3e} > {COMPAT_TOL}")
        if not self.t1_ok:
            out.append("(T1): sampled t - tau_k(t) dips below -r")
        if not self.delays_nonnegative:
            out.append("delay negativity: some tau_k(t) < 0 on the sampled grid")
        if not self.t4_ok:
            out.append("(T4): sampled t - tau_k(t) shows no growth (heuristic)")
        return out


def validate_system(system: MultiOrderSystem, init: InitialData, horizon: float) -> ValidationReport:
    """Check (c1), (d1), (K), (T1) and the (T4) heuristic over [0, horizon]."""
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise DomainError(f"horizon must be positive and finite, got {horizon!r}")
    d, n = system.dim_x, system.dim_y
    if len(init.psi) != d:
        raise DimensionError(f"psi must have {d} components, got {len(init.psi)}")
    if len(init.phi) != n:
        raise DimensionError(f"phi must have {n} components, got {len(init.phi)}")

    c1_rows = np.sum(np.abs(system.C), axis=1)
    d1_rows = np.sum(np.abs(system.D), axis=1)
    c1_ok = bool(np.all(c1_rows < 1.0))
    d1_ok = bool(np.all(d1_rows < 1.0))

    # (K): C psi(0) + D phi(-tau3(0)) + g(0) = phi(0)
    tau3_0 = system.tau3(0.0)
    psi0 = init.eval_psi(0.0)
    phi0 = init.eval_phi(0.0)
    phi_back = init.eval_phi(-tau3_0) if tau3_0 > 0.0 else phi0
    residual = system.C @ psi0 + system.D @ phi_back + system.eval_g(0.0) - phi0
    compat_residual = float(np.max(np.abs(residual)))
    compat_ok = compat_residual <= COMPAT_TOL

    # (T1)/(T4) by dense sampling
    ts = np.linspace(0.0, horizon, _T1_SAMPLES)
    t1_ok = True
    delays_nonneg = True
    t4_ok = True
    head = max(2, _T1_SAMPLES // 10)
    for tau in (system.tau1, system.tau2, system.tau3):
        lag = np.empty_like(ts)
        for i, t in enumerate(ts):
            tau_t = tau(float(t))
            if tau_t < 0.0:
                delays_nonneg = False
            lag[i] = t - tau_t
            if lag[i] < -system.r - 1e-12:
                t1_ok = False
        if np.min(lag[-head:]) <= np.min(lag[:head]):
            t4_ok = False

    t2_holds = system.tau1(0.0) > 0.0 and system.tau2(0.0) > 0.0 and system.tau3(0.0) > 0.0

    return ValidationReport(
        c1_ok=c1_ok,
        d1_ok=d1_ok,
        c1_row_sums=c1_rows,
        d1_row_sums=d1_rows,
        compat_ok=compat_ok,
        compat_residual=compat_residual,
        t1_ok=t1_ok,
        delays_nonnegative=delays_nonneg,
        t4_ok=t4_ok,
        t2_holds=t2_holds,
        horizon=horizon,
    )


# --------------------------------------------------------------------------
# Config file format (single JSON document, exact keys)
# --------------------------------------------------------------------------

CONFIG_KEYS = (
    "order",
    "A",
    "B",
    "E",
    "C",
    "D",
    "f",
    "g",
    "tau1",
    "tau2",
    "tau3",
    "r",
    "psi",
    "phi",
)


def load_config(path) -> dict:
    """Read and decode a config document; JSON errors become ConfigError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return doc


def _config_expr(doc, key: str) -> TimeExpr:
    try:
        return parse_time_expr(doc[key])
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad expression: {exc}", key=key) from exc


def _config_expr_list(doc, key: str, length: int | None = None) -> tuple[TimeExpr, ...]:
    items = doc[key]
    if not isinstance(items, list) or not all(isinstance(s, str) for s in items):
        raise ConfigError("must be an array of expression strings", key=key)
    out = []
    for i, s in enumerate(items):
        try:
            out.append(parse_time_expr(s))
        except ExprSyntaxError as exc:
            raise ConfigError(f"bad expression at index {i}: {exc}", key=key) from exc
    if length is not None and len(out) != length:
        raise ConfigError(f"expected {length} entries, got {len(out)}", key=key)
    return tuple(out)


def system_from_config(doc: dict) -> tuple[MultiOrderSystem, InitialData]:
    """Build (system, initial data) from a decoded config document."""
    unknown = sorted(set(doc) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    missing = sorted(set(CONFIG_KEYS) - set(doc))
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")

    try:
        order = MultiOrder(tuple(float(a) for a in doc["order"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad order vector: {exc}", key="order") from exc

    mats = {}
    for key in ("A", "B", "E", "C", "D"):
        try:
            mats[key] = ma.as_matrix(doc[key], key)
        except (TypeError, ValueError, DimensionError, DomainError) as exc:
            raise ConfigError(f"bad matrix: {exc}", key=key) from exc

    d = len(order)
    n = mats["E"].shape[1] if mats["E"].ndim == 2 else 0

    try:
        r = float(doc["r"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("r must be a real number", key="r") from exc

    try:
        system = MultiOrderSystem(
            order=order,
            A=mats["A"],
            B=mats["B"],
            E=mats["E"],
            C=mats["C"],
            D=mats["D"],
            f=_config_expr_list(doc, "f", d),
            g=_config_expr_list(doc, "g", n),
            tau1=_config_expr(doc, "tau1"),
            tau2=_config_expr(doc, "tau2"),
            tau3=_config_expr(doc, "tau3"),
            r=r,
        )
    except (DimensionError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc

    psi = _config_expr_list(doc, "psi", d)
    phi_spec = doc["phi"]
    if phi_spec == "derived":
        init = derived_initial_data(system, psi)
    else:
        phi = _config_expr_list(doc, "phi", n)
        init = InitialData(psi=psi, phi=phi, phi_mode="explicit")
    return system, init
