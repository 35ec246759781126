"""Tiny expression language for vector-field components.

Grammar (EBNF, also documented in the README):

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;            (* right-associative *)
    atom    = NUMBER | IDENT | IDENT "(" expr { "," expr } ")" | "(" expr ")" ;

Identifiers must be declared state variables or the reserved time symbol
``t``.  There is no implicit multiplication: ``2u`` is a syntax error.
Evaluation is total over IEEE doubles; domain errors produce NaN/inf
rather than exceptions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

__all__ = [
    "Ast",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "FUNCTIONS",
    "parse_expression",
    "eval_ast",
    "to_source",
    "compile_scalar",
    "compile_numpy",
    "variables_used",
    "uses_time",
]

# function name -> arity
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "min": 2,
    "max": 2,
}

TIME_SYMBOL = "t"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ExprError(ValueError):
    """Base class for expression errors; carries the source offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier `{name}`", offset)
        self.name = name


class ArityError(ExprError):
    def __init__(self, name: str, expected: int, got: int, offset: int):
        super().__init__(
            f"function `{name}` takes {expected} argument(s), got {got}", offset
        )
        self.name = name


# --- AST -------------------------------------------------------------------


# spans are provenance only: excluded from equality so structurally equal
# trees compare equal regardless of where they were parsed from
@dataclass(frozen=True)
class Ast:
    span: tuple[int, int] = field(repr=False, compare=False)


@dataclass(frozen=True)
class Const(Ast):
    value: float


@dataclass(frozen=True)
class Var(Ast):
    name: str
    index: int  # position in the declared variable list, -1 for `t`


@dataclass(frozen=True)
class Unary(Ast):
    op: str  # "-"
    child: Ast


@dataclass(frozen=True)
class Binary(Ast):
    op: str  # + - * / ^
    left: Ast
    right: Ast


@dataclass(frozen=True)
class Call(Ast):
    func: str
    args: tuple[Ast, ...]


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[+\-*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], variables: list[str]):
        self.tokens = tokens
        self.i = 0
        self.var_index = {name: k for k, name in enumerate(variables)}

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            got = tok.text if tok.kind != "end" else "end of input"
            raise ExprSyntaxError(f"expected `{text}`, got {got!r}", tok.pos)
        return self.advance()

    def parse(self) -> Ast:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(
                f"expected end of input or operator, got {tok.text!r}", tok.pos
            )
        return node

    def expr(self) -> Ast:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            right = self.term()
            node = Binary((node.span[0], right.span[1]), op, node, right)
        return node

    def term(self) -> Ast:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            right = self.unary()
            node = Binary((node.span[0], right.span[1]), op, node, right)
        return node

    def unary(self) -> Ast:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            child = self.unary()
            return Unary((tok.pos, child.span[1]), "-", child)
        return self.power()

    def power(self) -> Ast:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.unary()  # right-assoc, exponent may carry unary minus
            return Binary((base.span[0], exponent.span[1]), "^", base, exponent)
        return base

    def atom(self) -> Ast:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Const((tok.pos, tok.pos + len(tok.text)), float(tok.text))
        if tok.kind == "name":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                return self.call(tok)
            if tok.text == TIME_SYMBOL:
                return Var((tok.pos, tok.pos + len(tok.text)), tok.text, -1)
            if tok.text in self.var_index:
                return Var(
                    (tok.pos, tok.pos + len(tok.text)),
                    tok.text,
                    self.var_index[tok.text],
                )
            raise UnknownIdentifierError(tok.text, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            close = self.expect_op(")")
            return _respan(node, (tok.pos, close.pos + 1))
        got = tok.text if tok.kind != "end" else "end of input"
        raise ExprSyntaxError(f"expected number, identifier or `(`, got {got!r}", tok.pos)

    def call(self, name_tok: _Token) -> Ast:
        if name_tok.text not in FUNCTIONS:
            raise UnknownIdentifierError(name_tok.text, name_tok.pos)
        self.expect_op("(")
        args = [self.expr()]
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.expr())
        close = self.expect_op(")")
        expected = FUNCTIONS[name_tok.text]
        if len(args) != expected:
            raise ArityError(name_tok.text, expected, len(args), name_tok.pos)
        return Call((name_tok.pos, close.pos + 1), name_tok.text, tuple(args))


def _respan(node: Ast, span: tuple[int, int]) -> Ast:
    cls = type(node)
    fields = {k: v for k, v in vars(node).items() if k != "span"}
    return cls(span, **fields)


def parse_expression(source: str, variables: list[str]) -> Ast:
    """Parse ``source`` over the declared ``variables`` (plus the time symbol)."""
    if not variables:
        raise ValueError("variable list must be nonempty")
    if len(set(variables)) != len(variables):
        raise ValueError("variable names must be distinct")
    for name in variables:
        if not _NAME_RE.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        if name == TIME_SYMBOL:
            raise ValueError("`t` is reserved for time and cannot be a state variable")
    return _Parser(_tokenize(source), list(variables)).parse()


# --- evaluation ------------------------------------------------------------
#
# All primitives are total: domain errors yield NaN, overflow yields inf.
# The compiled fast path (compile_scalar) reuses exactly these helpers so
# tree-walk and compiled evaluation are bit-identical.

_NAN = float("nan")
_INF = float("inf")


def _pow(a: float, b: float) -> float:
    if a == 0.0 and b == 0.0:
        return 1.0
    try:
        return math.pow(a, b)
    except ValueError:
        return _NAN
    except OverflowError:
        return _INF


def _div(a: float, b: float) -> float:
    if b != 0.0:
        return a / b
    if a != a or a == 0.0:
        return _NAN
    return math.copysign(_INF, a) * math.copysign(1.0, b)


def _log(x: float) -> float:
    if x > 0:
        return math.log(x)
    if x == 0.0:
        return -_INF
    return _NAN


def _sqrt(x: float) -> float:
    if x >= 0:
        return math.sqrt(x)
    return _NAN


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return _INF


_SCALAR_ENV = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": abs,
    "min": min,
    "max": max,
    "_pow": _pow,
    "_div": _div,
}


def eval_ast(ast: Ast, state, time: float = 0.0) -> float:
    """Evaluate an Ast at the given state vector and time."""
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        return float(time) if ast.index < 0 else float(state[ast.index])
    if isinstance(ast, Unary):
        return -eval_ast(ast.child, state, time)
    if isinstance(ast, Binary):
        a = eval_ast(ast.left, state, time)
        b = eval_ast(ast.right, state, time)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if ast.op == "/":
            return _div(a, b)
        return _pow(a, b)
    if isinstance(ast, Call):
        args = [eval_ast(arg, state, time) for arg in ast.args]
        return _SCALAR_ENV[ast.func](*args)
    raise TypeError(f"not an Ast node: {ast!r}")


# --- pretty printing -------------------------------------------------------


def to_source(ast: Ast) -> str:
    """Serialize an Ast back to source text.

    Output is fully parenthesized around operators, so re-parsing yields a
    structurally identical tree.
    """
    if isinstance(ast, Const):
        return repr(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Unary):
        return f"(-{to_source(ast.child)})"
    if isinstance(ast, Binary):
        return f"({to_source(ast.left)} {ast.op} {to_source(ast.right)})"
    if isinstance(ast, Call):
        return f"{ast.func}({', '.join(to_source(a) for a in ast.args)})"
    raise TypeError(f"not an Ast node: {ast!r}")


def variables_used(ast: Ast) -> set[str]:
    out: set[str] = set()
    _collect_vars(ast, out)
    return out


def _collect_vars(ast: Ast, out: set[str]) -> None:
    if isinstance(ast, Var):
        out.add(ast.name)
    elif isinstance(ast, Unary):
        _collect_vars(ast.child, out)
    elif isinstance(ast, Binary):
        _collect_vars(ast.left, out)
        _collect_vars(ast.right, out)
    elif isinstance(ast, Call):
        for a in ast.args:
            _collect_vars(a, out)


def uses_time(ast: Ast) -> bool:
    return TIME_SYMBOL in variables_used(ast)


# --- compilation -----------------------------------------------------------


def _emit(ast: Ast, state_name: str, time_name: str) -> str:
    if isinstance(ast, Const):
        return repr(ast.value)
    if isinstance(ast, Var):
        return time_name if ast.index < 0 else f"{state_name}[{ast.index}]"
    if isinstance(ast, Unary):
        return f"(-{_emit(ast.child, state_name, time_name)})"
    if isinstance(ast, Binary):
        a = _emit(ast.left, state_name, time_name)
        b = _emit(ast.right, state_name, time_name)
        if ast.op == "/":
            return f"_div({a}, {b})"
        if ast.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {ast.op} {b})"
    if isinstance(ast, Call):
        args = ", ".join(_emit(a, state_name, time_name) for a in ast.args)
        return f"{ast.func}({args})"
    raise TypeError(f"not an Ast node: {ast!r}")


def compile_scalar(ast: Ast):
    """Compile an Ast into a fast callable ``f(state, time) -> float``.

    Bit-identical with :func:`eval_ast` (same guarded primitives, same
    operation order).
    """
    source = f"lambda _u, _t: {_emit(ast, '_u', '_t')}"
    return eval(source, dict(_SCALAR_ENV))  # noqa: S307 - generated from our own Ast


def _numpy_env():
    import numpy as np

    def np_pow(a, b):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            out = np.power(a, b)
        # 0^0 -> 1 matches the scalar convention (numpy already does this)
        return out

    def np_div(a, b):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.true_divide(a, b)

    def np_log(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.log(x)

    def np_sqrt(x):
        with np.errstate(invalid="ignore"):
            return np.sqrt(x)

    return {
        "sin": np.sin,
        "cos": np.cos,
        "exp": np.exp,
        "log": np_log,
        "sqrt": np_sqrt,
        "abs": np.abs,
        "min": np.minimum,
        "max": np.maximum,
        "_pow": np_pow,
        "_div": np_div,
    }


def compile_numpy(ast: Ast):
    """Compile an Ast into a vectorized callable ``f(state_rows, time)``.

    ``state_rows`` is indexable by variable position; each entry may be a
    numpy array (one value per grid node).  Used by the PDE stepper.
    """
    source = f"lambda _u, _t: {_emit(ast, '_u', '_t')}"
    return eval(source, _numpy_env())  # noqa: S307
