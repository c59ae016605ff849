"""
Expression language for continuous functions on the unit circle.

Grammar, loosest to tightest binding:

    expr   := expr ('+' | '-') expr          left associative
            | expr ('*' | '/') expr          left associative
            | '-' expr                       unary minus
            | expr '^' ['-'] INT             integer exponent
            | NUMBER | '(' NUMBER ',' NUMBER ')' | 'z'
            | NAME '(' expr ')'              conj re im abs exp cos sin logabs
            | '(' expr ')'

`logabs(e)` is log|e|. On the circle z^(-k) is evaluated as conj(z)^k.
Plain numbers are real; complex literals are written (a,b).
"""

import logging
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Union

import numpy as np
from pydantic import BaseModel

from app.config import POLE_EVAL_EPS, POLE_GRID_M, POLE_MIN_MODULUS
from app.core.exceptions import ExprSyntaxError, PoleError, UnknownFunctionError

if TYPE_CHECKING:
    from app.core.fejer import CircleGrid

logger = logging.getLogger(__name__)

FUNCTIONS = ("conj", "re", "im", "abs", "exp", "cos", "sin", "logabs")
CIRCLE_TOL = 1e-12


# --- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Literal, Var, Neg, BinOp, Pow, Call]


# --- Tokenizer ---------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # NUM, IDENT, OP, END
    text: str
    offset: int


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPERATORS = "+-*/^(),"


def tokenize(src: str) -> List[Token]:
    for i, ch in enumerate(src):
        if not ch.isascii():
            raise ExprSyntaxError("only ASCII input is supported", len(src[:i].encode()))
    tokens: List[Token] = []
    pos = 0
    while pos < len(src):
        ch = src[pos]
        if ch.isspace():
            pos += 1
            continue
        match = _NUMBER.match(src, pos)
        if match:
            tokens.append(Token("NUM", match.group(), pos))
            pos = match.end()
            continue
        match = _IDENT.match(src, pos)
        if match:
            tokens.append(Token("IDENT", match.group(), pos))
            pos = match.end()
            continue
        if ch in _OPERATORS:
            tokens.append(Token("OP", ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(Token("END", "", len(src)))
    return tokens


# --- Pratt parser ------------------------------------------------------------

BINDING_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
PREFIX_MINUS_BP = 30


class Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "END":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.advance()
        if tok.text != text or tok.kind == "END":
            found = "end of input" if tok.kind == "END" else repr(tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return tok

    def lbp(self, tok: Token) -> int:
        if tok.kind == "OP":
            return BINDING_POWER.get(tok.text, 0)
        return 0

    def parse(self) -> Expr:
        expr = self.expression(0)
        tok = self.peek()
        if tok.kind != "END":
            raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.offset)
        return expr

    def expression(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.peek()):
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: Token) -> Expr:
        if tok.kind == "END":
            raise ExprSyntaxError("unexpected end of input", tok.offset)
        if tok.kind == "NUM":
            value = float(tok.text)
            if not np.isfinite(value):
                raise ExprSyntaxError(f"numeric literal {tok.text!r} is out of range", tok.offset)
            return Literal(complex(value))
        if tok.kind == "IDENT":
            return self.identifier(tok)
        if tok.text == "-":
            return Neg(self.expression(PREFIX_MINUS_BP))
        if tok.text == "(":
            return self.group(tok)
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.offset)

    def identifier(self, tok: Token) -> Expr:
        nxt = self.peek()
        if tok.text == "z":
            return Var()
        if nxt.kind == "OP" and nxt.text == "(":
            if tok.text not in FUNCTIONS:
                raise UnknownFunctionError(tok.text, tok.offset)
            self.advance()
            arg = self.expression(0)
            self.expect(")")
            return Call(tok.text, arg)
        if tok.text in FUNCTIONS:
            raise ExprSyntaxError(f"function {tok.text!r} needs an argument", nxt.offset)
        raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)

    def group(self, open_tok: Token) -> Expr:
        first = self.expression(0)
        nxt = self.peek()
        if nxt.kind == "OP" and nxt.text == ",":
            self.advance()
            second_tok = self.peek()
            second = self.expression(0)
            self.expect(")")
            re_part = _real_constant(first)
            im_part = _real_constant(second)
            if re_part is None:
                raise ExprSyntaxError("complex literal parts must be real numbers", open_tok.offset + 1)
            if im_part is None:
                raise ExprSyntaxError("complex literal parts must be real numbers", second_tok.offset)
            return Literal(complex(re_part, im_part))
        self.expect(")")
        return first

    def led(self, tok: Token, left: Expr) -> Expr:
        if tok.text == "^":
            return Pow(left, self.exponent())
        right = self.expression(BINDING_POWER[tok.text])
        return BinOp(tok.text, left, right)

    def exponent(self) -> int:
        tok = self.advance()
        parenthesized = tok.kind == "OP" and tok.text == "("
        if parenthesized:
            tok = self.advance()
        sign = 1
        if tok.kind == "OP" and tok.text == "-":
            sign = -1
            tok = self.advance()
        if tok.kind != "NUM" or not tok.text.isdigit():
            found = "end of input" if tok.kind == "END" else repr(tok.text)
            raise ExprSyntaxError(f"exponent must be an integer literal, found {found}", tok.offset)
        if parenthesized:
            self.expect(")")
        return sign * int(tok.text)


def _real_constant(expr: Expr) -> Optional[float]:
    if isinstance(expr, Literal) and expr.value.imag == 0:
        return expr.value.real
    if isinstance(expr, Neg) and isinstance(expr.operand, Literal) and expr.operand.value.imag == 0:
        return -expr.operand.value.real
    return None


def parse(src: str) -> Expr:
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    return Parser(src).parse()


# --- Printer -----------------------------------------------------------------

def _format_literal(value: complex) -> str:
    re_part, im_part = value.real, value.imag
    if im_part == 0 and not np.signbit(im_part) and re_part >= 0 and not np.signbit(re_part):
        return repr(re_part)
    return f"({re_part!r},{im_part!r})"


def to_source(expr: Expr) -> str:
    if isinstance(expr, Literal):
        return _format_literal(expr.value)
    if isinstance(expr, Var):
        return "z"
    if isinstance(expr, Neg):
        return f"(-{to_source(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({to_source(expr.left)} {expr.op} {to_source(expr.right)})"
    if isinstance(expr, Pow):
        return f"({to_source(expr.base)} ^ {expr.exponent})"
    if isinstance(expr, Call):
        return f"{expr.name}({to_source(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


# --- Evaluation --------------------------------------------------------------

def _guard(values: np.ndarray, strict: bool, what: str) -> None:
    if strict and np.any(np.abs(values) < POLE_EVAL_EPS):
        raise PoleError(f"pole hit: {what} has modulus below {POLE_EVAL_EPS:g}")


def _eval(expr: Expr, z: np.ndarray, strict: bool) -> np.ndarray:
    if isinstance(expr, Literal):
        return np.full(z.shape, expr.value, dtype=complex)
    if isinstance(expr, Var):
        return z
    if isinstance(expr, Neg):
        return -_eval(expr.operand, z, strict)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, z, strict)
        right = _eval(expr.right, z, strict)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        _guard(right, strict, "denominator")
        with np.errstate(divide="ignore", invalid="ignore"):
            return left / right
    if isinstance(expr, Pow):
        n = expr.exponent
        if n >= 0:
            return _eval(expr.base, z, strict) ** n
        if isinstance(expr.base, Var):
            return np.conj(z) ** (-n)
        base = _eval(expr.base, z, strict)
        _guard(base, strict, "base of negative power")
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / base ** (-n)
    if isinstance(expr, Call):
        arg = _eval(expr.arg, z, strict)
        if expr.name == "conj":
            return np.conj(arg)
        if expr.name == "re":
            return arg.real.astype(complex)
        if expr.name == "im":
            return arg.imag.astype(complex)
        if expr.name == "abs":
            return np.abs(arg).astype(complex)
        if expr.name == "exp":
            return np.exp(arg)
        if expr.name == "cos":
            return np.cos(arg)
        if expr.name == "sin":
            return np.sin(arg)
        if expr.name == "logabs":
            _guard(arg, strict, "logabs argument")
            with np.errstate(divide="ignore"):
                return np.log(np.abs(arg)).astype(complex)
    raise TypeError(f"not an expression node: {expr!r}")


def _check_on_circle(z: np.ndarray) -> None:
    if np.any(np.abs(np.abs(z) - 1.0) > CIRCLE_TOL):
        raise ValueError("evaluation points must lie on the unit circle")


def evaluate(expr: Expr, z):
    """Evaluate at a point (or array of points) of the unit circle."""
    arr = np.asarray(z, dtype=complex)
    _check_on_circle(arr)
    out = _eval(expr, np.atleast_1d(arr), strict=True)
    if arr.ndim == 0:
        return complex(out[0])
    return out


# --- Pole check --------------------------------------------------------------

def singular_subexpressions(expr: Expr) -> List[Expr]:
    """Denominators, bases of negative powers and logabs arguments."""
    found: List[Expr] = []

    def walk(node: Expr) -> None:
        if isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
            if node.op == "/":
                found.append(node.right)
        elif isinstance(node, Pow):
            walk(node.base)
            if node.exponent < 0 and not isinstance(node.base, Var):
                found.append(node.base)
        elif isinstance(node, Call):
            walk(node.arg)
            if node.name == "logabs":
                found.append(node.arg)

    walk(expr)
    return found


class PoleReport(BaseModel):
    min_denominator_modulus: float
    passed: bool
    grid_size: int
    denominators: int


def pole_check(expr: Expr, grid: Optional["CircleGrid"] = None) -> PoleReport:
    from app.core.fejer import CircleGrid

    if grid is None or grid.M < POLE_GRID_M:
        grid = CircleGrid(M=POLE_GRID_M)
    z = grid.points()
    denominators = singular_subexpressions(expr)
    min_modulus = float("inf")
    with np.errstate(all="ignore"):
        for node in denominators:
            values = _eval(node, z, strict=False)
            modulus = np.where(np.isfinite(values), np.abs(values), 0.0)
            min_modulus = min(min_modulus, float(np.min(modulus)))
    report = PoleReport(
        min_denominator_modulus=min_modulus,
        passed=min_modulus > POLE_MIN_MODULUS,
        grid_size=grid.M,
        denominators=len(denominators),
    )
    if not report.passed:
        logger.warning("Pole check failed for %s: min modulus %.3e", to_source(expr), min_modulus)
    return report


# --- Builtins and CircleFunction ---------------------------------------------

BUILTIN_NAMES = ("one", "z", "re_z", "exp_z", "inv_shift", "power")
_BUILTIN_SPEC = re.compile(r"^\s*(one|z|re_z|exp_z)\s*$|^\s*(inv_shift|power)\s*\((.+)\)\s*$")


@dataclass(frozen=True)
class Builtin:
    name: str
    param: Optional[Union[complex, int]] = None

    def __post_init__(self):
        if self.name not in BUILTIN_NAMES:
            raise UnknownFunctionError(self.name, 0)
        if self.name == "inv_shift":
            if self.param is None or abs(abs(complex(self.param)) - 1.0) <= POLE_MIN_MODULUS:
                raise PoleError(f"inv_shift needs |w| != 1, got w={self.param}")
        if self.name == "power" and not isinstance(self.param, (int, np.integer)):
            raise ValueError("power(n) needs an integer n")

    def closed_form(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.name == "one":
            return np.ones_like(z)
        if self.name == "z":
            return z
        if self.name == "re_z":
            return z.real.astype(complex)
        if self.name == "exp_z":
            return np.exp(z)
        if self.name == "inv_shift":
            return 1.0 / (z - complex(self.param))
        n = int(self.param)
        return z ** n if n >= 0 else np.conj(z) ** (-n)

    def to_expr(self) -> Expr:
        if self.name == "one":
            return Literal(1 + 0j)
        if self.name == "z":
            return Var()
        if self.name == "re_z":
            return Call("re", Var())
        if self.name == "exp_z":
            return Call("exp", Var())
        if self.name == "inv_shift":
            return BinOp("/", Literal(1 + 0j), BinOp("-", Var(), Literal(complex(self.param))))
        return Pow(Var(), int(self.param))

    def describe(self) -> str:
        if self.param is None:
            return self.name
        return f"{self.name}({self.param})"


class CircleFunction:
    """A continuous function on the unit circle: a builtin or a parsed expression."""

    def __init__(self, body: Union[Builtin, Expr], description: Optional[str] = None):
        self.body = body
        if description is None:
            description = body.describe() if isinstance(body, Builtin) else to_source(body)
        self.description = description

    @classmethod
    def builtin(cls, name: str, param=None) -> "CircleFunction":
        return cls(Builtin(name, param))

    @classmethod
    def from_source(cls, src: str, check_poles: bool = True) -> "CircleFunction":
        expr = parse(src)
        if check_poles:
            report = pole_check(expr)
            if not report.passed:
                raise PoleError(
                    f"{src!r} is not continuous on the unit circle: "
                    f"denominator modulus reaches {report.min_denominator_modulus:.3e}"
                )
        return cls(expr, description=src)

    @classmethod
    def resolve(cls, spec: str, check_poles: bool = True) -> "CircleFunction":
        """Builtin name (e.g. `exp_z`, `power(3)`, `inv_shift(2)`) or an expression."""
        match = _BUILTIN_SPEC.match(spec)
        if not match:
            return cls.from_source(spec, check_poles=check_poles)
        if match.group(1):
            return cls.builtin(match.group(1))
        name, arg = match.group(2), match.group(3).strip()
        if name == "power":
            if not re.fullmatch(r"-?\d+", arg):
                raise ExprSyntaxError("power(n) needs an integer literal", match.start(3))
            return cls.builtin("power", int(arg))
        literal = parse(arg)
        value = _real_constant(literal)
        if value is not None:
            return cls.builtin("inv_shift", complex(value))
        if isinstance(literal, Literal):
            return cls.builtin("inv_shift", literal.value)
        raise ExprSyntaxError("inv_shift(w) needs a numeric literal", match.start(3))

    @property
    def expr(self) -> Expr:
        return self.body.to_expr() if isinstance(self.body, Builtin) else self.body

    def on_angles(self, t) -> np.ndarray:
        z = np.exp(1j * np.atleast_1d(np.asarray(t, dtype=float)))
        if isinstance(self.body, Builtin):
            return self.body.closed_form(z)
        return _eval(self.body, z, strict=True)

    def __call__(self, z):
        arr = np.asarray(z, dtype=complex)
        _check_on_circle(arr)
        flat = np.atleast_1d(arr)
        if isinstance(self.body, Builtin):
            out = self.body.closed_form(flat)
        else:
            out = _eval(self.body, flat, strict=True)
        return complex(out[0]) if arr.ndim == 0 else out

    def conjugate(self) -> "CircleFunction":
        return CircleFunction(Call("conj", self.expr), description=f"conj({self.description})")

    def __mul__(self, other: "CircleFunction") -> "CircleFunction":
        return CircleFunction(
            BinOp("*", self.expr, other.expr),
            description=f"({self.description})*({other.description})",
        )

    def __repr__(self) -> str:
        return f"CircleFunction({self.description!r})"
