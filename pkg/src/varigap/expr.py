"""Small arithmetic expression language for integrands and slope fields.

Grammar (precedence low to high): ``+ -``, ``* /``, unary ``-``, ``^``
(right-associative, so ``-y^2`` is ``-(y^2)`` and ``2^-3`` is legal).
Functions: ``abs, sqrt, exp, log, min, max`` and the lazy conditional
``if(cond, a, b)`` whose condition is a comparison (`== != < <= > >=`).

Evaluation works over the extended reals.  Division by zero yields +inf
when the numerator is positive (the only limit consistent with a
nonnegative integrand); every indeterminate form (0/0, 0*inf, inf-inf,
inf/inf, negative base with fractional exponent, sqrt/log of a negative)
is a hard :class:`EvalError`, never a NaN.  The untaken branch of ``if``
is not evaluated, so a guard like ``if(y==0, 1, .../y^2)`` is total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ExprError(ValueError):
    """Parse-time failure, with a 1-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (position {position})")
        self.message = message
        self.position = position


class EvalError(ArithmeticError):
    """Runtime failure: indeterminate form or domain violation."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Compare:
    op: str  # one of == != < <= > >=
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Node = Num | Var | Neg | BinOp | Compare | Call

FUNCTIONS = {"abs": 1, "sqrt": 1, "exp": 1, "log": 1, "min": 2, "max": 2, "if": 3}

CONTEXT_VARS = {"lagrangian": ("y", "v"), "rho": ("z",)}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TWO_CHAR = ("==", "!=", "<=", ">=")
_ONE_CHAR = "+-*/^(),<>"


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int  # 1-based position of first character


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        pos = i + 1
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            tokens.append(_Token("num", text[i:j], pos))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], pos))
            i = j
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR:
            tokens.append(_Token("op", two, pos))
            i += 2
            continue
        if ch in _ONE_CHAR:
            tokens.append(_Token("op", ch, pos))
            i += 1
            continue
        raise ExprError(f"unexpected character {ch!r}", pos)
    tokens.append(_Token("end", "", n + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent)
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], variables: tuple[str, ...]):
        self.tokens = tokens
        self.variables = variables
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise ExprError(f"expected {text!r}", tok.pos)
        return self.advance()

    def parse_expression(self) -> Node:
        node = self.parse_multiplicative()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            right = self.parse_multiplicative()
            node = BinOp(op, node, right)
        return node

    def parse_multiplicative(self) -> Node:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            right = self.parse_unary()
            node = BinOp(op, node, right)
        return node

    def parse_unary(self) -> Node:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            # exponent slot admits unary minus, Python-style
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.peek().kind == "op" and self.peek().text == "(":
                return self.parse_call(tok)
            if tok.text in FUNCTIONS:
                raise ExprError(f"function {tok.text!r} requires arguments", tok.pos)
            if tok.text not in self.variables:
                raise ExprError(f"unknown identifier {tok.text!r}", tok.pos)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_expression()
            self.expect(")")
            return node
        raise ExprError("expected a number, identifier or '('", tok.pos)

    def parse_call(self, name_tok: _Token) -> Node:
        name = name_tok.text
        if name not in FUNCTIONS:
            raise ExprError(f"unknown function {name!r}", name_tok.pos)
        arity = FUNCTIONS[name]
        self.expect("(")
        args = []
        if name == "if":
            args.append(self.parse_comparison())
        else:
            args.append(self.parse_expression())
        while self.peek().kind == "op" and self.peek().text == ",":
            self.advance()
            args.append(self.parse_expression())
        self.expect(")")
        if len(args) != arity:
            raise ExprError(
                f"{name!r} takes {arity} argument(s), got {len(args)}", name_tok.pos
            )
        return Call(name, tuple(args))

    def parse_comparison(self) -> Node:
        left = self.parse_expression()
        tok = self.peek()
        if tok.kind != "op" or tok.text not in ("==", "!=", "<", "<=", ">", ">="):
            raise ExprError("expected a comparison operator", tok.pos)
        self.advance()
        right = self.parse_expression()
        return Compare(tok.text, left, right)


def parse(text: str, context: str = "lagrangian") -> Node:
    """Parse ``text`` with the variables of ``context`` in scope.

    context "lagrangian" admits y and v; context "rho" admits z.
    """
    if context not in CONTEXT_VARS:
        raise ValueError(f"unknown context {context!r}")
    return parse_with_variables(text, CONTEXT_VARS[context])


def parse_with_variables(text: str, variables: tuple[str, ...]) -> Node:
    parser = _Parser(_tokenize(text), variables)
    node = parser.parse_expression()
    tail = parser.peek()
    if tail.kind != "end":
        raise ExprError(f"unexpected trailing input {tail.text!r}", tail.pos)
    return node


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _fmt_num(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def pretty_print(node: Node) -> str:
    """Render a parseable string; parse(pretty_print(parse(s))) == parse(s)."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = pretty_print(node.operand)
        if _prec(node.operand) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        lp, rp = _prec(node.left), _prec(node.right)
        left, right = pretty_print(node.left), pretty_print(node.right)
        if node.op == "^":
            # left operand of ^ must be an atom; exponent slot admits unary -
            if lp <= _PREC_POW:
                left = f"({left})"
            if rp < _PREC_NEG:
                right = f"({right})"
            return f"{left}^{right}"
        my = _PREC_ADD if node.op in "+-" else _PREC_MUL
        if lp < my:
            left = f"({left})"
        # print as non-associative on the right to keep trees stable
        if rp <= my:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Compare):
        return f"{pretty_print(node.left)} {node.op} {pretty_print(node.right)}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(pretty_print(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Evaluator over the extended reals
# ---------------------------------------------------------------------------


def _add(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and (a > 0) != (b > 0):
        raise EvalError("indeterminate form inf - inf")
    return a + b


def _sub(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0):
        raise EvalError("indeterminate form inf - inf")
    return a - b


def _mul(a: float, b: float) -> float:
    if (a == 0.0 and math.isinf(b)) or (b == 0.0 and math.isinf(a)):
        raise EvalError("indeterminate form 0 * inf")
    return a * b


def _div(a: float, b: float) -> float:
    if b == 0.0:
        if a > 0.0:
            return math.inf
        raise EvalError("division by zero with nonpositive numerator")
    if math.isinf(a) and math.isinf(b):
        raise EvalError("indeterminate form inf / inf")
    return a / b


def _pow(a: float, b: float) -> float:
    # IEEE-style conventions keep pow total where a limit is unambiguous.
    if a == 1.0 or b == 0.0:
        return 1.0
    if math.isinf(b):
        absa = abs(a)
        if absa == 1.0:
            return 1.0
        if absa > 1.0:
            return math.inf if b > 0 else 0.0
        return 0.0 if b > 0 else math.inf
    if math.isinf(a):
        odd = b == int(b) and int(b) % 2 == 1
        if a > 0:
            return math.inf if b > 0 else 0.0
        if b > 0:
            return -math.inf if odd else math.inf
        return 0.0
    if a == 0.0:
        # 0^negative follows the x/0 convention (limit from 0+)
        return 0.0 if b > 0 else math.inf
    if a < 0.0 and b != int(b):
        raise EvalError("negative base with fractional exponent")
    try:
        return a**b
    except OverflowError:
        odd = b == int(b) and int(b) % 2 == 1
        return -math.inf if (a < 0 and odd) else math.inf
    except ZeroDivisionError:  # pragma: no cover - guarded above
        return math.inf


def _sqrt(a: float) -> float:
    if a < 0.0:
        raise EvalError("sqrt of a negative value")
    if math.isinf(a):
        return math.inf
    return math.sqrt(a)


def _exp(a: float) -> float:
    if math.isinf(a):
        return math.inf if a > 0 else 0.0
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _log(a: float) -> float:
    if a < 0.0:
        raise EvalError("log of a negative value")
    if a == 0.0:
        return -math.inf
    if math.isinf(a):
        return math.inf
    return math.log(a)


def evaluate(node: Node, env: dict[str, float]) -> float:
    """Evaluate over the extended reals; raises EvalError, never NaN."""
    result = _eval(node, env)
    if math.isnan(result):  # pragma: no cover - defensive
        raise EvalError("evaluation produced NaN")
    return result


def _eval(node: Node, env: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return _add(a, b)
        if node.op == "-":
            return _sub(a, b)
        if node.op == "*":
            return _mul(a, b)
        if node.op == "/":
            return _div(a, b)
        return _pow(a, b)
    if isinstance(node, Call):
        if node.func == "if":
            cond = node.args[0]
            if _eval_compare(cond, env):
                return _eval(node.args[1], env)
            return _eval(node.args[2], env)
        args = [_eval(a, env) for a in node.args]
        if node.func == "abs":
            return abs(args[0])
        if node.func == "sqrt":
            return _sqrt(args[0])
        if node.func == "exp":
            return _exp(args[0])
        if node.func == "log":
            return _log(args[0])
        if node.func == "min":
            return min(args)
        return max(args)
    if isinstance(node, Compare):
        raise EvalError("comparison outside an if(...) condition")
    raise TypeError(f"not an expression node: {node!r}")


def _eval_compare(node: Node, env: dict[str, float]) -> bool:
    if not isinstance(node, Compare):
        raise EvalError("if(...) condition must be a comparison")
    a = _eval(node.left, env)
    b = _eval(node.right, env)
    if node.op == "==":
        return a == b
    if node.op == "!=":
        return a != b
    if node.op == "<":
        return a < b
    if node.op == "<=":
        return a <= b
    if node.op == ">":
        return a > b
    return a >= b
