import math
import random

import pytest

from oracle_expr import OracleError, oracle_eval
from varigap.expr import (
    BinOp,
    Call,
    Compare,
    EvalError,
    ExprError,
    Neg,
    Num,
    Var,
    evaluate,
    parse,
    pretty_print,
)


def test_single_operator_ast():
    assert parse("v^2") == BinOp("^", Var("v"), Num(2.0))


def test_gap_expression_ast_shape():
    node = parse("if(y==0, 1, (v^2 - 1/(4*y^2))^2 * v^2)")
    assert isinstance(node, Call) and node.func == "if"
    cond, then, other = node.args
    assert cond == Compare("==", Var("y"), Num(0.0))
    assert then == Num(1.0)
    assert isinstance(other, BinOp) and other.op == "*"


def test_syntax_error_position():
    with pytest.raises(ExprError) as err:
        parse("1 + * 2")
    assert err.value.position == 5


def test_unknown_identifier_and_arity():
    with pytest.raises(ExprError, match="unknown identifier"):
        parse("z + 1", context="lagrangian")
    with pytest.raises(ExprError, match="argument"):
        parse("min(1)")
    with pytest.raises(ExprError, match="unknown function"):
        parse("tan(1)")
    with pytest.raises(ExprError, match="comparison"):
        parse("if(y, 1, 2)")


def test_rho_context_variables():
    assert parse("z^2 + 1", context="rho") == BinOp(
        "+", BinOp("^", Var("z"), Num(2.0)), Num(1.0)
    )
    with pytest.raises(ExprError):
        parse("y", context="rho")


def test_precedence_and_associativity():
    # ^ binds tighter than unary minus; ^ is right-associative
    assert parse("-y^2") == Neg(BinOp("^", Var("y"), Num(2.0)))
    assert parse("2^3^2") == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))
    assert evaluate(parse("2^3^2"), {}) == 512.0
    assert parse("2^-3") == BinOp("^", Num(2.0), Neg(Num(3.0)))
    assert evaluate(parse("1 - 2 - 3"), {}) == -4.0
    assert evaluate(parse("8 / 4 / 2"), {}) == 1.0
    assert evaluate(parse("1 + 2 * 3"), {}) == 7.0


ROUND_TRIP_CORPUS = [
    "1",
    "0.5",
    "1e-09",
    "y",
    "v",
    "-y",
    "--y",
    "y + v",
    "y - v",
    "y * v",
    "y / v",
    "y ^ v",
    "y + v + 1",
    "y - (v - 1)",
    "(y + v) * 2",
    "y * (v + 1)",
    "y / (v * 2)",
    "-(y + v)",
    "-y * v",
    "(-y)^2",
    "-y^2",
    "2^-3",
    "y^2^3",
    "(y^2)^3",
    "abs(v)",
    "sqrt(abs(y))",
    "exp(-y^2)",
    "log(1 + y^2)",
    "min(y, v)",
    "max(y, -v)",
    "min(max(y, 0), 1)",
    "if(y==0, 1, v)",
    "if(y!=0, 1/y, 0)",
    "if(y<0, -y, y)",
    "if(y<=v, y, v)",
    "if(y>v, y, v)",
    "if(y>=0, sqrt(y), 0)",
    "if(y==0, 1, (v^2 - 1/(4*y^2))^2 * v^2)",
    "v^2",
    "v^2 + y^2",
    "v^2 * (1 + y^2)",
    "1/(4*y^2)",
    "(v^2 - 1/(4*y^2))^2",
    "3.5 * y - 2.25",
    "y*v + y/v - y^v",
    "2 * -y",
    "abs(y - v) ^ 1.5",
    "exp(y) * exp(-y)",
    "sqrt(y^2 + v^2)",
    "max(abs(y), abs(v)) * 2",
    "if(abs(y)<1e-12, 0, v/y)",
    "1 + 2 + 3 + 4 + 5",
    "((y))",
]


@pytest.mark.parametrize("text", ROUND_TRIP_CORPUS)
def test_pretty_print_round_trip(text):
    node = parse(text)
    printed = pretty_print(node)
    assert parse(printed) == node
    # and the printer is a fixed point on its own output
    assert pretty_print(parse(printed)) == printed


def test_division_by_zero_conventions():
    assert evaluate(parse("1/y"), {"y": 0.0}) == math.inf
    with pytest.raises(EvalError):
        evaluate(parse("-1/y"), {"y": 0.0})  # wrong-signed numerator
    with pytest.raises(EvalError):
        evaluate(parse("y/v"), {"y": 0.0, "v": 0.0})  # 0/0


def test_indeterminate_forms_error():
    with pytest.raises(EvalError):
        evaluate(parse("(1/y) - (1/y)"), {"y": 0.0})  # inf - inf
    with pytest.raises(EvalError):
        evaluate(parse("(1/y) * v"), {"y": 0.0, "v": 0.0})  # inf * 0
    with pytest.raises(EvalError):
        evaluate(parse("(1/y) / (1/v)"), {"y": 0.0, "v": 0.0})  # inf / inf
    with pytest.raises(EvalError):
        evaluate(parse("(-2)^0.5"), {})
    with pytest.raises(EvalError):
        evaluate(parse("sqrt(-1)"), {})
    with pytest.raises(EvalError):
        evaluate(parse("log(-1)"), {})


def test_lazy_conditional_guards_untaken_branch():
    gap = parse("if(y==0, 1, (v^2 - 1/(4*y^2))^2 * v^2)")
    assert evaluate(gap, {"y": 0.0, "v": 5.0}) == 1.0
    # untaken guard in the other direction
    assert evaluate(parse("if(y!=0, 1/y, 7)"), {"y": 0.0}) == 7.0


def test_extended_limits():
    assert evaluate(parse("log(y)"), {"y": 0.0}) == -math.inf
    assert evaluate(parse("exp(log(y))"), {"y": 0.0}) == 0.0
    assert evaluate(parse("1/(1/y)"), {"y": 0.0}) == 0.0


# ---------------------------------------------------------------------------
# Random ASTs against the independent oracle
# ---------------------------------------------------------------------------

_FUNCS1 = ["abs", "sqrt", "exp", "log"]


def _random_ast(rng: random.Random, depth: int):
    if depth <= 0:
        pick = rng.random()
        if pick < 0.4:
            return Var(rng.choice(["y", "v"]))
        return Num(round(rng.uniform(-4, 4), 3))
    pick = rng.random()
    if pick < 0.55:
        op = rng.choice(["+", "-", "*", "/", "^"])
        right = _random_ast(rng, depth - 1)
        if op == "^":
            # keep exponents small so overflow paths stay exercised but rare
            right = Num(float(rng.choice([0, 1, 2, 3, 0.5, -1, -2])))
        return BinOp(op, _random_ast(rng, depth - 1), right)
    if pick < 0.65:
        return Neg(_random_ast(rng, depth - 1))
    if pick < 0.85:
        func = rng.choice(_FUNCS1)
        return Call(func, (_random_ast(rng, depth - 1),))
    if pick < 0.93:
        func = rng.choice(["min", "max"])
        return Call(func, (_random_ast(rng, depth - 1), _random_ast(rng, depth - 1)))
    cond = Compare(
        rng.choice(["==", "!=", "<", "<=", ">", ">="]),
        _random_ast(rng, 0),
        _random_ast(rng, 0),
    )
    return Call("if", (cond, _random_ast(rng, depth - 1), _random_ast(rng, depth - 1)))


def test_random_asts_match_oracle_exactly():
    rng = random.Random(123)
    points = 0
    agreements = 0
    while points < 10_000:
        node = _random_ast(rng, rng.randint(1, 5))
        for _ in range(25):
            env = {"y": rng.uniform(-10, 10), "v": rng.uniform(-10, 10)}
            if rng.random() < 0.1:
                env[rng.choice(["y", "v"])] = 0.0
            points += 1
            try:
                mine = evaluate(node, env)
                mine_err = False
            except EvalError:
                mine_err = True
            try:
                theirs = oracle_eval(node, env)
                theirs_err = False
            except OracleError:
                theirs_err = True
            assert mine_err == theirs_err, f"{node} at {env}"
            if not mine_err:
                assert mine == theirs or (math.isnan(mine) and math.isnan(theirs)) is False
                assert mine == theirs, f"{node} at {env}: {mine} vs {theirs}"
                agreements += 1
    assert points >= 10_000


def _parser_reachable(node):
    """Negative literals never come out of the parser (it yields Neg(Num))."""
    if isinstance(node, Num):
        return Num(abs(node.value))
    if isinstance(node, Neg):
        return Neg(_parser_reachable(node.operand))
    if isinstance(node, BinOp):
        return BinOp(node.op, _parser_reachable(node.left), _parser_reachable(node.right))
    if isinstance(node, Compare):
        return Compare(node.op, _parser_reachable(node.left), _parser_reachable(node.right))
    if isinstance(node, Call):
        return Call(node.func, tuple(_parser_reachable(a) for a in node.args))
    return node


def test_random_asts_round_trip_through_printer():
    rng = random.Random(456)
    for _ in range(300):
        node = _parser_reachable(_random_ast(rng, rng.randint(1, 4)))
        assert parse(pretty_print(node)) == node
