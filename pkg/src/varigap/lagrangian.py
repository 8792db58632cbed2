"""Integrand evaluators L(y, v) -> [0, +inf] and slope-field pairs.

An integrand comes either from the builtin registry or from a parsed
expression in the variables ``y`` (state) and ``v`` (velocity).  A
:class:`RhoPair` is the pair of user-supplied slope fields (expressions
in ``z``) that must satisfy ``minus(z) < 0 < plus(z)``; the sign contract
is checked on every evaluation, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import expr
from .extreal import ExtendedValue


class NonnegativityError(ArithmeticError):
    """The integrand produced a negative value at some (y, v)."""

    def __init__(self, y: float, v: float, value: float):
        super().__init__(f"nonnegativity violated: L({y!r}, {v!r}) = {value!r}")
        self.point = (y, v)
        self.value = value


class SignFailureError(ArithmeticError):
    """A slope field violated its sign contract at some z."""

    def __init__(self, side: str, z: float, value: float):
        sign = "> 0" if side == "plus" else "< 0"
        super().__init__(
            f"condition R sign failure: rho_{side}({z!r}) = {value!r}, expected {sign}"
        )
        self.side = side
        self.z = z
        self.value = value


# ---------------------------------------------------------------------------
# Builtin registry.  Each raw closure mirrors, operation for operation, the
# expression text next to it so that the closure and the parsed expression
# agree bit for bit.
# ---------------------------------------------------------------------------


def _gap_example_raw(y: float, v: float) -> float:
    if y == 0.0:
        return 1.0
    return (v**2 - 1.0 / (4.0 * y**2)) ** 2 * v**2


def _quadratic_raw(y: float, v: float) -> float:
    return v**2


def _abs_velocity_raw(y: float, v: float) -> float:
    return abs(v)


BUILTIN_SOURCES = {
    "gap_example": "if(y==0, 1, (v^2 - 1/(4*y^2))^2 * v^2)",
    "quadratic": "v^2",
    "abs_velocity": "abs(v)",
}

_BUILTIN_RAW = {
    "gap_example": _gap_example_raw,
    "quadratic": _quadratic_raw,
    "abs_velocity": _abs_velocity_raw,
}


@dataclass(frozen=True)
class Lagrangian:
    """An integrand (y, v) -> [0, +inf]."""

    source: str
    _raw: object = field(repr=False, compare=False)

    @classmethod
    def builtin(cls, name: str) -> "Lagrangian":
        if name not in _BUILTIN_RAW:
            known = ", ".join(sorted(_BUILTIN_RAW))
            raise KeyError(f"unknown builtin integrand {name!r} (known: {known})")
        return cls(source=f"builtin:{name}", _raw=_BUILTIN_RAW[name])

    @classmethod
    def from_expression(cls, text: str) -> "Lagrangian":
        node = expr.parse(text, context="lagrangian")

        def raw(y: float, v: float) -> float:
            return expr.evaluate(node, {"y": y, "v": v})

        return cls(source=text, _raw=raw)

    @classmethod
    def from_json(cls, obj: dict) -> "Lagrangian":
        if "builtin" in obj:
            return cls.builtin(obj["builtin"])
        if "expr" in obj:
            return cls.from_expression(obj["expr"])
        raise ValueError("lagrangian JSON needs a 'builtin' or 'expr' key")

    def to_json(self) -> dict:
        if self.source.startswith("builtin:"):
            return {"builtin": self.source.split(":", 1)[1]}
        return {"expr": self.source, "vars": ["y", "v"]}


def eval_L(L: Lagrangian, y: float, v: float) -> ExtendedValue:
    """Evaluate the integrand; result lives in [0, +inf].

    A negative result is a :class:`NonnegativityError` naming the point;
    indeterminate forms propagate as :class:`expr.EvalError`.
    """
    raw = L._raw(y, v)
    if raw < 0.0:
        raise NonnegativityError(y, v, raw)
    return ExtendedValue(raw)


# ---------------------------------------------------------------------------
# Slope-field pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoPair:
    """Two slope fields minus(z) < 0 < plus(z), as expressions in z."""

    minus_source: str
    plus_source: str
    minus_node: expr.Node = field(repr=False, compare=False)
    plus_node: expr.Node = field(repr=False, compare=False)
    domain: tuple[float, float] | None = None

    @classmethod
    def from_expressions(
        cls, minus: str, plus: str, domain: tuple[float, float] | None = None
    ) -> "RhoPair":
        return cls(
            minus_source=minus,
            plus_source=plus,
            minus_node=expr.parse(minus, context="rho"),
            plus_node=expr.parse(plus, context="rho"),
            domain=domain,
        )

    @classmethod
    def from_json(cls, obj: dict) -> "RhoPair":
        return cls.from_expressions(str(obj["minus"]), str(obj["plus"]))

    def to_json(self) -> dict:
        return {"minus": self.minus_source, "plus": self.plus_source}

    def with_domain(self, lo: float, hi: float) -> "RhoPair":
        return RhoPair(
            self.minus_source, self.plus_source, self.minus_node, self.plus_node, (lo, hi)
        )


def eval_rho(rho: RhoPair, side: str, z: float) -> float:
    """Evaluate one slope field at z, enforcing sign and finiteness."""
    if side not in ("plus", "minus"):
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    if rho.domain is not None:
        lo, hi = rho.domain
        if not (lo <= z <= hi):
            raise ValueError(f"z = {z!r} outside the declared domain [{lo}, {hi}]")
    node = rho.plus_node if side == "plus" else rho.minus_node
    value = expr.evaluate(node, {"z": z})
    if not math.isfinite(value):
        raise expr.EvalError(f"rho_{side}({z!r}) is not finite")
    if side == "plus" and not value > 0.0:
        raise SignFailureError(side, z, value)
    if side == "minus" and not value < 0.0:
        raise SignFailureError(side, z, value)
    return value
