"""Adaptive quadrature for real-valued integrands on bounded intervals.

Two entry points: :func:`adaptive_simpson` for smooth pieces, and
:func:`integrate` which optionally peels a left endpoint singularity off
with geometrically shrinking shells and extrapolates the remaining tail
from the observed shell ratio.  Non-convergence raises
:class:`ToleranceNotMet` carrying the best estimate so far.

The shell loop stops early once the accumulated mass plus a pessimistic
continuation is below an absolute noise floor; integrals smaller than
that floor are indistinguishable from floating-point cancellation noise
and are reported as converged at their tiny best estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NOISE_FLOOR = 1e-12
_MAX_SHELLS = 40


@dataclass(frozen=True)
class QuadConfig:
    """Accuracy contract shared by every integrator in the package."""

    tol: float = 1e-8
    cap: float = 1e12
    max_depth: int = 40
    singular_split: float = 2.0

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.cap > 1:
            raise ValueError("cap must exceed 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.singular_split > 1:
            raise ValueError("singular_split must exceed 1")


class ToleranceNotMet(ArithmeticError):
    """Requested accuracy was not reached; ``best`` is the best estimate."""

    def __init__(self, message: str, best: float):
        super().__init__(f"tolerance not met: {message} (best estimate {best!r})")
        self.best = best


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f,
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    max_depth: int = 48,
) -> float:
    """Adaptive Simpson with Richardson correction on [a, b].

    ``abs_tol`` is a whole-interval absolute budget, distributed over
    subintervals proportionally to their width.
    """
    if b <= a:
        return 0.0
    width = b - a
    failed: list[float] = []

    def recurse(x0, x1, f0, fm, f1, whole, depth):
        xm = 0.5 * (x0 + x1)
        lm = 0.5 * (x0 + xm)
        rm = 0.5 * (xm + x1)
        flm = f(lm)
        frm = f(rm)
        left = _simpson(f0, flm, fm, xm - x0)
        right = _simpson(fm, frm, f1, x1 - xm)
        err = (left + right - whole) / 15.0
        budget = rel_tol * abs(left + right) + abs_tol * (x1 - x0) / width
        if abs(err) <= budget:
            return left + right + err
        if depth >= max_depth:
            failed.append(abs(err))
            return left + right + err
        return recurse(x0, xm, f0, flm, fm, left, depth + 1) + recurse(
            xm, x1, fm, frm, f1, right, depth + 1
        )

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(fa, fm, fb, width)
    result = recurse(a, b, fa, fm, fb, whole, 0)
    if failed:
        raise ToleranceNotMet(
            f"{len(failed)} subinterval(s) exhausted depth {max_depth}", float(result)
        )
    return result


def integrate(
    f,
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    max_depth: int = 48,
    singular_left: bool = False,
    split: float = 2.0,
) -> float:
    """Integrate f over [a, b]; f may be unbounded near ``a``.

    ``abs_tol`` is the absolute budget that lets the recursion terminate
    where the integrand vanishes (e.g. at a kink of |g|).  With
    ``singular_left`` the point ``a`` itself is never evaluated: the
    interval is covered by shells [a + w/split^(k+1), a + w/split^k] and
    the tail below the last shell is extrapolated geometrically.
    """
    if b <= a:
        return 0.0
    if not singular_left:
        return adaptive_simpson(f, a, b, rel_tol=rel_tol, abs_tol=abs_tol, max_depth=max_depth)

    width = b - a
    k_noise = max(8, math.ceil(25.0 * math.log(2.0) / math.log(split)))
    shells: list[float] = []
    total = 0.0
    for k in range(_MAX_SHELLS):
        hi = a + width * split ** (-k)
        lo = a + width * split ** (-(k + 1))
        if lo == hi or lo <= a:
            break
        piece = adaptive_simpson(
            f, lo, hi, rel_tol=rel_tol, abs_tol=NOISE_FLOOR * 1e-2, max_depth=max_depth
        )
        shells.append(piece)
        total += piece
        if len(shells) >= 3:
            s0 = abs(shells[-1])
            s1 = abs(shells[-2])
            s2 = abs(shells[-3])
            if s0 == 0.0 and s1 == 0.0 and k >= 8:
                return total
            if s1 > 0.0 and s2 > 0.0:
                r1 = s0 / s1
                r2 = s1 / s2
                if r1 < 0.95 and r2 < 0.95:
                    r = max(r1, r2)
                    tail = shells[-1] * r / (1.0 - r)
                    drift = abs(r1 - r2)
                    err = s0 * drift / (1.0 - r) ** 2
                    if err <= rel_tol * max(abs(total + tail), 1e-30) + NOISE_FLOOR * 1e-3:
                        return total + tail
        if k >= k_noise and abs(total) + 64.0 * abs(shells[-1]) <= NOISE_FLOOR:
            return total
    raise ToleranceNotMet("endpoint shells exhausted without tail convergence", total)
