"""Sampling-based verdicts for the boundedness hypotheses of the toolkit.

A verdict can only ever be "no violation found at this resolution": a
grid cannot certify a supremum over a continuum.  Every verdict therefore
names its sample count and search region.  Violations, on the other hand,
come with a concrete witness point that reproduces the offending value on
direct re-evaluation.

Checks provided:

* ``check_R``      - slope fields valid and the integrand bounded along
                     their graphs over an interval;
* ``check_Ry``     - same, over the range of a given trajectory;
* ``check_B``      - integrand bounded on a rectangle of states and
                     velocities;
* ``check_zero_speed`` - integrand bounded at velocity zero (gates the
                     constant extension mode of the repair pipeline).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import EvalError, ExprError
from .extreal import ExtendedValue
from .lagrangian import Lagrangian, NonnegativityError, RhoPair, SignFailureError, eval_L, eval_rho
from .trajectory import Trajectory

STATUS_OK = "no-violation-found"
STATUS_VIOLATION = "violation"
STATUS_INVALID = "invalid-input"

_TOP_CANDIDATES = 5
_REFINE_ROUNDS = 2


@dataclass(frozen=True)
class Verdict:
    """Outcome of one sampling check.

    ``witness`` is present exactly for violations: the offending point
    (z or (y, v)) together with the value observed there.  ``sup_estimate``
    is the largest finite value seen across all samples.
    """

    status: str
    witness: dict | None
    resolution: dict
    sup_estimate: ExtendedValue | None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness,
            "resolution": self.resolution,
            "sup_estimate": None if self.sup_estimate is None else self.sup_estimate.to_json(),
        }


class _Scan:
    """Accumulates samples; remembers the sup and the top finite values."""

    def __init__(self, cap: float):
        self.cap = cap
        self.samples = 0
        self.sup = 0.0
        self.top: list[tuple[float, tuple]] = []  # (value, point)
        self.failure: Verdict | None = None

    def record(self, point: tuple, value: ExtendedValue) -> bool:
        """Returns False when scanning should stop (violation found)."""
        self.samples += 1
        if value.is_infinite or value.raw > self.cap:
            self.failure = Verdict(
                STATUS_VIOLATION,
                witness={"point": list(point), "value": value.to_json()},
                resolution={"samples": self.samples},
                sup_estimate=ExtendedValue(self.sup),
            )
            return False
        self.sup = max(self.sup, value.raw)
        self.top.append((value.raw, point))
        if len(self.top) > 4 * _TOP_CANDIDATES:
            self.top.sort(key=lambda pair: -pair[0])
            del self.top[_TOP_CANDIDATES:]
        return True

    def invalid(self, point: tuple, exc: Exception) -> None:
        detail = str(exc)
        if isinstance(exc, ExprError):
            detail = f"{exc.message} (position {exc.position})"
        self.failure = Verdict(
            STATUS_INVALID,
            witness={"point": list(point), "value": detail},
            resolution={"samples": self.samples},
            sup_estimate=ExtendedValue(self.sup),
        )

    def sign_violation(self, point: tuple, exc: SignFailureError) -> None:
        self.failure = Verdict(
            STATUS_VIOLATION,
            witness={"point": list(point), "value": str(exc)},
            resolution={"samples": self.samples},
            sup_estimate=ExtendedValue(self.sup),
        )

    def top_points(self) -> list[tuple]:
        ranked = sorted(self.top, key=lambda pair: -pair[0])
        return [point for _, point in ranked[:_TOP_CANDIDATES]]


def _grid(lo: float, hi: float, count: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def _refined_line_scan(scan: _Scan, sweep, lo: float, hi: float, samples: int) -> None:
    """Uniform sweep plus zoom passes around the largest values seen.

    Each pass re-grids a window of one previous cell around every top
    candidate, so a blow-up sitting between grid points is approached at a
    geometric rate instead of being fenced off by a shrinking window.
    """
    if not sweep(_grid(lo, hi, samples)):
        return
    cell = (hi - lo) / (samples - 1) if hi > lo else 0.0
    for _ in range(_REFINE_ROUNDS):
        if cell <= 0.0:
            return
        for (z,) in scan.top_points():
            if not sweep(_grid(max(lo, z - cell), min(hi, z + cell), samples)):
                return
        cell *= 4.0 / (samples - 1)


def _scan_graph(scan: _Scan, L: Lagrangian, rho: RhoPair, zs: np.ndarray) -> bool:
    """Sample L along both slope-field graphs; False stops the scan."""
    for z in zs:
        z = float(z)
        try:
            minus = eval_rho(rho, "minus", z)
            plus = eval_rho(rho, "plus", z)
        except SignFailureError as exc:
            scan.sign_violation((z,), exc)
            return False
        except (EvalError, ExprError, ValueError) as exc:
            scan.invalid((z,), exc)
            return False
        try:
            value = ExtendedValue(max(eval_L(L, z, minus).raw, eval_L(L, z, plus).raw))
        except (EvalError, NonnegativityError) as exc:
            scan.invalid((z,), exc)
            return False
        if not scan.record((z,), value):
            return False
    return True


def check_R(
    L: Lagrangian, rho: RhoPair, J: tuple[float, float], samples: int = 4096, cap: float = 1e12
) -> Verdict:
    """Signs of the slope fields and boundedness of L along their graphs on J.

    A uniform grid is followed by zoom passes around the largest values
    seen, so near-singular spots well between grid points still surface.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lo, hi = float(J[0]), float(J[1])
    if hi < lo:
        raise ValueError("empty interval")
    scan = _Scan(cap)
    _refined_line_scan(
        scan, lambda zs: _scan_graph(scan, L, rho, zs), lo, hi, samples
    )
    if scan.failure is not None:
        return scan.failure
    return Verdict(
        STATUS_OK,
        witness=None,
        resolution={"samples": scan.samples, "interval": [lo, hi]},
        sup_estimate=ExtendedValue(scan.sup),
    )


def check_Ry(
    L: Lagrangian, rho: RhoPair, y: Trajectory, samples: int = 4096, cap: float = 1e12
) -> Verdict:
    """check_R over the range of the trajectory y."""
    rng = y.range_bounds()
    return check_R(L, rho, (rng.alpha, rng.beta), samples=samples, cap=cap)


def _scan_rectangle(scan: _Scan, L: Lagrangian, ys: np.ndarray, vs: np.ndarray) -> bool:
    for y in ys:
        y = float(y)
        for v in vs:
            v = float(v)
            try:
                value = eval_L(L, y, v)
            except (EvalError, NonnegativityError) as exc:
                scan.invalid((y, v), exc)
                return False
            if not scan.record((y, v), value):
                return False
    return True


def check_B(
    L: Lagrangian, K: float, r: float, samples_per_axis: int = 129, cap: float = 1e12
) -> Verdict:
    """Boundedness of L on the rectangle [-K, K] x [-r, r]."""
    if K <= 0 or r <= 0:
        raise ValueError("K and r must be positive")
    if samples_per_axis < 2:
        raise ValueError("need at least 2 samples per axis")
    scan = _Scan(cap)
    ys = _grid(-K, K, samples_per_axis)
    vs = _grid(-r, r, samples_per_axis)
    if _scan_rectangle(scan, L, ys, vs):
        dy = 2.0 * K / (samples_per_axis - 1)
        dv = 2.0 * r / (samples_per_axis - 1)
        sub = 33
        for _ in range(_REFINE_ROUNDS):
            done = False
            for y0, v0 in scan.top_points():
                ys2 = _grid(max(-K, y0 - dy), min(K, y0 + dy), sub)
                vs2 = _grid(max(-r, v0 - dv), min(r, v0 + dv), sub)
                if not _scan_rectangle(scan, L, ys2, vs2):
                    done = True
                    break
            if done:
                break
            dy *= 4.0 / (sub - 1)
            dv *= 4.0 / (sub - 1)
    if scan.failure is not None:
        return scan.failure
    return Verdict(
        STATUS_OK,
        witness=None,
        resolution={
            "samples": scan.samples,
            "box": [[-K, K], [-r, r]],
        },
        sup_estimate=ExtendedValue(scan.sup),
    )


def check_zero_speed(
    L: Lagrangian, J: tuple[float, float], samples: int = 4096, cap: float = 1e12
) -> Verdict:
    """Boundedness of z -> L(z, 0) on J (premise of the constant extension)."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lo, hi = float(J[0]), float(J[1])
    if hi < lo:
        raise ValueError("empty interval")
    scan = _Scan(cap)

    def sweep(zs: np.ndarray) -> bool:
        for z in zs:
            z = float(z)
            try:
                value = eval_L(L, z, 0.0)
            except (EvalError, NonnegativityError) as exc:
                scan.invalid((z,), exc)
                return False
            if not scan.record((z,), value):
                return False
        return True

    _refined_line_scan(scan, sweep, lo, hi, samples)
    if scan.failure is not None:
        return scan.failure
    return Verdict(
        STATUS_OK,
        witness=None,
        resolution={"samples": scan.samples, "interval": [lo, hi]},
        sup_estimate=ExtendedValue(scan.sup),
    )
