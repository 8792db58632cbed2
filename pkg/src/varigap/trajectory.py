"""Candidate trajectories y on the unit interval and their Sobolev geometry.

Two concrete classes cover everything the toolkit needs: piecewise-linear
trajectories on a partition, and a handful of analytic samplers with
closed-form derivatives (square root, power, affine, constant).  Distances
between two piecewise-linear trajectories are computed exactly segment by
segment; anything involving an analytic sampler falls back to adaptive
quadrature with endpoint-shell handling for derivatives that blow up at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadConfig, integrate


class TrajectoryError(ValueError):
    pass


class DomainError(TrajectoryError):
    """Evaluation point outside the trajectory's time domain."""


class AmbiguousPointError(TrajectoryError):
    """Derivative requested at a partition node, where it is undefined."""


class SingularEndpointError(TrajectoryError):
    """Derivative requested at t = 0 on a sampler that blows up there."""


@dataclass(frozen=True)
class RangeBounds:
    """Minimum and maximum of y over its time domain."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha > self.beta:
            raise ValueError("range bounds out of order")


class Partition:
    """Strictly increasing time nodes starting at 0.

    Problem trajectories live on [0, 1]; reparametrized intermediates in
    the repair pipeline may end before 1, so only ``end <= 1`` plus strict
    increase is enforced here.  Use :meth:`require_unit` where the unit
    domain is part of the contract.
    """

    __slots__ = ("nodes",)

    def __init__(self, nodes) -> None:
        arr = np.asarray(nodes, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise TrajectoryError("a partition needs at least two nodes")
        if arr[0] != 0.0:
            raise TrajectoryError("a partition must start at t = 0")
        if not np.all(np.diff(arr) > 0):
            raise TrajectoryError("partition nodes must be strictly increasing")
        if arr[-1] > 1.0:
            raise TrajectoryError("a partition must end at or before t = 1")
        self.nodes = arr

    @property
    def end(self) -> float:
        return float(self.nodes[-1])

    def require_unit(self) -> "Partition":
        if self.end != 1.0:
            raise TrajectoryError("trajectory must cover the unit interval [0, 1]")
        return self

    def __len__(self) -> int:
        return len(self.nodes)


class PLTrajectory:
    """Piecewise-linear trajectory: one value per partition node."""

    __slots__ = ("times", "values", "_slopes")

    def __init__(self, partition, values) -> None:
        part = partition if isinstance(partition, Partition) else Partition(partition)
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 1 or vals.size != len(part):
            raise TrajectoryError("one value per partition node required")
        if not np.all(np.isfinite(vals)):
            raise TrajectoryError("trajectory values must be finite")
        self.times = part.nodes
        self.values = vals
        self._slopes = np.diff(vals) / np.diff(part.nodes)

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def slopes(self) -> np.ndarray:
        """Constant derivative of each segment (the a.e. derivative)."""
        return self._slopes

    @property
    def singular_at_zero(self) -> bool:
        return False

    def eval(self, t: float) -> float:
        if not 0.0 <= t <= self.end:
            raise DomainError(f"t = {t!r} outside [0, {self.end}]")
        i = int(np.searchsorted(self.times, t))
        if i < len(self.times) and self.times[i] == t:
            return float(self.values[i])
        k = i - 1
        return float(self.values[k] + (t - self.times[k]) * self._slopes[k])

    def derivative(self, t: float) -> float:
        if not 0.0 <= t <= self.end:
            raise DomainError(f"t = {t!r} outside [0, {self.end}]")
        i = int(np.searchsorted(self.times, t))
        if i < len(self.times) and self.times[i] == t:
            raise AmbiguousPointError(f"derivative undefined at node t = {t!r}")
        return float(self._slopes[i - 1])

    def segment_index(self, t: float) -> int:
        """Index of the segment whose open interior contains t."""
        i = int(np.searchsorted(self.times, t))
        if i < len(self.times) and self.times[i] == t:
            raise AmbiguousPointError(f"t = {t!r} is a node")
        return i - 1

    def segment_containing(self, left: float) -> int:
        """Index of the segment whose half-open span [t_k, t_{k+1}) holds left.

        Never ambiguous: a cell [left, right) drawn from any refinement of
        the partition lies inside exactly one segment, found from its left
        edge.
        """
        i = int(np.searchsorted(self.times, left, side="right")) - 1
        return min(max(i, 0), len(self._slopes) - 1)

    def range_bounds(self) -> RangeBounds:
        return RangeBounds(float(self.values.min()), float(self.values.max()))

    def lipschitz_constant(self) -> float:
        return float(np.max(np.abs(self._slopes)))

    def restrict(self, t_end: float) -> "PLTrajectory":
        """Restriction to [0, t_end], inserting a node at the cut."""
        if not 0.0 < t_end <= self.end:
            raise DomainError(f"cannot restrict to [0, {t_end!r}]")
        keep = self.times < t_end
        times = np.append(self.times[keep], t_end)
        values = np.append(self.values[keep], self.eval(t_end))
        return PLTrajectory(times, values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PLTrajectory):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self) -> str:
        return f"PLTrajectory({len(self.times)} nodes on [0, {self.end}])"

    def to_json(self) -> dict:
        return {"type": "pl", "nodes": [[float(t), float(v)] for t, v in zip(self.times, self.values)]}


_ANALYTIC_FAMILIES = ("sqrt", "power", "affine", "constant")


@dataclass(frozen=True)
class AnalyticTrajectory:
    """Closed-form sampler on [0, 1] with an exact derivative.

    Families: sqrt (y = sqrt(t)), power (y = t^gamma, gamma > 0),
    affine (y = intercept + slope t), constant.  ``singular_at_zero``
    marks derivatives that are unbounded near t = 0.
    """

    family: str
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.family not in _ANALYTIC_FAMILIES:
            raise TrajectoryError(f"unknown analytic family {self.family!r}")
        if self.family == "power":
            if len(self.params) != 1 or not self.params[0] > 0:
                raise TrajectoryError("power family needs one parameter gamma > 0")
        elif self.family == "affine":
            if len(self.params) != 2:
                raise TrajectoryError("affine family needs (intercept, slope)")
        elif self.family == "constant":
            if len(self.params) != 1:
                raise TrajectoryError("constant family needs (value,)")
        elif self.params:
            raise TrajectoryError("sqrt family takes no parameters")

    @property
    def end(self) -> float:
        return 1.0

    @property
    def singular_at_zero(self) -> bool:
        if self.family == "sqrt":
            return True
        if self.family == "power":
            return self.params[0] < 1.0
        return False

    def eval(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"t = {t!r} outside [0, 1]")
        if self.family == "sqrt":
            return math.sqrt(t)
        if self.family == "power":
            return t ** self.params[0]
        if self.family == "affine":
            a, b = self.params
            return a + b * t
        return self.params[0]

    def derivative(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"t = {t!r} outside [0, 1]")
        if t == 0.0 and self.singular_at_zero:
            raise SingularEndpointError("derivative blows up at t = 0")
        if self.family == "sqrt":
            return 1.0 / (2.0 * math.sqrt(t))
        if self.family == "power":
            gamma = self.params[0]
            return gamma * t ** (gamma - 1.0)
        if self.family == "affine":
            return self.params[1]
        return 0.0

    def range_bounds(self) -> RangeBounds:
        # every builtin family is monotone on [0, 1]
        lo, hi = self.eval(0.0), self.eval(1.0)
        return RangeBounds(min(lo, hi), max(lo, hi))

    def to_json(self) -> dict:
        params: dict[str, float] = {}
        if self.family == "power":
            params["gamma"] = self.params[0]
        elif self.family == "affine":
            params["intercept"], params["slope"] = self.params
        elif self.family == "constant":
            params["value"] = self.params[0]
        return {"type": "analytic", "family": self.family, "params": params}


Trajectory = PLTrajectory | AnalyticTrajectory


def from_json(obj: dict) -> Trajectory:
    kind = obj.get("type")
    if kind == "pl":
        nodes = obj["nodes"]
        times = [float(pair[0]) for pair in nodes]
        values = [float(pair[1]) for pair in nodes]
        traj = PLTrajectory(times, values)
        Partition(traj.times).require_unit()
        return traj
    if kind == "analytic":
        family = obj["family"]
        params = obj.get("params", {})
        if family == "power":
            return AnalyticTrajectory("power", (float(params["gamma"]),))
        if family == "affine":
            return AnalyticTrajectory(
                "affine", (float(params["intercept"]), float(params["slope"]))
            )
        if family == "constant":
            return AnalyticTrajectory("constant", (float(params["value"]),))
        return AnalyticTrajectory(family)
    raise TrajectoryError(f"unknown trajectory type {kind!r}")


def discretize(y: AnalyticTrajectory, n: int, grading: float = 1.0) -> PLTrajectory:
    """Piecewise-linear interpolant on the graded mesh t_k = (k/n)^grading."""
    if n < 2:
        raise TrajectoryError("need at least 2 segments")
    if grading < 1.0:
        raise TrajectoryError("grading must be at least 1")
    k = np.arange(n + 1, dtype=float)
    times = (k / n) ** grading
    times[0], times[-1] = 0.0, 1.0
    values = np.array([y.eval(t) for t in times])
    return PLTrajectory(times, values)


# ---------------------------------------------------------------------------
# Sobolev distance
# ---------------------------------------------------------------------------


def _abs_power_antiderivative(x: float, p: float) -> float:
    """Antiderivative of |x|^p: sign(x) |x|^(p+1) / (p+1)."""
    return math.copysign(abs(x) ** (p + 1.0) / (p + 1.0), x)


def _pl_pair_integrals(y1: PLTrajectory, y2: PLTrajectory, p: float) -> tuple[float, float]:
    times = np.union1d(y1.times, y2.times)
    val_int = 0.0
    der_int = 0.0
    for t0, t1 in zip(times[:-1], times[1:]):
        t0, t1 = float(t0), float(t1)
        h = t1 - t0
        d0 = y1.eval(float(t0)) - y2.eval(float(t0))
        d1 = y1.eval(float(t1)) - y2.eval(float(t1))
        rate = (d1 - d0) / h
        if rate == 0.0:
            val_int += abs(d0) ** p * h
        else:
            # exact: the antiderivative of |x|^p is continuous through 0,
            # which is the closed form of splitting at the sign change
            val_int += (
                _abs_power_antiderivative(d1, p) - _abs_power_antiderivative(d0, p)
            ) / rate
        s1 = float(y1.slopes[y1.segment_containing(t0)])
        s2 = float(y2.slopes[y2.segment_containing(t0)])
        der_int += abs(s1 - s2) ** p * h
    return float(val_int), float(der_int)


def _piece_boundaries(y1: Trajectory, y2: Trajectory) -> np.ndarray:
    cuts = np.array([0.0, 1.0])
    for y in (y1, y2):
        if isinstance(y, PLTrajectory):
            cuts = np.union1d(cuts, y.times)
    return cuts


def _numeric_pair_integrals(
    y1: Trajectory, y2: Trajectory, p: float, quad: QuadConfig
) -> tuple[float, float]:
    if y1.end != 1.0 or y2.end != 1.0:
        raise TrajectoryError("mixed-type distances need both trajectories on [0, 1]")
    pieces = _piece_boundaries(y1, y2)
    singular = y1.singular_at_zero or y2.singular_at_zero
    val_int = 0.0
    der_int = 0.0
    for t0, t1 in zip(pieces[:-1], pieces[1:]):
        t0, t1 = float(t0), float(t1)
        d1 = y1.slopes[y1.segment_containing(t0)] if isinstance(y1, PLTrajectory) else None
        d2 = y2.slopes[y2.segment_containing(t0)] if isinstance(y2, PLTrajectory) else None

        def fv(t: float) -> float:
            return abs(y1.eval(t) - y2.eval(t)) ** p

        def fd(t: float) -> float:
            s1 = d1 if d1 is not None else y1.derivative(t)
            s2 = d2 if d2 is not None else y2.derivative(t)
            return abs(s1 - s2) ** p

        left_singular = singular and t0 == 0.0
        val_int += integrate(
            fv, t0, t1, rel_tol=quad.tol, abs_tol=1e-11, max_depth=quad.max_depth,
            singular_left=left_singular, split=quad.singular_split,
        )
        der_int += integrate(
            fd, t0, t1, rel_tol=quad.tol, abs_tol=1e-11, max_depth=quad.max_depth,
            singular_left=left_singular, split=quad.singular_split,
        )
    return float(val_int), float(der_int)


def sobolev_distance(
    y1: Trajectory, y2: Trajectory, p: float = 1.0, quad: QuadConfig | None = None
) -> float:
    """W^{1,p} distance: (integral |y1-y2|^p)^{1/p} + (integral |y1'-y2'|^p)^{1/p}.

    Exact for a pair of piecewise-linear trajectories; adaptive quadrature
    otherwise (raising ToleranceNotMet with a best estimate on failure).
    """
    if p < 1.0:
        raise ValueError("p must be at least 1")
    if quad is None:
        quad = QuadConfig()
    if isinstance(y1, AnalyticTrajectory) and y1 == y2:
        return 0.0
    if isinstance(y1, PLTrajectory) and isinstance(y2, PLTrajectory):
        if y1.end != y2.end:
            raise TrajectoryError("trajectories live on different time domains")
        val_int, der_int = _pl_pair_integrals(y1, y2, p)
    else:
        val_int, der_int = _numeric_pair_integrals(y1, y2, p, quad)
    return val_int ** (1.0 / p) + der_int ** (1.0 / p)
