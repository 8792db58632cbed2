"""Energy F(y) = integral of L(y, y') over [0, 1], and divergence certificates.

The energy integrator never claims to prove divergence: it reports a
status (converged / diverged / capped / singular-endpoint-limit) together
with a lower bound that is valid in every status.  The analytic argument
that the energy of an admissible Lipschitz trajectory blows up for the
builtin gap example is packaged separately as a :class:`GapCertificate`:
a sequence of closed-form lower bounds obtained from the convexity
(Jensen) inequality on integral of y'^2 / y^4, growing without bound as the
probe time approaches the departure point from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .extreal import INF, ExtendedValue
from .lagrangian import Lagrangian, eval_L
from .quadrature import NOISE_FLOOR, QuadConfig
from .trajectory import AnalyticTrajectory, PLTrajectory, Trajectory

STATUS_CONVERGED = "converged"
STATUS_DIVERGED = "diverged"
STATUS_CAPPED = "capped"
STATUS_LIMIT = "singular-endpoint-limit"

VERDICT_DIVERGENT = "divergent"
VERDICT_INCONCLUSIVE = "inconclusive"


class PreconditionError(ValueError):
    pass


class IntegrandError(ArithmeticError):
    """Integrand evaluation failed at a concrete sample point."""

    def __init__(self, t: float, y: float, v: float, cause: Exception):
        super().__init__(f"integrand failed at t={t!r}, y={y!r}, v={v!r}: {cause}")
        self.t = t
        self.y = y
        self.v = v
        self.cause = cause


@dataclass(frozen=True)
class EnergyResult:
    """Outcome of one energy integration.

    ``lower_bound`` is valid in every status: the energy is at least this
    much.  A converged result is finite and at least its lower bound.
    """

    value: ExtendedValue
    status: str
    lower_bound: float
    segments_evaluated: int

    def to_json(self) -> dict:
        return {
            "value": self.value.to_json(),
            "status": self.status,
            "lower_bound": self.lower_bound,
            "segments_evaluated": self.segments_evaluated,
        }


class _EnergyAcc:
    """Left-to-right accumulator shared by all pieces of one energy."""

    __slots__ = ("quad", "total", "verified", "leaves", "diverged", "capped", "limited")

    def __init__(self, quad: QuadConfig):
        self.quad = quad
        self.total = 0.0
        self.verified = 0.0
        self.leaves = 0
        self.diverged = False
        self.capped = False
        self.limited = False

    @property
    def stopped(self) -> bool:
        return self.diverged or self.capped

    def _check_cap(self) -> None:
        if self.total > self.quad.cap:
            self.capped = True

    def accept(self, contribution: float, verified: bool) -> None:
        if not math.isfinite(contribution):
            self.total = math.inf
            self.capped = True
            return
        self.total += contribution
        if verified:
            self.verified += contribution
        else:
            self.limited = True
        self.leaves += 1
        self._check_cap()


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_extended(g, a: float, b: float, acc: _EnergyAcc, abs_budget: float) -> None:
    """Adaptive Simpson of a nonnegative extended-real-valued sample map.

    Any +inf sample flags divergence (the interval has positive length).
    Subintervals that exhaust the depth budget contribute their best
    estimate unverified.  ``abs_budget`` is an absolute tolerance for the
    whole of [a, b], distributed by width.
    """
    if acc.stopped or b <= a:
        return
    quad = acc.quad
    width = b - a

    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    if math.isinf(fa) or math.isinf(fm) or math.isinf(fb):
        acc.diverged = True
        return

    def recurse(x0, x1, f0, fmid, f1, whole, depth):
        if acc.stopped:
            return
        xm = 0.5 * (x0 + x1)
        lm = 0.5 * (x0 + xm)
        rm = 0.5 * (xm + x1)
        flm = g(lm)
        frm = g(rm)
        if math.isinf(flm) or math.isinf(frm):
            acc.diverged = True
            return
        left = _simpson(f0, flm, fmid, xm - x0)
        right = _simpson(fmid, frm, f1, x1 - xm)
        total = left + right
        err = (total - whole) / 15.0
        if abs(err) <= quad.tol * abs(total) + abs_budget * (x1 - x0) / width:
            acc.accept(total + err, verified=True)
            return
        if depth >= quad.max_depth:
            acc.accept(total, verified=False)
            return
        recurse(x0, xm, f0, flm, fmid, left, depth + 1)
        recurse(xm, x1, fmid, frm, f1, right, depth + 1)

    recurse(a, b, fa, fm, fb, _simpson(fa, fm, fb, width), 0)


def _segment_sampler(L: Lagrangian, t0: float, v0: float, slope: float):
    """Integrand t -> L(y(t), slope) on one affine segment, as a raw float."""

    def g(t: float) -> float:
        y_val = v0 + (t - t0) * slope
        try:
            return eval_L(L, y_val, slope).raw
        except ArithmeticError as cause:
            raise IntegrandError(t, y_val, slope, cause) from cause

    return g


_SEGMENT_ABS_DENSITY = 1e-16  # absolute tolerance per unit length, smooth pieces
_SHELL_ABS_BUDGET = 1e-14  # absolute tolerance per endpoint shell


def _energy_pl(L: Lagrangian, y: PLTrajectory, acc: _EnergyAcc) -> None:
    times = y.times
    values = y.values
    slopes = y.slopes
    for k in range(len(slopes)):
        t0, t1 = float(times[k]), float(times[k + 1])
        g = _segment_sampler(L, t0, float(values[k]), float(slopes[k]))
        _adaptive_extended(g, t0, t1, acc, _SEGMENT_ABS_DENSITY * (t1 - t0))
        if acc.stopped:
            return


def _energy_analytic(L: Lagrangian, y: AnalyticTrajectory, acc: _EnergyAcc) -> tuple[float, bool]:
    """Returns (extrapolated tail, converged-by-rule) for the shell loop."""

    def g(t: float) -> float:
        try:
            return eval_L(L, y.eval(t), y.derivative(t)).raw
        except ArithmeticError as cause:
            raise IntegrandError(t, y.eval(t), float("nan"), cause) from cause

    if not y.singular_at_zero:
        _adaptive_extended(g, 0.0, 1.0, acc, _SEGMENT_ABS_DENSITY)
        return 0.0, True

    quad = acc.quad
    q = quad.singular_split
    k_noise = max(8, math.ceil(25.0 * math.log(2.0) / math.log(q)))
    shells: list[float] = []
    for k in range(quad.max_depth):
        hi = q ** (-k)
        lo = q ** (-(k + 1))
        if lo >= hi or lo <= 0.0:
            break
        before = acc.total
        _adaptive_extended(g, lo, hi, acc, _SHELL_ABS_BUDGET)
        if acc.stopped:
            return 0.0, False
        shells.append(acc.total - before)
        if len(shells) >= 3:
            s0, s1, s2 = abs(shells[-1]), abs(shells[-2]), abs(shells[-3])
            if s0 == 0.0 and s1 == 0.0 and k >= 8:
                return 0.0, True
            if s1 > 0.0 and s2 > 0.0:
                r1, r2 = s0 / s1, s1 / s2
                if r1 < 0.95 and r2 < 0.95:
                    r = max(r1, r2)
                    tail = shells[-1] * r / (1.0 - r)
                    drift_err = s0 * abs(r1 - r2) / (1.0 - r) ** 2
                    if drift_err <= quad.tol * max(acc.total + tail, NOISE_FLOOR):
                        return tail, True
        if k >= k_noise and acc.total + 64.0 * abs(shells[-1]) <= NOISE_FLOOR:
            return 0.0, True
    return 0.0, False


def energy(L: Lagrangian, y: Trajectory, quad: QuadConfig | None = None) -> EnergyResult:
    """Energy of y under L with divergence detection.

    Piecewise-linear trajectories are integrated segment by segment (the
    slope is constant on each).  Analytic samplers with an unbounded
    derivative at t = 0 are integrated over geometric endpoint shells with
    tail extrapolation; the endpoint itself is never sampled.
    """
    if quad is None:
        quad = QuadConfig()
    acc = _EnergyAcc(quad)
    tail = 0.0
    shell_converged = True
    if isinstance(y, PLTrajectory):
        _energy_pl(L, y, acc)
    else:
        tail, shell_converged = _energy_analytic(L, y, acc)

    shave = max(0.0, 1.0 - 10.0 * quad.tol)
    lower = max(0.0, acc.verified * shave) if math.isfinite(acc.verified) else 0.0
    if acc.diverged:
        return EnergyResult(INF, STATUS_DIVERGED, lower, acc.leaves)
    if acc.capped:
        return EnergyResult(INF, STATUS_CAPPED, lower, acc.leaves)
    value = ExtendedValue(acc.total + tail)
    if acc.limited or not shell_converged:
        return EnergyResult(value, STATUS_LIMIT, lower, acc.leaves)
    return EnergyResult(value, STATUS_CONVERGED, lower, acc.leaves)


# ---------------------------------------------------------------------------
# Exact segment integrals of y'^2 / y^k for piecewise-linear y
# ---------------------------------------------------------------------------


def integrate_slope_sq_over_power(y: PLTrajectory, lo: float, hi: float, power: int) -> float:
    """Exact integral of y'(t)^2 / y(t)^power over [lo, hi] (y nonzero there).

    Per segment y is affine, so the antiderivative is elementary; power
    must be 2 or 4.
    """
    if power not in (2, 4):
        raise ValueError("power must be 2 or 4")
    if hi <= lo:
        return 0.0
    cuts = y.times[(y.times > lo) & (y.times < hi)]
    points = np.concatenate(([lo], cuts, [hi]))
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        a, b = float(a), float(b)
        s = float(y.slopes[y.segment_containing(a)])
        if s == 0.0:
            continue
        ua = y.eval(a)
        ub = y.eval(b)
        if ua == 0.0 or ub == 0.0 or (ua > 0) != (ub > 0):
            raise ValueError(f"trajectory touches zero inside [{lo}, {hi}]")
        if power == 2:
            total += s * (1.0 / ua - 1.0 / ub)
        else:
            total += s * (1.0 / ua**3 - 1.0 / ub**3) / 3.0
    return total


def jensen_split(y: PLTrajectory, c: float, d: float) -> tuple[float, float]:
    """(exact integral of y'^2/y^4 on [c, d], its convexity lower bound).

    The bound is (1/(d-c)) * (1/y(c) - 1/y(d))^2; the first component
    always dominates the second for y of one sign on [c, d].
    """
    lhs = integrate_slope_sq_over_power(y, c, d, 4)
    yc, yd = y.eval(c), y.eval(d)
    rhs = (1.0 / (d - c)) * (1.0 / yc - 1.0 / yd) ** 2
    return lhs, rhs


# ---------------------------------------------------------------------------
# Gap certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapCertificate:
    """Divergence certificate for the builtin gap example.

    ``bounds[k]`` is a valid lower bound for the energy of the trajectory,
    built from probe time ``probe_times[k]``; the verdict is divergent
    when the bounds increase strictly and the last one clears a tenth of
    the divergence cap.
    """

    departure_time: float  # last zero before the trajectory leaves 0
    departure_end: float  # end of the zero-free stretch, y nonzero there
    cutoff_time: float  # where |y| first clears 1/(4 sup|y'|)
    slope_sup: float
    fixed_terms: float  # contribution of [cutoff, end], computed once
    probe_times: tuple
    bounds: tuple
    verdict: str

    def to_json(self) -> dict:
        return {
            "a": self.departure_time,
            "b": self.departure_end,
            "d": self.cutoff_time,
            "slope_sup": self.slope_sup,
            "fixed_terms": self.fixed_terms,
            "c_sequence": list(self.probe_times),
            "bounds": list(self.bounds),
            "verdict": self.verdict,
        }

    def to_csv(self) -> str:
        lines = ["k,c_k,bound"]
        for k, (c, bound) in enumerate(zip(self.probe_times, self.bounds), start=1):
            lines.append(f"{k},{c!r},{bound!r}")
        return "\n".join(lines) + "\n"


def _departure_interval(y: PLTrajectory) -> tuple[float, float, int]:
    """(a, b, first_segment): y(a) = 0, y(b) != 0, y nonzero on (a, b)."""
    values = y.values
    times = y.times
    nonzero = np.nonzero(values != 0.0)[0]
    if nonzero.size == 0:
        raise PreconditionError("trajectory is identically zero")
    j = int(nonzero[0])  # first node with a nonzero value; j >= 1 as y(0) = 0
    a = float(times[j - 1])
    # walk forward while y stays away from zero
    k = j
    while k + 1 < len(values):
        v0, v1 = float(values[k]), float(values[k + 1])
        if v1 == 0.0 or (v0 > 0) != (v1 > 0):
            # the stretch ends inside segment k; stop strictly before the zero
            t_zero = float(times[k + 1]) if v1 == 0.0 else float(times[k]) - v0 / float(y.slopes[k])
            return a, 0.5 * (float(times[k]) + t_zero), j - 1
        k += 1
    return a, float(times[-1]), j - 1


def _cutoff_time(y: PLTrajectory, a: float, b: float, threshold: float) -> float:
    """First time in (a, b] where |y| exceeds the threshold, or b.

    On each affine piece |y| peaks at an endpoint, so it suffices to walk
    the piece boundaries; |y| stays below the threshold up to the returned
    time, which is what the certificate's probe inequality needs.
    """
    inner = y.times[(y.times > a) & (y.times < b)]
    points = np.concatenate(([a], inner, [b]))
    for p0, p1 in zip(points[:-1], points[1:]):
        p0, p1 = float(p0), float(p1)
        v1 = y.eval(p1)
        if abs(v1) > threshold:
            k = y.segment_index(0.5 * (p0 + p1))
            s = float(y.slopes[k])
            v0 = y.eval(p0)
            sigma = 1.0 if v1 > 0 else -1.0
            crossing = p0 + (sigma * threshold - v0) / s
            return min(max(crossing, p0), p1)
    return b


def gap_certificate(y: PLTrajectory, quad: QuadConfig | None = None) -> GapCertificate:
    """Closed-form divergence certificate for the builtin gap example.

    Preconditions: y(0) = 0 and y not identically zero.  The probe times
    descend geometrically from the cutoff toward the departure time; each
    bound combines the fixed terms over [cutoff, end] with the convexity
    lower bound of the singular integral over [probe, cutoff].
    """
    if quad is None:
        quad = QuadConfig()
    if float(y.values[0]) != 0.0:
        raise PreconditionError("certificate requires y(0) = 0")
    a, b, first_seg = _departure_interval(y)

    slope_sup = y.lipschitz_constant()
    if slope_sup == 0.0:
        raise AssertionError("nonzero trajectory with zero slope bound")
    threshold = 1.0 / (4.0 * slope_sup)
    d = _cutoff_time(y, a, b, threshold)

    fixed = -0.5 * slope_sup**2 * integrate_slope_sq_over_power(y, d, b, 2) + (
        1.0 / 16.0
    ) * integrate_slope_sq_over_power(y, d, b, 4)

    first_slope = float(y.slopes[first_seg])
    first_seg_end = float(y.times[first_seg + 1])

    def y_at(c: float) -> float:
        # anchored form for probes inside the departure segment: avoids
        # cancellation when c is extremely close to a
        if c <= first_seg_end:
            return first_slope * (c - a)
        return y.eval(c)

    yd = y.eval(d)
    probes = []
    bounds = []
    for k in range(1, 31):
        c = a + (d - a) * 2.0 ** (-k)
        yc = y_at(c)
        jensen = (1.0 / 32.0) * (1.0 / (d - c)) * (1.0 / yc - 1.0 / yd) ** 2
        probes.append(c)
        bounds.append(fixed + jensen)

    increasing = all(b1 > b0 for b0, b1 in zip(bounds[:-1], bounds[1:]))
    verdict = (
        VERDICT_DIVERGENT
        if increasing and bounds[-1] > quad.cap / 10.0
        else VERDICT_INCONCLUSIVE
    )
    return GapCertificate(
        departure_time=a,
        departure_end=b,
        cutoff_time=d,
        slope_sup=slope_sup,
        fixed_terms=fixed,
        probe_times=tuple(probes),
        bounds=tuple(bounds),
        verdict=verdict,
    )


@dataclass(frozen=True)
class ConsistencyReport:
    """Cross-check of the two divergence detectors on one trajectory."""

    energy: EnergyResult
    certificate: GapCertificate
    consistent: bool

    def to_json(self) -> dict:
        return {
            "energy": self.energy.to_json(),
            "certificate": self.certificate.to_json(),
            "consistent": self.consistent,
            "detector_mismatch": not self.consistent,
        }


def verify_divergence_consistency(
    y: PLTrajectory, L: Lagrangian, quad: QuadConfig | None = None
) -> ConsistencyReport:
    """Assert that quadrature and certificate agree the energy blows up.

    Intended for the builtin gap example on admissible Lipschitz
    trajectories that are not identically zero.  Disagreement between the
    detectors is reported, not raised: it is a test-failure signal.
    """
    if quad is None:
        quad = QuadConfig()
    result = energy(L, y, quad)
    certificate = gap_certificate(y, quad)
    consistent = (
        result.status != STATUS_CONVERGED and certificate.verdict == VERDICT_DIVERGENT
    )
    return ConsistencyReport(energy=result, certificate=certificate, consistent=consistent)
