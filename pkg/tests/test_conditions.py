from varigap.conditions import (
    STATUS_INVALID,
    STATUS_OK,
    STATUS_VIOLATION,
    check_B,
    check_R,
    check_Ry,
    check_zero_speed,
)
from varigap.lagrangian import Lagrangian, RhoPair, eval_L, eval_rho
from varigap.trajectory import AnalyticTrajectory, discretize

GAP = Lagrangian.builtin("gap_example")
QUADRATIC = Lagrangian.builtin("quadratic")
ABS_V = Lagrangian.builtin("abs_velocity")
RHO_UNIT = RhoPair.from_expressions("-1", "1")


# ---------------------------------------------------------------------------
# check_R
# ---------------------------------------------------------------------------


def test_check_R_quadratic_passes_with_unit_sup():
    verdict = check_R(QUADRATIC, RHO_UNIT, (-10.0, 10.0), samples=512)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 1.0
    assert verdict.resolution["interval"] == [-10.0, 10.0]
    assert verdict.witness is None


def test_check_R_gap_example_fails_near_zero():
    verdict = check_R(GAP, RHO_UNIT, (-1.0, 1.0), samples=4096)
    assert verdict.status == STATUS_VIOLATION
    (z,) = verdict.witness["point"]
    assert abs(z) < 1e-2
    # the witness reproduces on direct re-evaluation
    value = eval_L(GAP, z, eval_rho(RHO_UNIT, "plus", z))
    assert value.is_infinite or value.raw > 1e12


def test_check_R_sign_failure():
    verdict = check_R(QUADRATIC, RhoPair.from_expressions("-1", "z"), (-1.0, 1.0), samples=64)
    assert verdict.status == STATUS_VIOLATION
    assert "sign" in verdict.witness["value"]


def test_check_R_invalid_expression_input():
    bad_rho = RhoPair.from_expressions("-1", "1/z")
    verdict = check_R(QUADRATIC, bad_rho, (0.0, 1.0), samples=65)  # grid starts at z = 0
    assert verdict.status == STATUS_INVALID
    assert verdict.witness["point"] == [0.0]


# ---------------------------------------------------------------------------
# check_Ry
# ---------------------------------------------------------------------------


def test_check_Ry_quadratic_on_power_interpolant():
    y = discretize(AnalyticTrajectory("power", (2 / 3,)), 64, 2.0)
    verdict = check_Ry(QUADRATIC, RHO_UNIT, y, samples=256)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 1.0


def test_check_Ry_gap_on_minimizer_range_fails():
    verdict = check_Ry(GAP, RHO_UNIT, AnalyticTrajectory("sqrt"), samples=4096)
    assert verdict.status == STATUS_VIOLATION
    (z,) = verdict.witness["point"]
    assert 0.0 <= z < 1e-2


def test_check_Ry_singleton_range_on_zero_set():
    # constant trajectory at 0.5; the plus field hits the zero set of the
    # gap integrand (rho_plus(0.5) = 1/(2*0.5) = 1 makes L vanish), and the
    # minus graph contributes the finite sup
    y = AnalyticTrajectory("constant", (0.5,))
    rho = RhoPair.from_expressions("-1/(2*z+1)", "1/(2*z)")
    verdict = check_Ry(GAP, rho, y, samples=16)
    assert verdict.status == STATUS_OK
    assert eval_L(GAP, 0.5, eval_rho(rho, "plus", 0.5)).raw == 0.0
    assert verdict.sup_estimate.raw == eval_L(GAP, 0.5, eval_rho(rho, "minus", 0.5)).raw


# ---------------------------------------------------------------------------
# check_B
# ---------------------------------------------------------------------------


def test_check_B_quadratic():
    verdict = check_B(QUADRATIC, 10.0, 5.0, samples_per_axis=65)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 25.0


def test_check_B_gap_example_flagged():
    verdict = check_B(GAP, 1.0, 1.0, samples_per_axis=129)
    assert verdict.status == STATUS_VIOLATION
    y, v = verdict.witness["point"]
    assert abs(y) < 1e-2
    value = eval_L(GAP, y, v)
    assert value.is_infinite or value.raw > 1e12


def test_check_B_zero_expression():
    zero = Lagrangian.from_expression("0 * v")
    verdict = check_B(zero, 3.0, 3.0, samples_per_axis=17)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 0.0


# ---------------------------------------------------------------------------
# check_zero_speed
# ---------------------------------------------------------------------------


def test_zero_speed_quadratic():
    verdict = check_zero_speed(QUADRATIC, (-5.0, 5.0), samples=128)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 0.0


def test_zero_speed_gap_example():
    verdict = check_zero_speed(GAP, (0.0, 1.0), samples=512)
    assert verdict.status == STATUS_OK
    assert verdict.sup_estimate.raw == 1.0  # attained on the zero-state branch


def test_zero_speed_inverse_square_velocity():
    verdict = check_zero_speed(Lagrangian.from_expression("1/v^2"), (0.0, 1.0), samples=16)
    assert verdict.status == STATUS_VIOLATION
    assert verdict.witness["value"] == "inf"


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


def test_violation_witnesses_reproduce():
    for verdict in (
        check_R(GAP, RHO_UNIT, (-1.0, 1.0), samples=4096),
        check_B(GAP, 1.0, 1.0, samples_per_axis=129),
    ):
        assert verdict.status == STATUS_VIOLATION
        point = verdict.witness["point"]
        if len(point) == 1:
            value = eval_L(GAP, point[0], eval_rho(RHO_UNIT, "plus", point[0]))
        else:
            value = eval_L(GAP, point[0], point[1])
        assert value.is_infinite or value.raw > 1e12


def test_monotone_refinement_no_flip():
    for samples in (512, 1024, 2048, 4096):
        verdict = check_R(GAP, RHO_UNIT, (-1.0, 1.0), samples=samples)
        assert verdict.status == STATUS_VIOLATION, f"flipped at {samples}"
    for per_axis in (65, 129, 257):
        verdict = check_B(GAP, 1.0, 1.0, samples_per_axis=per_axis)
        assert verdict.status == STATUS_VIOLATION, f"flipped at {per_axis}"


def test_bounded_box_implies_graph_condition_on_builtins():
    # whenever a builtin passes the box check, the graph check with the
    # half-radius constant fields on the matching interval passes too
    cases = [(QUADRATIC, 10.0, 5.0), (ABS_V, 10.0, 5.0), (GAP, 1.0, 1.0)]
    for L, K, r in cases:
        box = check_B(L, K, r, samples_per_axis=65)
        if box.status != STATUS_OK:
            continue
        rho = RhoPair.from_expressions(f"-{r / 2}", f"{r / 2}")
        graph = check_R(L, rho, (-K, K), samples=256)
        assert graph.status == STATUS_OK
    assert check_B(GAP, 1.0, 1.0, samples_per_axis=65).status == STATUS_VIOLATION


def test_verdict_json():
    verdict = check_R(QUADRATIC, RHO_UNIT, (-1.0, 1.0), samples=32)
    doc = verdict.to_json()
    assert doc["status"] == "no-violation-found"
    assert doc["sup_estimate"] == 1.0
    assert doc["witness"] is None
