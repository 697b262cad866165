"""Empirical error analysis: local/global orders, Gronwall bound, fan decomposition.

Each operation realizes one estimate of the underlying error theory as a
measurement plus a pass/fail check with documented slack:

* local errors compare one method step against the reference flow, in the
  geodesic metric and through suites of smooth test functions;
* convergence slopes are least-squares fits on log-log ladders with a
  floating-point floor that drops saturated rows;
* the Gronwall constant is a sampled supremum of the covariant-derivative
  operator norm over the flow tube of a minimizing geodesic;
* the fan decomposition reproduces the transported-local-error argument
  step by step on an actual trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import CoefficientField, ScalarField
from .integrators import (
    REFERENCE_TOLERANCE,
    MethodSpec,
    Trajectory,
    integrate,
    reference_flow,
    reference_trajectory,
    step,
)
from .spaces import (
    Point,
    covariant_derivative_operator,
    geodesic_distance,
    geodesic_point,
)
from .kernels import operator_norm

FP_FLOOR = 1e-13
GRONWALL_INFLATION = 0.02
FAN_TRANSPORT_SLACK = 0.02
FAN_TRIANGLE_SLACK = 1e-9
FAN_CHAIN_SLACK = 0.05


@dataclass
class ErrorTable:
    """Ladder of (h, metric error, max test-function error) rows."""

    problem: str
    method: str
    hs: list[float]
    err_metric: list[float]
    err_testfn_max: list[float]
    diagnostics: dict[str, list[float]] = field(default_factory=dict)

    def __post_init__(self):
        if any(b >= a for a, b in zip(self.hs, self.hs[1:])):
            raise ValueError("ladder step sizes must be strictly decreasing")
        if any(e < 0 for e in self.err_metric + self.err_testfn_max):
            raise ValueError("errors must be nonnegative")

    def column(self, name: str) -> list[float]:
        if name == "err_metric":
            return self.err_metric
        if name == "err_testfn_max":
            return self.err_testfn_max
        return self.diagnostics[name]


@dataclass
class SlopeReport:
    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    points_used: int
    expected: float | None = None
    tolerance: float = 0.25

    @property
    def passed(self) -> bool:
        if self.expected is None:
            return True
        return abs(self.slope - self.expected) <= self.tolerance


def convergence_slope(
    table: ErrorTable,
    column: str = "err_metric",
    expected: float | None = None,
    tolerance: float = 0.25,
) -> SlopeReport:
    """Least-squares slope of log error vs log h over rows above the fp floor."""
    hs = np.asarray(table.hs, dtype=float)
    errs = np.asarray(table.column(column), dtype=float)
    keep = errs > FP_FLOOR
    if int(keep.sum()) < 4:
        raise ValueError(
            f"need >= 4 ladder rows above the {FP_FLOOR:g} floor, have {int(keep.sum())}"
        )
    x = np.log(hs[keep])
    y = np.log(errs[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeReport(
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        window=(float(hs[keep].max()), float(hs[keep].min())),
        points_used=int(keep.sum()),
        expected=expected,
        tolerance=tolerance,
    )


def local_errors(
    spec: MethodSpec,
    v: CoefficientField,
    x0: Point,
    h: float,
    test_suite: list[ScalarField],
) -> tuple[float, list[float]]:
    """One-step errors: geodesic metric and per-test-function differences."""
    if h <= 0:
        raise ValueError("step size must be positive")
    exact = reference_flow(v, x0, h)
    approx = step(v, x0, h, spec)
    err_metric = geodesic_distance(exact, approx)
    err_testfn = [abs(f.value(approx) - f.value(exact)) for f in test_suite]
    return err_metric, err_testfn


def local_error_table(
    spec: MethodSpec,
    v: CoefficientField,
    x0: Point,
    hs: list[float],
    test_suite: list[ScalarField],
    problem: str = "",
) -> ErrorTable:
    metric, testfn = [], []
    for h in hs:
        em, et = local_errors(spec, v, x0, h, test_suite)
        metric.append(em)
        testfn.append(max(et) if et else 0.0)
    return ErrorTable(
        problem=problem, method=spec.method_id, hs=list(hs),
        err_metric=metric, err_testfn_max=testfn,
    )


def global_error(spec: MethodSpec, v: CoefficientField, x0: Point, t_end: float, n: int) -> float:
    """Endpoint geodesic error of the n-step uniform integration to t_end."""
    if n < 1:
        raise ValueError("need at least one step")
    if t_end == 0.0:
        return 0.0
    exact = reference_flow(v, x0, t_end)
    traj = integrate(spec, v, x0, np.linspace(0.0, t_end, n + 1))
    return geodesic_distance(exact, traj.end())


def global_error_table(
    spec: MethodSpec,
    v: CoefficientField,
    x0: Point,
    t_end: float,
    ns: list[int],
    test_suite: list[ScalarField] | None = None,
    problem: str = "",
) -> ErrorTable:
    exact = reference_flow(v, x0, t_end)
    hs, metric, testfn = [], [], []
    for n in ns:
        traj = integrate(spec, v, x0, np.linspace(0.0, t_end, n + 1))
        end = traj.end()
        hs.append(t_end / n)
        metric.append(geodesic_distance(exact, end))
        if test_suite:
            testfn.append(max(abs(f.value(end) - f.value(exact)) for f in test_suite))
        else:
            testfn.append(0.0)
    return ErrorTable(
        problem=problem, method=spec.method_id, hs=hs,
        err_metric=metric, err_testfn_max=testfn,
    )


# Gronwall machinery ---------------------------------------------------------


@dataclass
class GronwallReport:
    c_t: float
    t_end: float
    resolution: int
    s_points: int
    t_points: int
    initial_distance: float
    max_ratio: float          # against exp(C_T t), uninflated
    max_ratio_inflated: float  # against exp(1.02 C_T t)

    @property
    def passed(self) -> bool:
        return self.max_ratio_inflated <= 1.0


def _gronwall_sample(
    v: CoefficientField, p0: Point, q0: Point, t_end: float, resolution: int
) -> tuple[float, list[list[Point]], np.ndarray]:
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    s_grid = np.linspace(0.0, 1.0, resolution + 1)
    t_grid = np.linspace(0.0, t_end, 2 * resolution + 1)
    flows = []
    c_t = 0.0
    for s in s_grid:
        start = geodesic_point(p0, q0, float(s))
        trajectory = reference_trajectory(v, start, t_grid)
        flows.append(trajectory)
        for point in trajectory:
            c_t = max(c_t, operator_norm(covariant_derivative_operator(v, point)))
    return c_t, flows, t_grid


def gronwall_constant(
    v: CoefficientField, p0: Point, q0: Point, t_end: float, resolution: int = 3
) -> GronwallReport:
    """Sampled C_T = sup ||nabla V|| over the flow tube of the minimizing geodesic.

    The s-grid samples the geodesic from p0 to q0; each sample is flowed over
    a t-grid to t_end; the sup of the covariant-derivative operator norm over
    all flowed samples is C_T.  The flowed endpoint trajectories also yield
    the distance-growth ratios of the Gronwall inequality.
    """
    c_t, flows, t_grid = _gronwall_sample(v, p0, q0, t_end, resolution)
    d0 = geodesic_distance(p0, q0)
    max_ratio = 1.0
    max_ratio_inflated = 1.0
    if d0 > 0.0:
        for flowed_p, flowed_q, t in zip(flows[0], flows[-1], t_grid):
            dt = geodesic_distance(flowed_p, flowed_q)
            max_ratio = max(max_ratio, dt / (d0 * float(np.exp(c_t * t))))
            max_ratio_inflated = max(
                max_ratio_inflated,
                dt / (d0 * float(np.exp((1.0 + GRONWALL_INFLATION) * c_t * t))),
            )
    return GronwallReport(
        c_t=c_t,
        t_end=t_end,
        resolution=resolution,
        s_points=resolution + 1,
        t_points=2 * resolution + 1,
        initial_distance=d0,
        max_ratio=max_ratio,
        max_ratio_inflated=max_ratio_inflated,
    )


def gronwall_check(
    v: CoefficientField, p0: Point, q0: Point, t_end: float, resolution: int = 3
) -> tuple[bool, float]:
    """Distance-growth inequality with 2%-inflated C_T at every t-grid point."""
    report = gronwall_constant(v, p0, q0, t_end, resolution)
    return report.passed, report.max_ratio_inflated


# Lady-Windermere fan --------------------------------------------------------


@dataclass
class FanReport:
    times: np.ndarray
    local_errors: np.ndarray        # e_i, i = 1..n
    transported_errors: np.ndarray  # E_i, i = 1..n
    sum_transported: float
    global_error: float
    c_t: float
    order: int
    h_max: float
    chain_bound: float
    transport_ok: bool
    transport_max_excess: float
    triangle_ok: bool
    chain_ok: bool

    @property
    def passed(self) -> bool:
        return self.transport_ok and self.triangle_ok and self.chain_ok


def windermere_decomposition(
    spec: MethodSpec,
    v: CoefficientField,
    x0: Point,
    times,
    tube_points: int = 33,
) -> FanReport:
    """Transported-local-error decomposition of the global error.

    For the trajectory {y_i}: e_i is the one-step defect against the reference
    flow, E_i the distance between consecutive fan leaves at the final time,
    and C_T a sampled Gronwall constant over the tube swept by the fan.
    Checks: per-step transport bound (2% slack), the triangle chain
    global <= sum E_i (1e-9 relative slack), and the closing geometric-sum
    bound (5% slack).
    """
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    traj = integrate(spec, v, x0, times)
    n = times.size - 1
    p = spec.order

    # Fan leaves: F_i = flow of y_i over T_i = t_end - t_i; F_0 is the exact
    # endpoint, F_n the trajectory endpoint.
    leaves: list[Point] = []
    for i in range(n + 1):
        rest = t_end - float(times[i])
        leaves.append(reference_flow(v, traj.points[i], rest) if rest > 0 else traj.points[i])

    local = np.empty(n)
    transported = np.empty(n)
    probes: list[Point] = list(traj.points)
    for i in range(1, n + 1):
        h_i = float(times[i] - times[i - 1])
        one_step = reference_flow(v, traj.points[i - 1], h_i)
        probes.append(one_step)
        local[i - 1] = geodesic_distance(traj.points[i], one_step)
        transported[i - 1] = geodesic_distance(leaves[i], leaves[i - 1])
    probes.extend(leaves)
    probes.extend(reference_trajectory(v, x0, np.linspace(0.0, t_end, tube_points)))

    c_t = max(operator_norm(covariant_derivative_operator(v, pt)) for pt in probes)

    # Each distance carries measurement noise at the reference-tolerance
    # scale; the additive cushions below keep the checks meaningful when the
    # method is exact and both sides are pure noise.
    remaining = t_end - times[1:]
    growth = np.exp(c_t * remaining)
    noise = REFERENCE_TOLERANCE * (1.0 + growth)
    bound_per_step = growth * local * (1.0 + FAN_TRANSPORT_SLACK) + noise
    transport_ok = bool(np.all(transported <= bound_per_step))
    informative = local > FP_FLOOR
    if np.any(informative):
        transport_max_excess = float(
            np.max(transported[informative] / (growth[informative] * local[informative]))
        )
    else:
        transport_max_excess = 0.0

    global_err = geodesic_distance(leaves[0], leaves[-1])
    sum_transported = float(np.sum(transported))
    triangle_ok = bool(
        global_err <= sum_transported * (1.0 + FAN_TRIANGLE_SLACK) + n * REFERENCE_TOLERANCE
    )

    hs = np.diff(times)
    h_max = float(np.max(hs))
    c_max = float(np.max(local / hs ** (p + 1)))
    if c_t > 0.0:
        geometric = float(np.expm1(c_t * t_end) / c_t)
    else:
        geometric = t_end
    chain_bound = c_max * geometric * h_max**p
    chain_ok = bool(
        sum_transported
        <= chain_bound * (1.0 + FAN_CHAIN_SLACK) + n * REFERENCE_TOLERANCE * float(np.max(growth))
    )

    return FanReport(
        times=times,
        local_errors=local,
        transported_errors=transported,
        sum_transported=sum_transported,
        global_error=global_err,
        c_t=c_t,
        order=p,
        h_max=h_max,
        chain_bound=chain_bound,
        transport_ok=transport_ok,
        transport_max_excess=transport_max_excess,
        triangle_ok=triangle_ok,
        chain_ok=chain_ok,
    )
