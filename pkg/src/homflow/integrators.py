"""Lie group integrators: RKMK, commutator-free, Lie-Euler, and a reference flow.

Every method consumes a coefficient field and advances a point by group
exponentials and the action, so trajectories stay on the manifold to machine
precision.  The reference flow is the RKMK4 discretization under step-halving
control, with the closed-form orbit as an independent shortcut for constant
fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import CoefficientField
from .kernels import dexpinv, mat_exp
from .spaces import Point, act, geodesic_distance, invariant_defect


@dataclass(frozen=True)
class ButcherTableau:
    """Explicit Runge-Kutta data (a, b, c) with classical order p."""

    a: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    order: int

    def __post_init__(self):
        s = len(self.b)
        if len(self.a) != s or len(self.c) != s:
            raise ValueError("tableau dimensions disagree")
        for i, row in enumerate(self.a):
            if abs(sum(row) - self.c[i]) > 1e-14:
                raise ValueError(f"row {i} of the stage matrix does not sum to c[{i}]")
        if abs(sum(self.b) - 1.0) > 1e-14:
            raise ValueError("weights do not sum to 1")

    @property
    def stages(self) -> int:
        return len(self.b)


CLASSICAL_RK4 = ButcherTableau(
    a=((0.0, 0.0, 0.0, 0.0), (0.5, 0.0, 0.0, 0.0), (0.0, 0.5, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0)),
    b=(1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0),
    c=(0.0, 0.5, 0.5, 1.0),
    order=4,
)

FORWARD_EULER = ButcherTableau(a=((0.0,),), b=(1.0,), c=(0.0,), order=1)


@dataclass(frozen=True)
class MethodSpec:
    """A shipped method: kind is 'rkmk', 'commutator-free' or 'lie-euler'."""

    method_id: str
    kind: str
    order: int
    tableau: ButcherTableau | None = None
    dexpinv_order: int = 0

    def __post_init__(self):
        if self.kind == "rkmk" and self.tableau is None:
            raise ValueError("RKMK methods need a tableau")
        if self.kind == "rkmk" and self.dexpinv_order < self.order - 2:
            raise ValueError("dexpinv truncation too low for the claimed order")


METHODS: dict[str, MethodSpec] = {
    "lie-euler": MethodSpec("lie-euler", "lie-euler", order=1),
    "rkmk4": MethodSpec("rkmk4", "rkmk", order=4, tableau=CLASSICAL_RK4, dexpinv_order=2),
    "cf4": MethodSpec("cf4", "commutator-free", order=4),
}


def get_method(method_id: str) -> MethodSpec:
    try:
        return METHODS[method_id]
    except KeyError:
        raise ValueError(f"unknown method id {method_id!r}") from None


def rkmk_step(v: CoefficientField, x: Point, h: float, spec: MethodSpec) -> Point:
    """One explicit RKMK step of size h."""
    if h == 0.0:
        return x
    tableau = spec.tableau
    q = spec.dexpinv_order
    a, b = tableau.a, tableau.b
    ks: list[np.ndarray] = []
    for i in range(tableau.stages):
        u = None
        for j in range(i):
            if a[i][j] != 0.0:
                term = (h * a[i][j]) * ks[j]
                u = term if u is None else u + term
        if u is None:
            stage_point = x
            ks.append(v.coeff(x))
            continue
        stage_point = act(mat_exp(u), x)
        ks.append(dexpinv(u, v.coeff(stage_point), q))
    update = sum(bi * ki for bi, ki in zip(b, ks))
    return act(mat_exp(h * update), x)


def lie_euler_step(v: CoefficientField, x: Point, h: float) -> Point:
    if h == 0.0:
        return x
    return act(mat_exp(h * v.coeff(x)), x)


def commutator_free_step(v: CoefficientField, x: Point, h: float) -> Point:
    """One CF4 step: two stage exponentials per half, no commutators."""
    if h == 0.0:
        return x
    k1 = v.coeff(x)
    y2 = act(mat_exp(0.5 * h * k1), x)
    k2 = v.coeff(y2)
    y3 = act(mat_exp(0.5 * h * k2), x)
    k3 = v.coeff(y3)
    y4 = act(mat_exp(h * k3 - 0.5 * h * k1), y2)
    k4 = v.coeff(y4)
    half = act(mat_exp(h * (0.25 * k1 + (k2 + k3) / 6.0 - k4 / 12.0)), x)
    return act(mat_exp(h * (-k1 / 12.0 + (k2 + k3) / 6.0 + 0.25 * k4)), half)


def step(v: CoefficientField, x: Point, h: float, spec: MethodSpec) -> Point:
    if spec.kind == "rkmk":
        return rkmk_step(v, x, h, spec)
    if spec.kind == "commutator-free":
        return commutator_free_step(v, x, h)
    if spec.kind == "lie-euler":
        return lie_euler_step(v, x, h)
    raise ValueError(f"unknown method kind {spec.kind!r}")


@dataclass
class Trajectory:
    """Discrete approximate integral curve on a strictly increasing grid."""

    times: np.ndarray
    points: list[Point]
    method_id: str

    def max_invariant_defect(self) -> float:
        return max(invariant_defect(p) for p in self.points)

    def end(self) -> Point:
        return self.points[-1]


def uniform_grid(t_end: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("grid needs at least one step")
    return np.linspace(0.0, t_end, n + 1)


def integrate(spec: MethodSpec, v: CoefficientField, x0: Point, times) -> Trajectory:
    """March the one-step method across the grid (deterministic, sequential)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("grid must contain at least two times")
    if not np.all(np.diff(times) > 0.0):
        raise ValueError("grid must be strictly increasing")
    points = [x0]
    y = x0
    for k in range(times.size - 1):
        y = step(v, y, float(times[k + 1] - times[k]), spec)
        points.append(y)
    return Trajectory(times=times, points=points, method_id=spec.method_id)


# Reference-flow machinery ---------------------------------------------------

REFERENCE_TOLERANCE = 1e-12
_MAX_REFINEMENTS = 28

_flow_cache: dict[tuple, Point] = {}
# Accepted refinement counts from previous calls with the same field and
# step; warm-starts the halving control for repeated segment lengths.
_refinement_hints: dict[tuple, int] = {}


def _constant_flow(v: CoefficientField, x0: Point, t: float) -> Point:
    return act(mat_exp(t * v.constant_value), x0)


_EXP_EYE3 = np.eye(3)


def _exp_raw(a: np.ndarray) -> np.ndarray:
    # Lean scaling-and-squaring for trusted internal skew input.
    norm = float(np.sqrt(np.sum(a * a)))
    if norm == 0.0:
        return np.eye(a.shape[0])
    squarings = 0
    if norm > 0.25:
        squarings = int(np.ceil(np.log2(norm / 0.25)))
        a = a / (2.0**squarings)
        norm /= 2.0**squarings
    terms = 13
    if norm <= 1.0e-3:
        terms = 4
    elif norm <= 1.2e-2:
        terms = 6
    elif norm <= 5.3e-2:
        terms = 8
    elif norm <= 0.14:
        terms = 10
    eye = _EXP_EYE3 if a.shape[0] == 3 else np.eye(a.shape[0])
    result = eye + a / terms
    for k in range(terms - 1, 0, -1):
        result = eye + (a @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def _dexpinv2_raw(u: np.ndarray, c: np.ndarray) -> np.ndarray:
    # dexpinv truncated at order 2: c - [u,c]/2 + [u,[u,c]]/12.
    t1 = u @ c - c @ u
    t2 = u @ t1 - t1 @ u
    return c - 0.5 * t1 + t2 / 12.0


def _integrate_uniform(v: CoefficientField, x0: Point, t: float, n: int) -> Point:
    """Uniform RKMK4 march on raw coordinates (reference-flow hot path)."""
    cmap = v.cmap
    empty: tuple = ()
    h = t / n
    y = x0.coords
    for _ in range(n):
        k1 = cmap._deriv(y, empty)
        u2 = (0.5 * h) * k1
        k2 = _dexpinv2_raw(u2, cmap._deriv(_exp_raw(u2) @ y, empty))
        u3 = (0.5 * h) * k2
        k3 = _dexpinv2_raw(u3, cmap._deriv(_exp_raw(u3) @ y, empty))
        u4 = h * k3
        k4 = _dexpinv2_raw(u4, cmap._deriv(_exp_raw(u4) @ y, empty))
        y = _exp_raw((h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)) @ y
    return Point(x0.space, y)


def reference_flow(v: CoefficientField, x0: Point, t: float, tol: float = REFERENCE_TOLERANCE) -> Point:
    """Flow of the field to time t with estimated geodesic error <= tol.

    Step-halving control: refinements double the step count until two
    successive results differ by less than tol/4; constant fields use the
    closed-form orbit instead.
    """
    if tol < 1e-13:
        raise ValueError("reference tolerance below 1e-13 is not attainable")
    if t == 0.0:
        return x0
    if v.is_constant():
        return _constant_flow(v, x0, t)
    key = (id(v), x0.key(), float(t), float(tol))
    cached = _flow_cache.get(key)
    if cached is not None:
        return cached
    hint_key = (id(v), float(t), float(tol))
    hint = _refinement_hints.get(hint_key)
    n = max(2, hint // 2) if hint else max(2, int(np.ceil(abs(t) * 16.0)))
    coarse = _integrate_uniform(v, x0, t, n)
    for _ in range(_MAX_REFINEMENTS):
        n *= 2
        fine = _integrate_uniform(v, x0, t, n)
        gap = geodesic_distance(coarse, fine)
        if gap < tol / 4.0:
            _flow_cache[key] = fine
            _refinement_hints[hint_key] = n
            return fine
        # Fourth-order error model: jump close to the required resolution.
        if gap > tol:
            factor = (gap / (tol / 8.0)) ** 0.25
            boost = int(2 ** np.ceil(np.log2(max(1.0, factor))))
            if boost > 2:
                n *= boost // 2
                coarse = _integrate_uniform(v, x0, t, n)
                continue
        coarse = fine
    raise RuntimeError("reference flow failed to converge within the refinement budget")


def reference_trajectory(
    v: CoefficientField, x0: Point, times, tol: float = REFERENCE_TOLERANCE
) -> list[Point]:
    """Reference flow sampled at the given increasing times (times[0] may be 0)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("need at least one sample time")
    points = []
    if v.is_constant():
        return [_constant_flow(v, x0, float(t)) for t in times]
    segments = max(1, times.size - 1)
    seg_tol = max(1e-13, tol / segments)
    y = x0
    prev_t = 0.0
    for t in times:
        dt = float(t) - prev_t
        if dt != 0.0:
            y = reference_flow(v, y, dt, seg_tol)
        prev_t = float(t)
        points.append(y)
    return points
