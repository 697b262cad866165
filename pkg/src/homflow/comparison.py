"""Smooth comparison functions that dominate the geodesic distance near o.

The family is built from signed coordinate sums: for each sign multiindex
alpha in {0,1}^dim the chart polynomial P_alpha(z) = sum_i (-1)^{alpha_i} z_i
satisfies max_alpha P_alpha(z) = ||z||_1 exactly.  Composed with a chart at
the base point, scaled by a sampled bi-Lipschitz constant and localized by a
smooth bump, each member vanishes at o while one of them dominates d(., o) on
the epsilon-ball.  The same functions drive the shift-and-compare mechanism
that turns test-function error bounds into metric error bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

from .fields import CoefficientField
from .integrators import MethodSpec, reference_trajectory, step
from .kernels import mat_log
from .spaces import (
    Point,
    RotationGroup,
    Space,
    Sphere,
    act,
    base_point,
    geodesic_distance,
    lift_curve,
    so_basis,
)

#: Lipschitz estimates are inflated by this factor over the sampled maximum.
LIPSCHITZ_INFLATION = 0.05

#: Smoothness order of the polynomial bump (C^k at the knots).
CUTOFF_SMOOTHNESS = 5

MAX_CHART_RADIUS = np.pi / 4.0


def signed_sums(z: np.ndarray, alphas: list[tuple[int, ...]]) -> np.ndarray:
    """P_alpha(z) for every multiindex; max over alphas equals ||z||_1."""
    z = np.asarray(z, dtype=float)
    return np.array([float(np.sum(z * signs)) for signs in alphas])


def _sign_vectors(dim: int) -> list[np.ndarray]:
    return [np.array([1.0 if a == 0 else -1.0 for a in alpha]) for alpha in product((0, 1), repeat=dim)]


def smoothstep(u: float, order: int = CUTOFF_SMOOTHNESS) -> float:
    """Polynomial ramp: 0 at u<=0, 1 at u>=1, C^order at the knots."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    total = 0.0
    for k in range(order + 1):
        total += comb(order + k, k) * comb(2 * order + 1, order - k) * (-u) ** k
    return u ** (order + 1) * total


@dataclass
class ComparisonFamily:
    """2^dim smooth functions vanishing at o that dominate d(., o) on the ball."""

    space: Space
    eps: float
    lipschitz: float
    cutoff_order: int
    signs: list[np.ndarray]

    @property
    def size(self) -> int:
        return len(self.signs)

    def chart(self, x: Point) -> np.ndarray:
        """Chart coordinates at o; the closed 2*eps ball must stay inside."""
        if isinstance(self.space, Sphere):
            return np.asarray(x.coords[:-1], dtype=float)
        coords = mat_log(x.coords)
        return np.array([float(np.sum(e * coords)) for e in so_basis(self.space.ambient_dim)])

    def _bump(self, x: Point) -> float:
        d = geodesic_distance(x, base_point(self.space))
        return 1.0 - smoothstep(d / self.eps - 1.0, self.cutoff_order)

    def evaluate_all(self, x: Point) -> np.ndarray:
        """Values of every member at x."""
        bump = self._bump(x)
        if bump == 0.0:
            return np.zeros(self.size)
        z = self.chart(x)
        values = np.array([float(np.sum(z * s)) for s in self.signs])
        return self.lipschitz * bump * values

    def member(self, index: int):
        """Single member as a plain callable Point -> float."""

        def f(x: Point) -> float:
            return float(self.evaluate_all(x)[index])

        return f

    def dominates(self, x: Point) -> bool:
        """Lemma-style domination: some member value >= d(x, o)."""
        return bool(np.max(self.evaluate_all(x)) >= geodesic_distance(x, base_point(self.space)))


def _ball_samples(space: Space, eps: float, count: int, seed: int) -> list[Point]:
    rng = np.random.default_rng(seed)
    o = base_point(space)
    dim = space.dim
    samples = [o]
    # Axis-aligned rim points carry the extreme distance/chart ratios.
    if isinstance(space, Sphere):
        n = space.ambient_dim
        for i in range(n - 1):
            for sign in (1.0, -1.0):
                coords = np.zeros(n)
                coords[i] = sign * np.sin(eps)
                coords[-1] = np.cos(eps)
                samples.append(Point(space, coords))
    else:
        from .kernels import mat_exp

        for e in so_basis(space.ambient_dim):
            for sign in (1.0, -1.0):
                samples.append(act(mat_exp(sign * eps * e), o))
    for _ in range(count):
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        radius = eps * rng.uniform(0.0, 1.0) ** (1.0 / dim)
        if isinstance(space, Sphere):
            n = space.ambient_dim
            ambient = np.zeros(n)
            ambient[: n - 1] = direction
            coords = np.cos(radius) * o.coords + np.sin(radius) * ambient
            samples.append(Point(space, coords))
        else:
            from .kernels import mat_exp

            basis = so_basis(space.ambient_dim)
            gen = sum(d * e for d, e in zip(direction, basis))
            samples.append(act(mat_exp(radius * gen), o))
    return samples


def comparison_family(
    space: Space, eps: float, samples: int = 400, seed: int = 2024
) -> ComparisonFamily:
    """Build the family at the base point with a sampled Lipschitz constant.

    The constant is (1 + 5%) times the largest ratio d(x, y) over the l1 chart
    distance, over sampled pairs in the closed eps-ball (the base point and
    axis-aligned rim points are always included).
    """
    if eps <= 0.0:
        raise ValueError("ball radius must be positive")
    if eps > MAX_CHART_RADIUS:
        raise ValueError(f"ball radius {eps} exceeds the chart domain bound {MAX_CHART_RADIUS:.4f}")
    family = ComparisonFamily(
        space=space,
        eps=eps,
        lipschitz=1.0,
        cutoff_order=CUTOFF_SMOOTHNESS,
        signs=_sign_vectors(space.dim),
    )
    points = _ball_samples(space, eps, samples, seed)
    charts = [family.chart(p) for p in points]
    ratio = 0.0
    rng = np.random.default_rng(seed + 1)
    pair_count = min(len(points) * 8, 4000)
    pairs = [(0, j) for j in range(1, len(points))]
    pairs += [
        (int(rng.integers(0, len(points))), int(rng.integers(0, len(points))))
        for _ in range(pair_count)
    ]
    for i, j in pairs:
        if i == j:
            continue
        gap = float(np.sum(np.abs(charts[i] - charts[j])))
        if gap < 1e-12:
            continue
        ratio = max(ratio, geodesic_distance(points[i], points[j]) / gap)
    family.lipschitz = (1.0 + LIPSCHITZ_INFLATION) * ratio
    return family


# Shift-and-compare mechanism ------------------------------------------------


@dataclass
class MechanismReport:
    times: np.ndarray
    distances: np.ndarray
    shift_defects: np.ndarray
    dominated: np.ndarray
    sup_member_value: float
    order: int
    h: float
    invariance_ok: bool
    domination_ok: bool

    @property
    def ratio(self) -> float:
        """sup_t max_n member value, scaled by h^{p+1} (boundedness probe)."""
        return self.sup_member_value / self.h ** (self.order + 1)

    @property
    def passed(self) -> bool:
        return self.invariance_ok and self.domination_ok


def mechanism_check(
    spec: MethodSpec,
    v: CoefficientField,
    x0: Point,
    h: float,
    eps: float,
    family: ComparisonFamily | None = None,
    t_points: int = 17,
    invariance_tol: float = 1e-10,
) -> MechanismReport:
    """Shift-and-compare verification of the metric estimate mechanism.

    Along a t-grid of [0, h]: lift the reference curve discretely, shift the
    method curve by the inverse lift, and check (i) the shift preserves the
    distance to the base point, (ii) some comparison member dominates the
    distance at every grid time.  The supremum of member values feeds the
    h-ladder boundedness probe.
    """
    if family is None:
        family = comparison_family(v.space, eps)
    times = np.linspace(0.0, h, t_points)
    exact = reference_trajectory(v, x0, times)
    approx = [x0] + [step(v, x0, float(t), spec) for t in times[1:]]
    distances = np.array([geodesic_distance(a, e) for a, e in zip(approx, exact)])
    if float(np.max(distances)) >= eps:
        raise ValueError(
            f"method error {float(np.max(distances)):.3e} leaves the {eps}-ball; shrink h"
        )
    lifts = lift_curve(exact)
    o = base_point(v.space)
    shift_defects = np.empty(t_points)
    dominated = np.empty(t_points, dtype=bool)
    sup_value = 0.0
    for k, (g, a, d) in enumerate(zip(lifts, approx, distances)):
        shifted = act(g.T, a)
        shift_defects[k] = abs(geodesic_distance(shifted, o) - d)
        values = family.evaluate_all(shifted)
        top = float(np.max(values))
        dominated[k] = top >= d
        sup_value = max(sup_value, top)
    return MechanismReport(
        times=times,
        distances=distances,
        shift_defects=shift_defects,
        dominated=dominated,
        sup_member_value=sup_value,
        order=spec.order,
        h=h,
        invariance_ok=bool(np.all(shift_defects <= invariance_tol)),
        domination_ok=bool(np.all(dominated)),
    )
