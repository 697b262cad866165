"""Catalog of test problems: coefficient fields and scalar test functions.

Field families (all with exact derivative towers):

* ``constant``: c(x) = xi, a fixed so(n) element.  The flow is the
  one-parameter action orbit act(exp(t xi), x), available in closed form.
* ``sphere-nonlinear``: on S^2, c(x) = hat(a + eps (x_2^2, sin x_3, x_1 x_2))
  (1-based ambient indices).
* ``group-nonlinear``: on SO(3), c(Y) = hat(b + eps (Y_12, Y_23^2, Y_31)).

Scalar suites provide >= 5 non-constant smooth test functions per model.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .fields import UNLIMITED, CoefficientField, ScalarField, SmoothMap, constant_map
from .kernels import hat
from .spaces import Point, RotationGroup, Space, Sphere, random_point

FIELD_FAMILIES = ("constant", "sphere-nonlinear", "group-nonlinear")

_DEFAULT_AXIS = np.array([0.4, -0.7, 0.5])
_DEFAULT_GROUP_AXIS = np.array([0.3, 0.6, -0.2])


def sample_point(space: Space, seed) -> Point:
    """Deterministic pseudo-random point (same seed, same bits)."""
    return random_point(space, seed)


def _pairing(c: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(c * x))


def constant_scalar(space: Space, value: float, name: str = "const") -> ScalarField:
    return ScalarField(space, constant_map(float(value)), name=name)


def linear_scalar(space: Space, c: np.ndarray, name: str = "linear") -> ScalarField:
    c = np.asarray(c, dtype=float)

    def deriv(x, dirs):
        if len(dirs) == 0:
            return _pairing(c, x)
        if len(dirs) == 1:
            return _pairing(c, dirs[0])
        return 0.0

    return ScalarField(space, SmoothMap(deriv, UNLIMITED), name=name)


def quadratic_scalar(space: Space, q: np.ndarray, name: str = "quadratic") -> ScalarField:
    """x -> <x, Q x> for a symmetric matrix Q acting on flattened coordinates."""
    q = np.asarray(q, dtype=float)
    q = 0.5 * (q + q.T)

    def deriv(x, dirs):
        xf = x.reshape(-1)
        if len(dirs) == 0:
            return float(xf @ q @ xf)
        if len(dirs) == 1:
            return float(2.0 * dirs[0].reshape(-1) @ q @ xf)
        if len(dirs) == 2:
            return float(2.0 * dirs[0].reshape(-1) @ q @ dirs[1].reshape(-1))
        return 0.0

    return ScalarField(space, SmoothMap(deriv, UNLIMITED), name=name)


def exp_scalar(space: Space, c: np.ndarray, name: str = "exp") -> ScalarField:
    c = np.asarray(c, dtype=float)

    def deriv(x, dirs):
        factor = float(np.exp(_pairing(c, x)))
        for u in dirs:
            factor *= _pairing(c, u)
        return factor

    return ScalarField(space, SmoothMap(deriv, UNLIMITED), name=name)


def sin_scalar(space: Space, c: np.ndarray, name: str = "sin") -> ScalarField:
    c = np.asarray(c, dtype=float)

    def deriv(x, dirs):
        factor = float(np.sin(_pairing(c, x) + len(dirs) * np.pi / 2.0))
        for u in dirs:
            factor *= _pairing(c, u)
        return factor

    return ScalarField(space, SmoothMap(deriv, UNLIMITED), name=name)


def product_scalar(f: ScalarField, g: ScalarField, name: str = "product") -> ScalarField:
    """Leibniz tower of the pointwise product f*g."""

    def deriv(x, dirs):
        m = len(dirs)
        total = 0.0
        for size in range(m + 1):
            for subset in combinations(range(m), size):
                chosen = set(subset)
                left = f.fmap.deriv(x, tuple(dirs[i] for i in subset))
                right = g.fmap.deriv(x, tuple(dirs[i] for i in range(m) if i not in chosen))
                total += left * right
        return total

    return ScalarField(f.space, SmoothMap(deriv, min(f.fmap.order, g.fmap.order)), name=name)


def default_suite(space: Space) -> list[ScalarField]:
    """Deterministic suite of smooth test functions (>= 5 non-constant)."""
    if isinstance(space, Sphere):
        n = space.ambient_dim
        e0 = np.eye(n)[0]
        mix = np.linspace(0.3, -1.1, n)
        q = np.outer(np.linspace(1.0, 0.2, n), np.linspace(0.5, -0.8, n))
        return [
            linear_scalar(space, e0, name="x1"),
            linear_scalar(space, mix, name="mix"),
            quadratic_scalar(space, q + q.T, name="quad"),
            exp_scalar(space, np.linspace(0.4, -0.5, n), name="exp"),
            sin_scalar(space, np.linspace(1.0, 0.2, n), name="sin"),
        ]
    n = space.ambient_dim
    c1 = np.zeros((n, n))
    c1[0, 1] = 1.0
    c2 = np.linspace(0.2, -0.9, n * n).reshape(n, n)
    return [
        linear_scalar(space, c1, name="entry12"),
        linear_scalar(space, c2, name="mix"),
        product_scalar(
            linear_scalar(space, c1), linear_scalar(space, c2), name="prod"
        ),
        exp_scalar(space, 0.35 * c2, name="exp"),
        sin_scalar(space, c1 + 0.5 * np.eye(n), name="sin"),
    ]


def _sphere_nonlinear_map(a: np.ndarray, eps: float) -> SmoothMap:
    # components (1-based spec indices): x_2^2, sin x_3, x_1 x_2

    def deriv(x, dirs):
        m = len(dirs)
        if m == 0:
            comp = np.array([x[1] ** 2, np.sin(x[2]), x[0] * x[1]])
            return hat(a + eps * comp)
        if m == 1:
            (u,) = dirs
            comp = np.array(
                [2.0 * x[1] * u[1], np.cos(x[2]) * u[2], u[0] * x[1] + x[0] * u[1]]
            )
            return hat(eps * comp)
        if m == 2:
            u, v = dirs
            comp = np.array(
                [2.0 * u[1] * v[1], -np.sin(x[2]) * u[2] * v[2], u[0] * v[1] + v[0] * u[1]]
            )
            return hat(eps * comp)
        # Only the sine component survives beyond second order.
        sine = np.sin(x[2] + m * np.pi / 2.0)
        for u in dirs:
            sine *= u[2]
        return hat(eps * np.array([0.0, sine, 0.0]))

    return SmoothMap(deriv, UNLIMITED)


def _group_nonlinear_map(b: np.ndarray, eps: float) -> SmoothMap:
    # components (1-based spec indices): Y_12, Y_23^2, Y_31

    def deriv(y, dirs):
        m = len(dirs)
        if m == 0:
            comp = np.array([y[0, 1], y[1, 2] ** 2, y[2, 0]])
            return hat(b + eps * comp)
        if m == 1:
            (u,) = dirs
            comp = np.array([u[0, 1], 2.0 * y[1, 2] * u[1, 2], u[2, 0]])
            return hat(eps * comp)
        if m == 2:
            u, v = dirs
            comp = np.array([0.0, 2.0 * u[1, 2] * v[1, 2], 0.0])
            return hat(eps * comp)
        return np.zeros((3, 3))

    return SmoothMap(deriv, UNLIMITED)


def sample_field(space: Space, family: str, eps: float = 1.0, axis=None) -> CoefficientField:
    """Catalog coefficient field; unknown family ids raise ValueError."""
    if family == "constant":
        if axis is None:
            if space.ambient_dim != 3:
                raise ValueError("constant family needs an explicit so(n) axis for n != 3")
            xi = hat(_DEFAULT_AXIS)
        else:
            axis = np.asarray(axis, dtype=float)
            xi = hat(axis) if axis.shape == (3,) else axis
        if xi.shape != (space.ambient_dim, space.ambient_dim):
            raise ValueError("constant coefficient has wrong shape for the space")
        return CoefficientField(space, constant_map(xi), name="constant", constant_value=xi)
    if family == "sphere-nonlinear":
        if not isinstance(space, Sphere) or space.ambient_dim != 3:
            raise ValueError("sphere-nonlinear is defined on Sphere(3)")
        a = _DEFAULT_AXIS if axis is None else np.asarray(axis, dtype=float)
        return CoefficientField(space, _sphere_nonlinear_map(a, eps), name="sphere-nonlinear")
    if family == "group-nonlinear":
        if not isinstance(space, RotationGroup) or space.ambient_dim != 3:
            raise ValueError("group-nonlinear is defined on RotationGroup(3)")
        b = _DEFAULT_GROUP_AXIS if axis is None else np.asarray(axis, dtype=float)
        return CoefficientField(space, _group_nonlinear_map(b, eps), name="group-nonlinear")
    raise ValueError(f"unknown field family {family!r}")


def space_from_name(name: str, ambient_dim: int = 3) -> Space:
    if name == "sphere":
        return Sphere(ambient_dim)
    if name in ("rotation-group", "group"):
        return RotationGroup(ambient_dim)
    raise ValueError(f"unknown space model {name!r}")
