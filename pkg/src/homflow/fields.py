"""Vector fields as Lie-algebra coefficient maps, with exact derivative towers.

A vector field on a homogeneous model is stored as a coefficient map
c: ambient -> so(n); its value at x is the infinitesimal action c(x) x.  Every
map carries exact multilinear directional derivatives up to a declared order,
so iterated Lie derivatives and post-Lie products are computed by exact chain
rules instead of nested finite differences (which lose too many digits at the
depths needed here).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import RegularityError
from .spaces import Point, Space

#: Order assigned to maps whose derivative tower is exact at every depth
#: (polynomial and trigonometric catalog entries).
UNLIMITED = 10**6


class SmoothMap:
    """Map on ambient coordinates with exact directional derivatives.

    ``deriv(x, dirs)`` evaluates the multilinear derivative
    D^len(dirs) F(x)[dirs...]; the empty tuple gives the value.  ``order`` is
    the largest admissible ``len(dirs)``.
    """

    def __init__(self, deriv, order: int):
        self._deriv = deriv
        self.order = order

    def __call__(self, x: np.ndarray):
        return self._deriv(x, ())

    def deriv(self, x: np.ndarray, dirs: tuple):
        if len(dirs) > self.order:
            raise RegularityError(
                f"derivative of order {len(dirs)} requested from a map of regularity {self.order}"
            )
        return self._deriv(x, dirs)


def constant_map(value: np.ndarray) -> SmoothMap:
    value = np.asarray(value, dtype=float)

    def deriv(x, dirs):
        if dirs:
            return np.zeros_like(value) if value.ndim else 0.0
        return value

    return SmoothMap(deriv, UNLIMITED)


def chain_pair(outer: SmoothMap, inner: SmoothMap) -> SmoothMap:
    """Tower of x -> D outer(x)[inner(x)].

    Leibniz over direction subsets:
    D^m [u_1..u_m] = sum over S subset of {1..m} of
        D^{1+|S^c|} outer(x)[ D^{|S|} inner(x)[u_S], u_{S^c} ].
    The result loses one order of the outer map.
    """
    order = min(outer.order - 1, inner.order)
    if order < 0:
        raise RegularityError("outer map has no derivatives left to chain")

    def deriv(x, dirs):
        m = len(dirs)
        indices = range(m)
        total = None
        for size in range(m + 1):
            for subset in combinations(indices, size):
                chosen = set(subset)
                inner_dirs = tuple(dirs[i] for i in subset)
                outer_dirs = tuple(dirs[i] for i in indices if i not in chosen)
                first_slot = inner.deriv(x, inner_dirs)
                term = outer.deriv(x, (first_slot,) + outer_dirs)
                total = term if total is None else total + term
        return total

    return SmoothMap(deriv, order)


def realization_map(cmap: SmoothMap, n: int) -> SmoothMap:
    """Tower of the realized field x -> c(x) x (matrix acting on the ambient point)."""

    def deriv(x, dirs):
        m = len(dirs)
        total = cmap.deriv(x, dirs) @ x
        for i in range(m):
            rest = dirs[:i] + dirs[i + 1 :]
            total = total + cmap.deriv(x, rest) @ dirs[i]
        return total

    return SmoothMap(deriv, cmap.order)


def cap_order(m: SmoothMap, order: int) -> SmoothMap:
    """Same map with a smaller declared regularity (for guard tests)."""
    return SmoothMap(m._deriv, min(m.order, order))


@dataclass(eq=False)
class CoefficientField:
    """Vector field V(x) = c(x) x given by its coefficient map c: M -> so(n)."""

    space: Space
    cmap: SmoothMap
    name: str = ""
    constant_value: np.ndarray | None = None
    _realization: SmoothMap | None = field(default=None, repr=False)

    @property
    def regularity(self) -> int:
        return self.cmap.order

    def coeff(self, x: Point) -> np.ndarray:
        return self.cmap(x.coords)

    def coeff_dirderiv(self, x: Point, direction: np.ndarray) -> np.ndarray:
        return self.cmap.deriv(x.coords, (np.asarray(direction, dtype=float),))

    def realization(self) -> SmoothMap:
        if self._realization is None:
            self._realization = realization_map(self.cmap, self.space.ambient_dim)
        return self._realization

    def ambient_vector(self, x: Point) -> np.ndarray:
        """Tangent vector of the field at x in ambient representation."""
        return self.coeff(x) @ x.coords

    def is_constant(self) -> bool:
        return self.constant_value is not None


@dataclass(eq=False)
class ScalarField:
    """Real function on the model with an exact derivative tower."""

    space: Space
    fmap: SmoothMap
    name: str = ""

    @property
    def regularity(self) -> int:
        return self.fmap.order

    def value(self, x: Point) -> float:
        return float(self.fmap(x.coords))

    def gradient(self, x: Point) -> np.ndarray:
        """Ambient gradient covector (same shape as the ambient coordinates)."""
        coords = x.coords
        flat = np.eye(coords.size)
        grad = np.array(
            [self.fmap.deriv(coords, (flat[i].reshape(coords.shape),)) for i in range(coords.size)]
        )
        return grad.reshape(coords.shape)


def lie_derivative(f: ScalarField, v: CoefficientField) -> ScalarField:
    """Exact Lie derivative V(f) as a new scalar field (one order lower)."""
    if f.space != v.space:
        raise ValueError("field and function live on different spaces")
    return ScalarField(
        f.space,
        chain_pair(f.fmap, v.realization()),
        name=f"{v.name or 'V'}({f.name or 'f'})",
    )


def post_lie_product(x: CoefficientField, y: CoefficientField) -> CoefficientField:
    """Flat constant-torsion connection product: coefficient map p -> Dc_y(p)[V_x(p)]."""
    if x.space != y.space:
        raise ValueError("post-Lie factors live on different spaces")
    return CoefficientField(
        x.space,
        chain_pair(y.cmap, x.realization()),
        name=f"({x.name or 'X'} > {y.name or 'Y'})",
    )


def scalar_combination(terms: list[tuple[float, ScalarField]], name: str = "") -> ScalarField:
    """Pointwise linear combination of scalar fields (towers combine linearly)."""
    space = terms[0][1].space
    maps = [(w, f.fmap) for w, f in terms]

    def deriv(x, dirs):
        return sum(w * m.deriv(x, dirs) for w, m in maps)

    return ScalarField(space, SmoothMap(deriv, min(m.order for _, m in maps)), name=name)


def field_combination(terms: list[tuple[float, CoefficientField]], name: str = "") -> CoefficientField:
    """Pointwise linear combination of coefficient fields."""
    space = terms[0][1].space
    maps = [(w, f.cmap) for w, f in terms]

    def deriv(x, dirs):
        total = None
        for w, m in maps:
            term = w * m.deriv(x, dirs)
            total = term if total is None else total + term
        return total

    return CoefficientField(space, SmoothMap(deriv, min(m.order for _, m in maps)), name=name)


def pushforward_field(v: CoefficientField, g: np.ndarray) -> CoefficientField:
    """Field transported by the group element g: c'(y) = g c(g^-1 y) g^-1.

    This is the coefficient map whose realized field is the pushforward of the
    realized field of ``v`` under the action of g.
    """
    g = np.asarray(g, dtype=float)
    ginv = g.T

    def deriv(y, dirs):
        pulled = tuple(ginv @ u for u in dirs)
        return g @ v.cmap.deriv(ginv @ y, pulled) @ ginv

    return CoefficientField(v.space, SmoothMap(deriv, v.cmap.order), name=f"push({v.name})")


def torsion_field(x: CoefficientField, y: CoefficientField) -> CoefficientField:
    """Torsion of the flat connection: coefficient map p -> -[c_x(p), c_y(p)]."""
    if x.space != y.space:
        raise ValueError("torsion factors live on different spaces")
    cx, cy = x.cmap, y.cmap

    def deriv(p, dirs):
        m = len(dirs)
        indices = range(m)
        total = None
        for size in range(m + 1):
            for subset in combinations(indices, size):
                chosen = set(subset)
                left = cx.deriv(p, tuple(dirs[i] for i in subset))
                right = cy.deriv(p, tuple(dirs[i] for i in indices if i not in chosen))
                term = right @ left - left @ right
                total = term if total is None else total + term
        return total

    return CoefficientField(
        x.space,
        SmoothMap(deriv, min(cx.order, cy.order)),
        name=f"torsion({x.name or 'X'},{y.name or 'Y'})",
    )
