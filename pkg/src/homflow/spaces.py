"""Homogeneous Riemannian models and their geometry.

Two concrete models are provided:

* ``Sphere(n)``: the unit sphere S^{n-1} in R^n acted on by SO(n), base point
  o = e_n, round metric, geodesic distance arccos<x, y>.
* ``RotationGroup(n)``: SO(n) acting on itself by left multiplication, base
  point o = I, bi-invariant metric from the plain Frobenius inner product,
  geodesic distance ||log(x^T y)||_F.

Points carry their descriptor; all operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NonUniqueGeodesicError

# Pairs closer than this to the cut locus are handed to eigenvalue-based
# distance formulas instead of the principal log (margin is wider than the
# mat_log rejection threshold on purpose).
_CUT_LOCUS_MARGIN = 1e-6


@dataclass(frozen=True)
class Sphere:
    """S^{n-1} subset R^n under SO(n); ``ambient_dim`` is n."""

    ambient_dim: int

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("sphere needs ambient dimension >= 2")

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    @property
    def group_dim(self) -> int:
        n = self.ambient_dim
        return n * (n - 1) // 2

    def base_coords(self) -> np.ndarray:
        o = np.zeros(self.ambient_dim)
        o[-1] = 1.0
        return o


@dataclass(frozen=True)
class RotationGroup:
    """SO(n) as a homogeneous space under its own left multiplication."""

    ambient_dim: int

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("rotation group needs n >= 2")

    @property
    def dim(self) -> int:
        n = self.ambient_dim
        return n * (n - 1) // 2

    @property
    def group_dim(self) -> int:
        return self.dim

    def base_coords(self) -> np.ndarray:
        return np.eye(self.ambient_dim)


Space = Sphere | RotationGroup


@dataclass(frozen=True, eq=False)
class Point:
    """A point of a homogeneous model: unit vector or rotation matrix."""

    space: Space
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", coords)
        # Cheap constraint check on every construction; the full defect
        # (including orientation) is available via invariant_defect.
        if isinstance(self.space, Sphere):
            defect = abs(float(np.sqrt(np.sum(coords * coords))) - 1.0)
        else:
            n = self.space.ambient_dim
            defect = float(np.linalg.norm(coords.T @ coords - np.eye(n)))
        if defect > 1e-8:
            raise ValueError(f"coordinates violate manifold invariants (defect {defect:.3e})")

    def key(self) -> bytes:
        """Stable bytes key for caching."""
        return self.coords.tobytes()


def invariant_defect(x: Point) -> float:
    """Distance of the raw coordinates from the manifold constraints."""
    if isinstance(x.space, Sphere):
        return abs(float(np.linalg.norm(x.coords)) - 1.0)
    r = x.coords
    n = x.space.ambient_dim
    defect = float(np.linalg.norm(r.T @ r - np.eye(n)))
    if float(np.linalg.det(r)) <= 0.0:
        defect = max(defect, 1.0)
    return defect


def base_point(space: Space) -> Point:
    return Point(space, space.base_coords())


def act(g: np.ndarray, x: Point) -> Point:
    """Left action of a group element: matrix-vector (sphere) or product (group)."""
    g = np.asarray(g, dtype=float)
    n = x.space.ambient_dim
    if g.shape != (n, n):
        raise ValueError(f"group element shape {g.shape} does not match ambient dimension {n}")
    return Point(x.space, g @ x.coords)


def _check_same_space(x: Point, y: Point) -> None:
    if x.space != y.space:
        raise ValueError("points live on different spaces")


def _group_log_distance(rel: np.ndarray) -> float:
    # ||log||_F from eigenvalue angles; valid for every rotation, including
    # angle pi where the principal log itself is rejected.
    angles = np.angle(np.linalg.eigvals(rel))
    return float(np.sqrt(np.sum(angles**2)))


def geodesic_distance(x: Point, y: Point) -> float:
    """Invariant geodesic distance between two points of the same model."""
    _check_same_space(x, y)
    if isinstance(x.space, Sphere):
        inner = float(np.clip(np.dot(x.coords, y.coords), -1.0, 1.0))
        # arccos loses ~sqrt(eps) accuracy near the endpoints; the chord
        # formulation theta = 2 asin(||x -+ y|| / 2) is exact there.
        if inner >= 0.5:
            half_chord = 0.5 * float(np.linalg.norm(x.coords - y.coords))
            return 2.0 * float(np.arcsin(min(1.0, half_chord)))
        if inner <= -0.5:
            half_chord = 0.5 * float(np.linalg.norm(x.coords + y.coords))
            return float(np.pi) - 2.0 * float(np.arcsin(min(1.0, half_chord)))
        return float(np.arccos(inner))
    rel = x.coords.T @ y.coords
    if kernels.rotation_angle(rel) > np.pi - _CUT_LOCUS_MARGIN:
        return _group_log_distance(rel)
    return float(np.linalg.norm(kernels.mat_log(rel)))


def geodesic_point(x: Point, y: Point, s: float) -> Point:
    """Point at parameter s in [0, 1] on the minimizing geodesic from x to y."""
    _check_same_space(x, y)
    if not 0.0 <= s <= 1.0:
        raise ValueError("geodesic parameter must lie in [0, 1]")
    if isinstance(x.space, Sphere):
        inner = float(np.clip(np.dot(x.coords, y.coords), -1.0, 1.0))
        theta = float(np.arccos(inner))
        if theta > np.pi - _CUT_LOCUS_MARGIN:
            raise NonUniqueGeodesicError("antipodal endpoints: minimizing geodesic not unique")
        if theta == 0.0:
            return x
        # Slerp between unit vectors.
        c = (np.sin((1.0 - s) * theta) * x.coords + np.sin(s * theta) * y.coords) / np.sin(theta)
        return Point(x.space, c / np.linalg.norm(c))
    rel = x.coords.T @ y.coords
    if kernels.rotation_angle(rel) > np.pi - _CUT_LOCUS_MARGIN:
        raise NonUniqueGeodesicError("angle-pi endpoints: minimizing geodesic not unique")
    return Point(x.space, x.coords @ kernels.mat_exp(s * kernels.mat_log(rel)))


def lift_to_group(x: Point) -> np.ndarray:
    """Deterministic group element g with act(g, o) = x.

    Sphere: completes x to a positively oriented orthonormal basis by
    Gram-Schmidt over the standard basis in fixed seed order, so that the last
    column of g equals x.  Group: g = x.
    """
    if isinstance(x.space, RotationGroup):
        return np.array(x.coords)
    n = x.space.ambient_dim
    columns = []
    for seed_index in range(n):
        candidate = np.zeros(n)
        candidate[seed_index] = 1.0
        candidate = candidate - np.dot(candidate, x.coords) * x.coords
        for b in columns:
            candidate = candidate - np.dot(candidate, b) * b
        norm = float(np.linalg.norm(candidate))
        if norm >= 0.1:
            columns.append(candidate / norm)
        if len(columns) == n - 1:
            break
    g = np.column_stack(columns + [x.coords])
    if float(np.linalg.det(g)) < 0.0:
        g[:, 0] = -g[:, 0]
    return g


def _stabilizer_align(g_new: np.ndarray, g_prev: np.ndarray, n: int) -> np.ndarray:
    # Procrustes over SO(n-1): post-multiply g_new by diag(S, 1) so that the
    # jump ||g_new diag(S,1) - g_prev||_F is minimal.
    m = g_new[:, : n - 1].T @ g_prev[:, : n - 1]
    u, _, vt = np.linalg.svd(m)
    s = u @ vt
    if float(np.linalg.det(s)) < 0.0:
        u[:, -1] = -u[:, -1]
        s = u @ vt
    h = np.eye(n)
    h[: n - 1, : n - 1] = s
    return g_new @ h


def lift_curve(points: list[Point]) -> list[np.ndarray]:
    """Discrete jump-minimizing lift of a sampled curve to the group.

    Each lift satisfies act(g_k, o) = points[k]; consecutive lifts are aligned
    by stabilizer corrections that minimize the Frobenius jump.
    """
    if not points:
        return []
    space = points[0].space
    lifts = [lift_to_group(points[0])]
    if isinstance(space, RotationGroup):
        return [lift_to_group(p) for p in points]
    n = space.ambient_dim
    for p in points[1:]:
        lifts.append(_stabilizer_align(lift_to_group(p), lifts[-1], n))
    return lifts


def so_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of so(n) for the Frobenius inner product."""
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = 1.0 / np.sqrt(2.0)
            e[j, i] = -1.0 / np.sqrt(2.0)
            basis.append(e)
    return basis


def tangent_basis(x: Point) -> list[np.ndarray]:
    """Orthonormal basis of T_x M in ambient representation.

    Sphere: the non-base columns of the canonical lift.  Group: E_a x for the
    orthonormal so(n) basis (right translation is an isometry for the
    bi-invariant metric).
    """
    if isinstance(x.space, Sphere):
        g = lift_to_group(x)
        return [g[:, i] for i in range(x.space.ambient_dim - 1)]
    return [e @ x.coords for e in so_basis(x.space.ambient_dim)]


def tangent_inner(x: Point, u: np.ndarray, v: np.ndarray) -> float:
    """Riemannian inner product of ambient tangent vectors at x."""
    return float(np.sum(u * v))


def covariant_derivative_operator(field, x: Point) -> np.ndarray:
    """Matrix of Y -> nabla_Y V at x in the orthonormal tangent basis.

    Sphere: tangential projection of the ambient directional derivative of the
    realized field.  Group: right-trivialized derivative corrected by the
    -1/2 [eta, xi] term of the bi-invariant Levi-Civita connection.
    """
    basis = tangent_basis(x)
    k = len(basis)
    matrix = np.empty((k, k))
    if isinstance(x.space, Sphere):
        c = field.coeff(x)
        for j, bj in enumerate(basis):
            dc = field.coeff_dirderiv(x, bj)
            ambient = dc @ x.coords + c @ bj
            for i, bi in enumerate(basis):
                matrix[i, j] = float(np.dot(bi, ambient))
        return matrix
    c = field.coeff(x)
    eta_basis = so_basis(x.space.ambient_dim)
    for j, (eta, bj) in enumerate(zip(eta_basis, basis)):
        dc = field.coeff_dirderiv(x, bj)
        value = dc - 0.5 * kernels.commutator(eta, c)
        for i, e in enumerate(eta_basis):
            matrix[i, j] = float(np.sum(e * value))
    return matrix


def random_point(space: Space, seed) -> Point:
    """Deterministic pseudo-random point from a seed or Generator."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    n = space.ambient_dim
    if isinstance(space, Sphere):
        v = rng.standard_normal(n)
        return Point(space, v / np.linalg.norm(v))
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if float(np.linalg.det(q)) < 0.0:
        q[:, 0] = -q[:, 0]
    return Point(space, q)


def random_tangent(x: Point, seed, scale: float = 1.0) -> np.ndarray:
    """Deterministic pseudo-random tangent vector at x with norm <= scale."""
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    basis = tangent_basis(x)
    weights = rng.standard_normal(len(basis))
    v = sum(w * b for w, b in zip(weights, basis))
    norm = float(np.sqrt(tangent_inner(x, v, v)))
    if norm == 0.0:
        return v
    return v * (scale / norm)
