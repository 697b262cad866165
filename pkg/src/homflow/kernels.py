"""Dense small-matrix kernels: exp, principal log, commutators, dexpinv.

All routines operate on plain ``numpy`` arrays.  Lie algebra elements are
skew-symmetric n x n matrices (so(n)); group elements are special orthogonal
matrices (SO(n)).  Matrices are assumed small (n <= 6 in practice), so every
kernel favours a simple, accurate formulation over peak speed.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import sqrtm
from scipy.special import bernoulli

from .errors import LogBranchError

# Frobenius-norm threshold below which the Taylor series of exp/log is
# evaluated directly; 0.25 keeps the order-13 exp tail under 1e-18.
_SQUARING_THRESHOLD = 0.25

# Smallest Taylor order whose truncation error stays below 1e-17 for the
# given norm (norm bound, order); checked in increasing order.
_EXP_ORDER_LADDER = ((1.0e-3, 4), (1.2e-2, 6), (5.3e-2, 8), (0.14, 10), (0.25, 13))
_LOG_ORDER_LADDER = ((3.0e-6, 2), (5.0e-4, 4), (1.7e-2, 8), (6.0e-2, 12), (0.118, 16), (0.251, 28))

# Rotations with angle within this margin of pi are rejected by mat_log.
LOG_BRANCH_MARGIN = 1e-8


def _require_finite(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    # One reduction instead of an isfinite temp; non-finite entries make the
    # sum nan or +-inf (overflow of finite entries is out of regime here).
    if not math.isfinite(float(np.sum(a))):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def is_skew(a: np.ndarray, tol: float = 1e-12) -> bool:
    a = np.asarray(a, dtype=float)
    scale = max(1.0, float(np.linalg.norm(a)))
    return float(np.linalg.norm(a + a.T)) <= tol * scale


def is_rotation(r: np.ndarray, tol: float = 1e-10) -> bool:
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    return (
        float(np.linalg.norm(r.T @ r - np.eye(n))) <= tol
        and float(np.linalg.det(r)) > 0.0
    )


def mat_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring on a fixed-order Taylor kernel.

    For skew input the result is special orthogonal to machine precision.
    """
    a = _require_finite(a, "mat_exp argument")
    n = a.shape[0]
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return np.eye(n)
    squarings = max(0, int(np.ceil(np.log2(norm / _SQUARING_THRESHOLD)))) if norm > _SQUARING_THRESHOLD else 0
    b = a / (2.0**squarings)
    scaled_norm = norm / (2.0**squarings)
    terms = _EXP_ORDER_LADDER[-1][1]
    for bound, order in _EXP_ORDER_LADDER:
        if scaled_norm <= bound:
            terms = order
            break
    # Horner evaluation of the truncated exponential series.
    eye = np.eye(n)
    result = eye + b / terms
    for k in range(terms - 1, 0, -1):
        result = eye + (b @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def rotation_angle(r: np.ndarray) -> float:
    """Largest principal rotation angle of an orthogonal matrix, in [0, pi]."""
    r = _require_finite(r, "rotation_angle argument")
    if r.shape[0] == 3:
        # so(3): single angle, determined by the trace.
        return float(np.arccos(np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)))
    eigvals = np.linalg.eigvals(r)
    return float(np.max(np.abs(np.angle(eigvals))))


def mat_log(r: np.ndarray) -> np.ndarray:
    """Principal logarithm of a rotation matrix via inverse scaling-and-squaring.

    Raises :class:`LogBranchError` when the rotation angle is within
    ``LOG_BRANCH_MARGIN`` of pi (an eigenvalue sits at -1 and the principal
    branch is ill-defined).  The returned matrix is exactly skew-symmetrized.
    """
    r = _require_finite(r, "mat_log argument")
    if not is_rotation(r, tol=1e-8):
        raise ValueError("mat_log argument is not special orthogonal")
    if rotation_angle(r) > np.pi - LOG_BRANCH_MARGIN:
        raise LogBranchError("rotation angle within 1e-8 of pi; principal log rejected")
    n = r.shape[0]
    square_roots = 0
    b = r
    while float(np.linalg.norm(b - np.eye(n))) > _SQUARING_THRESHOLD:
        b = np.real(sqrtm(b))
        square_roots += 1
        if square_roots > 60:
            raise LogBranchError("inverse scaling-and-squaring failed to converge")
    e = b - np.eye(n)
    e_norm = float(np.linalg.norm(e))
    terms = _LOG_ORDER_LADDER[-1][1]
    for bound, order in _LOG_ORDER_LADDER:
        if e_norm <= bound:
            terms = order
            break
    # log(I + E) = E - E^2/2 + E^3/3 - ... , Horner form.
    result = e * ((-1.0) ** (terms + 1) / terms)
    for k in range(terms - 1, 0, -1):
        result = e * ((-1.0) ** (k + 1) / k) + e @ result
    result *= 2.0**square_roots
    return 0.5 * (result - result.T)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix commutator [a, b] = ab - ba."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"commutator shape mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value of a linear map given as a matrix."""
    m = _require_finite(m, "operator_norm argument")
    return float(np.linalg.norm(m, 2))


_BERNOULLI_CACHE: dict[int, np.ndarray] = {}


def _bernoulli_cached(order: int) -> np.ndarray:
    coeffs = _BERNOULLI_CACHE.get(order)
    if coeffs is None:
        coeffs = bernoulli(order)
        _BERNOULLI_CACHE[order] = coeffs
    return coeffs


def dexpinv(u: np.ndarray, v: np.ndarray, order: int) -> np.ndarray:
    """Truncated inverse differential of exp: sum_{k<=order} B_k/k! ad_u^k(v).

    Bernoulli numbers follow the B_1 = -1/2 convention, which is the series
    used by Runge-Kutta Munthe-Kaas recursions.
    """
    if order < 0:
        raise ValueError("dexpinv truncation order must be >= 0")
    u = _require_finite(u, "dexpinv u")
    v = _require_finite(v, "dexpinv v")
    coeffs = _bernoulli_cached(order)
    result = coeffs[0] * v
    term = v
    factorial = 1.0
    for k in range(1, order + 1):
        term = commutator(u, term)
        factorial *= k
        if coeffs[k] != 0.0:
            result = result + (coeffs[k] / factorial) * term
    return result


def dexp(u: np.ndarray, v: np.ndarray, terms: int = 30) -> np.ndarray:
    """Differential of exp, sum_{k} ad_u^k(v)/(k+1)!, truncated at ``terms``.

    Serves as the independent oracle for :func:`dexpinv`; accurate to machine
    precision for ||u|| <= 1.
    """
    u = _require_finite(u, "dexp u")
    v = _require_finite(v, "dexp v")
    result = np.array(v, dtype=float)
    term = v
    factorial = 1.0
    for k in range(1, terms + 1):
        term = commutator(u, term)
        factorial *= k + 1
        result = result + term / factorial
    return result


def hat(v: np.ndarray) -> np.ndarray:
    """so(3) element with axis vector v: hat(v) w = v x w."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"hat expects a 3-vector, got shape {v.shape}")
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def unhat(a: np.ndarray) -> np.ndarray:
    """Axis vector of an so(3) element (inverse of :func:`hat`)."""
    a = np.asarray(a, dtype=float)
    if a.shape != (3, 3):
        raise ValueError(f"unhat expects a 3x3 matrix, got shape {a.shape}")
    return np.array([a[2, 1], a[0, 2], a[1, 0]])


def random_skew(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random skew-symmetric matrix with Frobenius norm <= scale."""
    g = rng.standard_normal((n, n))
    a = g - g.T
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return a
    return a * (scale * rng.uniform(0.1, 1.0) / norm)
