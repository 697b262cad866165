"""Elementary covariant differentials, iterated Lie derivatives, Lie series.

Forests act on test functions through a word recursion: a word of coefficient
fields [X_1, ..., X_k] applied to f is

    X_1(op([X_2..X_k], f)) - sum_i op([X_2, ..., X_1 > X_i, ..., X_k], f)

with ``>`` the flat-connection post-Lie product.  The same recursion with
``>`` in place of function application turns a word into a single field, which
is how tree differentials are built.
"""

from __future__ import annotations

from math import factorial as int_factorial

import numpy as np

from .errors import RegularityError
from .fields import (
    CoefficientField,
    ScalarField,
    lie_derivative,
    post_lie_product,
    scalar_combination,
)
from .forests import PlanarForest, PlanarTree, exact_character, generate_forests
from .spaces import Point


def word_to_field(word: list[CoefficientField], target: CoefficientField) -> CoefficientField:
    """Enveloping word of fields acting on a field through the post-Lie product."""
    if not word:
        return target
    head, rest = word[0], word[1:]
    result = post_lie_product(head, word_to_field(rest, target))
    terms = [(1.0, result)]
    for i in range(len(rest)):
        grafted = list(rest)
        grafted[i] = post_lie_product(head, rest[i])
        terms.append((-1.0, word_to_field(grafted, target)))
    if len(terms) == 1:
        return result
    from .fields import field_combination

    return field_combination(terms)


def apply_word(word: list[CoefficientField], f: ScalarField) -> ScalarField:
    """Enveloping word of fields acting on a test function (forest action)."""
    if not word:
        return f
    head, rest = word[0], word[1:]
    result = lie_derivative(apply_word(rest, f), head)
    terms = [(1.0, result)]
    for i in range(len(rest)):
        grafted = list(rest)
        grafted[i] = post_lie_product(head, rest[i])
        terms.append((-1.0, apply_word(grafted, f)))
    if len(terms) == 1:
        return result
    return scalar_combination(terms)


def tree_field(tree: PlanarTree, v: CoefficientField) -> CoefficientField:
    """Elementary differential field of a single tree."""
    if not tree.children:
        return v
    word = [tree_field(c, v) for c in tree.children]
    return word_to_field(word, v)


def forest_function(forest: PlanarForest, v: CoefficientField, f: ScalarField) -> ScalarField:
    """The differential operator of a forest applied to f, as a scalar field."""
    word = [tree_field(t, v) for t in forest.trees]
    return apply_word(word, f)


def elementary_differential(
    forest: PlanarForest, v: CoefficientField, f: ScalarField, x: Point
) -> float:
    """Value at x of the elementary covariant differential of the forest."""
    if v.regularity < forest.order():
        raise RegularityError(
            f"forest of order {forest.order()} needs field regularity >= {forest.order()}, "
            f"got {v.regularity}"
        )
    return forest_function(forest, v, f).value(x)


def iterated_lie_derivative(v: CoefficientField, f: ScalarField, x: Point, k: int) -> float:
    """k-fold Lie derivative V^k(f)(x); k = 0 gives f(x)."""
    if k < 0:
        raise ValueError("derivative depth must be nonnegative")
    g = f
    for _ in range(k):
        g = lie_derivative(g, v)
    return g.value(x)


def exact_series_defect(v: CoefficientField, f: ScalarField, x: Point, k: int) -> float:
    """Residual of the order-k coefficient identity:

    sum over |forest| = k of character * differential  minus  V^k(f)(x)/k!.
    """
    total = 0.0
    for forest in generate_forests(k):
        total += float(exact_character(forest)) * elementary_differential(forest, v, f, x)
    target = iterated_lie_derivative(v, f, x, k) / float(int_factorial(k))
    return total - target


def lie_series_partial_sum(
    v: CoefficientField,
    f: ScalarField,
    x: Point,
    h: float,
    p: int,
    remainder_grid: int = 64,
) -> tuple[float, float]:
    """Order-p partial sum of the pulled-back flow and a remainder bound probe.

    value = f(x) + sum_{k=1..p} h^k V^k(f)(x) / k!

    The probe majorizes the Taylor remainder: it is the maximum of
    |V^{p+1}(f)| along the reference flow over a grid of [0, h], times
    h^{p+1}/(p+1)!.
    """
    from .integrators import reference_trajectory

    value = f.value(x)
    g = f
    factorial = 1.0
    for k in range(1, p + 1):
        g = lie_derivative(g, v)
        factorial *= k
        value += h**k * g.value(x) / factorial
    g = lie_derivative(g, v)
    factorial *= p + 1
    times = np.linspace(0.0, h, remainder_grid + 1)
    points = reference_trajectory(v, x, times)
    sup = max(abs(g.value(pt)) for pt in points)
    probe = sup * abs(h) ** (p + 1) / factorial
    return value, probe
