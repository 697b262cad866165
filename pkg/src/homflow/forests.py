"""Planar rooted trees and forests: enumeration, symmetry, exact-flow character.

Forests index the expansion terms of numerical flows on homogeneous spaces.
The exact flow assigns each forest a rational coefficient (its *character*);
composing the expansion with one more derivative step yields a recursion that
determines every coefficient, which is evaluated here once with exact
arithmetic and cached.

Pretty-printer grammar (used in reports):

    forest := "0" (empty) | tree (" " tree)*
    tree   := "•" | "[" forest "]"

so "•" is the single node, "[•]" the 2-chain, "[• •]" the cherry, and
"• [•]" a two-tree forest.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial as int_factorial

#: Hard cap on forest order; enumeration is Catalan and blows up quickly.
MAX_ORDER = 8


@dataclass(frozen=True)
class PlanarTree:
    """Rooted tree with an ordered tuple of child subtrees."""

    children: tuple["PlanarTree", ...] = ()

    def order(self) -> int:
        return 1 + sum(c.order() for c in self.children)


@dataclass(frozen=True)
class PlanarForest:
    """Ordered tuple of planar trees; the empty forest has order 0."""

    trees: tuple[PlanarTree, ...] = ()

    def order(self) -> int:
        return sum(t.order() for t in self.trees)


SINGLE_NODE = PlanarTree()
EMPTY_FOREST = PlanarForest()


def _check_order(n: int) -> None:
    if n < 0:
        raise ValueError("forest order must be nonnegative")
    if n > MAX_ORDER:
        raise ValueError(f"forest order {n} exceeds the enumeration guard {MAX_ORDER}")


@lru_cache(maxsize=None)
def generate_trees(n: int) -> tuple[PlanarTree, ...]:
    """All planar rooted trees with exactly n nodes, canonical order."""
    _check_order(n)
    if n == 0:
        return ()
    return tuple(PlanarTree(f.trees) for f in generate_forests(n - 1))


@lru_cache(maxsize=None)
def generate_forests(n: int) -> tuple[PlanarForest, ...]:
    """All planar forests of total order n.

    Canonical (graded-lex) order: forests are listed by the order of their
    first tree, then by the first tree's canonical index, then recursively by
    the remaining forest.
    """
    _check_order(n)
    if n == 0:
        return (EMPTY_FOREST,)
    result = []
    for k in range(1, n + 1):
        for tree in generate_trees(k):
            for rest in generate_forests(n - k):
                result.append(PlanarForest((tree,) + rest.trees))
    return tuple(result)


def render(obj) -> str:
    """Nested-parenthesis string for a tree or forest (grammar in module docs)."""
    if isinstance(obj, PlanarTree):
        if not obj.children:
            return "•"
        return "[" + " ".join(render(c) for c in obj.children) + "]"
    if not obj.trees:
        return "0"
    return " ".join(render(t) for t in obj.trees)


def _sigma_tuple(trees: tuple[PlanarTree, ...]) -> int:
    sigma = 1
    run = 1
    for i, t in enumerate(trees):
        sigma *= _sigma_tuple(t.children)
        if i > 0 and t == trees[i - 1]:
            run += 1
        else:
            run = 1
        sigma *= run
    return sigma


def sigma(forest: PlanarForest) -> int:
    """Internal symmetry factor: product of factorials of runs of equal
    adjacent subtrees, recursively through the forest."""
    return _sigma_tuple(forest.trees)


def _b_plus(trees: tuple[PlanarTree, ...]) -> PlanarTree:
    return PlanarTree(trees)


@lru_cache(maxsize=None)
def exact_characters(order: int) -> dict[PlanarForest, Fraction]:
    """Exact-flow character on all forests of total order <= ``order``.

    Determined by the derivative recursion of the exact pullback series: each
    extra derivative either appends a new node as its own tree or grafts it as
    a new root over any subsequence of existing trees.  Rational arithmetic
    keeps every coefficient exact.
    """
    _check_order(order)
    chars: dict[PlanarForest, Fraction] = {EMPTY_FOREST: Fraction(1)}
    frontier = {EMPTY_FOREST: Fraction(1)}
    for m in range(1, order + 1):
        grown: dict[PlanarForest, Fraction] = {}
        for forest, value in frontier.items():
            trees = forest.trees
            k = len(trees)
            contribution = value / m
            for size in range(k + 1):
                for subset in combinations(range(k), size):
                    chosen = set(subset)
                    kept = tuple(trees[i] for i in range(k) if i not in chosen)
                    grafted = _b_plus(tuple(trees[i] for i in subset))
                    new_forest = PlanarForest(kept + (grafted,))
                    grown[new_forest] = grown.get(new_forest, Fraction(0)) + contribution
        chars.update(grown)
        frontier = grown
    return chars


def exact_character(forest: PlanarForest) -> Fraction:
    """Coefficient of the forest in the exact-flow expansion (rational)."""
    return exact_characters(forest.order())[forest]


def forest_factorial(forest: PlanarForest) -> int:
    """Planar forest factorial: the character factors as 1/(sigma * factorial)."""
    char = exact_character(forest)
    inv = 1 / char
    s = sigma(forest)
    if inv.denominator != 1 or inv.numerator % s != 0:
        raise AssertionError(f"character of {render(forest)} does not factor over sigma")
    return inv.numerator // s


def sigma_factorial_character(forest: PlanarForest) -> tuple[int, int, float]:
    """(sigma, factorial, exact character) of a forest of order <= MAX_ORDER."""
    s = sigma(forest)
    f = forest_factorial(forest)
    return s, f, 1.0 / (s * f)


def catalan(n: int) -> int:
    return int_factorial(2 * n) // (int_factorial(n) * int_factorial(n + 1))
