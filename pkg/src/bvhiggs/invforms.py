"""Translation-invariant forms on an n-torus: a tiny exterior algebra.

Basis of the degree-k space: sorted k-element subsets of the axis set,
enumerated lexicographically.  The differential vanishes identically, the
Hodge star is the signed complement permutation, and integration reads off
the top coefficient.  This backend keeps every operator purely algebraic,
which is what makes the heavier bracket checks affordable.

The subset/sign combinatorics here is shared with the lattice backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

from .graded import ConfigError
from .linalg import SparseMatrix


def subsets_of(n: int, k: int):
    """Sorted k-subsets of range(n) in lexicographic order."""
    return list(combinations(range(n), k))


def perm_sign_concat(left, right) -> int:
    """Sign of the shuffle sorting the concatenation of two disjoint
    sorted tuples."""
    inv = 0
    for t in right:
        inv += sum(1 for s in left if s > t)
    return -1 if inv % 2 else 1


def complement(subset, n: int):
    s = set(subset)
    return tuple(j for j in range(n) if j not in s)


def insertion_sign(j: int, subset) -> int:
    """Sign (-1)^pos for removing/inserting axis j at its slot in a sorted
    subset containing j."""
    return -1 if subset.index(j) % 2 else 1


@dataclass
class InvariantFormModel:
    """Exterior algebra over n axes with star, wedge and integration."""
    n: int
    subsets: dict = field(default_factory=dict, repr=False)
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for k in range(self.n + 1):
            subs = subsets_of(self.n, k)
            self.subsets[k] = subs
            self.index[k] = {s: i for i, s in enumerate(subs)}

    def form_dim(self, k: int) -> int:
        if 0 <= k <= self.n:
            return comb(self.n, k)
        return 0

    def d_matrix(self, k: int) -> SparseMatrix:
        """Invariant forms are closed: every differential block is zero."""
        return SparseMatrix.zeros(self.form_dim(k + 1), self.form_dim(k))

    def codifferential(self, k: int) -> SparseMatrix:
        return SparseMatrix.zeros(self.form_dim(k - 1), self.form_dim(k))

    def star_matrix(self, k: int) -> SparseMatrix:
        m = SparseMatrix(self.form_dim(self.n - k), self.form_dim(k))
        if not 0 <= k <= self.n:
            return m
        for i, s in enumerate(self.subsets[k]):
            sc = complement(s, self.n)
            m.data[(self.index[self.n - k][sc], i)] = Fraction(
                perm_sign_concat(s, sc))
        return m

    def wedge_matrix(self, k: int, l: int) -> SparseMatrix:
        """Matrix of the wedge product as a map from the Kronecker basis of
        degree-k tensor degree-l forms (k-index major) to degree k+l."""
        dk, dl = self.form_dim(k), self.form_dim(l)
        m = SparseMatrix(self.form_dim(k + l), dk * dl)
        if k + l > self.n:
            return m
        for i, s in enumerate(self.subsets[k]):
            for j, t in enumerate(self.subsets[l]):
                if set(s) & set(t):
                    continue
                out = tuple(sorted(s + t))
                m.data[(self.index[k + l][out], i * dl + j)] = Fraction(
                    perm_sign_concat(s, t))
        return m

    def wedge(self, a, k: int, b, l: int):
        """Wedge two coefficient vectors (plain lists) of degrees k and l."""
        dl = self.form_dim(l)
        big = [Fraction(0)] * (self.form_dim(k) * dl)
        for i, av in enumerate(a):
            if not av:
                continue
            for j, bv in enumerate(b):
                if bv:
                    big[i * dl + j] = av * bv
        return self.wedge_matrix(k, l).apply(big)

    def integrate(self, top):
        """Integral of a top-degree coefficient vector (unit total volume)."""
        return top[0] if top else Fraction(0)

    def pairing_matrix(self, k: int) -> SparseMatrix:
        """Entries integral(e_i wedge e_j) on degree k times degree n-k."""
        m = SparseMatrix(self.form_dim(k), self.form_dim(self.n - k))
        for i, s in enumerate(self.subsets[k]):
            sc = complement(s, self.n)
            m.data[(i, self.index[self.n - k][sc])] = Fraction(
                perm_sign_concat(s, sc))
        return m


def build_invariant_model(n: int) -> InvariantFormModel:
    if not (1 <= int(n) <= 6):
        raise ConfigError("invariant model supports 1 <= n <= 6, got %r" % (n,))
    return InvariantFormModel(int(n))
