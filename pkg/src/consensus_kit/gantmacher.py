"""Communicating classes and the Gantmacher normal form.

For a nonnegative matrix with positive diagonal, indices split into
communicating classes. Ordering essential classes first and then the
inessential ones so that a class comes after every class it reaches gives a
block lower triangular matrix whose diagonal blocks are irreducible.

Class ordering rule (deterministic): essential classes by smallest original
index; inessential classes by tier, where tier 1 reaches only essential
classes, tier 2 reaches tier <= 1, and so on; ties by smallest index.
Indices inside a class keep their original relative order. All indices are
0-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from graphlib import TopologicalSorter

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import BlockAboveDiagonal, EigenSolverFailure, MissingPositiveDiagonal
from .stochastic import EPS_Z, ZeroPattern, as_array, pattern_of


@dataclass(frozen=True)
class ClassPartition:
    classes: tuple
    essential: tuple

    @property
    def p(self):
        return len(self.classes)

    @property
    def g(self):
        return sum(self.essential)

    @property
    def sizes(self):
        return tuple(len(c) for c in self.classes)

    @property
    def inessential_indices(self):
        """Union of the inessential classes, in Gantmacher order."""
        return tuple(i for c, e in zip(self.classes, self.essential) if not e for i in c)

    @property
    def essential_indices(self):
        return tuple(i for c, e in zip(self.classes, self.essential) if e for i in c)


@dataclass(frozen=True)
class GantmacherForm:
    """Permutation and block layout of the Gantmacher form.

    ``permutation[new] = old``, so the permuted matrix is
    ``A[np.ix_(permutation, permutation)]``.
    """

    permutation: tuple
    partition: ClassPartition
    pattern: ZeroPattern

    @cached_property
    def offsets(self):
        return tuple(np.concatenate([[0], np.cumsum(self.partition.sizes)]).astype(int).tolist())

    @property
    def n(self):
        return len(self.permutation)

    @property
    def g(self):
        return self.partition.g

    @property
    def p(self):
        return self.partition.p

    def block_index(self, k, l):
        """Row and column ranges of block ``(k, l)`` in the permuted matrix."""
        o = self.offsets
        return range(o[k], o[k + 1]), range(o[l], o[l + 1])

    def permute(self, a):
        x = np.asarray(as_array(a) if not isinstance(a, ZeroPattern) else a.mask)
        perm = np.asarray(self.permutation)
        return x[np.ix_(perm, perm)]

    def block_pattern(self):
        """``p x p`` grid of "positive", "zero" or "mixed" per block."""
        m = self.permute(self.pattern)
        out = []
        for k in range(self.p):
            row = []
            for l in range(self.p):
                rk, rl = self.block_index(k, l)
                blk = m[rk.start:rk.stop, rl.start:rl.stop]
                row.append("positive" if blk.all() else "zero" if not blk.any() else "mixed")
            out.append(row)
        return out

    def to_dict(self):
        return {
            "classes": [list(c) for c in self.partition.classes],
            "essential": list(self.partition.essential),
            "g": self.g,
            "p": self.p,
            "permutation": list(self.permutation),
            "block_pattern": self.block_pattern(),
        }


def _require_positive_diagonal(pattern):
    if not pattern.has_positive_diagonal():
        bad = [int(i) for i in np.flatnonzero(~np.diag(pattern.mask))]
        raise MissingPositiveDiagonal(f"zero diagonal entries at indices {bad}")


def communicating_classes(pattern):
    """Strongly connected components of the pattern digraph.

    Returns a list of sorted index tuples ordered by smallest member.
    """
    _require_positive_diagonal(pattern)
    _, labels = connected_components(csr_matrix(pattern.mask), directed=True, connection="strong")
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted((tuple(g) for g in groups.values()), key=lambda c: c[0])


def classify_essential(classes, pattern):
    """Mark essential classes and put the classes into Gantmacher order."""
    label = np.empty(pattern.n, dtype=int)
    for c_id, cls in enumerate(classes):
        label[list(cls)] = c_id
    succ = [set() for _ in classes]
    for i, j in zip(*np.nonzero(pattern.mask)):
        if label[i] != label[j]:
            succ[label[i]].add(int(label[j]))

    tier = {}
    # successors first, so every class's tier is known when it is visited
    for c in TopologicalSorter({c: succ[c] for c in range(len(classes))}).static_order():
        tier[c] = 1 + max(tier[d] for d in succ[c]) if succ[c] else 0
    order = sorted(range(len(classes)), key=lambda c: (tier[c] > 0, tier[c], classes[c][0]))
    return ClassPartition(
        classes=tuple(tuple(classes[c]) for c in order),
        essential=tuple(tier[c] == 0 for c in order),
    )


def gantmacher_form_of_pattern(pattern):
    classes = communicating_classes(pattern)
    partition = classify_essential(classes, pattern)
    perm = tuple(i for c in partition.classes for i in c)
    return GantmacherForm(permutation=perm, partition=partition, pattern=pattern)


def gantmacher_form(a, eps_z=EPS_Z):
    """Gantmacher form of a nonnegative matrix with positive diagonal.

    Raises
    ------
    MissingPositiveDiagonal
        If some diagonal entry is at or below ``eps_z``.
    """
    return gantmacher_form_of_pattern(pattern_of(a, eps_z))


def extract_block(a, form, k, l):
    """Block ``(k, l)`` of the permuted matrix; only ``k >= l`` is allowed."""
    if not (0 <= l <= k < form.p):
        if 0 <= k < l < form.p:
            raise BlockAboveDiagonal(f"block ({k}, {l}) lies above the block diagonal")
        raise IndexError(f"block ({k}, {l}) out of range for p={form.p}")
    m = form.permute(a)
    rk, rl = form.block_index(k, l)
    return m[rk.start:rk.stop, rl.start:rl.stop].copy()


def diagonal_blocks(a, form):
    return [extract_block(a, form, k, k) for k in range(form.p)]


def match_spectra(x, y):
    """Largest distance under the optimal pairing of two eigenvalue multisets."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        return np.inf
    if x.size == 0:
        return 0.0
    cost = np.abs(x[:, None] - y[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def eigvals(m):
    try:
        return np.linalg.eigvals(np.asarray(m, dtype=np.float64))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc


def spectrum_union_check(a, form, tol=1e-8):
    """True iff spec(A) equals the union of the diagonal-block spectra within ``tol``."""
    whole = eigvals(as_array(a))
    parts = np.concatenate([eigvals(b) for b in diagonal_blocks(a, form)])
    return match_spectra(whole, parts) <= tol
