"""Row-stochastic matrices, zero patterns and the scalar functionals on them.

All matrices act on opinion vectors from the left, ``x(t+1) = A(t) x(t)``.
Entries at or below the positivity threshold ``eps_z`` are treated as
structural zeros everywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonSquare,
    RowSumViolation,
    SourceExhausted,
    ZeroRow,
)

EPS_Z = 1e-12
EPS_ROW = 1e-10
EPS_C = 1e-9


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """A validated square row-stochastic matrix (a confidence matrix).

    Build instances through :func:`validate`; the constructor itself only
    freezes the array.
    """

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries, np.float64))

    @property
    def n(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __matmul__(self, other):
        return multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"StochasticMatrix({self.entries.tolist()!r})"


@dataclass(frozen=True, eq=False)
class ZeroPattern:
    """Boolean positivity mask; equal patterns mean equal *type*."""

    mask: np.ndarray

    def __post_init__(self):
        m = _frozen(self.mask, bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NonSquare(f"pattern must be square, got shape {m.shape}")
        object.__setattr__(self, "mask", m)

    @property
    def n(self):
        return self.mask.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ZeroPattern):
            return NotImplemented
        return np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.n, np.packbits(self.mask).tobytes()))

    def __le__(self, other):
        # set inclusion of the positive entries
        return bool(np.all(other.mask[self.mask]))

    def __matmul__(self, other):
        return pattern_product(self, other)

    def has_positive_diagonal(self):
        return bool(np.all(np.diag(self.mask)))

    def count(self):
        return int(self.mask.sum())

    def closure(self):
        """Reflexive-transitive closure (reachability) of the pattern."""
        reach = self.mask | np.eye(self.n, dtype=bool)
        while True:
            nxt = (reach.astype(np.int32) @ reach.astype(np.int32)) > 0
            if np.array_equal(nxt, reach):
                return ZeroPattern(reach)
            reach = nxt

    def transpose(self):
        return ZeroPattern(self.mask.T)

    def __repr__(self):
        rows = ["".join("1" if v else "0" for v in row) for row in self.mask]
        return f"ZeroPattern({rows!r})"


@dataclass(frozen=True, eq=False)
class OpinionVector:
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values, np.float64)
        if v.ndim != 1:
            raise DimensionMismatch("opinion vector must be one-dimensional")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_array(a):
    if isinstance(a, StochasticMatrix):
        return a.entries
    return np.asarray(a, dtype=np.float64)


def validate(entries, eps_row=EPS_ROW, renormalize=False):
    """Check ``entries`` and wrap them as a :class:`StochasticMatrix`.

    Parameters
    ----------
    entries : array_like
        Square array of nonnegative reals.
    eps_row : float
        Largest accepted deviation of a row sum from 1.
    renormalize : bool
        Divide every row by its sum instead of rejecting deviations.

    Raises
    ------
    NonSquare, NegativeEntry, ZeroRow, RowSumViolation
    """
    a = np.array(entries, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NonSquare(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NegativeEntry("entries must be finite")
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise NegativeEntry(f"entry ({i}, {j}) is negative: {a[i, j]!r}")
    sums = a.sum(axis=1)
    if renormalize:
        if np.any(sums == 0):
            raise ZeroRow(f"row {int(np.argmin(sums))} sums to zero")
        a = a / sums[:, None]
    else:
        dev = np.abs(sums - 1.0)
        worst = int(np.argmax(dev))
        if dev[worst] > eps_row:
            raise RowSumViolation(worst, float(dev[worst]))
    return StochasticMatrix(a)


def validate_stack(arr, eps_row=EPS_ROW):
    """Vectorised :func:`validate` for a ``(T, n, n)`` stack; errors name the factor."""
    if not np.all(np.isfinite(arr)):
        t = int(np.argwhere(~np.isfinite(arr))[0][0])
        raise NegativeEntry(f"factor {t}: entries must be finite")
    neg = np.argwhere(arr < 0)
    if neg.size:
        t, i, j = neg[0]
        raise NegativeEntry(f"factor {t}: entry ({i}, {j}) is negative: {arr[t, i, j]!r}")
    dev = np.abs(arr.sum(axis=2) - 1.0)
    if dev.size and dev.max() > eps_row:
        t, i = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise RowSumViolation(int(i), float(dev[t, i]), factor=int(t))


def multiply(a, b, eps_row=EPS_ROW):
    """Matrix product ``a @ b`` of two stochastic matrices, revalidated."""
    x, y = as_array(a), as_array(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"cannot multiply {x.shape} by {y.shape}")
    return validate(x @ y, eps_row=x.shape[0] * eps_row)


def _accumulate(seq, s, t, backward, eps_row):
    from .sources import as_sequence

    seq = as_sequence(seq)
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    if t > len(seq):
        raise SourceExhausted(f"source has {len(seq)} factors, step {t} requested")
    if s == t:
        return StochasticMatrix(np.eye(seq.n))
    prod = kernels.product_stack(seq.stack(s, t), backward=backward)
    return validate(prod, eps_row=max(seq.n, t - s) * eps_row)


def backward_accumulate(seq, s, t, eps_row=EPS_ROW):
    """``A(t, s) = A(t-1) ... A(s)``; the identity when ``s == t``."""
    return _accumulate(seq, s, t, True, eps_row)


def forward_accumulate(seq, s, t, eps_row=EPS_ROW):
    """``A(s, t) = A(s) ... A(t-1)``; the identity when ``s == t``."""
    return _accumulate(seq, s, t, False, eps_row)


def pattern_of(a, eps_z=EPS_Z):
    return ZeroPattern(as_array(a) > eps_z)


def pattern_product(p, q):
    """Boolean-semiring product: ``(pq)_ij`` iff some k has ``p_ik`` and ``q_kj``."""
    if p.n != q.n:
        raise DimensionMismatch(f"pattern sizes differ: {p.n} vs {q.n}")
    return ZeroPattern((p.mask.astype(np.int32) @ q.mask.astype(np.int32)) > 0)


def tau(a):
    """Coefficient of ergodicity ``1 - min_{i,j} sum_k min(a_ik, a_jk)``.

    Zero exactly for consensus matrices; a 1x1 matrix has ``tau = 0``.
    """
    return float(kernels.tau(as_array(a)))


def pos_min(a, eps_z=EPS_Z):
    """Smallest entry strictly above ``eps_z``."""
    x = as_array(a)
    pos = x[x > eps_z]
    if pos.size == 0:
        raise ValueError("matrix has no entry above the positivity threshold")
    return float(pos.min())


def row_sum_norm(m):
    x = np.asarray(m, dtype=np.float64)
    if x.size == 0:
        return 0.0
    return float(np.abs(x).sum(axis=1).max())


def column_spread(a):
    """Largest column range ``max_j (max_i a_ij - min_i a_ij)``."""
    x = as_array(a)
    if x.size == 0:
        return 0.0
    return float((x.max(axis=0) - x.min(axis=0)).max())


def is_consensus(a, eps_c=EPS_C):
    return column_spread(a) <= eps_c


def is_type_symmetric(a, eps_z=EPS_Z):
    p = pattern_of(a, eps_z)
    return p == p.transpose()
