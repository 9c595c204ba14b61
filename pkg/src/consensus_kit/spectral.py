"""Projections removing the eigenvalue 1, spectral radii and JSR bounds.

Every stochastic matrix has spectral radius 1, so the joint spectral radius
of a set of stochastic matrices is 1 as well. Projecting each positive
essential block onto the orthogonal complement of the all-ones vector
removes that eigenvalue; the inessential part is kept as is. The joint
spectral radius of the projected set is what decides partial convergence,
and it can exceed the individual spectral radii, so it is only bounded here
by enumerating products up to a fixed length.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import threads
from .errors import BlockTooSmall, BudgetExhausted, DimensionMismatch, FormMismatch
from .gantmacher import eigvals
from .stochastic import EPS_Z, as_array, row_sum_norm


@dataclass(frozen=True)
class Projection:
    """``(n_k - 1) x n_k`` matrix with orthonormal rows orthogonal to ones."""

    rows: np.ndarray

    @property
    def size(self):
        return self.rows.shape[1]


@dataclass(frozen=True)
class JsrBounds:
    lower: float
    upper: float
    max_length: int
    witness: tuple
    truncated: bool = False
    upper_by_length: tuple = field(default=())
    lower_by_length: tuple = field(default=())

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "length": self.max_length,
            "witness": list(self.witness),
            "truncated": self.truncated,
            "upper_by_length": list(self.upper_by_length),
            "lower_by_length": list(self.lower_by_length),
        }


def helmert_rows(nk):
    # row j-1 is (1, ..., 1, -j, 0, ..., 0) / sqrt(j (j + 1)) with j ones
    out = np.zeros((max(nk - 1, 0), nk))
    for j in range(1, nk):
        out[j - 1, :j] = 1.0
        out[j - 1, j] = -j
        out[j - 1] /= np.sqrt(j * (j + 1.0))
    return out


def build_projection(nk):
    if nk < 2:
        raise BlockTooSmall(f"block of size {nk} needs no projection")
    return Projection(helmert_rows(nk))


def transform_block(block, projection=None):
    """``P_k A_k P_k^T``: the block's spectrum with one eigenvalue 1 removed."""
    a = as_array(block)
    rows = helmert_rows(a.shape[0]) if projection is None else projection.rows
    if rows.shape[1] != a.shape[0]:
        raise DimensionMismatch(f"projection is for size {rows.shape[1]}, block has {a.shape[0]}")
    return rows @ a @ rows.T


def projection_matrix(form):
    """The stacked ``(n - g) x n`` matrix acting on Gantmacher-ordered vectors."""
    sizes = form.partition.sizes
    parts = []
    for nk, ess in zip(sizes, form.partition.essential):
        parts.append(helmert_rows(nk) if ess else np.eye(nk))
    n_rows = sum(p.shape[0] for p in parts)
    out = np.zeros((n_rows, form.n))
    r = c = 0
    for p in parts:
        out[r:r + p.shape[0], c:c + p.shape[1]] = p
        r += p.shape[0]
        c += p.shape[1]
    return out


def transform_full(a, form, ordered=False, eps_z=EPS_Z):
    """Transformed window matrix ``A'``, assembled block by block.

    Diagonal blocks become ``P_k A_k P_k^T`` for essential classes and stay
    unchanged for inessential ones; a coupling block ``A_{k,l}`` becomes
    ``A_{k,l} P_l^T`` when ``l`` is essential. ``a`` is permuted into
    Gantmacher order first unless ``ordered`` is set.
    """
    x = as_array(a)
    if x.shape != (form.n, form.n):
        raise FormMismatch(f"matrix of shape {x.shape} does not fit a form of size {form.n}")
    m = x if ordered else form.permute(x)
    o = form.offsets
    ess = form.partition.essential
    for k in range(form.p):
        if ess[k]:
            outside = np.delete(m[o[k]:o[k + 1]], np.s_[o[k]:o[k + 1]], axis=1)
            if np.any(outside > eps_z):
                raise FormMismatch(f"essential class {k} has weight outside its block")
    proj = [helmert_rows(o[k + 1] - o[k]) if ess[k] else None for k in range(form.p)]
    dims = [p.shape[0] if p is not None else o[k + 1] - o[k] for k, p in enumerate(proj)]
    d_off = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    out = np.zeros((d_off[-1], d_off[-1]))
    for k in range(form.p):
        for l in range(k + 1):
            blk = m[o[k]:o[k + 1], o[l]:o[l + 1]]
            if proj[k] is not None:
                if k != l:
                    continue
                blk = proj[k] @ blk @ proj[k].T
            elif proj[l] is not None:
                blk = blk @ proj[l].T
            out[d_off[k]:d_off[k + 1], d_off[l]:d_off[l + 1]] = blk
    return out


def spectral_radius(m):
    x = np.asarray(m, dtype=np.float64)
    if x.size == 0:
        return 0.0
    return float(np.abs(eigvals(x)).max())


def fixed_space_multiplicity(a, tol=1e-8):
    """Dimension of the eigenspace for eigenvalue 1 (rank threshold ``tol * ||A||``)."""
    x = as_array(a)
    sv = np.linalg.svd(x - np.eye(x.shape[0]), compute_uv=False)
    return int(np.sum(sv <= tol * row_sum_norm(x)))


def _stats(level):
    norms = np.abs(level).sum(axis=2).max(axis=1)
    rho = np.abs(np.linalg.eigvals(level)).max(axis=1)
    return norms, rho


def _level_stats(level, workers):
    if workers <= 1 or level.shape[0] < 4096:
        return _stats(level)
    chunks = np.array_split(level, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_stats, chunks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _decode(index, length, base):
    digits = []
    for _ in range(length):
        index, r = divmod(index, base)
        digits.append(int(r))
    return tuple(reversed(digits))


def jsr_bounds(matrices, max_length, budget=10**6):
    """Bracket the joint spectral radius by enumerating all products.

    For each length ``m <= max_length`` every product ``A(i_1) ... A(i_m)``
    is formed; the upper bound is the smallest ``max ||product||^(1/m)``
    (row-sum norm) seen so far and the lower bound the largest
    ``max rho(product)^(1/m)``. If the total number of products would exceed
    ``budget`` the enumeration stops at the last affordable length and the
    result is flagged ``truncated``.

    Returns
    -------
    JsrBounds
        ``witness`` is the index sequence of the product achieving ``lower``.
    """
    mats = [as_array(m) for m in matrices]
    if not mats:
        raise ValueError("need at least one matrix")
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionMismatch("all matrices must share one square shape")
    base = len(mats)
    if base > budget:
        raise BudgetExhausted(f"{base} products of length 1 exceed the budget of {budget}")
    if d == 0:
        return JsrBounds(0.0, 0.0, max_length, (0,) * max_length, False,
                         (0.0,) * max_length, (0.0,) * max_length)

    S = np.stack(mats)
    workers = threads()
    level = S
    used = 0
    upper, lower, witness = np.inf, -np.inf, ()
    ups, los = [], []
    truncated = False
    reached = 0
    for length in range(1, max_length + 1):
        if length > 1:
            if used + base ** length > budget:
                truncated = True
                break
            # product index j*base + s is (sequence j) followed by s
            level = np.matmul(level[:, None], S[None]).reshape(-1, d, d)
        used += level.shape[0]
        norms, rho = _level_stats(level, workers)
        up = float(norms.max()) ** (1.0 / length)
        j = int(np.argmax(rho))
        lo = float(rho[j]) ** (1.0 / length)
        upper = min(upper, up)
        if lo > lower:
            lower, witness = lo, _decode(j, length, base)
        ups.append(upper)
        los.append(lower)
        reached = length
    return JsrBounds(lower, upper, reached, witness, truncated, tuple(ups), tuple(los))


def transformed_set(windows, form):
    """``{P A(i) P^T}`` for a list of window matrices sharing ``form``."""
    return [transform_full(w, form) for w in windows]
