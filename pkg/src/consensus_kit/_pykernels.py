"""Pure-Python/numpy versions of the compiled kernels.

Used when the extension is not built, or when ``CONSENSUS_KIT_PURE=1``.
"""
import numpy as np


def tau(a):
    n = a.shape[0]
    if n < 2:
        return 0.0
    overlap = np.minimum(a[:, None, :], a[None, :, :]).sum(axis=2)
    iu = np.triu_indices(n, 1)
    return max(0.0, 1.0 - float(overlap[iu].min()))


def _all_row_bits(masks):
    # each pattern row as an int bitset: bit j set iff entry (i, j) is positive
    n = masks.shape[1]
    if n <= 62:
        w = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
        return [tuple(r) for r in (masks.astype(np.int64) * w).sum(axis=2).tolist()]
    w = np.array([1 << j for j in range(n)], dtype=object)
    return [tuple(int(v) for v in (m.astype(object) * w).sum(axis=1)) for m in masks]


def _bits_to_mask(rows, n):
    out = np.zeros((n, n), dtype=bool)
    for i, r in enumerate(rows):
        for j in range(n):
            if r >> j & 1:
                out[i, j] = True
    return out


def _compose(p, q):
    # rows of p * q: OR of the rows of q selected by p
    out = []
    for r in p:
        acc = 0
        k = 0
        while r:
            if r & 1:
                acc |= q[k]
            r >>= 1
            k += 1
        out.append(acc)
    return tuple(out)


def scan_windows(masks, start, confirm, backward):
    T, n = masks.shape[0], masks.shape[1]
    bits = _all_row_bits(masks)
    ident = tuple(1 << i for i in range(n))
    cuts, patterns = [], []
    t, reached, cur = start, -1, ident
    while t < T:
        nxt = _compose(bits[t], cur) if backward else _compose(cur, bits[t])
        t += 1
        if reached < 0 or nxt != cur:
            reached = t
        cur = nxt
        if t - reached >= confirm:
            cuts.append(reached)
            patterns.append(_bits_to_mask(cur, n))
            t, reached, cur = reached, -1, ident
    pats = np.stack(patterns) if patterns else np.zeros((0, n, n), dtype=bool)
    return np.asarray(cuts, dtype=np.int64), pats


def product_stack(stack, backward):
    n = stack.shape[1]
    acc = np.eye(n)
    if backward:
        for m in stack:
            acc = m @ acc
    else:
        for m in stack:
            acc = acc @ m
    return acc


def propagate(stack, x0):
    out = np.empty((stack.shape[0] + 1, stack.shape[1]))
    out[0] = x0
    for t, m in enumerate(stack):
        out[t + 1] = m @ out[t]
    return out
