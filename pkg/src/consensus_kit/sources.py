"""Indexed matrix sources: finite sequences ``A(0), A(1), ...``."""
import numpy as np

from .errors import DimensionMismatch, NonSquare, SourceExhausted
from .stochastic import EPS_ROW, EPS_Z, StochasticMatrix, as_array, validate_stack


class MatrixSequence:
    """Base class for a finite, indexable sequence of stochastic factors.

    Subclasses implement ``__len__``, ``n`` and ``stack``; everything else is
    derived from them.
    """

    n = 0

    def __len__(self):
        raise NotImplementedError

    def stack(self, s, t):
        """Factors ``s .. t-1`` as a ``(t-s, n, n)`` float array."""
        raise NotImplementedError

    def _check_range(self, s, t):
        if s < 0 or s > t:
            raise ValueError(f"bad range [{s}, {t})")
        if t > len(self):
            raise SourceExhausted(f"source has {len(self)} factors, step {t} requested")

    def __getitem__(self, t):
        if t < 0:
            t += len(self)
        self._check_range(t, t + 1)
        return self.stack(t, t + 1)[0]

    def __iter__(self):
        for t in range(len(self)):
            yield self[t]

    def factor(self, t):
        return StochasticMatrix(self[t])

    def patterns(self, s, t, eps_z=EPS_Z):
        return self.stack(s, t) > eps_z


class ArraySequence(MatrixSequence):
    """Sequence backed by a stacked ``(T, n, n)`` array."""

    def __init__(self, matrices, eps_row=EPS_ROW, check=True):
        arr = np.array([as_array(m) for m in matrices] if isinstance(matrices, (list, tuple))
                       else matrices, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise NonSquare(f"expected a (T, n, n) stack, got shape {arr.shape}")
        if check:
            validate_stack(arr, eps_row)
        arr.setflags(write=False)
        self._data = arr
        self.n = arr.shape[1]

    def __len__(self):
        return self._data.shape[0]

    def stack(self, s, t):
        self._check_range(s, t)
        return self._data[s:t]

    @property
    def data(self):
        return self._data


def constant_sequence(a, length):
    """``length`` copies of the same factor."""
    x = as_array(a)
    return ArraySequence(np.broadcast_to(x, (length,) + x.shape).copy())


def as_sequence(obj):
    if isinstance(obj, MatrixSequence):
        return obj
    return ArraySequence(obj)


def check_dimension(seq, n):
    if seq.n != n:
        raise DimensionMismatch(f"sequence has dimension {seq.n}, expected {n}")
