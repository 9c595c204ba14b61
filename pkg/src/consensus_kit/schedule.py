"""Stabilization times for accumulations with a common zero pattern.

With positive diagonals the pattern of ``A(t, s)`` can only gain entries as
``t`` grows. Starting from a cut ``s`` the window is grown until its pattern
has not changed for ``confirm`` further factors; the next cut is the first
step at which that final pattern was reached. Later windows can only have
smaller (or equal) patterns, so after dropping the longest prefix of windows
whose patterns still differ from the last one, every remaining window has the
same type.

The persistence rule is a finite-horizon proxy: a pattern that is stable for
``confirm`` factors is taken as the window's maximum. ``stabilized`` is only
set when at least two equal windows remain and their common pattern is
reflexive and transitively closed, which is what the limiting pattern must
satisfy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import MissingPositiveDiagonal, SourceExhausted
from .gantmacher import gantmacher_form_of_pattern
from .sources import as_sequence
from .stochastic import EPS_Z, ZeroPattern, backward_accumulate, forward_accumulate

log = logging.getLogger(__name__)

BACKWARD = "backward"
FORWARD = "forward"


@dataclass(frozen=True)
class AccumulationSchedule:
    times: tuple
    common_pattern: ZeroPattern | None
    direction: str
    horizon: int
    stabilized: bool
    confirm: int
    candidate_cuts: tuple = ()
    discarded: int = 0
    warnings: tuple = field(default=())

    @property
    def n_windows(self):
        return max(0, len(self.times) - 1)

    @property
    def windows(self):
        return list(zip(self.times[:-1], self.times[1:]))

    @property
    def t0(self):
        return self.times[0] if self.times else None

    def to_dict(self, gantmacher=True):
        out = {
            "times": list(self.times),
            "stabilized": self.stabilized,
            "direction": self.direction,
            "horizon": self.horizon,
            "confirm": self.confirm,
            "n_windows": self.n_windows,
            "discarded_windows": self.discarded,
            "pattern": None if self.common_pattern is None
            else self.common_pattern.mask.astype(int).tolist(),
        }
        if gantmacher and self.common_pattern is not None:
            out["gantmacher"] = gantmacher_form_of_pattern(self.common_pattern).to_dict()
        out["warnings"] = list(self.warnings)
        return out


def _factor_masks(seq, horizon, eps_z):
    masks = seq.patterns(0, horizon, eps_z)
    diag = masks[:, np.arange(seq.n), np.arange(seq.n)]
    bad = np.flatnonzero(~diag.all(axis=1))
    if bad.size:
        raise MissingPositiveDiagonal(f"factor A({int(bad[0])}) has a zero diagonal entry")
    return masks


def is_closed(pattern):
    """Reflexive and transitively closed: ``P @ P == P`` with a true diagonal."""
    return pattern.has_positive_diagonal() and (pattern @ pattern) == pattern


def _scan(masks, confirm, direction):
    """One pass with a fixed confirmation span; returns the schedule fields."""
    cuts, pats = kernels.scan_windows(masks, 0, confirm, direction == BACKWARD)
    cuts = tuple(int(c) for c in cuts)
    # pats[0] belongs to the prefix [0, cuts[0]); window i is [cuts[i], cuts[i+1])
    win = pats[1:]
    if len(win) == 0:
        return dict(times=cuts, common=None, cuts=cuts, discarded=0, gained=None, n_equal=0)
    gained = np.flatnonzero((win[1:] & ~win[:-1]).any(axis=(1, 2)))
    differs = np.flatnonzero(~(win == win[-1]).all(axis=(1, 2)))
    k = int(differs[-1]) + 1 if differs.size else 0
    return dict(times=cuts[k:], common=ZeroPattern(win[-1]), cuts=cuts, discarded=k,
                gained=int(gained[0]) + 1 if gained.size else None, n_equal=len(win) - k)


def detect_schedule(seq, horizon=None, eps_z=EPS_Z, confirm=None, direction=BACKWARD,
                    adaptive=True):
    """Find cuts ``t_0 < t_1 < ...`` whose window accumulations share one type.

    Parameters
    ----------
    seq : MatrixSequence or sequence of arrays
        Factors with positive diagonals.
    horizon : int, optional
        Number of factors to examine; defaults to the whole source.
    confirm : int, optional
        Persistence span; defaults to ``n**2``.
    direction : {"backward", "forward"}
    adaptive : bool
        When a window gains entries over its predecessor (so some window
        stopped before reaching its maximal pattern) or the schedule does not
        stabilize, double the persistence span and rescan, up to
        ``horizon // 20``.

    Returns
    -------
    AccumulationSchedule
        ``stabilized`` is False when fewer than two equal windows were
        confirmed before the horizon; a partial schedule is still returned.
    """
    seq = as_sequence(seq)
    if direction not in (BACKWARD, FORWARD):
        raise ValueError(f"direction must be 'backward' or 'forward', not {direction!r}")
    horizon = len(seq) if horizon is None else min(int(horizon), len(seq))
    confirm = seq.n ** 2 if confirm is None else int(confirm)
    masks = _factor_masks(seq, horizon, eps_z)

    first = confirm
    limit = max(confirm, horizon // 20)
    while True:
        r = _scan(masks, confirm, direction)
        ok = r["common"] is not None and r["n_equal"] >= 2 and is_closed(r["common"])
        if not adaptive or (ok and r["gained"] is None) or confirm * 2 > limit:
            break
        confirm *= 2

    warnings = []
    if confirm != first:
        warnings.append(f"confirmation span raised from {first} to {confirm}")
    if r["common"] is None:
        warnings.append("HorizonTooSmall: no complete window within the horizon")
        return AccumulationSchedule(
            times=r["times"], common_pattern=None, direction=direction, horizon=horizon,
            stabilized=False, confirm=confirm, candidate_cuts=r["cuts"], warnings=tuple(warnings),
        )
    if r["gained"] is not None:
        i = r["gained"]
        warnings.append(f"window {i} gained entries relative to window {i - 1}")
    common = r["common"]
    closed = is_closed(common)
    stabilized = r["n_equal"] >= 2 and closed
    if r["n_equal"] < 2:
        warnings.append("HorizonTooSmall: fewer than two equal windows confirmed")
    if not closed:
        warnings.append("common window pattern is not transitively closed")
    for w in warnings:
        log.debug("detect_schedule: %s", w)
    return AccumulationSchedule(
        times=r["times"], common_pattern=common, direction=direction, horizon=horizon,
        stabilized=stabilized, confirm=confirm, candidate_cuts=r["cuts"],
        discarded=r["discarded"], warnings=tuple(warnings),
    )


def window_pattern(seq, s, t, eps_z=EPS_Z, direction=BACKWARD):
    """Pattern of the window accumulation from boolean factor products."""
    masks = as_sequence(seq).patterns(s, t, eps_z).astype(np.int32)
    acc = np.eye(masks.shape[1], dtype=np.int32)
    for m in masks:
        acc = ((m @ acc) if direction == BACKWARD else (acc @ m)) > 0
        acc = acc.astype(np.int32)
    return ZeroPattern(acc > 0)


def verify_schedule(seq, schedule, eps_z=EPS_Z):
    """Check that every window has the schedule's common pattern.

    Returns ``(ok, first_bad_window)`` with ``first_bad_window`` None on success.
    """
    seq = as_sequence(seq)
    if schedule.times and schedule.times[-1] > len(seq):
        raise SourceExhausted(f"schedule reaches step {schedule.times[-1]} beyond the source")
    if schedule.common_pattern is None:
        return False, 0
    for i, (s, t) in enumerate(schedule.windows):
        if window_pattern(seq, s, t, eps_z, schedule.direction) != schedule.common_pattern:
            return False, i
    return True, None


def window_accumulations(seq, schedule, limit=None):
    """The window matrices ``A(t_{i+1}, t_i)`` (forward products for forward schedules)."""
    seq = as_sequence(seq)
    acc = backward_accumulate if schedule.direction == BACKWARD else forward_accumulate
    wins = schedule.windows if limit is None else schedule.windows[:limit]
    return [acc(seq, s, t) for s, t in wins]


def tail_factor(seq, schedule):
    """``A(t_0, 0)``, the factor the limit statement splits off."""
    acc = backward_accumulate if schedule.direction == BACKWARD else forward_accumulate
    return acc(seq, 0, schedule.t0)


def blocks_uniform(pattern):
    """Diagonal Gantmacher blocks all-true and off-diagonal blocks all-true or all-false."""
    grid = gantmacher_form_of_pattern(pattern).block_pattern()
    for k, row in enumerate(grid):
        if row[k] != "positive":
            return False
        if any(v == "mixed" for v in row):
            return False
    return True
