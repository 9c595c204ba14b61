"""Convergence of backward products along a stabilization schedule.

Along a schedule every window ``A(i) = A(t_{i+1}, t_i)`` has the same
Gantmacher form. The diagonal block of an essential class multiplies only
with itself, and its column minima rise and column maxima fall as windows
are added. Its coefficient of ergodicity is bounded by ``prod (1 - delta_i)``
where ``delta_i`` is the positive minimum of window ``i``, so it becomes a
consensus matrix when ``sum delta_i`` diverges. The block of inessential
indices shrinks in row-sum norm under the same product bound. The coupling
rows from inessential to essential indices are reported but never judged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import MonotonicityViolation
from .gantmacher import gantmacher_form_of_pattern
from .schedule import BACKWARD, tail_factor
from .sources import as_sequence, check_dimension
from .stochastic import (
    EPS_C,
    EPS_Z,
    as_array,
    backward_accumulate,
    forward_accumulate,
    pos_min,
    row_sum_norm,
    tau,
)

ENVELOPE_SLACK = 1e-12
BOUND_SLACK = 1e-10


class LazyWindows:
    """Window accumulations of a schedule, computed on first access and cached."""

    def __init__(self, seq, schedule, limit=None):
        self.seq = as_sequence(seq)
        self.bounds = schedule.windows if limit is None else schedule.windows[:limit]
        self._acc = backward_accumulate if schedule.direction == BACKWARD else forward_accumulate
        self._cache = []

    def __len__(self):
        return len(self.bounds)

    def __getitem__(self, i):
        while len(self._cache) <= i:
            s, t = self.bounds[len(self._cache)]
            self._cache.append(self._acc(self.seq, s, t).entries)
        return self._cache[i]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def delta_bounds(windows, eps_z=EPS_Z):
    """Per-window positive minima and their partial sums."""
    deltas = np.array([pos_min(w, eps_z) for w in windows])
    return deltas, np.cumsum(deltas)


@dataclass
class EssentialLimit:
    row: np.ndarray
    residual: float
    converged: bool
    windows_used: int
    spreads: list


def essential_limit(windows, members, eps_c=EPS_C, max_windows=None, slack=ENVELOPE_SLACK):
    """Accumulate one essential block until its rows agree.

    ``B_i = A_k(i) ... A_k(0)`` is built window by window. Column minima must
    not decrease and column maxima must not increase; a violation beyond
    ``slack`` raises :class:`MonotonicityViolation`. Convergence is declared
    once the largest column spread is at most ``eps_c``; the returned row is
    the midpoint of the column envelopes.
    """
    idx = np.asarray(members)
    limit = len(windows) if max_windows is None else min(max_windows, len(windows))
    B = np.eye(len(idx))
    lo, hi = B.min(axis=0), B.max(axis=0)
    spreads = []
    spread = float((hi - lo).max())
    used = 0
    for i in range(limit):
        B = as_array(windows[i])[np.ix_(idx, idx)] @ B
        new_lo, new_hi = B.min(axis=0), B.max(axis=0)
        bad = np.flatnonzero(new_lo < lo - slack)
        if bad.size:
            j = int(bad[0])
            raise MonotonicityViolation(i, j, "min", float(lo[j]), float(new_lo[j]))
        bad = np.flatnonzero(new_hi > hi + slack)
        if bad.size:
            j = int(bad[0])
            raise MonotonicityViolation(i, j, "max", float(hi[j]), float(new_hi[j]))
        lo, hi = new_lo, new_hi
        spread = float((hi - lo).max())
        spreads.append(spread)
        used = i + 1
        if spread <= eps_c:
            break
    return EssentialLimit((lo + hi) / 2, spread, spread <= eps_c, used, spreads)


def tau_envelope(windows, members, n_windows=None, eps_z=EPS_Z, deltas=None):
    """Measured ``tau`` of the accumulated block against ``prod (1 - delta_i)``.

    Returns ``(measured, bound, violations)`` where ``violations`` counts
    windows with measured above bound by more than 1e-10.
    """
    idx = np.asarray(members)
    count = len(windows) if n_windows is None else min(n_windows, len(windows))
    B = np.eye(len(idx))
    bound = 1.0
    measured, bounds = [], []
    violations = 0
    for i in range(count):
        w = as_array(windows[i])
        d = pos_min(w, eps_z) if deltas is None else deltas[i]
        B = w[np.ix_(idx, idx)] @ B
        bound *= 1.0 - d
        m = tau(B)
        measured.append(m)
        bounds.append(bound)
        if m > bound + BOUND_SLACK:
            violations += 1
    return measured, bounds, violations


@dataclass
class InessentialDecay:
    norms: list
    bounds: list
    window_norms: list
    violations: int


def inessential_decay(windows, members, n_windows=None, eps_z=EPS_Z, deltas=None, stop_below=None):
    """Row-sum norm of the accumulated inessential block, window by window.

    Each single-window block must satisfy ``||A_JJ(i)|| <= 1 - delta_i`` and
    the accumulated norm must stay below the running product; both are
    counted in ``violations``.
    """
    idx = np.asarray(members)
    if idx.size == 0:
        return InessentialDecay([], [], [], 0)
    count = len(windows) if n_windows is None else min(n_windows, len(windows))
    C = np.eye(len(idx))
    bound = 1.0
    out = InessentialDecay([], [], [], 0)
    for i in range(count):
        w = as_array(windows[i])
        d = pos_min(w, eps_z) if deltas is None else deltas[i]
        blk = w[np.ix_(idx, idx)]
        C = blk @ C
        bound *= 1.0 - d
        single = row_sum_norm(blk)
        acc = row_sum_norm(C)
        out.window_norms.append(single)
        out.norms.append(acc)
        out.bounds.append(bound)
        if single > 1.0 - d + BOUND_SLACK or acc > bound + BOUND_SLACK:
            out.violations += 1
        if stop_below is not None and acc <= stop_below:
            break
    return out


@dataclass
class ClassResult:
    k: int
    members: tuple
    limit_row: np.ndarray
    residual: float
    converged: bool
    windows_used: int
    spreads: list
    tau_measured: list
    tau_bound: list
    tau_violations: int

    def to_dict(self):
        return {
            "class": self.k,
            "members": list(self.members),
            "limit_row": self.limit_row.tolist(),
            "residual": self.residual,
            "converged": self.converged,
            "windows_used": self.windows_used,
            "tau_final": self.tau_measured[-1] if self.tau_measured else None,
            "tau_bound_final": self.tau_bound[-1] if self.tau_bound else None,
            "tau_violations": self.tau_violations,
        }


@dataclass
class ConvergenceReport:
    """Everything the convergence check measured along one schedule."""

    classes: list
    g: int
    p: int
    inessential_members: tuple
    inessential: InessentialDecay
    deltas: np.ndarray
    delta_partial_sums: np.ndarray
    windows_examined: int
    times: tuple
    tail: np.ndarray
    limit_block: np.ndarray
    coupling_norms: list
    opinion: dict | None
    tolerances: dict
    stabilized: bool
    warnings: list = field(default_factory=list)

    @property
    def converged(self):
        return all(c.converged for c in self.classes)

    @property
    def limit(self):
        """Estimate of ``lim A(t, 0)`` as ``limit_block @ A(t_0, 0)``."""
        return self.limit_block @ self.tail

    def to_dict(self):
        return {
            "converged": self.converged,
            "stabilized": self.stabilized,
            "g": self.g,
            "p": self.p,
            "t0": self.times[0] if self.times else None,
            "windows_examined": self.windows_examined,
            "classes": [c.to_dict() for c in self.classes],
            "inessential": {
                "members": list(self.inessential_members),
                "norm_final": self.inessential.norms[-1] if self.inessential.norms else None,
                "bound_final": self.inessential.bounds[-1] if self.inessential.bounds else None,
                "violations": self.inessential.violations,
            },
            "delta": {
                "min": float(self.deltas.min()) if self.deltas.size else None,
                "sum": float(self.delta_partial_sums[-1]) if self.deltas.size else 0.0,
            },
            "tail_factor": self.tail.tolist(),
            "limit_block": self.limit_block.tolist(),
            "opinion": self.opinion,
            "tolerances": self.tolerances,
            "warnings": list(self.warnings),
        }

    def trajectory_rows(self):
        """Per-window rows: index, per-class spread, tau bound, inessential norm."""
        header = ["window"] + [f"spread_{c.k}" for c in self.classes] + ["tau_bound", "inessential_norm"]
        bound = np.cumprod(1.0 - self.deltas)
        rows = []
        for i in range(self.windows_examined):
            row = [i]
            for c in self.classes:
                row.append(c.spreads[min(i, len(c.spreads) - 1)] if c.spreads else 0.0)
            row.append(float(bound[i]))
            norms = self.inessential.norms
            row.append(norms[min(i, len(norms) - 1)] if norms else "")
            rows.append(row)
        return header, rows


def _opinion_check(seq, x0, t_end, tail, classes, eps_c):
    x0 = np.asarray(x0, dtype=np.float64)
    check_dimension(seq, x0.shape[0])
    traj = kernels.propagate(seq.stack(0, t_end), x0)
    scale = max(1.0, float(np.abs(x0).max()))
    tol = 1e-12 * scale * max(1, t_end)
    hi, lo = traj.max(axis=1), traj.min(axis=1)
    envelope_ok = bool(np.all(np.diff(hi) <= tol) and np.all(np.diff(lo) >= -tol))
    y0 = tail @ x0
    final = traj[-1]
    consensus = []
    ok = True
    for c in classes:
        members = np.asarray(c.members)
        predicted = float(c.limit_row @ y0[members])
        err = float(np.abs(final[members] - predicted).max())
        allowed = len(members) * c.residual * scale + tol
        consensus.append({"class": c.k, "predicted": predicted, "max_error": err})
        ok = ok and err <= allowed
    return {
        "t_end": int(t_end),
        "final": final.tolist(),
        "envelope_monotone": envelope_ok,
        "consensus": consensus,
        "consistent": bool(ok and envelope_ok),
    }


def check_theorem(seq, schedule, x0=None, horizon=None, eps_c=EPS_C, eps_z=EPS_Z, delta=None):
    """Run the convergence analysis along ``schedule``.

    Parameters
    ----------
    seq : MatrixSequence
    schedule : AccumulationSchedule
    x0 : array_like, optional
        Initial opinions; when given, ``x(t) = A(t, 0) x0`` is simulated up
        to the last examined window and compared with the predicted
        consensus values.
    horizon : int, optional
        Maximum number of windows to examine.
    delta : float, optional
        Uniform lower bound replacing the measured per-window minima in the
        reported bounds.

    Returns
    -------
    ConvergenceReport
    """
    seq = as_sequence(seq)
    warnings = []
    if not schedule.stabilized:
        warnings.append("ScheduleNotStabilized: report is advisory")
    if schedule.common_pattern is None or schedule.n_windows == 0:
        raise ValueError("schedule has no windows to analyse")
    form = gantmacher_form_of_pattern(schedule.common_pattern)
    windows = LazyWindows(seq, schedule, horizon)
    part = form.partition

    classes = []
    for k in range(part.g):
        members = part.classes[k]
        lim = essential_limit(windows, members, eps_c)
        classes.append((k, members, lim))
    J = part.inessential_indices
    used = max([lim.windows_used for _, _, lim in classes] + [1])
    if J:
        probe = inessential_decay(windows, J, None, eps_z, stop_below=eps_c)
        used = max(used, len(probe.norms))
    if delta is None:
        deltas = np.array([pos_min(windows[i], eps_z) for i in range(used)])
    else:
        deltas = np.full(used, float(delta))
    ines = inessential_decay(windows, J, used, eps_z, deltas)

    results = []
    for k, members, lim in classes:
        measured, bounds, viol = tau_envelope(windows, members, lim.windows_used, eps_z, deltas)
        results.append(ClassResult(k, tuple(members), lim.row, lim.residual, lim.converged,
                                   lim.windows_used, lim.spreads, measured, bounds, viol))
        if not lim.converged:
            warnings.append(f"NotConvergedAtHorizon: class {k} spread {lim.residual:.3e}")

    n = seq.n
    M = np.eye(n)
    coupling = []
    ess_idx = list(part.essential_indices)
    for i in range(used):
        M = windows[i] @ M
        if J:
            coupling.append(row_sum_norm(M[np.ix_(list(J), ess_idx)]))
    L = np.zeros((n, n))
    for c in results:
        m = np.asarray(c.members)
        L[np.ix_(m, m)] = np.broadcast_to(c.limit_row, (len(m), len(m)))
        if J:
            # mass absorbed into the class, spread by the class limit row
            absorbed = M[np.ix_(list(J), m)].sum(axis=1)
            L[np.ix_(list(J), m)] = np.outer(absorbed, c.limit_row)

    tail = tail_factor(seq, schedule).entries
    t_end = schedule.times[used]
    opinion = None
    if x0 is not None:
        opinion = _opinion_check(seq, x0, t_end, tail, results, eps_c)

    return ConvergenceReport(
        classes=results, g=part.g, p=part.p, inessential_members=tuple(J), inessential=ines,
        deltas=deltas, delta_partial_sums=np.cumsum(deltas), windows_examined=used,
        times=tuple(schedule.times[:used + 1]), tail=tail, limit_block=L,
        coupling_norms=coupling, opinion=opinion,
        tolerances={"eps_c": eps_c, "eps_z": eps_z, "delta_override": delta},
        stabilized=schedule.stabilized, warnings=warnings,
    )


def required_windows(delta, eps_c=EPS_C):
    """Windows after which ``prod (1 - delta) <= exp(-k delta) <= eps_c``."""
    return math.ceil(-math.log(eps_c) / delta)
