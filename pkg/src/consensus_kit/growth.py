"""Sequences with growing intercommunication intervals, and the series behind them.

If every factor has positive minimum at least ``delta`` and a window holds
``L`` communicating factors, the window's positive minimum is at least
``delta**L``. Whether ``sum_i delta**L_i`` diverges therefore decides whether
the ergodicity argument goes through. With ``L_i ~ a log i`` the terms are
``i**(a ln delta)`` and the sum converges exactly when ``a ln delta < -1``;
with ``L_i ~ a log log i`` the sum always diverges.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .convergence import check_theorem
from .errors import InvalidDelta, ParameterOutOfRange
from .schedule import detect_schedule
from .sources import MatrixSequence

GAP_MODES = ("bounded", "log", "loglog")
INV_E = math.exp(-1.0)
# |a ln(delta) + 1| below this: trend detection at desk scale is unreliable
NEAR_THRESHOLD = 0.02


def gap_length(i, mode, param):
    """Length of gap ``i`` (0-based): ceil(N), ceil(a ln(i+2)) or ceil(a ln ln(i+3))."""
    if mode == "bounded":
        g = math.ceil(param)
    elif mode == "log":
        g = math.ceil(param * math.log(i + 2))
    elif mode == "loglog":
        g = math.ceil(param * math.log(math.log(i + 3)))
    else:
        raise ParameterOutOfRange(f"unknown gap mode {mode!r}")
    return max(1, g)


def gap_lengths(count, mode, param):
    i = np.arange(count, dtype=np.float64)
    if mode == "bounded":
        g = np.full(count, math.ceil(param), dtype=np.int64)
    elif mode == "log":
        g = np.ceil(param * np.log(i + 2)).astype(np.int64)
    elif mode == "loglog":
        g = np.ceil(param * np.log(np.log(i + 3))).astype(np.int64)
    else:
        raise ParameterOutOfRange(f"unknown gap mode {mode!r}")
    return np.maximum(g, 1)


def designed_pattern(n, g=1, seed=0, inessential=None):
    """Positive-diagonal pattern with ``g`` essential classes.

    The essential classes are fully positive diagonal blocks of nearly equal
    size; the remaining ``inessential`` indices (default: a third of ``n``
    when room allows) each point to one or more essential indices chosen
    at random.
    """
    rng = np.random.default_rng(seed)
    if inessential is None:
        inessential = n // 3 if n - n // 3 >= g else 0
    n_ess = n - inessential
    if g < 1 or n_ess < g:
        raise ParameterOutOfRange(f"cannot place {g} essential classes among {n} indices")
    mask = np.zeros((n, n), dtype=bool)
    bounds = np.linspace(0, n_ess, g + 1).round().astype(int)
    for a, b in zip(bounds[:-1], bounds[1:]):
        mask[a:b, a:b] = True
    for i in range(n_ess, n):
        mask[i, i] = True
        targets = rng.choice(n_ess, size=rng.integers(1, n_ess + 1), replace=False)
        mask[i, targets] = True
        if i > n_ess and rng.random() < 0.5:
            mask[i, rng.integers(n_ess, i)] = True
    return mask


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a reproducible sequence with scheduled communication.

    Gap ``i`` consists of ``L_i - 1`` identity factors followed by one active
    factor whose positive entries follow ``pattern`` (all-positive when
    None) and are at least ``delta``. With ``activation="random"`` each
    off-diagonal entry of the pattern is switched on independently with
    probability ``edge_prob`` in every active factor.
    """

    n: int
    steps: int
    delta: float
    gap_mode: str = "bounded"
    gap_param: float = 1.0
    seed: int = 0
    pattern: tuple | None = None
    activation: str = "full"
    edge_prob: float = 0.5

    def __post_init__(self):
        if self.n < 1 or self.steps < 1:
            raise ParameterOutOfRange("n and steps must be positive")
        if self.gap_mode not in GAP_MODES:
            raise ParameterOutOfRange(f"gap_mode must be one of {GAP_MODES}")
        if self.gap_param <= 0:
            raise ParameterOutOfRange("gap parameter must be positive")
        if self.activation not in ("full", "random"):
            raise ParameterOutOfRange("activation must be 'full' or 'random'")
        mask = self.mask()
        if not mask.diagonal().all():
            raise ParameterOutOfRange("pattern must have a positive diagonal")
        widest = int(mask.sum(axis=1).max())
        if not (0 < self.delta) or self.delta * widest > 1 + 1e-12:
            raise InvalidDelta(
                f"delta={self.delta} infeasible for rows with {widest} positive entries"
            )

    def mask(self):
        if self.pattern is None:
            return np.ones((self.n, self.n), dtype=bool)
        return np.asarray(self.pattern, dtype=bool)

    def to_dict(self):
        d = asdict(self)
        if self.pattern is not None:
            d["pattern"] = np.asarray(self.pattern, dtype=int).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("pattern") is not None:
            d["pattern"] = tuple(tuple(bool(v) for v in row) for row in d["pattern"])
        return cls(**d)


def _sample_active(rng, spec, count):
    base = spec.mask()
    n, delta = spec.n, spec.delta
    mask = np.broadcast_to(base, (count, n, n)).copy()
    if spec.activation == "random":
        off = ~np.eye(n, dtype=bool)
        mask &= ~off | (rng.random((count, n, n)) < spec.edge_prob)
    u = rng.uniform(delta, 1.0, size=(count, n, n)) * mask
    v = np.where(mask, u - delta, 0.0)
    r = mask.sum(axis=2)
    s = v.sum(axis=2, keepdims=True)
    flat = s[..., 0] == 0
    v = np.where(flat[..., None], mask / r[..., None], v / np.where(s == 0, 1.0, s))
    spare = np.clip(1.0 - r * delta, 0.0, None)
    # every positive entry is delta plus a share of the remaining mass
    return np.where(mask, delta + spare[..., None] * v, 0.0)


class GeneratedSequence(MatrixSequence):
    """Identity fillers with active factors at the end of every gap."""

    def __init__(self, spec):
        self.spec = spec
        self.n = spec.n
        gaps = gap_lengths(spec.steps, spec.gap_mode, spec.gap_param)
        ends = np.cumsum(gaps)
        keep = ends <= spec.steps
        self.gaps = gaps[keep]
        self.positions = ends[keep] - 1
        rng = np.random.default_rng(spec.seed)
        self.active = _sample_active(rng, spec, len(self.positions))
        self.active.setflags(write=False)

    def __len__(self):
        return self.spec.steps

    def stack(self, s, t):
        self._check_range(s, t)
        out = np.broadcast_to(np.eye(self.n), (t - s, self.n, self.n)).copy()
        lo, hi = np.searchsorted(self.positions, [s, t])
        out[self.positions[lo:hi] - s] = self.active[lo:hi]
        return out

    def active_count(self, s, t):
        lo, hi = np.searchsorted(self.positions, [s, t])
        return int(hi - lo)


def generate_sequence(spec):
    return GeneratedSequence(spec)


@dataclass
class SeriesReport:
    mode: str
    delta: float
    a: float
    terms: int
    exponent: float
    checkpoints: list
    partial_sums: list
    gains: list
    gain_lower_bounds: list
    closed_form_verdict: str
    empirical_verdict: str
    verdict: str
    tail_estimate: float | None = None
    samples: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        d.pop("samples")
        return d


def _check_series_params(delta, a, terms):
    if not (0 < delta < 1):
        raise ParameterOutOfRange(f"delta must lie in (0, 1), got {delta}")
    if not a > 0:
        raise ParameterOutOfRange(f"a must be positive, got {a}")
    if terms < 10:
        raise ParameterOutOfRange(f"need at least 10 terms, got {terms}")


def _decades(first, last):
    out = []
    c = first
    while c <= last:
        out.append(c)
        c *= 10
    return out


def _sample_rows(ns, vals, sums, per_decade=20):
    idx = np.unique(np.geomspace(1, len(ns), num=per_decade * max(1, int(np.log10(len(ns))) + 1))
                    .astype(int) - 1)
    return [(int(ns[i]), float(vals[i]), float(sums[i])) for i in idx]


def series_partial_sums(mode, delta, a=1.0, terms=10**6):
    """Partial sums of ``delta**(a log n)`` (from n=1) or ``delta**(a log log n)`` (from n=3).

    In log mode the terms equal ``n**(a ln delta)``: the closed-form verdict
    is "converging-trend" when ``a ln delta < -1``. The empirical verdict
    compares the sum gained over the last decade with the decade before; a
    ratio below one indicates convergence. Within 0.02 of the boundary only
    the closed form is used.

    In loglog mode the verdict is always "diverging-trend"; the evidence is
    the gain between decade checkpoints ``c < d``, which must exceed
    ``integral_{c+1}^{d+1} (ln x)**(a ln delta) dx`` (a lower bound for a
    decreasing summand).
    """
    _check_series_params(delta, a, terms)
    s = a * math.log(delta)
    if mode == "log":
        ns = np.arange(1, terms + 1, dtype=np.float64)
        vals = ns ** s
        first = 1
    elif mode == "loglog":
        ns = np.arange(3, terms + 1, dtype=np.float64)
        vals = np.log(ns) ** s
        first = 1000 if terms >= 10**4 else 10
    else:
        raise ParameterOutOfRange(f"series mode must be 'log' or 'loglog', not {mode!r}")
    sums = np.cumsum(vals)
    n0 = int(ns[0])

    def S(c):
        return float(sums[c - n0])

    checkpoints = _decades(first, terms)
    partial = [S(c) for c in checkpoints]
    gains = [partial[i + 1] - partial[i] for i in range(len(partial) - 1)]

    if mode == "log":
        closed = "converging-trend" if s < -1 else "diverging-trend"
        if abs(s + 1) < NEAR_THRESHOLD or len(gains) < 2:
            empirical = "inconclusive"
        else:
            empirical = "converging-trend" if gains[-1] / gains[-2] < 1 else "diverging-trend"
        bounds = []
        tail = None
        if s < -1:
            N = terms
            # Euler-Maclaurin tail: integral plus the first two correction terms
            tail = (float(sums[-1]) + N ** (s + 1) / (-s - 1) - 0.5 * N ** s
                    - s * N ** (s - 1) / 12.0)
        verdict = closed
    else:
        closed = "diverging-trend"

        def f(x):
            return math.log(x) ** s

        bounds = [
            integrate.quad(f, checkpoints[i] + 1, checkpoints[i + 1] + 1,
                           epsabs=0, epsrel=1e-12, limit=200)[0]
            for i in range(len(gains))
        ]
        ok = all(gn > b > 0 for gn, b in zip(gains, bounds))
        empirical = "diverging-trend" if ok else "inconclusive"
        tail = None
        verdict = closed

    return SeriesReport(
        mode=mode, delta=delta, a=a, terms=terms, exponent=s, checkpoints=checkpoints,
        partial_sums=partial, gains=gains, gain_lower_bounds=bounds,
        closed_form_verdict=closed, empirical_verdict=empirical, verdict=verdict,
        tail_estimate=tail, samples=_sample_rows(ns, vals, sums),
    )


def check_delta_threshold(delta=None):
    """The boundary ``1/e`` and, for a floor ``delta``, the most positive entries a row can hold.

    A stochastic row whose positive entries are all at least ``delta`` has at
    most ``floor(1/delta)`` of them; above ``1/e > 1/3`` that leaves two.
    """
    out = {"inv_e": INV_E}
    if delta is not None:
        if not delta > 0:
            raise ParameterOutOfRange("delta must be positive")
        out["delta"] = delta
        out["max_positive_per_row"] = math.floor(1.0 / delta + 1e-12)
        out["log_gaps_summable"] = delta < INV_E
    return out


def growth_experiment(spec, horizon=None, eps_c=1e-9, x0=None, confirm=None):
    """Generate, detect the schedule, run the convergence check and compare series.

    Returns a plain dict report. ``hypothesis_fails`` is set in log mode when
    ``a ln delta < -1``: the designed bound ``sum delta**gap`` is then
    summable, so divergence of ``sum delta_i`` is not guaranteed; no
    convergence claim is made either way.
    """
    seq = generate_sequence(spec)
    schedule = detect_schedule(seq, horizon=horizon, confirm=confirm)
    if x0 is None:
        x0 = np.linspace(0.0, 1.0, spec.n)
    report = check_theorem(seq, schedule, x0=x0, eps_c=eps_c)
    used = report.windows_examined
    lengths = np.diff(np.asarray(report.times[:used + 1]))
    floor_ok = bool(np.all(report.deltas >= spec.delta ** lengths * (1 - 1e-12)))
    designed = spec.delta ** gap_lengths(used, spec.gap_mode, spec.gap_param).astype(float)
    hypothesis_fails = spec.gap_mode == "log" and spec.gap_param * math.log(spec.delta) < -1
    max_spread = max((c.residual for c in report.classes), default=0.0)
    return {
        "spec": spec.to_dict(),
        "schedule": schedule.to_dict(gantmacher=True),
        "converged": report.converged,
        "max_spread": max_spread,
        "windows_examined": used,
        "steps_examined": int(report.times[used]) if report.times else 0,
        "measured_delta_sum": float(report.delta_partial_sums[-1]) if used else 0.0,
        "designed_series_sum": float(designed.sum()),
        "delta_floor_ok": floor_ok,
        "hypothesis_fails": bool(hypothesis_fails),
        "report": report.to_dict(),
    }
