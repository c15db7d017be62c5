"""Checks and constructors for log-convex, Kaluza and completely monotone sequences.

A finite nonnegative sequence s(0), s(1), ... is *log-convex* when

    s(n+1)^2 <= s(n) * s(n+2)   for every interior n,

with no positivity requirement: the inequality is evaluated literally, so an
identically zero sequence is log-convex.  Equivalently (for positive
sequences) the ratio s(n+1)/s(n) is nondecreasing in n, and the inequality
self-improves to arbitrary gaps: s(n+m)^2 <= s(n) * s(n+2m).  Both
consequences have their own checkers here because downstream code relies on
them separately.

A *Kaluza sequence* is a log-convex sequence with s(0) = 1 and 0 < s(n) <= 1.
The degenerate sequence (1, 0, 0, ...) is accepted as Kaluza by convention.
Every Kaluza sequence is a renewal sequence; the actual renewal increments
are computed in :mod:`infdiv.decompose`.

A *completely monotone* (CM) sequence has all alternating finite differences
nonnegative.  On a finite window only finitely many orders can be tested, so
the CM checker is a falsifier: a violation disproves complete monotonicity,
a pass up to ``max_order`` proves nothing beyond that order.

All verdicts are reported through :class:`CheckReport` with an explicit
margin so that callers can distinguish a comfortable pass from a borderline
one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError

DEFAULT_TOL = 1e-12

__all__ = [
    "DEFAULT_TOL",
    "NonnegSeq",
    "CheckReport",
    "RatioProfile",
    "is_log_convex",
    "is_log_convex_all_gaps",
    "is_kaluza",
    "is_completely_monotone",
    "ratio_profile",
    "shift_mix",
    "gen_log_convex",
    "gen_completely_monotone",
]


@dataclass(frozen=True)
class NonnegSeq:
    """A finite nonnegative sequence on the lattice {origin, origin+1, ...}.

    ``step`` records the spacing of the underlying lattice when the sequence
    samples a function (e.g. step=1/n for a discretized density); the checks
    themselves only ever look at consecutive elements, so step does not enter
    any inequality.
    """

    values: tuple
    origin: int = 0
    step: float = 1.0

    def __post_init__(self):
        vals = tuple(float(x) for x in self.values)
        if len(vals) == 0:
            raise InputError("sequence must be nonempty")
        for i, x in enumerate(vals):
            if not math.isfinite(x):
                raise InputError(f"element {i} is not finite")
            if x < 0.0:
                raise InputError(f"element {i} is negative ({x})")
        object.__setattr__(self, "values", vals)
        if self.step <= 0:
            raise InputError("step must be positive")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @classmethod
    def of(cls, values, origin: int = 0, step: float = 1.0, clip_tol: float = 0.0) -> "NonnegSeq":
        """Build a NonnegSeq, optionally clipping tiny negative noise to zero.

        ``clip_tol`` exists for sequences produced by floating-point linear
        algebra; anything below -clip_tol still raises.
        """
        vals = []
        for i, x in enumerate(values):
            x = float(x)
            if x < 0.0:
                if x >= -clip_tol:
                    x = 0.0
                else:
                    raise InputError(f"element {i} is negative ({x}) beyond clip_tol")
            vals.append(x)
        return cls(tuple(vals), origin=origin, step=step)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a sequence check.

    ``verdict`` is True iff ``margin >= -tolerance_used``.  ``margin`` is the
    most negative slack among all tested inequalities (math.inf when the
    check is vacuous).  ``first_violation`` locates the first failing
    inequality; for the log-convexity checks it is the index triple
    (x, x+y, x+2y), for the CM check it is (start, order, start+order), and
    for structural Kaluza violations the offending index is repeated.
    """

    verdict: bool
    first_violation: tuple | None
    margin: float
    tolerance_used: float


@dataclass(frozen=True)
class RatioProfile:
    """Consecutive ratios s(n)/s(n-1) plus a monotonicity flag."""

    ratios: tuple
    nondecreasing: bool
    tolerance_used: float


def is_log_convex(s: NonnegSeq, tol: float = DEFAULT_TOL) -> CheckReport:
    """Check s(n+1)^2 <= s(n) * s(n+2) * (1 + tol) + tol for all interior n.

    The slack is relative-plus-absolute: the reported margin is
    min_n [ s(n) * s(n+2) * (1 + tol) - s(n+1)^2 ], and the verdict is
    margin >= -tol.  Sequences shorter than 3 pass vacuously.  An all-zero
    sequence passes (0 <= 0).
    """
    v = s.as_array()
    if len(v) < 3:
        return CheckReport(True, None, math.inf, tol)
    slack = v[:-2] * v[2:] * (1.0 + tol) - v[1:-1] ** 2
    margin = float(slack.min())
    verdict = margin >= -tol
    first = None
    if not verdict:
        n = int(np.nonzero(slack < -tol)[0][0])
        first = (s.origin + n, s.origin + n + 1, s.origin + n + 2)
    return CheckReport(verdict, first, margin, tol)


def is_log_convex_all_gaps(s: NonnegSeq, tol: float = DEFAULT_TOL) -> CheckReport:
    """Check the gap-doubled inequalities s(i+m)^2 <= s(i) * s(i+2m) for every gap m.

    For a genuinely log-convex sequence these follow from the consecutive
    case, so this checker is used to validate generators and closures rather
    than as a primary test.
    """
    v = s.as_array()
    n = len(v)
    if n < 3:
        return CheckReport(True, None, math.inf, tol)
    margin = math.inf
    first = None
    for m in range(1, (n - 1) // 2 + 1):
        slack = v[: n - 2 * m] * v[2 * m :] * (1.0 + tol) - v[m : n - m] ** 2
        local = float(slack.min())
        if local < margin:
            margin = local
        if first is None and local < -tol:
            i = int(np.nonzero(slack < -tol)[0][0])
            first = (s.origin + i, s.origin + i + m, s.origin + i + 2 * m)
    return CheckReport(margin >= -tol, first, margin, tol)


def is_kaluza(s: NonnegSeq, tol: float = DEFAULT_TOL) -> CheckReport:
    """Check the Kaluza conditions: s(0)=1, 0 < s(n) <= 1, log-convex.

    All comparisons carry the tolerance: |s(0)-1| <= tol and s(n) <= 1+tol.
    Positivity of the tail is strict, with one convention: a tail that is
    identically zero is accepted (the degenerate Kaluza sequence).  A zero
    element in an otherwise positive tail is a structural failure and is
    reported with margin -inf.
    """
    v = s.as_array()
    lc = is_log_convex(s, tol)
    margin = lc.margin
    first = lc.first_violation
    # s(0) close to 1
    slack0 = -abs(v[0] - 1.0)
    if slack0 < margin:
        margin = slack0
        if slack0 < -tol and first is None:
            first = (s.origin, s.origin, s.origin)
    tail = v[1:]
    if len(tail) > 0 and tail.max() > 0.0:
        # non-degenerate: every tail element must be strictly positive
        if tail.min() <= 0.0:
            i = int(np.nonzero(tail <= 0.0)[0][0]) + 1
            return CheckReport(False, (s.origin + i,) * 3, -math.inf, tol)
        ub = 1.0 - tail
        local = float(ub.min())
        if local < margin:
            margin = local
            if local < -tol and first is None:
                i = int(np.nonzero(ub < -tol)[0][0]) + 1
                first = (s.origin + i,) * 3
    verdict = margin >= -tol
    return CheckReport(verdict, first if not verdict else None, margin, tol)


def is_completely_monotone(s: NonnegSeq, max_order: int, tol: float = DEFAULT_TOL) -> CheckReport:
    """Falsifier for complete monotonicity up to a finite difference order.

    Checks (-1)^k Delta^k s >= -tol for k = 0..max_order wherever the window
    allows.  Differences are taken by repeated subtraction of adjacent
    elements, which is numerically stable for genuinely CM input (every
    intermediate row is again nonnegative and decreasing, so no cancellation
    blow-up occurs).  A pass is only evidence up to max_order; a violation is
    a proof of non-monotonicity.
    """
    if not 1 <= max_order < len(s):
        raise InputError("need 1 <= max_order < len(s)")
    row = s.as_array()
    margin = float(row.min())
    first = None
    for k in range(1, max_order + 1):
        row = row[:-1] - row[1:]
        local = float(row.min())
        if local < margin:
            margin = local
        if first is None and local < -tol:
            n = int(np.nonzero(row < -tol)[0][0])
            first = (s.origin + n, k, s.origin + n + k)
    return CheckReport(margin >= -tol, first, margin, tol)


def ratio_profile(s: NonnegSeq, tol: float = DEFAULT_TOL) -> RatioProfile:
    """Consecutive ratios with a nondecreasing flag.

    For log-convex input the flag is always True.  A zero element followed by
    a nonzero one makes the ratio undefined and raises DomainError; a zero
    run at the end of the sequence gets ratio 0 by convention (matching the
    degenerate Kaluza sequence).
    """
    v = s.values
    if len(v) < 2:
        return RatioProfile((), True, tol)
    ratios = []
    for i in range(1, len(v)):
        if v[i - 1] == 0.0:
            if v[i] > 0.0:
                raise DomainError(f"zero element at {i - 1} with nonzero successor: ratio undefined")
            ratios.append(0.0)
        else:
            ratios.append(v[i] / v[i - 1])
    diffs = np.diff(ratios) if len(ratios) > 1 else np.asarray([0.0])
    return RatioProfile(tuple(ratios), bool(diffs.min() >= -tol), tol)


def shift_mix(g: NonnegSeq, weights: Sequence[float]) -> NonnegSeq:
    """Mix shifted copies: h(x) = sum_n weights[n] * g(x + n).

    Trailing zero weights are trimmed first; the output is truncated to the
    window where every remaining term is defined, so a mix of log-convex
    input stays log-convex (each h-value uses the same weights).
    """
    w = [float(x) for x in weights]
    if any(x < 0 for x in w):
        raise InputError("weights must be nonnegative")
    while w and w[-1] == 0.0:
        w.pop()
    garr = g.as_array()
    if not w:
        return NonnegSeq(tuple(0.0 for _ in garr), origin=g.origin, step=g.step)
    out_len = len(garr) - (len(w) - 1)
    if out_len < 1:
        raise InputError("weights longer than the sequence window")
    h = np.zeros(out_len)
    for n, wn in enumerate(w):
        if wn:
            h += wn * garr[n : n + out_len]
    return NonnegSeq(tuple(h), origin=g.origin, step=g.step)


def gen_log_convex(seed: int, n: int, ratio_range: tuple = (0.05, 0.95)) -> NonnegSeq:
    """Generate a strictly positive log-convex sequence with s(0) = 1.

    Draws n-1 ratios uniformly from ratio_range, sorts them nondecreasing and
    takes cumulative products.  Since every ratio is below 1 the output is
    strictly decreasing, hence also a Kaluza sequence.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    lo, hi = ratio_range
    if not (0.0 < lo <= hi < 1.0):
        raise InputError("ratio_range must satisfy 0 < lo <= hi < 1")
    rng = np.random.default_rng(seed)
    ratios = np.sort(rng.uniform(lo, hi, size=n - 1))
    vals = np.concatenate([[1.0], np.cumprod(ratios)])
    return NonnegSeq(tuple(vals))


def gen_completely_monotone(seed: int, n: int, atoms: int = 4) -> NonnegSeq:
    """Generate a CM sequence s(k) = sum_i w_i * lam_i^k with s(0) = 1.

    The lam_i live in [0, 0.95] and the weights are positive and normalized,
    so the output is a genuine Hausdorff moment sequence of a discrete
    measure on [0, 1).
    """
    if n < 1 or atoms < 1:
        raise InputError("need n >= 1 and atoms >= 1")
    rng = np.random.default_rng(seed)
    lams = rng.uniform(0.0, 0.95, size=atoms)
    w = rng.uniform(0.1, 1.0, size=atoms)
    w = w / w.sum()
    ks = np.arange(n)
    vals = (w[:, None] * np.power(lams[:, None], ks[None, :])).sum(axis=0)
    return NonnegSeq(tuple(vals))
