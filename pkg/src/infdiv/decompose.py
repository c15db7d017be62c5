"""Infinite-divisibility certificates for lattice laws on {0, 1, 2, ...}.

A probability law p on the nonnegative integers with p(0) > 0 is infinitely
divisible exactly when its compound-Poisson coefficients q(1), q(2), ... are
all nonnegative, where

    exp(-rate + sum_x q(x) s^x) = sum_n p(n) s^n,   rate = -ln p(0).

On a finite window a negative q(x) *refutes* infinite divisibility outright,
while an all-nonnegative window certifies only that no obstruction exists up
to that order; :class:`IdCertificate` records the window.

Two independent routes compute the coefficients: the direct convolution
recursion

    n * q(n) * p(0) = n * p(n) - sum_{k<n} k * q(k) * p(n-k)

and a power-series logarithm (:func:`series_log`).  :func:`certify_id_nonneg`
runs both and refuses to answer when they disagree.

The second decomposition here is compound-geometric: p(n) = p(0) * [s^n]
1/(1 - H(s)).  When p is log-convex the increments h are automatically
nonnegative, which upgrades p to compound-geometric and hence infinitely
divisible regardless of window; :func:`compound_geometric` computes h and
leaves the sign interpretation to the caller.

Kaluza sequences (log-convex, u(0)=1, 0 < u(n) <= 1) are renewal sequences;
:func:`renewal_increments` recovers the underlying waiting-time increments
f with f >= 0.  For a nonincreasing window the increments also satisfy
sum f <= 1; a window that cannot be extended log-convexly (e.g. 1, 0.5, 1)
may give sum f > 1, so no such postcondition is enforced here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, InputError, LogConvexityError
from .seqcheck import NonnegSeq, is_kaluza

DEFAULT_TOL = 1e-10
ROUTE_TOL = 1e-10

__all__ = [
    "LatticePmf",
    "LevyRep",
    "CompoundGeometricRep",
    "IdCertificate",
    "renewal_increments",
    "compound_geometric",
    "levy_coeffs",
    "series_log",
    "series_exp",
    "certify_id_nonneg",
]


@dataclass(frozen=True)
class LatticePmf:
    """A (possibly truncated) probability mass function on {0, 1, 2, ...}.

    Truncation is first-class: the stored window may carry total mass below
    one, and ``mass_deficit`` reports how much is missing.  Mass above
    1 + tol is rejected.
    """

    probs: tuple
    tol: float = 1e-9

    def __post_init__(self):
        vals = tuple(float(x) for x in self.probs)
        if len(vals) == 0:
            raise InputError("pmf must be nonempty")
        for i, x in enumerate(vals):
            if not math.isfinite(x) or x < 0.0:
                raise InputError(f"p({i}) = {x} is not a probability")
        total = math.fsum(vals)
        if total > 1.0 + self.tol:
            raise InputError(f"total mass {total} exceeds 1")
        object.__setattr__(self, "probs", vals)

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    @property
    def mass_deficit(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.probs))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    @classmethod
    def of(cls, probs, tol: float = 1e-9, clip_tol: float = 0.0) -> "LatticePmf":
        vals = []
        for x in probs:
            x = float(x)
            if -clip_tol <= x < 0.0:
                x = 0.0
            vals.append(x)
        return cls(tuple(vals), tol=tol)


@dataclass(frozen=True)
class LevyRep:
    """Compound-Poisson data: total rate and jump coefficients q(1), q(2), ...

    q(x)/rate is the jump law when all q are nonnegative; negative entries
    are kept as-is because they are exactly the refutation witnesses.
    """

    rate: float
    q: tuple

    def to_pmf(self, tol: float = 1e-9) -> LatticePmf:
        """Reconstruct p(0..n) by exponentiating the log-series."""
        b = np.concatenate([[-self.rate], np.asarray(self.q, dtype=float)])
        return LatticePmf.of(series_exp(b), tol=tol, clip_tol=1e-13)


@dataclass(frozen=True)
class CompoundGeometricRep:
    """Increments h with p(n) = p(0) * [s^n] 1/(1 - H(s))."""

    p0: float
    h: tuple

    def to_pmf(self, tol: float = 1e-9) -> LatticePmf:
        h = np.asarray(self.h, dtype=float)
        p = np.zeros(len(h) + 1)
        p[0] = self.p0
        for n in range(1, len(p)):
            p[n] = np.dot(h[:n], p[n - 1 :: -1][: n])
        return LatticePmf.of(p, tol=tol, clip_tol=1e-13)


@dataclass(frozen=True)
class IdCertificate:
    """Verdict on infinite divisibility of a nonnegative lattice law.

    verdict True  -- every Levy coefficient on the window clears -tol;
                     conclusive only up to ``window``.
    verdict False -- q(witness) < -tol, a genuine refutation.

    ``margin`` is the smallest coefficient seen, ``route_discrepancy`` the
    worst disagreement between the two computation routes.
    """

    verdict: bool
    margin: float
    window: int
    witness: int | None
    levy: LevyRep
    compound_geom: CompoundGeometricRep | None
    route_discrepancy: float
    tolerance_used: float


def renewal_increments(u: NonnegSeq, tol: float = 1e-9) -> np.ndarray:
    """Waiting-time increments f(1..n) of a Kaluza sequence.

    Solves u(n) = sum_{k=1}^{n} f(k) u(n-k).  The input must pass
    :func:`infdiv.seqcheck.is_kaluza`; the theorem then guarantees f >= 0,
    and anything below -tol is treated as evidence of a broken input rather
    than clipped silently.
    """
    rep = is_kaluza(u, tol=tol)
    if not rep.verdict:
        raise LogConvexityError(
            f"input is not a Kaluza sequence (first violation at {rep.first_violation})",
            report=rep,
        )
    uu = u.as_array()
    n = len(uu) - 1
    f = np.zeros(n)
    for k in range(1, n + 1):
        f[k - 1] = uu[k] - np.dot(f[: k - 1], uu[k - 1 : 0 : -1])
    worst = f.min() if n else 0.0
    if worst < -tol:
        raise DomainError(f"renewal increment {worst} is negative beyond tolerance")
    np.clip(f, 0.0, None, out=f)
    return f


def compound_geometric(p: LatticePmf) -> CompoundGeometricRep:
    """Increments h(1..n) with p(n) = p(0) * [s^n] 1/(1 - H(s)).

    Requires p(0) > 0.  No sign constraint is imposed: h >= 0 holds
    automatically when p is log-convex, and a negative h is meaningful
    output for a caller probing that implication.
    """
    if p[0] <= 0.0:
        raise DomainError("compound-geometric increments need p(0) > 0")
    pp = p.as_array()
    n = len(pp) - 1
    h = np.zeros(n)
    for k in range(1, n + 1):
        h[k - 1] = (pp[k] - np.dot(h[: k - 1], pp[k - 1 : 0 : -1])) / pp[0]
    return CompoundGeometricRep(p0=pp[0], h=tuple(h))


def levy_coeffs(p: LatticePmf) -> tuple[float, np.ndarray]:
    """Compound-Poisson coefficients (rate, q(1..n)) by direct recursion.

    rate = -ln p(0);  n q(n) p(0) = n p(n) - sum_{k=1}^{n-1} k q(k) p(n-k).
    """
    if p[0] <= 0.0:
        raise DomainError("Levy coefficients need p(0) > 0")
    pp = p.as_array()
    n = len(pp) - 1
    q = np.zeros(n)
    kq = np.zeros(n)  # holds k * q(k), the quantity the recursion convolves
    for m in range(1, n + 1):
        acc = m * pp[m] - np.dot(kq[: m - 1], pp[m - 1 : 0 : -1])
        kq[m - 1] = acc / pp[0]
        q[m - 1] = kq[m - 1] / m
    return -math.log(pp[0]), q


def series_log(a: np.ndarray | tuple) -> np.ndarray:
    """Coefficients of log A(s) for a power series with a(0) > 0.

    Uses b'(s) = a'(s)/a(s): the derivative quotient is computed by series
    division and integrated termwise, avoiding any nested convolutions.
    """
    aa = np.asarray(a, dtype=float)
    if len(aa) == 0 or aa[0] <= 0.0:
        raise DomainError("series_log needs a(0) > 0")
    n = len(aa)
    c = np.zeros(n - 1)  # c = a'/a
    for m in range(n - 1):
        c[m] = ((m + 1) * aa[m + 1] - np.dot(c[:m][::-1], aa[1 : m + 1])) / aa[0]
    b = np.zeros(n)
    b[0] = math.log(aa[0])
    if n > 1:
        b[1:] = c / np.arange(1, n)
    return b


def series_exp(b: np.ndarray | tuple) -> np.ndarray:
    """Coefficients of exp B(s); inverse of :func:`series_log`."""
    bb = np.asarray(b, dtype=float)
    n = len(bb)
    if n == 0:
        raise InputError("series_exp needs at least the constant term")
    a = np.zeros(n)
    a[0] = math.exp(bb[0])
    kb = bb * np.arange(n)
    for m in range(1, n):
        a[m] = np.dot(kb[1 : m + 1][::-1], a[:m]) / m
    return a


def certify_id_nonneg(
    p: LatticePmf,
    tol: float = DEFAULT_TOL,
    route_tol: float = ROUTE_TOL,
) -> IdCertificate:
    """Certify (up to the window) or refute infinite divisibility of p.

    The Levy coefficients are computed twice -- by the direct recursion and
    through :func:`series_log` -- and must agree to route_tol (scaled by the
    largest coefficient) before any verdict is issued; disagreement raises
    ConvergenceError instead of returning a possibly wrong answer.

    verdict True means min q >= -tol on the window, False means some
    q(x) < -tol, with ``witness`` the first such x.  The compound-geometric
    increments ride along in the certificate for diagnostic use.
    """
    rate, q = levy_coeffs(p)
    b = series_log(p.as_array())
    scale = max(1.0, float(np.abs(q).max())) if len(q) else 1.0
    disc = float(np.abs(q - b[1:]).max()) if len(q) else 0.0
    disc = max(disc, abs(b[0] + rate))
    if disc > route_tol * scale:
        raise ConvergenceError(
            f"Levy-coefficient routes disagree by {disc:.3e}; "
            "the window may be too ill-conditioned to certify"
        )
    if len(q):
        margin = float(q.min())
        verdict = margin >= -tol
        witness = None if verdict else int(np.nonzero(q < -tol)[0][0]) + 1
    else:
        margin, verdict, witness = math.inf, True, None
    return IdCertificate(
        verdict=verdict,
        margin=margin,
        window=len(p) - 1,
        witness=witness,
        levy=LevyRep(rate=rate, q=tuple(q)),
        compound_geom=compound_geometric(p),
        route_discrepancy=disc,
        tolerance_used=tol,
    )
