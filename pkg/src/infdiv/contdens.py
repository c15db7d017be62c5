"""Continuous-side constructions feeding the lattice machinery.

Four builders live here: lattice increments of a monotone measure
function with a log-convex density (the increments inherit the
log-convexity), two-sided densities assembled from a pair of tail
integrals, exponential-mixture densities, and scale mixtures of a
measure function.  A small registry of parametric families (pure
exponentials, the exponential-with-bump profile, finite exponential
mixtures) carries closed forms for tail and box integrals; anything the
registry does not know is handled by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, InputError
from .seqcheck import CheckReport, NonnegSeq, is_log_convex
from .walkfactor import GeomTailSeq, VSpec

QUAD_ABS_TOL = 1e-10
WINDOW_CAP = 2000


def _quad(f, lo, hi, points=()):
    pts = [p for p in points if lo < p < hi] if math.isfinite(hi) else None
    try:
        val, err = quad(f, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=1e-10,
                        limit=200, points=pts or None)
    except Exception as exc:  # quadpack signals hard failures by raising
        raise ConvergenceError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
    if not math.isfinite(val):
        raise ConvergenceError(f"quadrature diverged on [{lo}, {hi}]")
    return val


@dataclass(frozen=True)
class FnHandle:
    """Evaluable nonnegative function on ``(domain_start, oo)``.

    ``tail_fn`` is the exact integral over ``(x, oo)`` when the family
    knows it; ``exp_tail = (start, coef, rate)`` declares that the
    function equals ``coef * exp(-rate * y)`` exactly for ``y >= start``,
    which downstream code uses to close infinite sums.  ``breakpoints``
    are interior kinks that quadrature must split at.
    """

    eval: Callable[[float], float]
    domain_start: float = 0.0
    declared_log_convex: bool = False
    family: str | None = None
    params: tuple = ()
    tail_fn: Callable[[float], float] | None = field(default=None, repr=False)
    exp_tail: tuple | None = None
    breakpoints: tuple = ()

    def __call__(self, x: float) -> float:
        return self.eval(x)

    def tail(self, x: float) -> float:
        """Integral of the function over ``(x, oo)``."""
        if self.tail_fn is not None:
            return self.tail_fn(x)
        if self.exp_tail is not None and x >= self.exp_tail[0]:
            start, coef, rate = self.exp_tail
            return coef / rate * math.exp(-rate * x)
        if self.exp_tail is not None:
            start, coef, rate = self.exp_tail
            head = _quad(self.eval, x, start, self.breakpoints)
            return head + coef / rate * math.exp(-rate * start)
        val = _quad(self.eval, x, math.inf, self.breakpoints)
        return val


@dataclass(frozen=True)
class MeasureFn:
    """Nondecreasing right-continuous mass function, zero left of its start.

    ``eval(domain_start)`` includes the atom there (right continuity);
    ``deriv`` is the density on the open half-line beyond the start when
    the family knows it.
    """

    eval: Callable[[float], float]
    domain_start: float = 0.0
    deriv: FnHandle | None = field(default=None, repr=False)
    atom: float = 0.0

    def __call__(self, x: float) -> float:
        return self.eval(x)


# ---------------------------------------------------------------------------
# the family registry


def exponential_fn(rate: float = 1.0, coef: float = 1.0) -> FnHandle:
    """The pure exponential ``coef * exp(-rate * y)`` on ``(0, oo)``."""
    if rate <= 0.0:
        raise InputError(f"exponential rate must be positive, got {rate!r}")
    if coef < 0.0:
        raise InputError(f"exponential coefficient must be nonnegative, got {coef!r}")
    return FnHandle(
        eval=lambda y: coef * math.exp(-rate * y),
        declared_log_convex=True,
        family="exponential",
        params=(rate, coef),
        tail_fn=lambda x: coef / rate * math.exp(-rate * x),
        exp_tail=(0.0, coef, rate),
    )


def bump_fn() -> FnHandle:
    """``exp(-x + (1-x)^2)`` on ``(0, 1)``, plain ``exp(-x)`` beyond.

    The exponent is convex and continuously differentiable across the
    junction, so the function is log-convex on all of ``(0, oo)``; it is
    exactly exponential from 1 on.
    """
    def f(y: float) -> float:
        b = (1.0 - y) ** 2 if 0.0 < y < 1.0 else 0.0
        return math.exp(-y + b)

    def tail(x: float) -> float:
        if x >= 1.0:
            return math.exp(-x)
        head = _quad(f, max(x, 0.0), 1.0)
        return head + math.exp(-1.0)

    return FnHandle(eval=f, declared_log_convex=True, family="exp_bump",
                    params=(), tail_fn=tail, exp_tail=(1.0, 1.0, 1.0),
                    breakpoints=(1.0,))


def exp_mixture_fn(atoms) -> FnHandle:
    """Finite mixture ``sum_i c_i exp(-lam_i y)`` from ``(lam_i, c_i)`` pairs."""
    pairs = tuple((float(l), float(c)) for l, c in atoms)
    if not pairs:
        raise InputError("mixture needs at least one atom")
    for l, c in pairs:
        if l <= 0.0:
            raise InputError(f"mixture rate must be positive, got {l!r}")
        if c < 0.0:
            raise InputError(f"mixture coefficient must be nonnegative, got {c!r}")

    def f(y: float) -> float:
        return math.fsum(c * math.exp(-l * y) for l, c in pairs)

    def tail(x: float) -> float:
        return math.fsum(c / l * math.exp(-l * x) for l, c in pairs)

    exp_tail = (0.0, pairs[0][1], pairs[0][0]) if len(pairs) == 1 else None
    return FnHandle(eval=f, declared_log_convex=True, family="exp_mixture",
                    params=pairs, tail_fn=tail, exp_tail=exp_tail)


def exp_measure(rate: float = 1.0, atom: float = 0.0, a: float = 0.0) -> MeasureFn:
    """Mass function ``atom + (1-atom)(1 - exp(-rate (x-a)))`` from ``a`` on."""
    if rate <= 0.0:
        raise InputError(f"rate must be positive, got {rate!r}")
    if not 0.0 <= atom < 1.0:
        raise InputError(f"atom mass must lie in [0, 1), got {atom!r}")

    def g(x: float) -> float:
        if x < a:
            return 0.0
        return atom - (1.0 - atom) * math.expm1(-rate * (x - a))

    coef = (1.0 - atom) * rate * math.exp(rate * a)
    deriv = FnHandle(
        eval=lambda x: (1.0 - atom) * rate * math.exp(-rate * (x - a)) if x >= a else 0.0,
        domain_start=a,
        declared_log_convex=True,
        family="exponential",
        params=(rate, (1.0 - atom) * rate),
        tail_fn=lambda x: (1.0 - atom) * math.exp(-rate * (max(x, a) - a)),
        exp_tail=(a, coef, rate),
    )
    return MeasureFn(eval=g, domain_start=a, deriv=deriv, atom=atom)


_FAMILIES = {
    "exponential": lambda p: exponential_fn(rate=float(p.get("rate", 1.0)),
                                            coef=float(p.get("coef", 1.0))),
    "exp_bump": lambda p: bump_fn(),
    "exp_mixture": lambda p: exp_mixture_fn([(l, w * l * l) for l, w in p["atoms"]]),
}


def fn_from_json(obj: dict) -> FnHandle:
    """Build a registry handle from ``{"family": name, "params": {...}}``.

    The ``exp_mixture`` family takes ``params.atoms`` as ``[[lam, w], ...]``
    and weights each component by ``lam**2`` (the density of the mixed
    exponential law), matching :func:`exp_mixture_density`.
    """
    if not isinstance(obj, dict) or "family" not in obj:
        raise InputError("function spec must be an object with a 'family' key")
    name = obj["family"]
    if name not in _FAMILIES:
        raise InputError(f"unknown function family {name!r}; "
                         f"known: {sorted(_FAMILIES)}")
    params = obj.get("params", {}) or {}
    try:
        return _FAMILIES[name](params)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad parameters for family {name!r}: {exc}") from exc


def sample_fn(h: FnHandle, start: float, step: float, count: int) -> NonnegSeq:
    """Sample a handle on a uniform grid as a lattice sequence."""
    vals = [h.eval(start + i * step) for i in range(count)]
    return NonnegSeq.of(vals, step=step, clip_tol=1e-15)


def grid_log_convex(h: FnHandle, start: float, step: float, count: int,
                    tol: float = 1e-9) -> CheckReport:
    """Log-convexity of a handle, tested on a uniform sample grid."""
    return is_log_convex(sample_fn(h, start, step, count), tol=tol)


# ---------------------------------------------------------------------------
# lattice increments of a measure function


def discretize_lemma2(G: MeasureFn, n: int, m_max: int) -> NonnegSeq:
    """Increments of the step approximation of ``G`` on the ``1/n`` lattice.

    The approximation is constant on each cell ``[a+(m-1)/n, a+m/n)`` with
    the value ``G`` takes at the right endpoint, so its jump at the lattice
    point ``a+m/n`` is the ``G``-mass of ``(a+m/n, a+(m+1)/n]`` -- plus the
    atom of ``G`` at ``a`` folded into the first jump.  When the density of
    ``G`` is log-convex the jump sequence is log-convex too, which is what
    makes these increments useful input for the renewal machinery.
    """
    if n < 1:
        raise InputError(f"lattice refinement n must be >= 1, got {n}")
    if m_max < 3:
        raise InputError(f"m_max must be >= 3 to say anything, got {m_max}")
    a = G.domain_start
    step = 1.0 / n
    if G.deriv is not None:
        d = G.deriv
        incs = [d.tail(a + m * step) - d.tail(a + (m + 1) * step)
                for m in range(m_max)]
        incs[0] += G.atom
    else:
        vals = [G.eval(a + m * step) for m in range(m_max + 1)]
        for m in range(m_max):
            if vals[m + 1] < vals[m] - 1e-12:
                raise InputError(
                    f"measure function decreases between lattice points "
                    f"{a + m * step} and {a + (m + 1) * step}"
                )
        incs = [vals[m + 1] - vals[m] for m in range(1, m_max)]
        incs.insert(0, vals[1])
    return NonnegSeq.of(incs, step=step, clip_tol=1e-12)


# ---------------------------------------------------------------------------
# two-sided density from a pair of tail integrals


@dataclass(frozen=True)
class TailDensity:
    """Two-sided density whose halves are normalized tail integrals."""

    v1: FnHandle
    v2: FnHandle
    norm: float

    def eval(self, x: float) -> float:
        if x < 0.0:
            return self.v1.tail(-x) / self.norm
        if x > 0.0:
            return self.v2.tail(x) / self.norm
        return 0.5 * (self.v1.tail(0.0) + self.v2.tail(0.0)) / self.norm

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return _quad(lambda u: self.v1.tail(u), -x, math.inf) / self.norm
        return 1.0 - _quad(lambda u: self.v2.tail(u), x, math.inf) / self.norm


def tail_integral_density(v1: FnHandle, v2: FnHandle) -> TailDensity:
    """Density ``f(x) = Z^{-1} * (integral of v_r beyond |x|)`` per side.

    Each half-line piece is a nonincreasing tail integral; ``Z`` makes the
    whole thing integrate to 1.  Inputs whose tails do not integrate are
    rejected.
    """
    sides = []
    for v in (v1, v2):
        # cheap decay probe: x*v(x) must shrink between two far points,
        # or the tail integral cannot converge
        lo, hi = 50.0 * v.eval(50.0), 100.0 * v.eval(100.0)
        if hi > 1e-12 and hi >= 0.99 * lo:
            raise InputError("side function does not decay integrably "
                             "(probed at y = 50 and y = 100)")
        t0 = v.tail(0.0)
        if not math.isfinite(t0):
            raise InputError("side function has a divergent tail integral")
        z = _quad(lambda u, vv=v: vv.tail(u), 0.0, math.inf, v.breakpoints)
        if not math.isfinite(z) or z <= 0.0:
            raise InputError("side tail integral does not normalize")
        sides.append(z)
    return TailDensity(v1=v1, v2=v2, norm=sides[0] + sides[1])


# ---------------------------------------------------------------------------
# lattice spec from a pair of side functions


def _box2(v: FnHandle, c: float, step: float) -> float:
    """Double integral of ``v(c + y + z)`` over the ``step`` square.

    Exact for the exponential continuation; elsewhere reduced to a single
    integral against the triangular kernel of ``y + z``.
    """
    if v.exp_tail is not None and c >= v.exp_tail[0]:
        start, coef, rate = v.exp_tail
        edge = -math.expm1(-rate * step) / rate
        return coef * math.exp(-rate * c) * edge * edge
    pts = [step]
    for b in v.breakpoints:
        if 0.0 < b - c < 2.0 * step:
            pts.append(b - c)
    return _quad(lambda u: v.eval(c + u) * (step - abs(u - step)),
                 0.0, 2.0 * step, points=tuple(pts))


def discretize_corollary3(v1: FnHandle, v2: FnHandle, n: int,
                          m_max: int | None = None,
                          tail_rel: float = 1e-9) -> VSpec:
    """Lattice spec whose entries are box integrals of the side functions.

    Offset ``j`` on either side integrates the side function over a
    ``1/n`` square anchored at ``(|j| - 1)/n``, so refining ``n`` walks
    the lattice law toward the continuous one.  Windows extend until the
    entries have decayed below ``tail_rel`` relative to the lead (or
    ``m_max``), then close with the exact exponential ratio when the
    family provides one and the last observed ratio otherwise.
    """
    if n < 1:
        raise InputError(f"lattice refinement n must be >= 1, got {n}")
    step = 1.0 / n
    cap = m_max if m_max is not None else WINDOW_CAP

    def side(v: FnHandle, sign: int) -> GeomTailSeq:
        vals = []
        m = 0
        while True:
            try:
                val = _box2(v, m * step, step)
            except ConvergenceError as exc:
                raise ConvergenceError(
                    f"quadrature failed at lattice offset {sign * (m + 1)}: {exc}"
                ) from exc
            vals.append(val)
            m += 1
            if m >= cap:
                break
            if m >= 3 and vals[-1] <= tail_rel * max(vals[0], 1e-300):
                break
        if v.exp_tail is not None and (m - 2) * step >= v.exp_tail[0]:
            ratio = math.exp(-v.exp_tail[2] * step)
        elif len(vals) >= 2 and 0.0 < vals[-1] < vals[-2]:
            ratio = vals[-1] / vals[-2]
        else:
            ratio = None
        return GeomTailSeq.of(vals, ratio, clip_tol=1e-15)

    return VSpec(side(v1, -1), side(v2, +1), v0=0.0, K=1.0)


# ---------------------------------------------------------------------------
# exponential mixtures and scale mixtures


def exp_mixture_density(mu1, mu2) -> tuple[FnHandle, FnHandle]:
    """Side densities ``sum_i w_i lam_i^2 exp(-lam_i y)`` from two atom lists.

    The two lists together must carry total weight 1 (they split one unit
    of mixing mass between the sides).  Each output is a completely
    monotone finite mixture, hence log-convex.
    """
    lists = []
    total = 0.0
    for atoms in (mu1, mu2):
        pairs = tuple((float(l), float(w)) for l, w in atoms)
        for l, w in pairs:
            if l <= 0.0:
                raise InputError(f"mixture rate must be positive, got {l!r}")
            if w <= 0.0:
                raise InputError(f"mixture weight must be positive, got {w!r}")
        total += math.fsum(w for _, w in pairs)
        lists.append(pairs)
    if abs(total - 1.0) > 1e-9:
        raise InputError(f"mixing weights across both sides sum to {total!r}, not 1")
    return tuple(exp_mixture_fn([(l, w * l * l) for l, w in pairs])
                 for pairs in lists)


def scale_mixture_H(G: MeasureFn, V_atoms, a: float) -> MeasureFn:
    """Mixture ``H(x) = sum_i w_i G(x v_i)`` for ``x >= a``, with its density.

    Scaling factors must be >= 1 when ``a > 0`` (so every term is already
    in ``G``'s range) and merely positive when ``a = 0``.  The density
    ``H'(x) = sum_i w_i v_i G'(x v_i)`` inherits log-convexity from ``G'``
    because sums of log-convex functions are log-convex.
    """
    pairs = tuple((float(v), float(w)) for v, w in V_atoms)
    if not pairs:
        raise InputError("scale mixture needs at least one atom")
    for v, w in pairs:
        if w <= 0.0:
            raise InputError(f"scale weight must be positive, got {w!r}")
        if a > 0.0 and v < 1.0:
            raise InputError(
                f"scale atom {v!r} < 1 is not allowed when the support starts "
                f"at {a!r} > 0"
            )
        if v <= 0.0:
            raise InputError(f"scale atom must be positive, got {v!r}")
    if G.deriv is None:
        raise InputError("the base measure function must carry a density handle")

    def H(x: float) -> float:
        if x < a:
            return 0.0
        return math.fsum(w * G.eval(x * v) for v, w in pairs)

    d = G.deriv

    def Hprime(x: float) -> float:
        return math.fsum(w * v * d.eval(x * v) for v, w in pairs)

    breaks = tuple(sorted({b / v for v, _ in pairs for b in d.breakpoints}))
    exp_tail = None
    if len(pairs) == 1 and d.exp_tail is not None:
        v0, w0 = pairs[0]
        s, c, r = d.exp_tail
        exp_tail = (s / v0, w0 * v0 * c, r * v0)
    deriv = FnHandle(eval=Hprime, domain_start=a,
                     declared_log_convex=d.declared_log_convex,
                     family=None, params=pairs, exp_tail=exp_tail,
                     breakpoints=breaks)
    return MeasureFn(eval=H, domain_start=a, deriv=deriv, atom=H(a))
