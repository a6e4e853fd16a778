"""Measures on the real line described by their tails.

A :class:`Law` is a finite measure given by its log-tail ``x -> log F(x, inf)``,
an optional density for its continuous part and a list of atoms.  Laws with
a density (``has_density``) can serve as the integrating measure in a
convolution; any law can serve as the kernel.

Everything is vectorised over numpy arrays.  Scalars in, floats out.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .lattice import Window

NEG_INF = -math.inf


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _logaddexp_many(parts):
    parts = np.stack(np.broadcast_arrays(*parts))
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(parts, axis=0)


class Law:
    """Base class.  Subclasses implement ``_logsf`` and usually ``_logpdf``."""

    name = "law"
    mass = 1.0
    has_density = True

    @property
    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    # -- tails --------------------------------------------------------------
    def logsf(self, x):
        xs = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self._logsf(xs))

    def sf(self, x):
        return np.exp(self.logsf(x))

    def kernel_logsf(self, u):
        """Log-tail used when this law is the kernel of a convolution."""
        return self._logsf(np.asarray(u, dtype=float))

    @property
    def kernel_error(self) -> float:
        """Extra relative error carried by :meth:`kernel_logsf`."""
        return 0.0

    # -- continuous part ----------------------------------------------------
    def logpdf(self, x):
        xs = np.asarray(x, dtype=float)
        return _scalar_or_array(x, self._logpdf(xs))

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def _logpdf(self, x):
        return np.full(np.shape(x), NEG_INF)

    # -- discrete part ------------------------------------------------------
    def atoms(self, lo=-math.inf, hi=math.inf):
        """Atom locations and masses inside ``[lo, hi]``."""
        return np.zeros(0), np.zeros(0)

    def atom_mass_at(self, t: float) -> float:
        loc, m = self.atoms(t, t)
        return float(m.sum())

    def breakpoints(self, lo=-math.inf, hi=math.inf) -> np.ndarray:
        """Points in ``[lo, hi]`` where the tail or density is not smooth."""
        a, b = self.support
        pts = [p for p in (a, b) if math.isfinite(p) and lo <= p <= hi]
        loc, _ = self.atoms(lo, hi)
        return np.unique(np.concatenate([np.asarray(pts, dtype=float), loc]))

    # -- inversion and sampling ---------------------------------------------
    def isf(self, q):
        """Smallest ``x`` with ``sf(x) <= q``; numerical bisection by default."""
        qs = np.asarray(q, dtype=float)
        return _scalar_or_array(q, _bisect_isf(self, qs))

    def quantile(self, u):
        return self.isf(1.0 - np.asarray(u, dtype=float))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if abs(self.mass - 1.0) > 1e-12:
            raise ValueError(f"cannot sample from a measure of mass {self.mass}")
        # 1 - U lies in (0, 1], so isf never sees 0
        return np.asarray(self.isf(1.0 - rng.random(n)), dtype=float)

    def spec(self) -> str:
        return self.name

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec()}>"


def _bisect_isf(law: Law, q: np.ndarray) -> np.ndarray:
    """Vectorised bisection for laws without a closed-form inverse tail.

    Works on a stretched axis: ``x = lo + exp(t)`` for a finite left edge,
    ``x = sinh(t)`` otherwise, so tiny offsets and huge quantiles both resolve.
    """
    lo_s, hi_s = law.support
    lq = np.log(np.clip(q, 1e-300, None))
    if math.isfinite(lo_s):
        t_lo, t_hi = -745.0, 709.0
        to_x = lambda t: lo_s + np.exp(t)
    else:
        t_lo, t_hi = -709.0, 709.0
        to_x = np.sinh
    a = np.full(q.shape, t_lo)
    b = np.full(q.shape, t_hi)
    for _ in range(120):
        mid = 0.5 * (a + b)
        ok = law._logsf(to_x(mid)) <= lq
        b = np.where(ok, mid, b)
        a = np.where(ok, a, mid)
    out = to_x(b)
    if math.isfinite(hi_s):
        out = np.minimum(out, hi_s)
    if math.isfinite(lo_s):
        # sf(lo) <= q already: the answer is the left edge itself
        at_edge = law._logsf(np.full(q.shape, lo_s)) <= lq
        out = np.where(at_edge, lo_s, out)
    return out


class ScipyLaw(Law):
    """A continuous law backed by a frozen ``scipy.stats`` distribution."""

    def __init__(self, name: str, params: dict, frozen):
        self.name = name
        self.params = dict(params)
        self._dist = frozen
        lo, hi = frozen.support()
        self._support = (float(lo), float(hi))

    @property
    def support(self):
        return self._support

    def _logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.asarray(self._dist.logsf(x), dtype=float)

    def _logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.asarray(self._dist.logpdf(x), dtype=float)

    def isf(self, q):
        return self._dist.isf(q)

    def sample(self, n, rng):
        return np.asarray(self.isf(1.0 - rng.random(n)), dtype=float)

    def spec(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({args})"


class PointMass(Law):
    name = "pointmass"
    has_density = True  # zero density, one atom; still integrable against

    def __init__(self, a: float = 0.0, mass: float = 1.0):
        self.a = float(a)
        self.mass = float(mass)
        self.params = {"a": self.a}

    @property
    def support(self):
        return (self.a, self.a)

    def _logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.where(x < self.a, math.log(self.mass) if self.mass > 0 else NEG_INF, NEG_INF)

    def atoms(self, lo=-math.inf, hi=math.inf):
        if lo <= self.a <= hi and self.mass > 0:
            return np.array([self.a]), np.array([self.mass])
        return np.zeros(0), np.zeros(0)

    def isf(self, q):
        qs = np.asarray(q, dtype=float)
        return _scalar_or_array(q, np.full(qs.shape, self.a))

    def spec(self):
        return f"pointmass(a={self.a:g})"


class TailCurve(Law):
    """A bare tail function.  Usable as a convolution kernel or a tester input,
    not as an integrating measure."""

    has_density = False

    def __init__(self, func=None, mass: float = 1.0, support=(-math.inf, math.inf),
                 log_func=None, name: str = "tailcurve"):
        if func is None and log_func is None:
            raise ValueError("need func or log_func")
        self._func = func
        self._log_func = log_func
        self.mass = float(mass)
        self._support = tuple(support)
        self.name = name

    @property
    def support(self):
        return self._support

    def _logsf(self, x):
        if self._log_func is not None:
            return np.asarray(self._log_func(x), dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self._func(x), dtype=float))

    def scaled(self, c: float) -> "TailCurve":
        lc = math.log(c)
        return TailCurve(log_func=lambda x: self._logsf(np.asarray(x, dtype=float)) + lc,
                         mass=c * self.mass, support=self._support, name=f"{c:g}*{self.name}")


class Shifted(Law):
    """``F`` moved left by ``y``: tail at ``x`` equals ``F``'s tail at ``x + y``."""

    def __init__(self, F: Law, y: float):
        self.F, self.y = F, float(y)
        self.mass = F.mass
        self.has_density = F.has_density
        self.name = "shift"

    @property
    def support(self):
        a, b = self.F.support
        return (a - self.y, b - self.y)

    def _logsf(self, x):
        return self.F._logsf(x + self.y)

    def kernel_logsf(self, u):
        return self.F.kernel_logsf(np.asarray(u, dtype=float) + self.y)

    @property
    def kernel_error(self) -> float:
        return self.F.kernel_error

    def _logpdf(self, x):
        return self.F._logpdf(x + self.y)

    def atoms(self, lo=-math.inf, hi=math.inf):
        loc, m = self.F.atoms(lo + self.y, hi + self.y)
        return loc - self.y, m

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        return self.F.breakpoints(lo + self.y, hi + self.y) - self.y

    def isf(self, q):
        return np.asarray(self.F.isf(q)) - self.y if np.ndim(q) else float(self.F.isf(q)) - self.y

    def sample(self, n, rng):
        return self.F.sample(n, rng) - self.y

    def spec(self):
        return f"shift({self.F.spec()}, y={self.y:g})"


class PositivePart(Law):
    """All mass on ``(-inf, 0]`` moved to an atom at 0; tail unchanged on x >= 0."""

    def __init__(self, F: Law):
        self.F = F
        self.mass = F.mass
        self.has_density = F.has_density
        self.name = "positive_part"

    @property
    def support(self):
        a, b = self.F.support
        return (max(a, 0.0), max(b, 0.0))

    def _logsf(self, x):
        inner = self.F._logsf(np.maximum(x, 0.0))
        return np.where(x < 0, math.log(self.mass), inner)

    def _logpdf(self, x):
        return np.where(x > 0, self.F._logpdf(np.maximum(x, 0.0)), NEG_INF)

    def atoms(self, lo=-math.inf, hi=math.inf):
        loc, m = self.F.atoms(max(lo, 0.0) if lo > 0 else 0.0, hi)
        keep = loc > 0
        loc, m = loc[keep], m[keep]
        if lo <= 0.0 <= hi:
            at0 = self.mass - float(np.exp(self.F._logsf(np.array([0.0]))[0]))
            if at0 > 0:
                loc, m = np.concatenate([[0.0], loc]), np.concatenate([[at0], m])
        return loc, m

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        pts = self.F.breakpoints(max(lo, 0.0), hi)
        pts = pts[pts >= 0]
        if lo <= 0 <= hi:
            pts = np.unique(np.concatenate([[0.0], pts]))
        return pts

    def isf(self, q):
        return np.maximum(self.F.isf(q), 0.0)

    def sample(self, n, rng):
        return np.maximum(self.F.sample(n, rng), 0.0)

    def spec(self):
        return f"positive_part({self.F.spec()})"


class Mixture(Law):
    """``sum_i w_i F_i`` for non-negative weights; not normalised."""

    def __init__(self, weights, laws):
        weights = [float(w) for w in weights]
        if len(weights) != len(laws) or not laws:
            raise ValueError("need one weight per law")
        if any(w < 0 for w in weights):
            raise ValueError("mixture weights must be non-negative")
        self.weights, self.laws = weights, list(laws)
        self.mass = sum(w * F.mass for w, F in zip(weights, laws))
        self.has_density = all(F.has_density for F in laws)
        self.name = "mixture"

    @property
    def support(self):
        live = [F.support for w, F in zip(self.weights, self.laws) if w > 0]
        if not live:
            return (0.0, 0.0)
        return (min(s[0] for s in live), max(s[1] for s in live))

    def _combine(self, parts):
        with np.errstate(divide="ignore"):
            logs = [math.log(w) + p for w, p in zip(self.weights, parts) if w > 0]
        if not logs:
            return np.full(np.shape(parts[0]), NEG_INF)
        return _logaddexp_many(logs)

    def _logsf(self, x):
        return self._combine([F._logsf(x) for F in self.laws])

    def kernel_logsf(self, u):
        return self._combine([F.kernel_logsf(u) for F in self.laws])

    @property
    def kernel_error(self) -> float:
        return max(F.kernel_error for F in self.laws)

    def _logpdf(self, x):
        return self._combine([F._logpdf(x) for F in self.laws])

    def atoms(self, lo=-math.inf, hi=math.inf):
        locs, ms = [], []
        for w, F in zip(self.weights, self.laws):
            loc, m = F.atoms(lo, hi)
            locs.append(loc)
            ms.append(w * m)
        loc, m = np.concatenate(locs), np.concatenate(ms)
        if len(loc) == 0:
            return loc, m
        uniq, inv = np.unique(loc, return_inverse=True)
        out = np.zeros(len(uniq))
        np.add.at(out, inv, m)
        keep = out > 0
        return uniq[keep], out[keep]

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        return np.unique(np.concatenate(
            [F.breakpoints(lo, hi) for w, F in zip(self.weights, self.laws) if w > 0]
            or [np.zeros(0)]))

    def sample(self, n, rng):
        if abs(self.mass - 1.0) > 1e-12:
            raise ValueError(f"cannot sample from a measure of mass {self.mass}")
        p = np.array([w * F.mass for w, F in zip(self.weights, self.laws)])
        idx = rng.choice(len(self.laws), size=n, p=p / p.sum())
        out = np.empty(n)
        for k, F in enumerate(self.laws):
            sel = idx == k
            out[sel] = F.sample(int(sel.sum()), rng)
        return out

    def spec(self):
        return " + ".join(f"{w:g}*{F.spec()}" for w, F in zip(self.weights, self.laws))


class Restricted(Law):
    """``F_B``: the measure ``A -> F(A & B)`` for a :class:`Window` ``B``."""

    def __init__(self, F: Law, window: Window):
        self.F, self.window = F, window
        self.has_density = F.has_density
        self.name = "restricted"
        self.mass = float(np.exp(self._logsf(np.array([-math.inf]))[0]))

    @property
    def support(self):
        a, b = self.F.support
        return (max(a, self.window.lo), min(b, self.window.hi))

    def _logsf(self, x):
        W = self.window
        x = np.asarray(x, dtype=float)
        # (x, inf) & W: the lower end is max(x, W.lo); closedness comes from W
        # only when W.lo is the binding end
        use_lo = x < W.lo if W.lo_closed else x <= W.lo
        s = np.where(use_lo, W.lo, x)
        if W.lo == -math.inf:
            upper = np.where(np.isneginf(s), math.log(self.F.mass) if self.F.mass > 0 else NEG_INF,
                             self.F._logsf(np.where(np.isneginf(s), 0.0, s)))
        else:
            upper = self.F._logsf(s)
            if W.lo_closed:
                with np.errstate(divide="ignore"):
                    upper = np.where(use_lo,
                                     np.logaddexp(upper, math.log(self.F.atom_mass_at(W.lo))
                                                  if self.F.atom_mass_at(W.lo) > 0 else NEG_INF),
                                     upper)
        if W.hi == math.inf:
            return upper
        # subtract the mass of (hi, inf) (or [hi, inf) when hi is open)
        lb = float(self.F._logsf(np.array([W.hi]))[0])
        if not W.hi_closed:
            am = self.F.atom_mass_at(W.hi)
            if am > 0:
                lb = float(np.logaddexp(lb, math.log(am)))
        with np.errstate(divide="ignore", invalid="ignore"):
            diff = np.where(upper > lb, upper + np.log1p(-np.exp(lb - upper)), NEG_INF)
        past = x >= W.hi
        return np.where(past, NEG_INF, diff)

    def _logpdf(self, x):
        return np.where(self.window.contains(x), self.F._logpdf(x), NEG_INF)

    def atoms(self, lo=-math.inf, hi=math.inf):
        loc, m = self.F.atoms(lo, hi)
        keep = self.window.contains(loc)
        return loc[keep], m[keep]

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        W = self.window
        ends = [t for t in (W.lo, W.hi) if math.isfinite(t) and lo <= t <= hi]
        return np.unique(np.concatenate([self.F.breakpoints(lo, hi), np.asarray(ends, float)]))

    def sample(self, n, rng):
        raise NotImplementedError("restricted measures are not sampled directly")

    def spec(self):
        return f"restrict({self.F.spec()}, {self.window})"


def restrict(F: Law, window: Window) -> Law:
    return Restricted(F, window)


def shift(F: Law, y: float) -> Law:
    """Tail of the result at ``x`` equals ``F``'s tail at ``x + y``."""
    if y == 0:
        return F
    if isinstance(F, Shifted):
        total = F.y + y
        return F.F if total == 0 else Shifted(F.F, total)
    return Shifted(F, y)


def positive_part(F: Law) -> Law:
    if F.support[0] >= 0:
        return F
    return PositivePart(F)


def mixture(p: float, F: Law, q: float, G: Law) -> Law:
    return Mixture([p, q], [F, G])
