"""Convolution tails and their restriction decompositions.

For two measures ``F`` and ``G`` the tail of ``F*G`` at ``x`` is
``int tail_G(x - y) F(dy)``.  Lattice inputs give exact finite sums; laws
are integrated with :mod:`convtails.quadrature`.

The restricted terms split the convolution at a level ``t = h(x)``:

* ``conv_tail_le_h``  tail of ``F_{<=t} * G``
* ``conv_tail_gt_h``  tail of ``F_{>t} * G`` = ``int tail_F(max(t, x-y)) G(dy)``
* ``conv_tail_gt_gt`` tail of ``F_{>t} * G_{>t}``

and ``decomposition_report`` checks how they re-sum to the full tail.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import lattice as lat
from .lattice import LatticeMeasure, Window
from .laws import NEG_INF, Law, Restricted
from .quadrature import QuadratureError, ladder_edges, log_integrate, log_sum

# accuracy contract for analytic inputs
TARGET_RTOL = 1e-8
_QUAD_RTOL = 1e-10
# composite-kernel tables: absolute accuracy of the log tail, node budget
_TABLE_ATOL = 1e-9
_TABLE_MAX_NODES = 6000
_TABLE_VARIABLES = (np.log, lambda d: d**0.25, np.sqrt, lambda d: d)


class LatticeLaw(Law):
    """A lattice measure seen as an atoms-only law."""

    def __init__(self, F: LatticeMeasure):
        self.F = F
        self.mass = F.mass
        self.name = "lattice"

    @property
    def support(self):
        lo, hi = self.F.support
        if lo > hi:
            return (0.0, 0.0)
        return (lo, hi)

    def _logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(lat.tail(self.F, np.asarray(x, dtype=float)))

    def atoms(self, lo=-math.inf, hi=math.inf):
        pos, m = self.F.positions, self.F.masses
        keep = (pos >= lo) & (pos <= hi) & (m > 0)
        return pos[keep], m[keep]


def as_law(F) -> Law:
    if isinstance(F, LatticeMeasure):
        return LatticeLaw(F)
    return F


def _h_value(h, x: float) -> float:
    return float(h(x)) if callable(h) else float(h)


# ---------------------------------------------------------------------------
# core integral


def log_kernel_integral(base: Law, kernel: Law, x: float, rtol: float = _QUAD_RTOL):
    """``log int tail_kernel(x - y) base(dy)`` and its relative error.

    ``base`` must have a density (or be purely atomic); ``kernel`` needs a
    finite left support edge ``c`` so that the integrand is the constant
    ``kernel.mass`` for ``y > x - c``.
    """
    if not base.has_density:
        raise TypeError(f"{base!r} has no density and cannot be integrated against")
    if base.mass <= 0 or kernel.mass <= 0:
        return NEG_INF, 0.0
    c = kernel.support[0]
    if not math.isfinite(c):
        raise ValueError(f"kernel {kernel!r} needs a finite left support edge")
    a, b = base.support
    if not math.isfinite(a):
        raise ValueError(f"integrating measure {base!r} needs a finite left support edge")
    B = x - c
    logs, errs = [], []

    def log_phi(y):
        return kernel.kernel_logsf(x - y)

    hi = min(b, B)
    if a <= hi:
        loc, m = base.atoms(a, hi)
        if len(loc):
            with np.errstate(divide="ignore"):
                logs.append(log_sum(np.log(m) + log_phi(loc)))
            errs.append(0.0)
        if a < hi:
            interior = np.concatenate([
                base.breakpoints(a, hi),
                x - kernel.breakpoints(x - hi, x - a),
            ])
            edges = ladder_edges(a, hi, interior)
            lv, rel = log_integrate(lambda y: base._logpdf(y) + log_phi(y), edges, rtol=rtol)
            logs.append(lv)
            errs.append(rel)
    if b > B:
        logs.append(math.log(kernel.mass) + float(base._logsf(np.array([B]))[0]))
        errs.append(0.0)
    logs = np.asarray(logs, dtype=float)
    total = log_sum(logs)
    if total == NEG_INF:
        return NEG_INF, 0.0
    weights = np.exp(logs - total)
    return total, float(np.dot(weights, errs)) + kernel.kernel_error


def _pick_base(F: Law, G: Law) -> tuple[Law, Law]:
    """(base, kernel) for the tail of F*G.  Prefers integrating against a law
    with atoms so jumps are summed exactly rather than straddled by panels."""
    candidates = [(G, F), (F, G)]
    usable = [(b, k) for b, k in candidates if b.has_density and math.isfinite(b.support[0])
              and math.isfinite(k.support[0])]
    if not usable:
        raise TypeError(f"neither {F!r} nor {G!r} can be integrated against")
    for b, k in usable:
        if len(b.atoms()[0]):
            return b, k
    return usable[0]


def log_conv_tail(F, G, x: float, rtol: float = _QUAD_RTOL):
    """``(log tail(F*G, x), relative error)``."""
    if isinstance(F, Convolved) or isinstance(G, Convolved):
        return Convolved([F, G])._log_direct(float(x), rtol)
    base, kernel = _pick_base(as_law(F), as_law(G))
    return log_kernel_integral(base, kernel, float(x), rtol)


def conv_tail(F, G, x, with_error: bool = False):
    """Tail of ``F*G`` at ``x`` (vectorised over ``x``).

    Lattice pairs are summed exactly.  For laws a :class:`QuadratureError`
    is raised if the achieved relative error exceeds ``TARGET_RTOL``.
    """
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        val = lat.tail(lat.convolve(F, G), x)
        return (val, 0.0 * np.asarray(val)) if with_error else val
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.empty(len(xs))
    errs = np.empty(len(xs))
    for i, xi in enumerate(xs):
        lv, rel = log_conv_tail(F, G, xi)
        if rel > TARGET_RTOL:
            raise QuadratureError(f"convolution tail at x={xi:g}", lv, rel)
        vals[i] = math.exp(lv)
        errs[i] = vals[i] * rel
    if np.ndim(x) == 0:
        vals, errs = float(vals[0]), float(errs[0])
    return (vals, errs) if with_error else vals


# ---------------------------------------------------------------------------
# composite laws


class Convolved(Law):
    """``F_1 * ... * F_n`` as a law.

    The tail at ``x`` is one quadrature against the last density-bearing
    factor, with the convolution of the others as kernel.  When a Convolved
    law is itself a kernel its tail is read off a cubic-spline table, which
    keeps nested convolutions at linear cost.  The table's error estimate is
    added to the reported error of every integral that uses it.
    """

    has_density = False
    name = "convolution"
    _PER_DECADE = 24

    def __init__(self, laws):
        flat = []
        for F in laws:
            F = as_law(F)
            flat.extend(F.laws if isinstance(F, Convolved) else [F])
        if len(flat) < 2:
            raise ValueError("need at least two factors")
        # the integrating factor goes last
        order = sorted(range(len(flat)), key=lambda i: flat[i].has_density)
        self.laws = [flat[i] for i in order]
        if not self.laws[-1].has_density:
            raise TypeError("at least one factor needs a density")
        self.mass = float(np.prod([F.mass for F in self.laws]))
        self._table = None

    @property
    def support(self):
        return (sum(F.support[0] for F in self.laws), sum(F.support[1] for F in self.laws))

    @property
    def inner(self) -> Law:
        rest = self.laws[:-1]
        return rest[0] if len(rest) == 1 else Convolved(rest)

    def _log_direct(self, x: float, rtol: float = _QUAD_RTOL):
        inner = self.inner
        if isinstance(inner, Convolved):
            inner = _cached_inner(self)
        return log_kernel_integral(self.laws[-1], inner, x, rtol)

    def _logsf(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.array([self._log_direct(float(v))[0] if np.isfinite(v)
                        else (math.log(self.mass) if v < 0 else NEG_INF) for v in flat])
        return out.reshape(x.shape)

    @property
    def kernel_error(self) -> float:
        """Estimated error of the tabulated log tail (0 before tabulation)."""
        return 0.0 if self._table is None else self._table[4]

    def kernel_logsf(self, u):
        u = np.asarray(u, dtype=float)
        lo = self.support[0]
        need = float(np.max(u)) - lo if u.size else 0.0
        if self._table is None or need > self._table[0]:
            self._build_table(max(need * 4.0, 1e7))
        top, d0, log_at_lo, interp, _ = self._table
        d = u - lo
        out = np.empty(u.shape)
        below = d < 0
        out[below] = math.log(self.mass)
        tiny = (~below) & (d < d0)
        if tiny.any():
            # linear in d between the edge value and the first table point
            first = float(interp(d0))
            w = d[tiny] / d0
            out[tiny] = np.logaddexp(np.log1p(-w) + log_at_lo, np.log(np.maximum(w, 1e-300)) + first)
        body = (~below) & (d >= d0)
        out[body] = interp(d[body])
        return out

    def _build_table(self, span: float):
        """Cubic spline of the log tail, refined until midpoint checks agree.

        The spline variable is ``log d`` or a power ``d**p`` of the distance
        from the left support edge, whichever fits the coarse table best:
        power-like tails are nearly linear in ``log d``, Weibull-like ones
        with shape ``k`` in ``d**k``.
        """
        lo = self.support[0]
        d0 = 1e-6

        def exact(ds):
            return np.array([self._log_direct(lo + v)[0] for v in ds])

        def tol(g):
            return np.maximum(_TABLE_ATOL, 1e-14 * np.abs(g))

        # kinks of the tail become segment ends of a piecewise spline
        cuts = self.breakpoints(lo + d0, lo + span) - lo
        cuts = cuts[(cuts > d0) & (cuts < span)]
        n = int(math.ceil(math.log10(span / d0) * self._PER_DECADE)) + 1
        d = np.union1d(np.geomspace(d0, span, n), cuts)
        g = exact(d)
        mids = np.sqrt(d[1:] * d[:-1])
        gm = exact(mids)
        best = None
        for var in _TABLE_VARIABLES:
            err = np.abs(self._spline(var, d, g, cuts)(mids) - gm)
            score = np.max(np.where(np.isfinite(gm), err / tol(gm), 0.0))
            if best is None or score < best[0]:
                best = (score, var)
        var = best[1]
        nodes = dict(zip(d, g))
        nodes.update(zip(mids, gm))
        # intervals whose last check failed get their halves checked next
        spl = self._spline(var, d, g, cuts)
        bad = np.abs(spl(mids) - gm) > tol(gm)
        todo = [(a, m) for a, m, b in zip(d[:-1], mids, bad) if b] + \
               [(m, c) for m, c, b in zip(mids, d[1:], bad) if b]
        worst = 0.0
        while todo:
            xs = np.array(sorted(nodes))
            spl = self._spline(var, xs, np.array([nodes[v] for v in xs]), cuts)
            lefts = np.array([a for a, _ in todo])
            rights = np.array([c for _, c in todo])
            m = np.sqrt(lefts * rights)
            if len(nodes) + len(todo) > _TABLE_MAX_NODES:
                worst = float(np.max(np.abs(spl(m) - exact(m))))
                break
            gm = exact(m)
            err = np.abs(spl(m) - gm)
            nodes.update(zip(m, gm))
            nxt = []
            for a, mm, c, e, gv in zip(lefts, m, rights, err, gm):
                if e > tol(gv) and np.isfinite(gv) and c / a > 1 + 1e-9:
                    nxt += [(a, mm), (mm, c)]
            todo = nxt
        xs = np.array(sorted(nodes))
        interp = self._spline(var, xs, np.array([nodes[v] for v in xs]), cuts)
        log_at_lo = self._log_direct(lo)[0]
        self._table = (span, d0, log_at_lo, interp, max(worst, _TABLE_ATOL))

    @staticmethod
    def _spline(var, d, g, cuts=()):
        """Cubic spline of ``g`` in ``var(d)``, restarted at every cut."""
        ok = np.isfinite(g)
        d, g = d[ok], g[ok]
        bounds = np.concatenate([[d[0]], np.asarray(cuts, dtype=float), [d[-1]]])
        pieces = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            sel = (d >= a) & (d <= b)
            if np.count_nonzero(sel) >= 2:
                pieces.append((a, CubicSpline(var(d[sel]), g[sel])))
        starts = np.array([a for a, _ in pieces])

        def ev(v):
            v = np.asarray(v, dtype=float)
            k = np.clip(np.searchsorted(starts, v, side="right") - 1, 0, len(pieces) - 1)
            out = np.empty(v.shape)
            for i in np.unique(k):
                sel = k == i
                out[sel] = pieces[i][1](var(v[sel]))
            return out
        return ev

    def atoms(self, lo=-math.inf, hi=math.inf):
        return np.zeros(0), np.zeros(0)

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        """Kinks of the tail: each factor's breakpoints moved by the other
        factors' left support edges, plus the left edge of the sum."""
        edges = [F.support[0] for F in self.laws]
        total = sum(edges)
        pts = [np.asarray([total])]
        for F, e in zip(self.laws, edges):
            others = total - e
            pts.append(np.asarray(F.breakpoints(lo - others, hi - others), dtype=float) + others)
        out = np.unique(np.concatenate(pts))
        return out[(out >= lo) & (out <= hi)]

    def sample(self, n, rng):
        return sum(F.sample(n, rng) for F in self.laws)

    def spec(self):
        return " * ".join(F.spec() for F in self.laws)


_INNER_CACHE: dict = {}


def _cached_inner(conv: Convolved) -> Convolved:
    """Share tabulated inner convolutions between equal factor lists."""
    key = tuple(id(F) for F in conv.laws[:-1])
    inner = _INNER_CACHE.get(key)
    if inner is None:
        inner = conv.inner
        _INNER_CACHE[key] = inner
        # keep the factor objects alive as long as the cache entry
        inner._keep = conv.laws[:-1]
    return inner


def convolve(*laws):
    """Convolution of lattices (exact) or laws (:class:`Convolved`)."""
    if all(isinstance(F, LatticeMeasure) for F in laws):
        out = laws[0]
        for G in laws[1:]:
            out = lat.convolve(out, G)
        return out
    return Convolved(laws)


def conv_power(F, n: int):
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return F
    return convolve(*([F] * n))


# ---------------------------------------------------------------------------
# restriction terms


def conv_tail_le_h(F, G, h, x: float) -> float:
    """Tail at ``x`` of ``F_{<=h(x)} * G``: ``int_{y <= h(x)} tail_G(x - y) F(dy)``."""
    t = _h_value(h, x)
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        pos, m = F.positions, F.masses
        keep = pos <= t
        return float(np.dot(lat.tail(G, x - pos[keep]), m[keep]))
    return _restricted_tail(Restricted(as_law(F), Window.le(t)), as_law(G), x)


def conv_tail_gt_h(F, G, h, x: float) -> float:
    """Tail at ``x`` of ``F_{>h(x)} * G``: ``int tail_F(max(h(x), x - y)) G(dy)``."""
    t = _h_value(h, x)
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        pos, m = G.positions, G.masses
        return float(np.dot(lat.tail(F, np.maximum(t, x - pos)), m))
    return _restricted_tail(Restricted(as_law(F), Window.gt(t)), as_law(G), x, base_second=True)


def conv_tail_gt_gt(F, G, h, x: float, form: str = "G") -> float:
    """Tail at ``x`` of ``F_{>h(x)} * G_{>h(x)}``.

    ``form="G"`` integrates ``tail_F(max(h, x - y))`` against ``G(dy)`` over
    ``y > h``; ``form="F"`` swaps the roles.  Both give the same number.
    """
    t = _h_value(h, x)
    if form not in ("G", "F"):
        raise ValueError("form must be 'G' or 'F'")
    if form == "F":
        F, G = G, F
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        pos, m = G.positions, G.masses
        keep = pos > t
        return float(np.dot(lat.tail(F, np.maximum(t, x - pos[keep])), m[keep]))
    Fr = Restricted(as_law(F), Window.gt(t))
    Gr = Restricted(as_law(G), Window.gt(t))
    return _restricted_tail(Fr, Gr, x, base_second=True)


def conv_tail_le_le(F, G, h, x: float) -> float:
    """Tail at ``x`` of ``F_{<=h(x)} * G_{<=h(x)}``: the mass counted twice by
    ``le_h + le_h_other``.  Zero whenever ``2 h(x) <= x``."""
    t = _h_value(h, x)
    if 2.0 * t <= x:
        return 0.0
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        a, b = F.positions <= t, G.positions <= t
        pf, mf, pg, mg = F.positions[a], F.masses[a], G.positions[b], G.masses[b]
        hit = pf[:, None] + pg[None, :] > x
        return float(mf @ (hit * mg[None, :]).sum(axis=1))
    Fr = Restricted(as_law(F), Window.le(t))
    Gr = Restricted(as_law(G), Window.le(t))
    return _restricted_tail(Fr, Gr, x)


def _restricted_tail(A: Law, B: Law, x: float, base_second: bool = False) -> float:
    """Tail of ``A*B`` at ``x``; with ``base_second`` integrate against ``B``."""
    if A.mass <= 0 or B.mass <= 0:
        return 0.0
    if base_second and B.has_density:
        lv, rel = log_kernel_integral(B, A, x)
    elif not base_second and A.has_density:
        lv, rel = log_kernel_integral(A, B, x)
    else:
        lv, rel = log_conv_tail(A, B, x)
    if rel > TARGET_RTOL:
        raise QuadratureError(f"restricted convolution tail at x={x:g}", lv, rel)
    return math.exp(lv)


@dataclass(frozen=True)
class DecompositionReport:
    x: float
    h: float
    full: float
    le_h: float          # F_{<=h} * G
    le_h_other: float    # F * G_{<=h}
    gt_h: float          # F_{>h} * G
    gt_gt: float         # F_{>h} * G_{>h}
    residual_split: float      # full - le_h - gt_h
    slack_upper: float         # le_h + le_h_other + gt_gt - full, computed as the doubly counted mass
    residual_upper: float      # le_h + le_h_other + gt_gt - full - slack_upper
    residual_three: float | None  # full - le_h - le_h_other - gt_gt, when h <= x/2
    h_le_half: bool
    scale: float               # mass normaliser for residual thresholds

    def as_dict(self):
        return asdict(self)

    def identities_hold(self, atol: float = 1e-12) -> bool:
        tol = atol * self.scale
        ok = (abs(self.residual_split) <= tol and abs(self.residual_upper) <= tol
              and self.slack_upper >= 0)
        if self.residual_three is not None:
            ok = ok and abs(self.residual_three) <= tol
        return ok


def decomposition_report(F, G, h, x: float) -> DecompositionReport:
    """All restriction terms at ``x`` with the residuals of the three relations
    (two-term split, three-term upper bound, three-term identity for
    ``h(x) <= x/2``)."""
    if x < 0:
        raise ValueError("decomposition is stated for x >= 0")
    t = _h_value(h, x)
    if isinstance(F, LatticeMeasure) and isinstance(G, LatticeMeasure):
        full = float(lat.tail(lat.convolve(F, G), x))
    else:
        full = conv_tail(F, G, x)
    le = conv_tail_le_h(F, G, t, x)
    le_o = conv_tail_le_h(G, F, t, x)
    gt = conv_tail_gt_h(F, G, t, x)
    gg = conv_tail_gt_gt(F, G, t, x)
    dup = conv_tail_le_le(F, G, t, x)
    half = t <= x / 2
    mF = F.mass
    mG = G.mass
    return DecompositionReport(
        x=float(x), h=t, full=full, le_h=le, le_h_other=le_o, gt_h=gt, gt_gt=gg,
        residual_split=full - le - gt,
        slack_upper=dup,
        residual_upper=le + le_o + gg - full - dup,
        residual_three=(full - le - le_o - gg) if half else None,
        h_le_half=half,
        scale=max(mF * mG, 1e-300) if (mF * mG) > 0 else 1.0,
    )
