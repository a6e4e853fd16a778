"""Parametric families and the slowly-varying-jump counterexample.

Family strings follow a small grammar::

    spec   := name "(" [param ("," param)*] ")"  |  name
    param  := key "=" number

Known names and parameters::

    pareto(alpha)                   tail x**-alpha for x >= 1, 1 below
    lognormal(mu=0, sigma=1)
    weibull(k, scale=1)             tail exp(-(x/scale)**k) for x >= 0
    exponential(lambda=1)
    regvarying(alpha, c=1)          tail min(1, c * x**-alpha)
    regvarying(alpha, beta)         tail x**-alpha * (1 + log x)**beta, x >= 1
    pointmass(a=0)
    counterexample(alpha=1)

``shift(spec, y)`` moves a law left by ``y`` (its tail at ``x`` is the tail
of ``spec`` at ``x + y``) and ``w1*spec1 + w2*spec2`` is a mixture.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .lattice import LatticeMeasure
from .laws import (Law, Mixture, NEG_INF, PointMass, ScipyLaw, positive_part,
                   restrict, shift)

__all__ = [
    "FAMILIES", "CounterexampleLaw", "Discretization", "RangeError", "counterexample",
    "discretize", "make_family", "parse_family", "positive_part", "restrict",
    "sample", "shift", "mixture_of",
]

LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class RangeError(OverflowError):
    """A breakpoint lies beyond the representable float range."""


def pareto(alpha: float) -> Law:
    _positive(alpha=alpha)
    return ScipyLaw("pareto", {"alpha": alpha}, stats.pareto(b=alpha))


def lognormal(mu: float = 0.0, sigma: float = 1.0) -> Law:
    _positive(sigma=sigma)
    return ScipyLaw("lognormal", {"mu": mu, "sigma": sigma},
                    stats.lognorm(s=sigma, scale=math.exp(mu)))


def weibull(k: float, scale: float = 1.0) -> Law:
    _positive(k=k, scale=scale)
    params = {"k": k} if scale == 1.0 else {"k": k, "scale": scale}
    return ScipyLaw("weibull", params, stats.weibull_min(c=k, scale=scale))


def exponential(lam: float = 1.0) -> Law:
    _positive(**{"lambda": lam})
    return ScipyLaw("exponential", {"lambda": lam}, stats.expon(scale=1.0 / lam))


def regvarying(alpha: float, c: float = 1.0, beta: float | None = None) -> Law:
    """Regularly varying tail ``x**-alpha * l(x)``.

    With ``beta`` given, ``l(x) = (1 + log x)**beta`` (needs ``beta <= alpha``
    for the tail to be non-increasing); otherwise ``l`` is the constant ``c``.
    """
    _positive(alpha=alpha)
    if beta is not None:
        return LogSlowlyVarying(alpha, beta)
    _positive(c=c)
    law = ScipyLaw("regvarying", {"alpha": alpha, "c": c},
                   stats.pareto(b=alpha, scale=c ** (1.0 / alpha)))
    return law


class LogSlowlyVarying(Law):
    """Tail ``x**-alpha (1 + log x)**beta`` on ``x >= 1``."""

    name = "regvarying"

    def __init__(self, alpha: float, beta: float):
        if beta > alpha:
            raise ValueError(f"beta={beta} > alpha={alpha}: tail would increase near 1")
        self.alpha, self.beta = float(alpha), float(beta)
        self.params = {"alpha": self.alpha, "beta": self.beta}

    @property
    def support(self):
        return (1.0, math.inf)

    def _logsf(self, x):
        lx = np.log(np.maximum(x, 1.0))
        return np.where(x < 1.0, 0.0, -self.alpha * lx + self.beta * np.log1p(lx))

    def _logpdf(self, x):
        lx = np.log(np.maximum(x, 1.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            # -d/dx tail = x**(-a-1) (1+L)**(b-1) (a(1+L) - b)
            val = ((-self.alpha - 1.0) * lx + (self.beta - 1.0) * np.log1p(lx)
                   + np.log(self.alpha * (1.0 + lx) - self.beta))
        return np.where(x < 1.0, NEG_INF, val)

    def spec(self):
        return f"regvarying(alpha={self.alpha:g}, beta={self.beta:g})"


def pointmass(a: float = 0.0) -> Law:
    return PointMass(a)


def _positive(**kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise ValueError(f"{k} must be positive and finite, got {v!r}")


# ---------------------------------------------------------------------------
# counterexample: G is not long-tailed, yet F + G is


class CounterexampleLaw(Law):
    """Tail built cycle by cycle against ``F(x) = x**-alpha``.

    On ``[x_n, y_n)`` the tail is ``x**-alpha / (1 + log(x/x_n))``; at ``y_n``
    it halves; it then stays flat until it meets ``x**-alpha`` again at
    ``x_{n+1}``.  Breakpoints are kept as logarithms since they grow doubly
    exponentially.
    """

    name = "counterexample"

    def __init__(self, alpha: float = 1.0):
        _positive(alpha=alpha)
        self.alpha = float(alpha)
        self.params = {"alpha": self.alpha}
        self._lx = [0.0]   # log x_1 = 0
        self._ly = []
        # enough cycles to cover every float x
        while self._lx[-1] <= LOG_FLOAT_MAX:
            self._extend()

    def _extend(self):
        n = len(self._lx)
        lxn = self._lx[-1]
        # y_n = min{x > x_n : 1 + log(x/x_n) = 2**n}
        ly = optimize.brentq(lambda l: 1.0 + (l - lxn) - 2.0 ** n,
                             lxn, lxn + 2.0 ** n, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        # tail at y_n is F(y_n) 2**-(n+1); x_{n+1} solves F(x) = that level
        level = -self.alpha * ly - (n + 1) * math.log(2.0)
        lx_next = optimize.brentq(lambda l: -self.alpha * l - level,
                                  ly, ly + (n + 2) * math.log(2.0) / self.alpha + 1.0,
                                  xtol=1e-14, rtol=4 * np.finfo(float).eps)
        self._ly.append(ly)
        self._lx.append(lx_next)

    def log_breakpoints(self, n: int) -> tuple[float, float]:
        """``(log x_n, log y_n)`` for cycle ``n >= 1``."""
        if n < 1:
            raise ValueError("cycles are numbered from 1")
        while len(self._ly) < n:
            self._extend()
        return self._lx[n - 1], self._ly[n - 1]

    def breakpoints_at(self, n: int) -> tuple[float, float]:
        lx, ly = self.log_breakpoints(n)
        if ly > LOG_FLOAT_MAX:
            raise RangeError(f"y_{n} = exp({ly:.6g}) is beyond the float range")
        return math.exp(lx), math.exp(ly)

    def cycles_in_range(self) -> int:
        """Number of cycles whose ``y_n`` is a finite float."""
        return sum(1 for ly in self._ly if ly <= LOG_FLOAT_MAX)

    def log_tail_at_jump(self, n: int) -> tuple[float, float]:
        """``(log G(y_n-), log G(y_n))``.

        ``1 + log(y_n/x_n) = 2**n`` by construction, so the left limit is
        taken as exactly twice the value at the jump."""
        _, ly = self.log_breakpoints(n)
        right = -self.alpha * ly - (n + 1) * math.log(2.0)
        return right + math.log(2.0), right

    @property
    def support(self):
        return (1.0, math.inf)

    def _float_edges(self):
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(self._lx)), np.exp(np.asarray(self._ly))

    def _locate(self, x):
        """Cycle index (0-based) with ``x_n <= x < x_{n+1}``, compared in x
        space so jumps sit exactly at the float atoms ``exp(log y_n)``."""
        xf, yf = self._float_edges()
        i = np.clip(np.searchsorted(xf, x, side="right") - 1, 0, len(self._ly) - 1)
        return i, yf[i]

    def _logsf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lx = np.log(np.maximum(x, 1.0))
        i, yn = self._locate(x)
        lxn = np.asarray(self._lx)[i]
        lyn = np.asarray(self._ly)[i]
        n = i + 1
        rising = -self.alpha * lx - np.log1p(np.maximum(lx - lxn, 0.0))
        flat = -self.alpha * lyn - (n + 1) * math.log(2.0)
        out = np.where(x < yn, rising, flat)
        return np.where(x <= 1.0, 0.0, out)

    def _logpdf(self, x):
        x = np.asarray(x, dtype=float)
        lx = np.log(np.maximum(x, 1.0))
        i, yn = self._locate(x)
        lxn = np.asarray(self._lx)[i]
        L = np.maximum(lx - lxn, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (-self.alpha - 1.0) * lx + np.log(self.alpha / (1.0 + L) + 1.0 / (1.0 + L) ** 2)
        return np.where((x > 1.0) & (x < yn), val, NEG_INF)

    def atoms(self, lo=-math.inf, hi=math.inf):
        locs, ms = [], []
        for n in range(1, self.cycles_in_range() + 1):
            _, ly = self.log_breakpoints(n)
            y = math.exp(ly)
            if lo <= y <= hi:
                # the jump halves the tail, so its mass equals G(y_n)
                _, right = self.log_tail_at_jump(n)
                locs.append(y)
                ms.append(math.exp(right))
        return np.asarray(locs, dtype=float), np.asarray(ms, dtype=float)

    def breakpoints(self, lo=-math.inf, hi=math.inf):
        pts = []
        for lx, ly in zip(self._lx, self._ly):
            for l in (lx, ly):
                if l <= LOG_FLOAT_MAX and lo <= math.exp(l) <= hi:
                    pts.append(math.exp(l))
        return np.unique(np.asarray(pts, dtype=float))

    def spec(self):
        return f"counterexample(alpha={self.alpha:g})"


def counterexample(alpha: float = 1.0) -> CounterexampleLaw:
    return CounterexampleLaw(alpha)


def dump_breakpoints(law: CounterexampleLaw, n: int) -> str:
    """CSV ``n,x_n,y_n,G_tail_at_y_n`` for cycles ``1..n``."""
    lines = ["n,x_n,y_n,G_tail_at_y_n"]
    for k in range(1, n + 1):
        lx, ly = law.log_breakpoints(k)
        _, right = law.log_tail_at_jump(k)
        xs = _fmt_exp(lx)
        ys = _fmt_exp(ly)
        lines.append(f"{k},{xs},{ys},{_fmt_exp(right)}")
    return "\n".join(lines) + "\n"


def _fmt_exp(l: float) -> str:
    if abs(l) <= 700:
        return f"{math.exp(l):.17g}"
    # beyond float range: mantissa/exponent from the log
    e10 = l / math.log(10.0)
    k = math.floor(e10)
    return f"{10 ** (e10 - k):.15g}e{k:+d}"


# ---------------------------------------------------------------------------
# parsing

FAMILIES = {
    "pareto": (pareto, {"alpha": None}),
    "lognormal": (lognormal, {"mu": 0.0, "sigma": 1.0}),
    "weibull": (weibull, {"k": None, "scale": 1.0}),
    "exponential": (lambda **kw: exponential(kw.get("lambda", 1.0)), {"lambda": 1.0}),
    "regvarying": (regvarying, {"alpha": None, "c": 1.0, "beta": None}),
    "pointmass": (pointmass, {"a": 0.0}),
    "counterexample": (counterexample, {"alpha": 1.0}),
}

_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def make_family(name: str, **params) -> Law:
    try:
        ctor, defaults = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"{name}: unknown parameter(s) {sorted(unknown)}")
    missing = [k for k, v in defaults.items() if v is None and k not in params
               and not (name == "regvarying" and k == "beta")]
    if missing:
        raise ValueError(f"{name}: missing parameter(s) {missing}")
    return ctor(**params)


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        depth += (ch == "(") - (ch == ")")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_family(text: str) -> Law:
    """``"pareto(alpha=1.5)"`` -> law.

    Weighted sums such as ``"0.5*pareto(alpha=1) + 0.5*lognormal()"`` give
    a :class:`~convtails.laws.Mixture`.
    """
    terms = _split_top(text, "+")
    if len(terms) > 1 or "*" in _split_top(text, "(")[0]:
        weights, laws = [], []
        for term in terms:
            w, _, body = term.strip().rpartition("*") if "*" in _split_top(term, "(")[0] else ("1", "", term)
            try:
                weights.append(float(w))
            except ValueError:
                raise ValueError(f"bad mixture weight {w!r} in {text!r}") from None
            laws.append(_parse_single(body))
        return Mixture(weights, laws)
    return _parse_single(text)


_SHIFT_RE = re.compile(r"^\s*shift\s*\((.*)\)\s*$")


def _parse_single(text: str) -> Law:
    sm = _SHIFT_RE.match(text)
    if sm:
        parts = _split_top(sm.group(1), ",")
        if len(parts) < 2:
            raise ValueError(f"shift needs a law and an offset: {text!r}")
        off = parts[-1].strip()
        if off.startswith("y="):
            off = off[2:]
        try:
            y = float(off)
        except ValueError:
            raise ValueError(f"bad shift offset {off!r} in {text!r}") from None
        return shift(parse_family(",".join(parts[:-1])), y)
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse family spec {text!r}")
    name, body = m.group(1), m.group(2)
    params = {}
    if body and body.strip():
        for item in body.split(","):
            if "=" not in item:
                raise ValueError(f"parameter {item.strip()!r} in {text!r} is not key=value")
            k, v = item.split("=", 1)
            try:
                params[k.strip()] = float(v)
            except ValueError:
                raise ValueError(f"parameter {k.strip()!r} in {text!r} is not a number") from None
    return make_family(name, **params)


def mixture_of(p: float, F: Law, q: float, G: Law) -> Law:
    return Mixture([p, q], [F, G])


# ---------------------------------------------------------------------------
# discretisation and sampling


@dataclass(frozen=True)
class Discretization:
    measure: LatticeMeasure
    right_residual: float
    warnings: tuple = field(default=())

    @property
    def total(self) -> float:
        return self.measure.mass + self.right_residual


def discretize(F: Law, window: tuple[float, float], step: float) -> Discretization:
    """Lattice on ``a, a+step, ..., b``.

    The atom at ``g`` carries ``F((g - step, g])``; everything at or below
    ``a`` is lumped at ``a``; the mass above ``b`` is returned separately so
    ``tail(lattice, g) + right_residual == F.sf(g)`` at every grid point.
    """
    a, b = map(float, window)
    if not a < b:
        raise ValueError(f"window must satisfy a < b, got {window}")
    if not step > 0:
        raise ValueError("step must be positive")
    notes = []
    count = (b - a) / step
    k = round(count)
    if abs(count - k) > 1e-9 * max(1.0, count):
        k = math.ceil(count)
        new_b = a + k * step
        notes.append(f"window end moved from {b:g} to {new_b:g} to fit step {step:g}")
        warnings.warn(notes[-1], stacklevel=2)
        b = new_b
    grid = a + step * np.arange(k + 1)
    tails = F.sf(grid)
    masses = np.empty(k + 1)
    masses[0] = F.mass - tails[0]
    masses[1:] = tails[:-1] - tails[1:]
    masses = np.clip(masses, 0.0, None)
    return Discretization(LatticeMeasure(a, step, masses), float(tails[-1]), tuple(notes))


def sample(F: Law, n: int, seed: int) -> np.ndarray:
    """``n`` variates from ``F``, reproducible from ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return F.sample(n, np.random.default_rng(seed))
