"""Ratio probes on geometric grids, trend extrapolation and verdicts.

Every asymptotic statement is checked through a :class:`RatioProbe`: a ratio
sampled at ``x = x0 * r**k``.  A trend ``L + c * (x / x_max)**(-beta)`` is
fitted on the top half of the grid and the verdict compares ``L`` with the
target.  The thresholds live in :class:`Thresholds` and are shared by all
testers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

X0 = 10.0
RATIO = math.sqrt(10.0)
TOP_QUADRATURE = 1e6
TOP_ANALYTIC = 1e8

_BETAS = np.geomspace(0.02, 4.0, 120)


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"
    PRECONDITION = "precondition-violated"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Thresholds:
    tol: float = 0.02        # |L - target| and band for a "holds"
    band: float = 0.02
    bound: float = 100.0     # weak equivalence: ratios must stay below this
    min_points: int = 5


DEFAULT_THRESHOLDS = Thresholds()


def geometric_grid(x0: float = X0, top: float = TOP_QUADRATURE, ratio: float = RATIO) -> np.ndarray:
    """``x0 * ratio**k`` for all ``k`` with the point not above ``top`` (up to rounding)."""
    if not (x0 > 0 and ratio > 1 and top >= x0):
        raise ValueError("need x0 > 0, ratio > 1 and top >= x0")
    k = int(math.floor(math.log(top / x0) / math.log(ratio) + 1e-9))
    return x0 * ratio ** np.arange(k + 1)


_TOP_OVERRIDE: list = []


def default_top(quadrature: bool) -> float:
    """Top of the default grid; quadrature-backed probes stop lower."""
    if _TOP_OVERRIDE:
        return _TOP_OVERRIDE[-1]
    return TOP_QUADRATURE if quadrature else TOP_ANALYTIC


@contextmanager
def grid_top(top: float | None):
    """Use ``top`` as the default grid top for every probe inside the block."""
    if top is None:
        yield
        return
    _TOP_OVERRIDE.append(float(top))
    try:
        yield
    finally:
        _TOP_OVERRIDE.pop()


def top_half(n: int) -> slice:
    return slice(n // 2, n)


@dataclass(frozen=True)
class Trend:
    limit: float
    band: float
    beta: float
    coef: float
    rms: float
    diverging: bool
    note: str = ""


def _fit(t: np.ndarray, y: np.ndarray):
    best = None
    for beta in _BETAS:
        A = np.column_stack([np.ones_like(t), t ** (-beta)])
        sol, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ sol
        ss = float(resid @ resid)
        if best is None or ss < best[0]:
            best = (ss, float(sol[0]), float(sol[1]), float(beta))
    ss, L, c, beta = best
    return L, c, beta, math.sqrt(ss / len(y))


def _diverging(y: np.ndarray) -> bool:
    if not np.all(np.isfinite(y)):
        return True
    d = np.diff(y)
    if len(d) < 2:
        return False
    same_sign = np.all(d > 0) or np.all(d < 0)
    # a convergent power trend has geometrically shrinking increments on a
    # geometric grid; increments that keep their size mean no finite limit
    a = np.abs(d)
    return bool(same_sign and np.all(a[1:] >= 0.9 * a[:-1]) and a[-1] > 1e-3)


def single_index_extrapolate(grid, ratios, min_points: int = 5) -> Trend:
    """Fit ``ratio ~ L + c * (x / x_max)**(-beta)`` on the top half of the grid."""
    x = np.asarray(grid, dtype=float)
    y = np.asarray(ratios, dtype=float)
    if len(x) < min_points:
        raise ValueError(f"need at least {min_points} grid points, got {len(x)}")
    sl = top_half(len(x))
    xs, ys = x[sl], y[sl]
    if _diverging(ys):
        return Trend(math.nan, math.inf, math.nan, math.nan, math.inf, True, "no finite limit")
    t = xs / xs[-1]
    if np.ptp(ys) == 0.0:
        return Trend(float(ys[-1]), 0.0, math.nan, 0.0, 0.0, False, "constant")
    L, c, beta, rms = _fit(t, ys)
    L_drop, *_ = _fit(t[1:], ys[1:]) if len(t) >= 4 else (L,)
    band = max(abs(L - L_drop), 3.0 * rms)
    note = "slow trend (beta at lower bound)" if beta <= _BETAS[0] else ""
    return Trend(L, band, beta, c, rms, False, note)


@dataclass
class RatioProbe:
    label: str
    grid: np.ndarray
    ratios: np.ndarray
    numerator: str = ""
    denominator: str = ""
    kind: str = "target"     # target | bounded | liminf | limsup
    target: float = 1.0
    trend: Trend | None = None
    verdict: Verdict = Verdict.INCONCLUSIVE
    flags: list = field(default_factory=list)
    note: str = ""

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.ratios = np.asarray(self.ratios, dtype=float)
        if self.grid.shape != self.ratios.shape:
            raise ValueError("grid and ratios differ in length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("probe grid must be strictly increasing")

    def tail_values(self) -> np.ndarray:
        return self.ratios[top_half(len(self.ratios))]

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "kind": self.kind,
            "target": self.target,
            "verdict": str(self.verdict),
            "trend": None if self.trend is None else {k: _jsonable(v) for k, v in asdict(self.trend).items()},
            "grid": [_jsonable(v) for v in self.grid],
            "ratios": [_jsonable(v) for v in self.ratios],
            "flags": list(self.flags),
            "note": self.note,
        }


def _jsonable(v):
    if isinstance(v, (bool, str)) or v is None:
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# ---------------------------------------------------------------------------
# deciding single probes


def decide_target(p: RatioProbe, th: Thresholds = DEFAULT_THRESHOLDS) -> RatioProbe:
    """Limit-equals-target probes.  Fails also when the trend has settled on a
    different value (tight band, distant limit)."""
    tr = single_index_extrapolate(p.grid, p.ratios, th.min_points)
    p.trend = tr
    if tr.diverging:
        p.verdict = Verdict.FAILS
        return p
    off = abs(tr.limit - p.target)
    dist = np.abs(p.tail_values() - p.target)
    moving_away = bool(np.all(np.diff(dist) > 0) and dist[-1] > th.tol)
    if off <= th.tol and tr.band <= th.band:
        p.verdict = Verdict.HOLDS
    elif moving_away or (tr.band <= th.band and off > th.tol):
        p.verdict = Verdict.FAILS
    else:
        p.verdict = Verdict.INCONCLUSIVE
    return p


def decide_bounded(p: RatioProbe, th: Thresholds = DEFAULT_THRESHOLDS) -> RatioProbe:
    y = p.ratios
    top = p.tail_values()
    grow = _diverging(top)
    p.trend = Trend(float(np.max(top)), 0.0, math.nan, math.nan, 0.0, grow, "sup over top half")
    if not np.all(np.isfinite(y)) or np.max(y) > th.bound or grow:
        p.verdict = Verdict.FAILS
    else:
        p.verdict = Verdict.HOLDS
    return p


def decide_liminf(p: RatioProbe, th: Thresholds = DEFAULT_THRESHOLDS) -> RatioProbe:
    """``liminf >= target``, read as the inf over the top half of the grid."""
    top = p.tail_values()
    lo = float(np.min(top))
    tr = single_index_extrapolate(p.grid, p.ratios, th.min_points)
    p.trend = Trend(lo, tr.band, tr.beta, tr.coef, tr.rms, tr.diverging, "inf over top half")
    if lo >= p.target - th.tol:
        p.verdict = Verdict.HOLDS
    elif (not tr.diverging and tr.limit + tr.band < p.target - th.tol) or (
            tr.diverging and np.all(np.diff(top) < 0)):
        p.verdict = Verdict.FAILS
    else:
        p.verdict = Verdict.INCONCLUSIVE
    return p


def decide(p: RatioProbe, th: Thresholds = DEFAULT_THRESHOLDS) -> RatioProbe:
    if p.kind == "target":
        return decide_target(p, th)
    if p.kind == "bounded":
        return decide_bounded(p, th)
    if p.kind == "liminf":
        return decide_liminf(p, th)
    raise ValueError(f"probe kind {p.kind!r} is decided by its caller")


def limsup_le(a: RatioProbe, b: RatioProbe, th: Thresholds = DEFAULT_THRESHOLDS) -> Verdict:
    """Grid proxy for ``limsup a <= limsup b``: sups over the top halves."""
    sa, sb = float(np.max(a.tail_values())), float(np.max(b.tail_values()))
    for p, s in ((a, sa), (b, sb)):
        p.trend = Trend(s, 0.0, math.nan, math.nan, 0.0, _diverging(p.tail_values()), "sup over top half")
        p.kind = "limsup"
    if not (math.isfinite(sa) and math.isfinite(sb)):
        return Verdict.INCONCLUSIVE
    if sa <= sb + th.tol:
        return Verdict.HOLDS
    return Verdict.FAILS


def combine(verdicts) -> Verdict:
    """All-of: any precondition or failure dominates, then inconclusive."""
    vs = [Verdict(v) for v in verdicts]
    if Verdict.PRECONDITION in vs:
        return Verdict.PRECONDITION
    if Verdict.FAILS in vs:
        return Verdict.FAILS
    if Verdict.INCONCLUSIVE in vs or not vs:
        return Verdict.INCONCLUSIVE
    return Verdict.HOLDS


# ---------------------------------------------------------------------------
# reports


@dataclass
class VerdictReport:
    subject: str
    verdict: Verdict
    probes: list = field(default_factory=list)
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    notes: list = field(default_factory=list)
    children: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.HOLDS

    def probe(self, label: str) -> RatioProbe:
        for p in self.probes:
            if p.label == label:
                return p
        for c in self.children:
            try:
                return c.probe(label)
            except KeyError:
                pass
        raise KeyError(label)

    def as_dict(self) -> dict:
        return {
            "subject": self.subject,
            "verdict": str(self.verdict),
            "thresholds": asdict(self.thresholds),
            "notes": list(self.notes),
            "details": {k: _jsonable(v) if isinstance(v, (int, float)) else v
                        for k, v in self.details.items()},
            "probes": [p.as_dict() for p in self.probes],
            "children": [c.as_dict() for c in self.children],
        }

    def to_json(self, header: dict | None = None) -> str:
        body = self.as_dict()
        if header is not None:
            body = {"config": header, **body}
        return json.dumps(body, indent=2, sort_keys=False) + "\n"

    def iter_probes(self, prefix: str = ""):
        for p in self.probes:
            yield prefix + p.label, p
        for c in self.children:
            yield from c.iter_probes(prefix + c.subject + "/")

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["probe", "x", "ratio", "target", "verdict"])
        for name, p in self.iter_probes():
            for x, r in zip(p.grid, p.ratios):
                w.writerow([name, repr(float(x)), repr(float(r)), p.target, str(p.verdict)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.subject}: {self.verdict}"]
        for name, p in self.iter_probes():
            tr = p.trend
            lim = "" if tr is None else f" L={tr.limit:.6g} band={tr.band:.3g}"
            lines.append(f"  {name}: {p.verdict}{lim}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)
