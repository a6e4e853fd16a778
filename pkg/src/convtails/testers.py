"""Numerical membership tests: long tails, subexponentiality, tail equivalence
and h-insensitivity.  Each returns a :class:`~convtails.probes.VerdictReport`."""

from __future__ import annotations

import math

import numpy as np

from .convolution import Convolved, log_conv_tail
from .hfunc import HFunction, h_name
from .probes import (DEFAULT_THRESHOLDS, X0, RatioProbe, Thresholds, Verdict, VerdictReport,
                     combine, decide, default_top, geometric_grid)
from .quadrature import QuadratureError

LAGS = (1.0, 2.0, 5.0)


def needs_quadrature(F) -> bool:
    """True when evaluating the tail of ``F`` runs a convolution integral."""
    if isinstance(F, Convolved):
        return True
    for attr in ("laws", "F"):
        sub = getattr(F, attr, None)
        if sub is None:
            continue
        subs = sub if isinstance(sub, (list, tuple)) else [sub]
        if any(needs_quadrature(G) for G in subs if hasattr(G, "logsf")):
            return True
    return False


def default_grid(*laws, top: float | None = None, x0: float = X0) -> np.ndarray:
    if top is None:
        top = default_top(any(needs_quadrature(F) for F in laws))
    return geometric_grid(x0, top)


def _log_ratio_probe(label, grid, num, den, num_label, den_label, target=1.0, kind="target"):
    with np.errstate(invalid="ignore", over="ignore"):
        r = np.exp(np.asarray(num, dtype=float) - np.asarray(den, dtype=float))
    return RatioProbe(label, grid, r, num_label, den_label, kind=kind, target=target)


def _positive_on(F, grid, name: str):
    ls = F.logsf(grid)
    if not np.all(np.isfinite(ls)):
        bad = grid[~np.isfinite(ls)][0]
        return f"tail of {name} vanishes at x={bad:g}"
    return None


def jump_probe(F, x0: float = X0) -> RatioProbe | None:
    """Ratio ``tail(y) / tail(y-)`` at each atom ``y > x0``.

    A long tail forces this to 1.  The abscissa is ``2**k`` for the k-th atom,
    which only serves as an evenly spaced index for the trend fit.
    """
    loc, m = F.atoms(x0, math.inf)
    keep = m > 0
    loc, m = loc[keep], m[keep]
    if len(loc) < DEFAULT_THRESHOLDS.min_points:
        return None
    order = np.argsort(loc)
    loc, m = loc[order], m[order]
    right = F.sf(loc)
    ratio = right / (right + m)
    idx = 2.0 ** np.arange(1, len(loc) + 1)
    p = RatioProbe("jump", idx, ratio, "tail(y)", "tail(y-)", target=1.0)
    p.note = "atoms at " + ", ".join(f"{v:.6g}" for v in loc)
    return p


def test_long_tailed(F, lags=LAGS, grid=None, th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """``tail(x + a) / tail(x) -> 1`` for each lag, plus a probe across atoms."""
    grid = default_grid(F) if grid is None else np.asarray(grid, dtype=float)
    name = F.spec()
    bad = _positive_on(F, grid[-1:] + max(lags), name)
    if bad:
        return VerdictReport(f"longtail[{name}]", Verdict.PRECONDITION, notes=[bad], thresholds=th)
    base = F.logsf(grid)
    probes = []
    for a in lags:
        p = _log_ratio_probe(f"lag{a:g}", grid, F.logsf(grid + a), base,
                             f"tail(x+{a:g})", "tail(x)")
        probes.append(decide(p, th))
    jp = jump_probe(F)
    if jp is not None:
        probes.append(decide(jp, th))
    return VerdictReport(f"longtail[{name}]", combine(p.verdict for p in probes), probes,
                         thresholds=th)


def test_tail_equivalence(F1, F2, grid=None, th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    grid = default_grid(F1, F2) if grid is None else np.asarray(grid, dtype=float)
    subject = f"tail-equiv[{F1.spec()} ~ {F2.spec()}]"
    p = _log_ratio_probe("ratio", grid, F1.logsf(grid), F2.logsf(grid), "tail1(x)", "tail2(x)")
    decide(p, th)
    return VerdictReport(subject, p.verdict, [p], thresholds=th)


def test_weak_tail_equivalence(F1, F2, grid=None, th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """Both ``tail1/tail2`` and ``tail2/tail1`` stay below ``th.bound``."""
    grid = default_grid(F1, F2) if grid is None else np.asarray(grid, dtype=float)
    subject = f"weak-equiv[{F1.spec()} ~ {F2.spec()}]"
    l1, l2 = F1.logsf(grid), F2.logsf(grid)
    p = decide(_log_ratio_probe("ratio", grid, l1, l2, "tail1(x)", "tail2(x)", kind="bounded"), th)
    q = decide(_log_ratio_probe("inverse", grid, l2, l1, "tail2(x)", "tail1(x)", kind="bounded"), th)
    return VerdictReport(subject, combine([p.verdict, q.verdict]), [p, q], thresholds=th)


def conv_ratio_probe(F, G, grid, label="conv", den=None, den_label="tail_F(x)+tail_G(x)",
                     target=1.0, kind="target") -> RatioProbe:
    """``tail(F*G, x) / den(x)`` where ``den`` returns log values (default
    ``log(mass_G tail_F + mass_F tail_G)``)."""
    num = np.array([log_conv_tail(F, G, x)[0] for x in grid])
    if den is None:
        lf, lg = F.logsf(grid), G.logsf(grid)
        with np.errstate(divide="ignore"):
            d = np.logaddexp(lf + math.log(G.mass), lg + math.log(F.mass))
    else:
        d = den(grid)
    return _log_ratio_probe(label, grid, num, d, "tail(F*G)(x)", den_label, target, kind)


def test_subexponential(F, grid=None, lag_grid=None, th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """Long-tailed and ``tail(F*F) / (2 |F| tail_F) -> 1``."""
    name = F.spec()
    grid = geometric_grid(X0, default_top(True)) if grid is None else np.asarray(grid, dtype=float)
    lt = test_long_tailed(F, grid=lag_grid, th=th)
    bad = _positive_on(F, grid, name)
    if bad:
        return VerdictReport(f"subexp[{name}]", Verdict.PRECONDITION, notes=[bad], children=[lt],
                             thresholds=th)
    try:
        p = conv_ratio_probe(F, F, grid, "self-conv",
                             den=lambda x: math.log(2.0 * F.mass) + F.logsf(x),
                             den_label="2|F| tail_F(x)")
    except QuadratureError as exc:
        return VerdictReport(f"subexp[{name}]", Verdict.INCONCLUSIVE, notes=[str(exc)],
                             children=[lt], thresholds=th)
    decide(p, th)
    return VerdictReport(f"subexp[{name}]", combine([lt.verdict, p.verdict]), [p],
                         children=[lt], thresholds=th)


def check_h_insensitive(F, h, grid=None, th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """``tail(x - h(x)) / tail(x)`` and ``tail(x + h(x)) / tail(x)`` both tend to 1."""
    if grid is None:
        top = default_top(needs_quadrature(F))
        if isinstance(h, HFunction) and math.isfinite(h.horizon):
            top = min(top, h.horizon)
        grid = geometric_grid(X0, top)
    grid = np.asarray(grid, dtype=float)
    subject = f"h-insensitive[{F.spec()}, {h_name(h)}]"
    hv = np.asarray(h(grid), dtype=float)
    notes = []
    if isinstance(h, HFunction) and h.note:
        notes.append(h.note)
    mid = len(grid) // 2
    if not hv[-1] > hv[mid]:
        # a bounded h reduces the check to long-tailedness at that lag
        notes.append("h does not grow over the probed range; the ratios test a fixed lag only")
    base = F.logsf(grid)
    lo = decide(_log_ratio_probe("minus", grid, F.logsf(grid - hv), base,
                                 "tail(x-h(x))", "tail(x)"), th)
    hi = decide(_log_ratio_probe("plus", grid, F.logsf(grid + hv), base,
                                 "tail(x+h(x))", "tail(x)"), th)
    return VerdictReport(subject, combine([lo.verdict, hi.verdict]), [lo, hi], notes=notes,
                         thresholds=th, details={"h_top": float(hv[-1])})


# these are library functions, not pytest tests
for _f in (test_long_tailed, test_tail_equivalence, test_weak_tail_equivalence, test_subexponential):
    _f.__test__ = False
