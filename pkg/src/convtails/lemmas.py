"""Numerical exhibits of the restriction lemmas.

``lemma_probe(id, inputs, h)`` checks the lemma's hypotheses with the
testers, then samples its conclusion as ratio probes.  A failed hypothesis
gives a ``precondition-violated`` verdict rather than an exception.

Ids: ``h1``, ``h2``, ``h3``, ``h3plus``, ``s1``, ``eq14``.
"""

from __future__ import annotations

import math

import numpy as np

from . import convolution as cv
from .families import parse_family
from .hfunc import HFunction, NamedH, construct_h, h_name, parse_h
from .laws import Law, Mixture
from .probes import (DEFAULT_THRESHOLDS, X0, RatioProbe, Thresholds, Verdict, VerdictReport,
                     combine, decide, default_top, geometric_grid, limsup_le)
from .testers import check_h_insensitive, test_long_tailed, test_subexponential

LEMMA_IDS = ("h1", "h2", "h3", "h3plus", "s1", "eq14")


# ---------------------------------------------------------------------------
# shared helpers for the lemma and theorem harnesses


def law_of(value) -> Law:
    if isinstance(value, str):
        return parse_family(value)
    if isinstance(value, Law):
        return value
    raise TypeError(f"expected a law or a family spec, got {value!r}")


def pick(inputs: dict, key: str, default):
    return law_of(inputs.get(key, default))


def h_of(spec, laws, cap: bool = False):
    """``spec`` is an h object, a string understood by :func:`parse_h`, or
    None (construct from ``laws``)."""
    if spec is None or (isinstance(spec, str) and spec == "auto"):
        h = construct_h(*laws)
        return h.capped() if cap else h
    if isinstance(spec, str):
        h = parse_h(spec, laws)
    else:
        h = spec
    if cap and isinstance(h, HFunction):
        return h.capped()
    if cap:
        inner = h
        return NamedH(lambda x: np.minimum(inner(x), np.asarray(x, dtype=float) / 2.0),
                      f"min({h_name(inner)}, x/2)")
    return h


def quad_grid(grid=None) -> np.ndarray:
    return geometric_grid(X0, default_top(True)) if grid is None else np.asarray(grid, dtype=float)


def values_probe(label, grid, num, den, num_label, den_label, target=1.0, kind="target") -> RatioProbe:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    return RatioProbe(label, grid, r, num_label, den_label, kind=kind, target=target)


def hypotheses(*reports) -> tuple[Verdict | None, list]:
    """PRECONDITION when a hypothesis check fails; inconclusive hypothesis
    checks are passed through as notes."""
    notes = []
    for r in reports:
        if r.verdict in (Verdict.FAILS, Verdict.PRECONDITION):
            return Verdict.PRECONDITION, [f"hypothesis {r.subject}: {r.verdict}"]
        if r.verdict == Verdict.INCONCLUSIVE:
            notes.append(f"hypothesis {r.subject} inconclusive on the probed grid")
    return None, notes


def bounded_report(subject, grid, num, den, th) -> VerdictReport:
    """``num / den`` bounded (an O(.) hypothesis)."""
    p = decide(values_probe("ratio", grid, num, den, "num", "den", kind="bounded"), th)
    return VerdictReport(subject, p.verdict, [p], thresholds=th)


def limit_report(subject, grid, num, den, target, th) -> VerdictReport:
    p = decide(values_probe("ratio", grid, num, den, "num", "den", target=target), th)
    return VerdictReport(subject, p.verdict, [p], thresholds=th)


def _precondition(subject, reports, notes, th, details=None) -> VerdictReport:
    return VerdictReport(subject, Verdict.PRECONDITION, notes=notes, children=list(reports),
                         thresholds=th, details=details or {})


# ---------------------------------------------------------------------------
# lemmas


def _h1(inputs, h, grid, th):
    F = pick(inputs, "F", "exponential(lambda=1)")
    G = pick(inputs, "G", "pareto(alpha=1)")
    h = h_of(h, [G])
    hyp = [test_long_tailed(G, th=th), check_h_insensitive(G, h, th=th)]
    bad, notes = hypotheses(*hyp)
    if bad:
        return _precondition("lemma h1", hyp, notes, th)
    num = [cv.conv_tail_le_h(F, G, h, x) for x in grid]
    den = F.mass * G.sf(grid)
    p = decide(values_probe("le_h", grid, num, den, "tail(F_{<=h}*G)(x)", "|F| tail_G(x)"), th)
    return VerdictReport("lemma h1", p.verdict, [p], thresholds=th, notes=notes, children=hyp,
                         details={"F": F.spec(), "G": G.spec(), "h": h_name(h)})


def _h2(inputs, h, grid, th):
    F = pick(inputs, "F", "pareto(alpha=1)")
    G = pick(inputs, "G", "exponential(lambda=1)")
    M = Mixture([F.mass, G.mass], [G, F])
    h = h_of(h, [M])
    hyp = [test_long_tailed(M, th=th), check_h_insensitive(M, h, th=th)]
    bad, notes = hypotheses(*hyp)
    if bad:
        return _precondition("lemma h2", hyp, notes, th)
    num = [cv.conv_tail_le_h(F, G, h, x) + cv.conv_tail_le_h(G, F, h, x) for x in grid]
    den = F.mass * G.sf(grid) + G.mass * F.sf(grid)
    p = decide(values_probe("le_h_sum", grid, num, den,
                            "tail(F_{<=h}*G)+tail(F*G_{<=h})", "|F|tail_G+|G|tail_F"), th)
    return VerdictReport("lemma h2", p.verdict, [p], thresholds=th, notes=notes, children=hyp,
                         details={"F": F.spec(), "G": G.spec(), "h": h_name(h)})


def _h_grows(h, grid) -> bool:
    hv = np.asarray(h(grid), dtype=float)
    return bool(hv[-1] > hv[len(grid) // 2] and hv[-1] > 0)


def _h3(inputs, h, grid, th):
    F1 = pick(inputs, "F1", "regvarying(alpha=1, c=2)")
    F2 = pick(inputs, "F2", "pareto(alpha=1)")
    G = pick(inputs, "G", "exponential(lambda=1)")
    h = h_of(h if h is not None else "sqrt", [F1, F2, G])
    if not _h_grows(h, grid):
        return _precondition("lemma h3", [], ["h does not grow on the probed grid"], th)
    lhs = values_probe("restricted", grid,
                       [cv.conv_tail_gt_h(F1, G, h, x) for x in grid],
                       [cv.conv_tail_gt_h(F2, G, h, x) for x in grid],
                       "tail((F1)_{>h}*G)", "tail((F2)_{>h}*G)")
    rhs = values_probe("plain", grid, F1.sf(grid), F2.sf(grid), "tail_F1", "tail_F2")
    v = limsup_le(lhs, rhs, _scaled(th, rhs))
    lhs.verdict = rhs.verdict = v
    return VerdictReport("lemma h3", v, [lhs, rhs], thresholds=th,
                         notes=["limsup read as the sup over the top half of the grid"],
                         details={"F1": F1.spec(), "F2": F2.spec(), "G": G.spec(), "h": h_name(h)})


def _scaled(th: Thresholds, ref: RatioProbe) -> Thresholds:
    """Absolute tolerance relative to the size of the compared limit."""
    s = max(1.0, float(np.max(np.abs(ref.tail_values()))))
    return Thresholds(th.tol * s, th.band * s, th.bound, th.min_points)


def _h3plus(inputs, h, grid, th):
    F1 = pick(inputs, "F1", "regvarying(alpha=1, c=2)")
    F2 = pick(inputs, "F2", "pareto(alpha=1)")
    G1 = pick(inputs, "G1", "regvarying(alpha=1, c=3)")
    G2 = pick(inputs, "G2", "pareto(alpha=1)")
    h = h_of(h if h is not None else "sqrt", [F1, F2, G1, G2])
    if not _h_grows(h, grid):
        return _precondition("lemma h3plus", [], ["h does not grow on the probed grid"], th)
    lhs = values_probe("restricted", grid,
                       [cv.conv_tail_gt_gt(F1, G1, h, x) for x in grid],
                       [cv.conv_tail_gt_gt(F2, G2, h, x) for x in grid],
                       "tail((F1)_{>h}*(G1)_{>h})", "tail((F2)_{>h}*(G2)_{>h})")
    rf = F1.sf(grid) / F2.sf(grid)
    rg = G1.sf(grid) / G2.sf(grid)
    top = slice(len(grid) // 2, len(grid))
    bound = float(np.max(rf[top]) * np.max(rg[top]))
    rhs = RatioProbe("plain-product", grid, rf * rg, "tail_F1*tail_G1", "tail_F2*tail_G2",
                     kind="limsup")
    # the right side is a product of two separate limsups
    rhs_sup = RatioProbe("plain-product", grid, np.full(len(grid), bound), "limsup F1/F2 * limsup G1/G2",
                         "", kind="limsup")
    v = limsup_le(lhs, rhs_sup, _scaled(th, rhs_sup))
    lhs.verdict = rhs.verdict = v
    return VerdictReport("lemma h3plus", v, [lhs, rhs], thresholds=th,
                         notes=["limsup read as the sup over the top half of the grid"],
                         details={"F1": F1.spec(), "F2": F2.spec(), "G1": G1.spec(),
                                  "G2": G2.spec(), "h": h_name(h), "bound": bound})


def _s1(inputs, h, grid, th):
    F = pick(inputs, "F", "pareto(alpha=1)")
    G1 = pick(inputs, "G1", "regvarying(alpha=1, c=2)")
    G2 = pick(inputs, "G2", "lognormal(mu=0, sigma=1)")
    h = h_of(h if h is not None else "sqrt", [F, G1, G2])
    Fs = F.sf(grid)
    hyp = [test_subexponential(F, th=th),
           bounded_report("O(G1/F)", grid, G1.sf(grid), Fs, th),
           bounded_report("O(G2/F)", grid, G2.sf(grid), Fs, th)]
    bad, notes = hypotheses(*hyp)
    if not _h_grows(h, grid):
        bad, notes = Verdict.PRECONDITION, notes + ["h does not grow on the probed grid"]
    if bad:
        return _precondition("lemma s1", hyp, notes, th)
    num = [cv.conv_tail_gt_gt(G1, G2, h, x) for x in grid]
    p = decide(values_probe("gt_gt", grid, num, Fs, "tail((G1)_{>h}*(G2)_{>h})", "tail_F",
                            target=0.0), th)
    return VerdictReport("lemma s1", p.verdict, [p], thresholds=th, notes=notes, children=hyp,
                         details={"F": F.spec(), "G1": G1.spec(), "G2": G2.spec(), "h": h_name(h)})


EQ14_H = ("cbrt", "sqrt", "quarter")


def _eq14(inputs, h, grid, th):
    """(i) subexponential, (ii) gt_gt = o(tail) for several h, (iii) the same
    for an h the law is insensitive to.  Holds when the three agree."""
    F = pick(inputs, "F", "pareto(alpha=1)")
    lt = test_long_tailed(F, th=th)
    bad, notes = hypotheses(lt)
    if bad:
        return _precondition("lemma eq14", [lt], notes, th)
    hs = [parse_h(s) for s in inputs.get("h_set", EQ14_H)]
    h_ins = h_of(h, [F])
    Fs = F.sf(grid)

    def gt_gt_probe(hh, label):
        num = [cv.conv_tail_gt_gt(F, F, hh, x) for x in grid]
        return decide(values_probe(label, grid, num, Fs, "tail(F_{>h}*F_{>h})", "tail_F",
                                   target=0.0), th)

    r1 = test_subexponential(F, th=th)
    r1.subject = "(i) subexponential"
    p2 = [gt_gt_probe(hh, f"gt_gt[{h_name(hh)}]") for hh in hs]
    r2 = VerdictReport("(ii) every h", combine(p.verdict for p in p2), p2, thresholds=th)
    hyp3 = check_h_insensitive(F, h_ins, th=th)
    p3 = gt_gt_probe(h_ins, f"gt_gt[{h_name(h_ins)}]")
    r3 = VerdictReport("(iii) insensitive h", combine([hyp3.verdict, p3.verdict]), [p3],
                       children=[hyp3], thresholds=th)
    vs = [r1.verdict, r2.verdict, r3.verdict]
    if Verdict.INCONCLUSIVE in vs or Verdict.PRECONDITION in vs:
        v = Verdict.INCONCLUSIVE
    elif len(set(vs)) == 1:
        v = Verdict.HOLDS
    else:
        v = Verdict.FAILS
    return VerdictReport("lemma eq14", v, thresholds=th, children=[r1, r2, r3],
                         notes=notes + ["holds means (i), (ii), (iii) reach the same verdict"],
                         details={"F": F.spec(), "agree": len(set(vs)) == 1,
                                  "sub_verdicts": [str(x) for x in vs]})


_LEMMAS = {"h1": _h1, "h2": _h2, "h3": _h3, "h3plus": _h3plus, "s1": _s1, "eq14": _eq14}


def lemma_probe(lemma_id: str, inputs: dict | None = None, h=None, grid=None,
                th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """Check a lemma's conclusion on concrete inputs.

    ``inputs`` maps role names (``F``, ``G``, ``F1``, ...) to laws or family
    strings; missing roles use the default instance.  ``h`` is an h object or
    spec string; None picks the lemma's default.
    """
    try:
        fn = _LEMMAS[lemma_id]
    except KeyError:
        raise KeyError(f"unknown lemma id {lemma_id!r}; valid ids: {', '.join(LEMMA_IDS)}") from None
    rep = fn(dict(inputs or {}), h, quad_grid(grid), th)
    rep.details.setdefault("id", lemma_id)
    return rep
