"""Numerical exhibits of the convolution theorems and corollaries.

``verify_theorem(id, config)`` runs the hypothesis checks for ``id`` and then
probes its conclusion on the configured laws.  Every id has a documented
default instance (see ``THEOREMS``); config entries override roles by name.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import convolution as cv
from .hfunc import h_name
from .laws import Mixture
from .lemmas import bounded_report, h_of, hypotheses, law_of, quad_grid, values_probe
from .probes import (DEFAULT_THRESHOLDS, Thresholds, Verdict, VerdictReport, combine, decide)
from .testers import (check_h_insensitive, conv_ratio_probe, test_long_tailed,
                      test_subexponential, test_tail_equivalence, test_weak_tail_equivalence)


@dataclass(frozen=True)
class TheoremSpec:
    func: object
    summary: str
    defaults: dict


def _laws(cfg, *keys):
    return [law_of(cfg[k]) for k in keys]


def _sum_measure(*laws):
    """The measure ``F + G + ...`` (unit weights, not normalised)."""
    return Mixture([1.0] * len(laws), list(laws))


def _report(subject, probes, hyp, notes, th, cfg, children=()):
    verdict = combine([p.verdict for p in probes] + [c.verdict for c in children])
    return VerdictReport(subject, verdict, list(probes), thresholds=th, notes=notes,
                         children=list(hyp) + list(children),
                         details={k: v if isinstance(v, (int, float)) else str(v)
                                  for k, v in cfg.items()})


def _guard(subject, hyp, th, cfg):
    bad, notes = hypotheses(*hyp)
    if bad:
        return VerdictReport(subject, Verdict.PRECONDITION, notes=notes, children=list(hyp),
                             thresholds=th, details={k: str(v) for k, v in cfg.items()}), notes
    return None, notes


# ---------------------------------------------------------------------------


def _long_add_5(cfg, grid, th):
    F1, F2, G = _laws(cfg, "F1", "F2", "G")
    hyp = [test_tail_equivalence(F1, F2, th=th), test_long_tailed(G, th=th)]
    stop, notes = _guard("long.add.5", hyp, th, cfg)
    if stop:
        return stop
    num = [cv.conv_tail(F1, G, x) for x in grid]
    den = [cv.conv_tail(F2, G, x) for x in grid]
    p = decide(values_probe("shifted-ratio", grid, num, den, "tail(F1*G)", "tail(F2*G)"), th)
    return _report("long.add.5", [p], hyp, notes, th, cfg)


def _long_add_5_plus(cfg, grid, th):
    F1, F2, G1, G2 = _laws(cfg, "F1", "F2", "G1", "G2")
    hyp = [test_tail_equivalence(F1, F2, th=th), test_tail_equivalence(G1, G2, th=th),
           test_long_tailed(_sum_measure(F1, G1), th=th)]
    stop, notes = _guard("long.add.5.plus", hyp, th, cfg)
    if stop:
        return stop
    num = [cv.conv_tail(F1, G1, x) for x in grid]
    den = [cv.conv_tail(F2, G2, x) for x in grid]
    p = decide(values_probe("pair-ratio", grid, num, den, "tail(F1*G1)", "tail(F2*G2)"), th)
    return _report("long.add.5.plus", [p], hyp, notes, th, cfg)


def _cor_l2(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    hyp = [test_long_tailed(F, th=th), test_long_tailed(G, th=th)]
    stop, notes = _guard("cor.l2", hyp, th, cfg)
    if stop:
        return stop
    conclusion = test_long_tailed(cv.Convolved([F, G]), grid=grid, th=th)
    return _report("cor.l2", [], hyp, notes, th, cfg, [conclusion])


def _cor_l1(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    hyp = [test_long_tailed(F, th=th), test_long_tailed(_sum_measure(F, G), th=th)]
    stop, notes = _guard("cor.l1", hyp, th, cfg)
    if stop:
        return stop
    conclusion = test_long_tailed(cv.Convolved([F, G]), grid=grid, th=th)
    return _report("cor.l1", [], hyp, notes, th, cfg, [conclusion])


def _nfold_laws(cfg):
    n = int(cfg.get("n", 2))
    laws = [law_of(s) for s in cfg["laws"]]
    if len(laws) < n:
        raise ValueError(f"need {n} laws, configured {len(laws)}")
    return n, laws[:n]


def _lower_bound(cfg, grid, th):
    n, laws = _nfold_laws(cfg)
    hyp = [test_long_tailed(F, th=th) for F in laws]
    subject = f"lower.bound[n={n}]"
    stop, notes = _guard(subject, hyp, th, cfg)
    if stop:
        return stop
    C = cv.Convolved(laws)
    num = C.sf(grid)
    den = sum(F.sf(grid) for F in laws)
    p = decide(values_probe("lower-bound", grid, num, den, "tail(F1*...*Fn)", "sum tail_Fk",
                            target=1.0, kind="liminf"), th)
    return _report(subject, [p], hyp, notes + ["liminf read as the inf over the top half"],
                   th, cfg)


def _nfold_liminf(cfg, grid, th):
    F = law_of(cfg["F"])
    n = int(cfg.get("n", 2))
    hyp = [test_long_tailed(F, th=th)]
    subject = f"nfold.liminf[n={n}]"
    stop, notes = _guard(subject, hyp, th, cfg)
    if stop:
        return stop
    C = cv.conv_power(F, n)
    p = decide(values_probe("n-fold", grid, C.sf(grid), F.sf(grid), f"tail(F^{n}*)", "tail_F",
                            target=float(n), kind="liminf"), th)
    return _report(subject, [p], hyp, notes + ["liminf read as the inf over the top half"],
                   th, cfg)


def _light_shift(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    h = h_of(cfg.get("h", "sqrt"), [F])
    hv = np.asarray(h(grid), dtype=float)
    hyp = [test_long_tailed(F, th=th), check_h_insensitive(F, h, th=th)]
    small = decide(values_probe("G(h)/F", grid, G.sf(hv), F.sf(grid), "tail_G(h(x))", "tail_F(x)",
                                target=0.0), th)
    hyp.append(VerdictReport("tail_G(h) = o(tail_F)", small.verdict, [small], thresholds=th))
    stop, notes = _guard("light.shift", hyp, th, cfg)
    if stop:
        return stop
    p = decide(conv_ratio_probe(F, G, grid, "shift-ratio", den=lambda x: F.logsf(x),
                                den_label="tail_F(x)"), th)
    return _report("light.shift", [p], hyp, notes + [f"h = {h_name(h)}"], th, cfg)


def _s1_hyp(F, Gs, grid, th):
    Fs = F.sf(grid)
    hyp = [test_subexponential(F, th=th)]
    for i, G in enumerate(Gs, 1):
        hyp.append(test_long_tailed(_sum_measure(F, G), th=th))
        hyp.append(bounded_report(f"O(G{i}/F)", grid, G.sf(grid), Fs, th))
    return hyp


def _g_list(cfg):
    n = int(cfg.get("n", len(cfg["G"])))
    Gs = [law_of(s) for s in cfg["G"]]
    if len(Gs) < n:
        raise ValueError(f"need {n} laws G, configured {len(Gs)}")
    return n, Gs[:n]


def _thm_s1(cfg, grid, th):
    F = law_of(cfg["F"])
    n, Gs = _g_list(cfg)
    subject = f"thm.s1[n={n}]"
    hyp = _s1_hyp(F, Gs, grid, th)
    stop, notes = _guard(subject, hyp, th, cfg)
    if stop:
        return stop
    C = cv.Convolved(Gs)
    num = C.sf(grid) - sum(G.sf(grid) for G in Gs)
    p = decide(values_probe("excess", grid, num, F.sf(grid), "tail(G1*...*Gn) - sum tail_Gi",
                            "tail_F", target=0.0), th)
    return _report(subject, [p], hyp, notes, th, cfg)


def _thm_s2(cfg, grid, th):
    F = law_of(cfg["F"])
    n, Gs = _g_list(cfg)
    subject = f"thm.s2[n={n}]"
    hyp = _s1_hyp(F, Gs, grid, th)
    hyp += [test_long_tailed(Gs[0], th=th), test_weak_tail_equivalence(Gs[0], F, th=th)]
    stop, notes = _guard(subject, hyp, th, cfg)
    if stop:
        return stop
    C = cv.Convolved(Gs)
    sub = test_subexponential(C, th=th)
    weak = test_weak_tail_equivalence(C, F, grid=grid, th=th)
    return _report(subject, [], hyp, notes, th, cfg, [sub, weak])


def _cor_s0(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    hyp = [test_subexponential(F, th=th), test_long_tailed(G, th=th),
           test_weak_tail_equivalence(F, G, th=th)]
    stop, notes = _guard("cor.s0", hyp, th, cfg)
    if stop:
        return stop
    return _report("cor.s0", [], hyp, notes, th, cfg, [test_subexponential(G, th=th)])


def _cor_14(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    hyp = _s1_hyp(F, [G], grid, th)
    stop, notes = _guard("cor.14", hyp, th, cfg)
    if stop:
        return stop
    C = cv.Convolved([F, G])
    num = C.sf(grid) - F.sf(grid) - G.sf(grid)
    p = decide(values_probe("excess", grid, num, F.sf(grid), "tail(F*G) - tail_F - tail_G",
                            "tail_F", target=0.0), th)
    sub = test_subexponential(C, th=th)
    return _report("cor.14", [p], hyp, notes, th, cfg, [sub])


def _cor_15(cfg, grid, th):
    F = law_of(cfg["F"])
    n, Gs = _g_list(cfg)
    cs = [float(c) for c in cfg["c"]][:n]
    Fs = F.sf(grid)
    hyp = [test_subexponential(F, th=th)]
    for i, (G, c) in enumerate(zip(Gs, cs), 1):
        p = decide(values_probe(f"G{i}/F", grid, G.sf(grid), Fs, f"tail_G{i}", "tail_F",
                                target=c), th)
        hyp.append(VerdictReport(f"tail_G{i}/tail_F -> {c:g}", p.verdict, [p], thresholds=th))
    subject = f"cor.15[n={n}]"
    stop, notes = _guard(subject, hyp, th, cfg)
    if stop:
        return stop
    C = cv.Convolved(Gs)
    total = sum(cs)
    p = decide(values_probe("sum-limit", grid, C.sf(grid), Fs, "tail(G1*...*Gn)", "tail_F",
                            target=total), th)
    children = [test_subexponential(C, th=th)] if total > 0 else []
    return _report(subject, [p], hyp, notes, th, cfg, children)


def _closure_S(cfg, grid, th):
    F, G = _laws(cfg, "F", "G")
    p = float(cfg.get("p", 0.5))
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    hyp = [test_subexponential(F, th=th), test_subexponential(G, th=th)]
    stop, notes = _guard("closure.S", hyp, th, cfg)
    if stop:
        return stop
    h = h_of(cfg.get("h"), [F, G], cap=True)
    hyp.append(check_h_insensitive(F, h, th=th))
    hyp.append(check_h_insensitive(G, h, th=th))
    stop, more = _guard("closure.S", hyp[2:], th, cfg)
    if stop:
        return stop
    notes += more
    C = cv.Convolved([F, G])
    den = F.sf(grid) + G.sf(grid)
    p1 = decide(values_probe("(i)", grid, C.sf(grid), den, "tail(F*G)", "tail_F+tail_G"), th)
    r1 = VerdictReport("(i) tail(F*G) ~ tail_F + tail_G", p1.verdict, [p1], thresholds=th)
    r2 = test_subexponential(C, th=th)
    r2.subject = "(ii) F*G subexponential"
    ps = [p] + [q for q in cfg.get("spot_p", ()) if float(q) != p]
    r3s = []
    for q in ps:
        r = test_subexponential(Mixture([q, 1.0 - q], [F, G]), th=th)
        r.subject = f"(iii) mixture p={float(q):g} subexponential"
        r3s.append(r)
    gg = [cv.conv_tail_gt_gt(F, G, h, x) for x in grid]
    p4 = decide(values_probe("(iv)", grid, gg, den, "tail(F_{>h}*G_{>h})", "tail_F+tail_G",
                             target=0.0), th)
    r4 = VerdictReport("(iv) gt_gt = o(tail_F + tail_G)", p4.verdict, [p4], thresholds=th)
    subs = [r1, r2, *r3s, r4]
    vs = [r.verdict for r in subs]
    agree = len(set(vs)) == 1
    if Verdict.INCONCLUSIVE in vs:
        verdict = Verdict.INCONCLUSIVE
    elif not agree:
        verdict = Verdict.FAILS
    else:
        verdict = Verdict.HOLDS
    rep = VerdictReport("closure.S", verdict, thresholds=th, children=hyp + subs,
                        notes=notes + [f"h = {h_name(h)}",
                                       "holds means conditions (i)-(iv) reach the same verdict"],
                        details={"F": F.spec(), "G": G.spec(), "p": p, "agree": agree,
                                 "sub_verdicts": [str(v) for v in vs],
                                 "all_hold": all(v == Verdict.HOLDS for v in vs)})
    return rep


THEOREMS = {
    "long.add.5": TheoremSpec(
        _long_add_5, "tail(F1*G) ~ tail(F2*G) for tail-equivalent F1, F2 and long-tailed G",
        {"F1": "pareto(alpha=1.5)", "F2": "shift(pareto(alpha=1.5), -2)",
         "G": "lognormal(mu=0, sigma=1)"}),
    "long.add.5.plus": TheoremSpec(
        _long_add_5_plus, "tail(F1*G1) ~ tail(F2*G2) when F1+G1 is long-tailed",
        {"F1": "pareto(alpha=1)", "F2": "shift(pareto(alpha=1), -1)",
         "G1": "exponential(lambda=1)", "G2": "exponential(lambda=1)"}),
    "cor.l2": TheoremSpec(
        _cor_l2, "F*G long-tailed for long-tailed F and G",
        {"F": "pareto(alpha=1)", "G": "pareto(alpha=1)"}),
    "cor.l1": TheoremSpec(
        _cor_l1, "F*G long-tailed when F is long-tailed and F+G is long-tailed",
        {"F": "pareto(alpha=1)", "G": "counterexample(alpha=1)"}),
    "lower.bound": TheoremSpec(
        _lower_bound, "liminf tail(F1*...*Fn) / sum tail_Fk >= 1",
        {"n": 2, "laws": ["pareto(alpha=1)", "lognormal(mu=0, sigma=1)", "weibull(k=0.5)"]}),
    "nfold.liminf": TheoremSpec(
        _nfold_liminf, "liminf tail(F^{*n}) / tail_F >= n",
        {"n": 2, "F": "pareto(alpha=1)"}),
    "light.shift": TheoremSpec(
        _light_shift, "tail(F*G) ~ tail_F when tail_G(h(x)) = o(tail_F(x))",
        {"F": "pareto(alpha=1)", "G": "exponential(lambda=1)", "h": "sqrt"}),
    "thm.s1": TheoremSpec(
        _thm_s1, "tail(G1*...*Gn) = sum tail_Gi + o(tail_F)",
        {"n": 2, "F": "pareto(alpha=1)",
         "G": ["regvarying(alpha=1, c=2)", "exponential(lambda=1)", "lognormal(mu=0, sigma=1)"]}),
    "thm.s2": TheoremSpec(
        _thm_s2, "G1*...*Gn subexponential and weakly tail-equivalent to F",
        {"n": 2, "F": "pareto(alpha=1)", "G": ["regvarying(alpha=1, c=2)", "exponential(lambda=1)"]}),
    "cor.s0": TheoremSpec(
        _cor_s0, "G subexponential when long-tailed and weakly tail-equivalent to subexponential F",
        {"F": "pareto(alpha=1)", "G": "0.5*pareto(alpha=1) + 0.5*lognormal(mu=0, sigma=1)"}),
    "cor.14": TheoremSpec(
        _cor_14, "F*G subexponential and tail(F*G) = tail_F + tail_G + o(tail_F)",
        {"F": "pareto(alpha=1)", "G": "counterexample(alpha=1)"}),
    "cor.15": TheoremSpec(
        _cor_15, "tail(G1*...*Gn) / tail_F -> sum c_i",
        {"n": 2, "F": "pareto(alpha=1)", "G": ["regvarying(alpha=1, c=2)", "exponential(lambda=1)"],
         "c": [2.0, 0.0]}),
    "closure.S": TheoremSpec(
        _closure_S, "for subexponential F, G conditions (i)-(iv) are equivalent",
        {"F": "pareto(alpha=1)", "G": "pareto(alpha=1)", "p": 0.5}),
}

THEOREM_IDS = tuple(THEOREMS)

# closure.S instances used by the battery; one mixes Pareto and lognormal
CLOSURE_INSTANCES = (
    ("pareto(alpha=1)", "pareto(alpha=1)"),
    ("pareto(alpha=1)", "lognormal(mu=0, sigma=1)"),
    ("pareto(alpha=1.5)", "weibull(k=0.5)"),
    ("lognormal(mu=0, sigma=1)", "weibull(k=0.5)"),
    ("pareto(alpha=1)", "pareto(alpha=2)"),
)


def verify_theorem(theorem_id: str, config: dict | None = None, grid=None,
                   th: Thresholds = DEFAULT_THRESHOLDS) -> VerdictReport:
    """Probe a theorem's conclusion on its default instance, with ``config``
    entries overriding roles (``F``, ``G``, ``F1``, ..., ``n``, ``p``, ``h``)."""
    try:
        spec = THEOREMS[theorem_id]
    except KeyError:
        raise KeyError(f"unknown theorem id {theorem_id!r}; valid ids: {', '.join(THEOREM_IDS)}") from None
    cfg = dict(spec.defaults)
    cfg.update(config or {})
    rep = spec.func(cfg, quad_grid(grid), th)
    rep.details.setdefault("id", theorem_id)
    return rep
