"""The nine acceptance criteria, each at its stated tolerance.

Every test records its outcome so the run ends with one PASS/FAIL line per
criterion (see ``conftest.py``).
"""

import math
import time


from conftest import ACCEPTANCE
from convtails import convolution as cv
from convtails import families as fam
from convtails import montecarlo as mc
from convtails.hfunc import construct_h, parse_h
from convtails.laws import Mixture
from convtails.probes import Verdict
from convtails.suite import counterexample_recurrence, decomposition_battery, pareto1_conv_tail
from convtails.testers import check_h_insensitive, test_long_tailed, test_subexponential
from convtails.theorems import CLOSURE_INSTANCES, verify_theorem

PARETO_100 = 0.0209194
BIG_JUMP_100 = 1.0513


def record(k, checks, detail=""):
    ok = all(checks.values())
    failed = [name for name, v in checks.items() if not v]
    ACCEPTANCE[k] = (ok, detail + (f"  failed: {', '.join(failed)}" if failed else ""))
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, failed


def test_criterion_1_pareto_oracle():
    P = fam.pareto(alpha=1)
    t0 = time.perf_counter()
    v = cv.conv_tail(P, P, 100.0)
    dt = time.perf_counter() - t0
    record(1, {"value": abs(v - PARETO_100) <= 1e-5,
               "closed form": abs(v - pareto1_conv_tail(100.0)) <= 1e-5,
               "runtime": dt < 1.0},
           f"value={v:.9f} time={dt:.3f}s")


def test_criterion_2_exponential_oracle():
    E = fam.exponential(lam=1)
    errs = [abs(cv.conv_tail(E, E, x) / ((1 + x) * math.exp(-x)) - 1) for x in (1.0, 5.0, 10.0)]
    verdict = test_subexponential(E).verdict
    record(2, {"relative error": max(errs) <= 1e-9, "subexp fails": verdict == Verdict.FAILS},
           f"max_rel={max(errs):.2e} verdict={verdict}")


def test_criterion_3_subexponential_verdicts():
    expect = [("pareto(alpha=1)", Verdict.HOLDS), ("pareto(alpha=1.5)", Verdict.HOLDS),
              ("lognormal(mu=0, sigma=1)", Verdict.HOLDS), ("weibull(k=0.5)", Verdict.HOLDS),
              ("exponential(lambda=1)", Verdict.FAILS), ("weibull(k=1.5)", Verdict.FAILS)]
    t0 = time.perf_counter()
    checks, got = {}, []
    for spec, want in expect:
        rep = test_subexponential(fam.parse_family(spec))
        top = rep.probe("self-conv").grid.max()
        checks[spec] = rep.verdict == want
        checks[f"{spec} grid"] = top >= 1e6 * (1 - 1e-12)
        got.append(str(rep.verdict))
    dt = time.perf_counter() - t0
    checks["runtime"] = dt < 120.0
    record(3, checks, f"verdicts={','.join(got)} time={dt:.1f}s")


def test_criterion_4_decomposition_identities():
    split, three, upper, slack = decomposition_battery(seed=12345, pairs=100)
    record(4, {"split": split <= 1e-12, "three-term": three <= 1e-12, "slack": slack >= 0},
           f"split={split:.1e} three={three:.1e} upper={upper:.1e} min_slack={slack:.1e}")


def test_criterion_5_counterexample():
    G = fam.counterexample(alpha=1)
    ref = counterexample_recurrence(1.0, 8)
    rel = max(abs(a / b - 1) for n in range(1, 9) for a, b in zip(G.breakpoints_at(n), ref[n - 1]))
    ys, ms = G.atoms(hi=G.breakpoints_at(8)[1])
    tails = G.sf(ys)
    jumps = {float(t / (t + m)) for t, m in zip(tails, ms)}
    lt = test_long_tailed(G).verdict
    mix = test_long_tailed(Mixture([0.5, 0.5], [fam.pareto(alpha=1), G])).verdict
    record(5, {"breakpoints": rel <= 1e-10, "jump ratio": jumps == {0.5} and len(ys) >= 8,
               "G not long-tailed": lt == Verdict.FAILS, "mixture long-tailed": mix == Verdict.HOLDS},
           f"max_rel={rel:.1e} jumps={sorted(jumps)} G={lt} mixture={mix}")


def test_criterion_6_theorem_battery():
    runs = [(t, {}) for t in ("long.add.5", "long.add.5.plus", "cor.l2", "cor.l1")]
    runs += [(t, {"n": n}) for t in ("lower.bound", "nfold.liminf") for n in (2, 3)]
    runs += [("light.shift", {})] + [("thm.s1", {"n": n}) for n in (2, 3)]
    runs += [(t, {}) for t in ("thm.s2", "cor.s0", "cor.14", "cor.15")]
    checks = {}
    for tid, params in runs:
        checks[f"{tid}{params or ''}"] = verify_theorem(tid, params).verdict == Verdict.HOLDS
    assert len(CLOSURE_INSTANCES) >= 5
    mixed = any({"pareto", "lognormal"} == {F.split("(")[0], G.split("(")[0]} for F, G in CLOSURE_INSTANCES)
    checks["mixed pareto/lognormal instance"] = mixed
    for F, G in CLOSURE_INSTANCES:
        rep = verify_theorem("closure.S", {"F": F, "G": G})
        subs = rep.details["sub_verdicts"]
        checks[f"closure.S {F} {G}"] = rep.verdict == Verdict.HOLDS and len(set(subs)) == 1
    record(6, checks, f"{sum(checks.values())}/{len(checks)} checks")


def test_criterion_7_nfold_spot_value():
    P = fam.pareto(alpha=1)
    r = cv.conv_tail(P, P, 100.0) / float(P.sf(100.0))
    record(7, {"ratio": abs(r - 2.0919) <= 1e-3}, f"ratio={r:.6f}")


def test_criterion_8_monte_carlo():
    P = fam.pareto(alpha=1)
    n, seed = 10**7, 20240501
    e = mc.mc_conv_tail(P, P, 100.0, n, seed)
    z = (e.value - PARETO_100) / e.std_error
    _, pts = mc.big_jump_probe(P, [100.0], n, seed)
    zb = (pts[0].ratio - BIG_JUMP_100) / pts[0].ratio_se
    hdr = {"seed": seed, "n": n}
    a = mc.estimates_csv([100.0], [e], hdr).encode()
    b = mc.estimates_csv([100.0], [mc.mc_conv_tail(P, P, 100.0, n, seed)], hdr).encode()
    record(8, {"conv-tail z": abs(z) <= 3, "big-jump z": abs(zb) <= 3, "byte-identical": a == b},
           f"z={z:.2f} z_big_jump={zb:.2f}")


def test_criterion_9_h_machinery():
    P = fam.pareto(alpha=1)
    good = check_h_insensitive(P, construct_h(P)).verdict
    rep = check_h_insensitive(P, parse_h("half"))
    lo, hi = (rep.probe(k).trend.limit for k in ("minus", "plus"))
    record(9, {"constructed h holds": good == Verdict.HOLDS, "x/2 fails": rep.verdict == Verdict.FAILS,
               "minus limit": abs(lo - 2.0) <= 0.02, "plus limit": abs(hi - 2.0 / 3.0) <= 0.02},
           f"constructed={good} half={rep.verdict} limits={lo:.4f},{hi:.4f}")
