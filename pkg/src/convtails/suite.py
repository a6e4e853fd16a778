"""The full verification battery behind ``convtails suite all``.

Each row pairs an item id with its expected verdict and the verdict reached.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import convolution as cv
from . import families as fam
from . import lattice as lat
from . import montecarlo as mc
from .hfunc import construct_h, parse_h
from .laws import Mixture
from .lemmas import LEMMA_IDS, lemma_probe
from .probes import Verdict, grid_top
from .testers import check_h_insensitive, test_long_tailed, test_subexponential
from .theorems import CLOSURE_INSTANCES, verify_theorem

# closed-form anchors
PARETO_X = 100.0
PARETO_CONV_100 = 0.0209194
BIG_JUMP_100 = 1.0513
NFOLD_100 = 2.0919


def pareto1_conv_tail(x: float) -> float:
    """Tail of the sum of two independent Pareto(1) variables."""
    return 1.0 / (x - 1.0) + 2.0 / x**2 * math.log(x - 1.0) + (x - 2.0) / (x * (x - 1.0))


SUBEXP_EXPECT = (
    ("pareto(alpha=1)", Verdict.HOLDS),
    ("pareto(alpha=1.5)", Verdict.HOLDS),
    ("lognormal(mu=0, sigma=1)", Verdict.HOLDS),
    ("weibull(k=0.5)", Verdict.HOLDS),
    ("exponential(lambda=1)", Verdict.FAILS),
    ("weibull(k=1.5)", Verdict.FAILS),
)


@dataclass
class Row:
    item: str
    expected: str
    verdict: str
    detail: str = ""

    @property
    def met(self) -> bool:
        return self.expected == self.verdict


@dataclass
class SuiteResult:
    rows: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)

    def add(self, item, expected, verdict, detail=""):
        self.rows.append(Row(item, str(expected), str(verdict), detail))

    @property
    def exit_code(self) -> int:
        if any(not r.met and r.verdict in ("fails", "holds") for r in self.rows):
            return 1
        if any(not r.met for r in self.rows):
            return 2
        return 0

    def table(self) -> str:
        w = max(len(r.item) for r in self.rows)
        lines = [f"{'item'.ljust(w)}  expected      verdict                met"]
        for r in self.rows:
            lines.append(f"{r.item.ljust(w)}  {r.expected:<12}  {r.verdict:<21}  {'yes' if r.met else 'NO'}")
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"rows": [dict(asdict(r), met=r.met) for r in self.rows], "exit_code": self.exit_code}


def _ok(flag: bool) -> Verdict:
    return Verdict.HOLDS if flag else Verdict.FAILS


def random_lattice_pair(rng: np.random.Generator):
    """Two random lattice measures on a common step, possibly of mass != 1."""
    step = float(rng.choice([0.25, 0.5, 1.0]))
    out = []
    for _ in range(2):
        n = int(rng.integers(1, 40))
        origin = step * int(rng.integers(-10, 10))
        m = rng.random(n) * (rng.random(n) < 0.7)
        out.append(lat.LatticeMeasure(origin, step, m * float(rng.uniform(0.2, 3.0))))
    return out


def decomposition_battery(seed: int, pairs: int = 100):
    """Worst residuals of the three restriction relations over random lattice pairs."""
    rng = np.random.default_rng(seed)
    worst_split = worst_three = worst_upper = 0.0
    min_slack = math.inf
    for _ in range(pairs):
        F, G = random_lattice_pair(rng)
        x = float(rng.uniform(-5, 40))
        h = float(rng.uniform(0, max(x / 2, 0.0))) if x > 0 else 0.0
        x = max(x, 0.0)
        r = cv.decomposition_report(F, G, h, x)
        worst_split = max(worst_split, abs(r.residual_split))
        if r.residual_three is not None:
            worst_three = max(worst_three, abs(r.residual_three))
        worst_upper = max(worst_upper, abs(r.residual_upper))
        min_slack = min(min_slack, r.slack_upper)
    return worst_split, worst_three, worst_upper, min_slack


def counterexample_recurrence(alpha: float, n_max: int):
    """``(x_n, y_n)`` from the recurrences, by plain float products."""
    x, out = 1.0, []
    for n in range(1, n_max + 1):
        y = x * math.exp(2.0**n - 1.0)
        out.append((x, y))
        x = y * 2.0 ** ((n + 1) / alpha)
    return out


def run_suite(seed: int = 12345, top: float | None = None, mc_n: int = 10**7,
              header: dict | None = None) -> SuiteResult:
    res = SuiteResult()
    with grid_top(top):
        _oracles(res)
        for spec, expect in SUBEXP_EXPECT:
            res.add(f"subexp {spec}", expect, test_subexponential(fam.parse_family(spec)).verdict)
        w2, w3, wu, slack = decomposition_battery(seed)
        ok = max(w2, w3, wu) <= 1e-12 and slack >= 0
        res.add("decomposition lattice", Verdict.HOLDS, _ok(ok),
                f"split={w2:.2e} three={w3:.2e} upper={wu:.2e} min_slack={slack:.2e}")
        _counterexample(res)
        _battery(res)
        _h_machinery(res)
    _monte_carlo(res, seed, mc_n, header or {})
    return res


def _oracles(res: SuiteResult):
    P = fam.pareto(alpha=1)
    t0 = time.perf_counter()
    v = cv.conv_tail(P, P, PARETO_X)
    dt = time.perf_counter() - t0
    res.add("oracle pareto conv-tail", Verdict.HOLDS, _ok(abs(v - PARETO_CONV_100) <= 1e-5 and dt < 1.0),
            f"value={v:.9f} time={dt:.3f}s")
    E = fam.exponential(lam=1)
    errs = [abs(cv.conv_tail(E, E, x) / ((1 + x) * math.exp(-x)) - 1) for x in (1.0, 5.0, 10.0)]
    res.add("oracle exponential conv-tail", Verdict.HOLDS, _ok(max(errs) <= 1e-9),
            f"max_rel_err={max(errs):.2e}")
    r = cv.conv_tail(P, P, PARETO_X) / float(P.sf(PARETO_X))
    res.add("nfold spot value x=100", Verdict.HOLDS, _ok(abs(r - NFOLD_100) <= 1e-3), f"ratio={r:.6f}")


def _counterexample(res: SuiteResult):
    G = fam.counterexample(alpha=1)
    ref = counterexample_recurrence(1.0, 8)
    rel = max(max(abs(a / b - 1) for a, b in zip(G.breakpoints_at(n), ref[n - 1])) for n in range(1, 9))
    res.add("counterexample breakpoints", Verdict.HOLDS, _ok(rel <= 1e-10), f"max_rel={rel:.2e}")
    ys, ms = G.atoms(hi=G.breakpoints_at(8)[1])
    tails = G.sf(ys)
    jumps = [float(t / (t + m)) for t, m in zip(tails, ms)]
    res.add("counterexample jump ratio", Verdict.HOLDS, _ok(all(j == 0.5 for j in jumps)),
            f"ratios={sorted(set(jumps))}")
    res.add("longtail counterexample", Verdict.FAILS, test_long_tailed(G).verdict)
    M = Mixture([0.5, 0.5], [fam.pareto(alpha=1), G])
    res.add("longtail mixture with counterexample", Verdict.HOLDS, test_long_tailed(M).verdict)


def _battery(res: SuiteResult):
    for tid in ("long.add.5", "long.add.5.plus", "cor.l2", "cor.l1"):
        res.add(f"theorem {tid}", Verdict.HOLDS, verify_theorem(tid).verdict)
    for tid in ("lower.bound", "nfold.liminf"):
        for n in (2, 3):
            res.add(f"theorem {tid} n={n}", Verdict.HOLDS, verify_theorem(tid, {"n": n}).verdict)
    res.add("theorem light.shift", Verdict.HOLDS, verify_theorem("light.shift").verdict)
    for n in (2, 3):
        res.add(f"theorem thm.s1 n={n}", Verdict.HOLDS, verify_theorem("thm.s1", {"n": n}).verdict)
    for tid in ("thm.s2", "cor.s0", "cor.14", "cor.15"):
        res.add(f"theorem {tid}", Verdict.HOLDS, verify_theorem(tid).verdict)
    for F, G in CLOSURE_INSTANCES:
        rep = verify_theorem("closure.S", {"F": F, "G": G, "spot_p": [0.1, 0.9]})
        res.add(f"theorem closure.S {F} {G}", Verdict.HOLDS, rep.verdict,
                "sub-verdicts " + ",".join(rep.details["sub_verdicts"]))
    for lid in LEMMA_IDS:
        res.add(f"lemma {lid}", Verdict.HOLDS, lemma_probe(lid).verdict)


def _h_machinery(res: SuiteResult):
    P = fam.pareto(alpha=1)
    res.add("h-insensitive constructed h", Verdict.HOLDS, check_h_insensitive(P, construct_h(P)).verdict)
    rep = check_h_insensitive(P, parse_h("half"))
    lims = [rep.probe(k).trend.limit for k in ("minus", "plus")]
    ok = abs(lims[0] - 2.0) <= 0.02 and abs(lims[1] - 2.0 / 3.0) <= 0.02
    res.add("h-insensitive h=x/2", Verdict.FAILS, rep.verdict if ok else Verdict.INCONCLUSIVE,
            f"limits={lims[0]:.4f},{lims[1]:.4f}")


def _monte_carlo(res: SuiteResult, seed: int, n: int, header: dict):
    P = fam.pareto(alpha=1)
    e = mc.mc_conv_tail(P, P, PARETO_X, n, seed)
    z = (e.value - PARETO_CONV_100) / e.std_error
    res.add("mc conv-tail pareto x=100", Verdict.HOLDS, _ok(abs(z) <= 3), f"z={z:.2f}")
    probe, pts = mc.big_jump_probe(P, [PARETO_X], n, seed)
    zb = (pts[0].ratio - BIG_JUMP_100) / pts[0].ratio_se
    res.add("mc big-jump pareto x=100", Verdict.HOLDS, _ok(abs(zb) <= 3), f"z={zb:.2f}")
    hdr = dict(header, seed=seed, n=n)
    text = mc.estimates_csv([PARETO_X], [e], hdr)
    again = mc.estimates_csv([PARETO_X], [mc.mc_conv_tail(P, P, PARETO_X, n, seed)], hdr)
    res.add("mc determinism", Verdict.HOLDS, _ok(text == again))
    res.artifacts["mc_conv_tail.csv"] = text
    res.artifacts["mc_big_jump.csv"] = mc.big_jump_csv(pts, hdr)
