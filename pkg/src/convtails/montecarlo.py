"""Plain Monte Carlo estimates of convolution-tail events.

Each grid point draws from its own ``PCG64`` stream, seeded by a splitmix64
mix of ``(master seed, point index)``.  Results therefore do not depend on
the order or the thread in which grid points are evaluated.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .probes import RatioProbe, decide

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
CHUNK = 1_000_000
MIN_N = 1000
MIN_HITS = 50
TERMS = ("le_h", "le_h_other", "gt_h", "gt_gt")


def splitmix64(master: int, index: int) -> int:
    """Seed for stream ``index``: one splitmix64 output from ``master + (index+1)*golden``."""
    z = (int(master) + (int(index) + 1) * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def point_rng(master: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(splitmix64(master, index)))


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    n: int
    seed: int
    hits: int

    @classmethod
    def from_hits(cls, hits: int, n: int, seed: int) -> "MCEstimate":
        p = hits / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), n, seed, int(hits))


def _check_n(n: int):
    if n < MIN_N:
        raise ValueError(f"n must be at least {MIN_N}, got {n}")


def _pairs(F, G, n: int, rng: np.random.Generator, chunk: int = CHUNK):
    """Yield chunks of independent ``(xi, eta)`` samples."""
    left = n
    while left > 0:
        m = min(chunk, left)
        yield F.sample(m, rng), G.sample(m, rng)
        left -= m


def mc_conv_tail(F, G, x: float, n: int, seed: int, index: int = 0) -> MCEstimate:
    """Estimate of ``P(xi + eta > x)`` with ``xi ~ F`` and ``eta ~ G`` independent."""
    _check_n(n)
    rng = point_rng(seed, index)
    hits = 0
    for a, b in _pairs(F, G, n, rng):
        hits += int(np.count_nonzero(a + b > x))
    return MCEstimate.from_hits(hits, n, seed)


def mc_decomposition(F, G, h, x: float, n: int, seed: int, index: int = 0) -> dict:
    """All restriction-term estimates and the total from the same sample paths.

    ``le_h + gt_h == total`` always holds in hit counts; with ``h(x) <= x/2``
    also ``le_h + le_h_other + gt_gt == total``.
    """
    _check_n(n)
    t = float(h(x)) if callable(h) else float(h)
    rng = point_rng(seed, index)
    counts = dict.fromkeys(("total",) + TERMS, 0)
    for a, b in _pairs(F, G, n, rng):
        hit = a + b > x
        counts["total"] += int(np.count_nonzero(hit))
        counts["le_h"] += int(np.count_nonzero(hit & (a <= t)))
        counts["le_h_other"] += int(np.count_nonzero(hit & (b <= t)))
        counts["gt_h"] += int(np.count_nonzero(hit & (a > t)))
        counts["gt_gt"] += int(np.count_nonzero(hit & (a > t) & (b > t)))
    return {k: MCEstimate.from_hits(v, n, seed) for k, v in counts.items()}


def mc_term(F, G, h, x: float, n: int, seed: int, term: str, index: int = 0) -> MCEstimate:
    """One restriction term: ``le_h`` is ``P(xi+eta>x, xi<=h)``, ``le_h_other``
    swaps the roles, ``gt_h`` is ``P(xi+eta>x, xi>h)`` and ``gt_gt`` requires
    both summands above ``h``."""
    if term not in TERMS:
        raise ValueError(f"unknown term {term!r}; choose from {', '.join(TERMS)}")
    return mc_decomposition(F, G, h, x, n, seed, index)[term]


@dataclass(frozen=True)
class BigJumpPoint:
    x: float
    n: int
    seed: int
    hits_sum: int
    hits_max: int
    estimate: float        # P(xi1 + xi2 > x)
    std_error: float
    exact_max: float       # 2 tail - tail**2
    ratio: float           # estimate / exact_max
    ratio_se: float
    crn_ratio: float       # hits_sum / hits_max on the same samples
    low_confidence: bool


def _big_jump_point(F, x: float, n: int, seed: int, index: int) -> BigJumpPoint:
    rng = point_rng(seed, index)
    hs = hm = 0
    for a, b in _pairs(F, F, n, rng):
        hs += int(np.count_nonzero(a + b > x))
        hm += int(np.count_nonzero(np.maximum(a, b) > x))
    est = MCEstimate.from_hits(hs, n, splitmix64(seed, index))
    tail = float(F.sf(x))
    exact = 2.0 * tail - tail * tail
    ratio = est.value / exact if exact > 0 else math.nan
    return BigJumpPoint(
        x=float(x), n=n, seed=est.seed, hits_sum=hs, hits_max=hm,
        estimate=est.value, std_error=est.std_error, exact_max=exact, ratio=ratio,
        ratio_se=est.std_error / exact if exact > 0 else math.nan,
        crn_ratio=hs / hm if hm else math.nan, low_confidence=hs < MIN_HITS,
    )


def big_jump_grid(F, n: int, x0: float = 1.0, ratio: float = 10.0 ** 0.25,
                  min_prob: float = 1e-4) -> np.ndarray:
    """Geometric grid capped where ``P(max > x)`` drops below ``min_prob``
    (scaled to the sample size relative to 10**6)."""
    floor = min_prob * 1e6 / n
    xs = []
    x = x0
    while len(xs) < 60:
        t = float(F.sf(x))
        if 2 * t - t * t < floor:
            break
        xs.append(x)
        x *= ratio
    return np.asarray(xs)


def big_jump_probe(F, grid, n: int, seed: int, workers: int = 1):
    """``P(xi1 + xi2 > x) / P(max(xi1, xi2) > x)`` per grid point.

    Returns ``(probe, points)``.  The probe uses the exact maximum tail in the
    denominator; ``crn_ratio`` keeps the common-random-number version.
    """
    _check_n(n)
    grid = np.asarray(grid, dtype=float)
    jobs = [(float(x), i) for i, x in enumerate(grid)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            points = list(ex.map(lambda j: _big_jump_point(F, j[0], n, seed, j[1]), jobs))
    else:
        points = [_big_jump_point(F, x, n, seed, i) for x, i in jobs]
    ratios = np.array([p.ratio for p in points])
    probe = RatioProbe("big-jump", grid, ratios, "P(xi1+xi2>x)", "P(max>x)", target=1.0)
    probe.flags = [f"low-confidence x={p.x:g} hits={p.hits_sum}" for p in points if p.low_confidence]
    if len(grid) >= 5:
        decide(probe)
    return probe, points


def csv_table(rows, columns, header: dict | None = None) -> str:
    """CSV text with ``# key=value`` header lines.  Floats use ``repr`` so the
    output is byte-identical for identical inputs."""
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def big_jump_csv(points, header: dict | None = None) -> str:
    cols = ["x", "estimate", "std_error", "n", "hits", "seed", "hits_max", "exact_max",
            "ratio", "ratio_se", "crn_ratio", "low_confidence"]
    rows = [[p.x, p.estimate, p.std_error, p.n, p.hits_sum, p.seed, p.hits_max, p.exact_max,
             p.ratio, p.ratio_se, p.crn_ratio, int(p.low_confidence)] for p in points]
    return csv_table(rows, cols, header)


def estimates_csv(xs, estimates, header: dict | None = None, extra=None) -> str:
    """Rows ``x, estimate, std_error, n, hits, seed`` (plus optional ``extra``
    column pairs ``(name, values)``)."""
    cols = ["x", "estimate", "std_error", "n", "hits", "seed"]
    extra = extra or []
    cols += [name for name, _ in extra]
    rows = []
    for i, (x, e) in enumerate(zip(xs, estimates)):
        rows.append([float(x), e.value, e.std_error, e.n, e.hits, e.seed]
                    + [vals[i] for _, vals in extra])
    return csv_table(rows, cols, header)
