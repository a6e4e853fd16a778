"""Slowly growing level functions ``h`` and their construction from tails.

An :class:`HFunction` is the step function ``h(x) = n`` on ``(x_n, x_{n+1}]``
(and 0 up to ``x_1``).  :func:`construct_h` picks the ``x_n`` so that
``|tail(x +- n) - tail(x)| <= tail(x) / n`` at every probed ``x > x_n``.
"Every probed x" is a finite geometric set up to ``horizon``; beyond the
last breakpoint found the function is held constant and marked truncated.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

DEFAULT_HORIZON = 1e8
_PER_DECADE = 40
_BLOCK = 256


@dataclass(frozen=True)
class HFunction:
    breakpoints: np.ndarray = field(repr=False)
    cap: bool = False
    horizon: float = math.inf
    truncated: bool = False
    note: str = ""
    name: str = "constructed"

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float)
        # ties are allowed: h then jumps by several levels at one point
        if bp.ndim != 1 or np.any(np.diff(bp) < 0):
            raise ValueError("breakpoints must be nondecreasing")
        bp.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        # number of breakpoints strictly below x: n on (x_n, x_{n+1}]
        n = np.searchsorted(self.breakpoints, xs, side="left").astype(float)
        if self.cap:
            n = np.minimum(n, np.maximum(xs, 0.0) / 2.0)
        return float(n) if np.ndim(x) == 0 else n

    @property
    def levels(self) -> int:
        return len(self.breakpoints)

    def capped(self) -> "HFunction":
        return HFunction(self.breakpoints, True, self.horizon, self.truncated, self.note, self.name)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "levels": self.levels,
            "cap_half": self.cap,
            "horizon": self.horizon,
            "truncated": self.truncated,
            "note": self.note,
            "breakpoints_head": [float(v) for v in self.breakpoints[:10]],
        }

    @staticmethod
    def minimum(*hs: "HFunction") -> "HFunction":
        """Pointwise minimum.  ``min h_i > n - 1`` exactly when ``x`` exceeds
        every ``x_n^{(i)}``, so the breakpoints are the elementwise max."""
        if not hs:
            raise ValueError("need at least one h")
        k = min(h.levels for h in hs)
        bp = np.max(np.stack([h.breakpoints[:k] for h in hs]), axis=0) if k else np.zeros(0)
        return HFunction(
            bp,
            cap=any(h.cap for h in hs),
            horizon=min(h.horizon for h in hs),
            truncated=any(h.truncated for h in hs),
            note="; ".join(h.note for h in hs if h.note),
            name="min(" + ", ".join(h.name for h in hs) + ")",
        )


def _grid(lo: float, hi: float) -> np.ndarray:
    n = int(math.ceil(math.log10(hi / lo) * _PER_DECADE)) + 1
    return np.geomspace(lo, hi, n)


def _construct_one(F, xs: np.ndarray, max_levels: int, label: str) -> HFunction:
    base = F.logsf(xs)
    if not np.all(np.isfinite(base)):
        bad = xs[~np.isfinite(base)][0]
        raise ValueError(f"tail of {label} vanishes at x={bad:g} inside the probed range")
    bps = []
    prev = 0
    n = 1
    while n <= max_levels:
        ns = np.arange(n, min(n + _BLOCK, max_levels + 1), dtype=float)[:, None]
        up = F.logsf(xs[None, :] + ns) - base[None, :]
        dn = F.logsf(xs[None, :] - ns) - base[None, :]
        tol = 1.0 / ns
        ok = (np.abs(np.expm1(up)) <= tol) & (np.abs(np.expm1(dn)) <= tol)
        # index of the first probe point after the last failure
        fail_any = ~ok
        last_fail = np.where(fail_any.any(axis=1),
                             len(xs) - 1 - np.argmax(fail_any[:, ::-1], axis=1), -1)
        stop = False
        for lf in last_fail:
            idx = max(int(lf) + 1, prev)
            if idx >= len(xs) - 1:
                # no probe point left above the candidate: horizon reached
                stop = True
                break
            bps.append(xs[idx])
            prev = idx
        if stop:
            break
        n += _BLOCK
    levels = len(bps)
    note = ""
    if levels == 0:
        note = f"{label}: no level satisfies the insensitivity condition on the probed range"
    elif levels < 3:
        note = f"{label}: h stays bounded ({levels}) on the probed range"
    return HFunction(np.asarray(bps), horizon=float(xs[-1]),
                     truncated=levels < max_levels, note=note, name=f"h[{label}]")


def construct_h(*tails, horizon: float = DEFAULT_HORIZON, start: float = 1.0,
                max_levels: int = 100_000, cap: bool = False) -> HFunction:
    """Build ``h`` for one or more tails; several tails give the pointwise min.

    Raises ``ValueError`` when a tail vanishes inside ``[start, horizon]``.
    """
    if len(tails) == 1 and isinstance(tails[0], (list, tuple)):
        tails = tuple(tails[0])
    if not tails:
        raise ValueError("need at least one tail")
    xs = _grid(start, horizon)
    hs = []
    for F in tails:
        # probe the law's own jumps as well, otherwise they fall between grid points
        pts = np.unique(np.concatenate([xs, F.breakpoints(start, horizon)]))
        hs.append(_construct_one(F, pts, max_levels, F.spec()))
    h = hs[0] if len(hs) == 1 else HFunction.minimum(*hs)
    return h.capped() if cap else h


@dataclass(frozen=True)
class NamedH:
    """A closed-form ``h`` with a printable name."""

    func: object
    name: str

    def __call__(self, x):
        return self.func(x)


_H_SPECS = {
    "sqrt": lambda x: np.sqrt(np.maximum(x, 0.0)),
    "cbrt": lambda x: np.cbrt(np.maximum(x, 0.0)),
    "log": lambda x: np.log1p(np.maximum(x, 0.0)),
    "half": lambda x: np.asarray(x, dtype=float) / 2.0,
    "quarter": lambda x: np.asarray(x, dtype=float) / 4.0,
}


def parse_h(spec: str, tails=()):
    """``auto`` (constructed from ``tails``), ``sqrt``, ``cbrt``, ``log``,
    ``half``, ``quarter``, ``pow:<e>`` or a constant number."""
    s = spec.strip().lower()
    if s == "auto":
        if not tails:
            raise ValueError("h=auto needs at least one law to construct from")
        return construct_h(*tails)
    if s in _H_SPECS:
        return NamedH(_H_SPECS[s], s)
    m = re.fullmatch(r"pow:([0-9.eE+-]+)", s)
    if m:
        e = float(m.group(1))
        return NamedH(lambda x, e=e: np.power(np.maximum(x, 0.0), e), s)
    try:
        c = float(s)
    except ValueError:
        raise ValueError(
            f"unknown h spec {spec!r}; use auto, sqrt, cbrt, log, half, quarter, pow:<e> or a number"
        ) from None
    return NamedH(lambda x, c=c: np.full(np.shape(x), c) if np.ndim(x) else c, f"const:{c:g}")


def h_name(h) -> str:
    return getattr(h, "name", getattr(h, "__name__", "h"))
