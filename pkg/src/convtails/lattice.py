"""Finite non-negative atomic measures on a uniform grid.

All arithmetic here is exact up to 64-bit float rounding: mixtures add atom
weights, convolution is a discrete convolution of the weight sequences and
tails are plain sums.  Tails use the open half-line ``(x, inf)``, so an atom
sitting exactly at ``x`` does not count towards ``tail(F, x)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np


class LatticeError(ValueError):
    """Raised when two lattice measures cannot be aligned exactly."""


# origins are compared on the step scale; anything closer than this is the
# same lattice
_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class Window:
    """Interval used for restrictions: ``lo < t <= hi`` style bounds.

    ``lo_closed``/``hi_closed`` say whether the endpoints belong to the set.
    """

    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"window endpoints out of order: {self.lo} > {self.hi}")

    @classmethod
    def le(cls, t: float) -> "Window":
        """``(-inf, t]``"""
        return cls(-math.inf, float(t), False, True)

    @classmethod
    def gt(cls, t: float) -> "Window":
        """``(t, inf)``"""
        return cls(float(t), math.inf, False, False)

    @classmethod
    def ge(cls, t: float) -> "Window":
        """``[t, inf)``"""
        return cls(float(t), math.inf, True, False)

    @classmethod
    def closed(cls, a: float, b: float) -> "Window":
        return cls(float(a), float(b), True, True)

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        left = y >= self.lo if self.lo_closed else y > self.lo
        right = y <= self.hi if self.hi_closed else y < self.hi
        return left & right


@dataclass(frozen=True)
class LatticeMeasure:
    """Atoms ``masses[i]`` at ``origin + i * step``."""

    origin: float
    step: float
    masses: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64)
        if m.ndim != 1:
            raise ValueError("masses must be one-dimensional")
        if not self.step > 0 or not math.isfinite(self.step):
            raise ValueError(f"step must be positive and finite, got {self.step}")
        if not math.isfinite(self.origin):
            raise ValueError("origin must be finite")
        if np.any(~np.isfinite(m)) or np.any(m < 0):
            raise ValueError("masses must be finite and non-negative")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def point_mass(cls, a: float, mass: float = 1.0, step: float = 1.0) -> "LatticeMeasure":
        return cls(a, step, np.array([mass]))

    @classmethod
    def zero(cls, step: float = 1.0, origin: float = 0.0) -> "LatticeMeasure":
        return cls(origin, step, np.zeros(0))

    @property
    def positions(self) -> np.ndarray:
        return self.origin + self.step * np.arange(len(self.masses))

    @property
    def mass(self) -> float:
        return float(np.sum(self.masses))

    @property
    def support(self) -> tuple[float, float]:
        nz = np.flatnonzero(self.masses)
        if len(nz) == 0:
            return (math.inf, -math.inf)
        pos = self.positions
        return (float(pos[nz[0]]), float(pos[nz[-1]]))

    def __len__(self):
        return len(self.masses)

    def __eq__(self, other):
        if not isinstance(other, LatticeMeasure):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        if len(a) == 0 or len(b) == 0:
            return len(a) == len(b)
        return (a.step == b.step and a.origin == b.origin
                and np.array_equal(a.masses, b.masses))

    __hash__ = None

    def canonical(self) -> "LatticeMeasure":
        """Same measure with leading and trailing zero atoms trimmed."""
        nz = np.flatnonzero(self.masses)
        if len(nz) == 0:
            return LatticeMeasure(self.origin, self.step, np.zeros(0))
        i, j = nz[0], nz[-1]
        return LatticeMeasure(self.origin + i * self.step, self.step, self.masses[i:j + 1])

    def sf(self, x):
        return tail(self, x)

    def atoms(self):
        return self.positions, self.masses


def _offset(F: LatticeMeasure, G: LatticeMeasure) -> int:
    """Integer index shift of G's origin relative to F's origin."""
    if F.step != G.step:
        raise LatticeError(f"incompatible steps {F.step} and {G.step}")
    k = (G.origin - F.origin) / F.step
    ki = round(k)
    if abs(k - ki) > _ALIGN_TOL:
        raise LatticeError(
            f"origins {F.origin} and {G.origin} differ by a non-integer number of steps")
    return int(ki)


def total_mass(F: LatticeMeasure) -> float:
    return F.mass


def tail(F: LatticeMeasure, x) -> np.ndarray | float:
    """Mass of ``(x, inf)``.  Vectorised over ``x``."""
    xs = np.asarray(x, dtype=float)
    m = F.masses
    if len(m) == 0:
        out = np.zeros_like(xs)
    else:
        # suffix[i] = sum of masses[i:], summed right-to-left
        suffix = np.concatenate([np.cumsum(m[::-1])[::-1], [0.0]])
        # first atom strictly right of x; positions are the exact atom floats
        idx = np.searchsorted(F.positions, xs, side="right")
        out = suffix[idx]
        out = np.where(np.isneginf(xs), F.mass, out)
    return float(out) if np.ndim(x) == 0 else out


def _aligned(F: LatticeMeasure, G: LatticeMeasure):
    """Both weight arrays on a common index range.  Returns origin, a, b."""
    if len(F) == 0:
        F = LatticeMeasure(G.origin, G.step, np.zeros(0)) if F.step == G.step else F
    if len(G) == 0:
        G = LatticeMeasure(F.origin, F.step, np.zeros(0)) if F.step == G.step else G
    k = _offset(F, G)
    lo = min(0, k)
    hi = max(len(F), k + len(G))
    a = np.zeros(hi - lo)
    b = np.zeros(hi - lo)
    a[-lo:-lo + len(F)] = F.masses
    b[k - lo:k - lo + len(G)] = G.masses
    return F.origin + lo * F.step, a, b


def mixture(p: float, F: LatticeMeasure, q: float, G: LatticeMeasure) -> LatticeMeasure:
    """``pF + qG``."""
    if p < 0 or q < 0:
        raise ValueError("mixture weights must be non-negative")
    origin, a, b = _aligned(F, G)
    return LatticeMeasure(origin, F.step, p * a + q * b)


def add(*measures: LatticeMeasure) -> LatticeMeasure:
    out = measures[0]
    for G in measures[1:]:
        out = mixture(1.0, out, 1.0, G)
    return out


def restrict(F: LatticeMeasure, B: Window) -> LatticeMeasure:
    """``F_B``: atoms outside ``B`` set to zero, grid unchanged."""
    keep = B.contains(F.positions)
    return LatticeMeasure(F.origin, F.step, np.where(keep, F.masses, 0.0))


def convolve(F: LatticeMeasure, G: LatticeMeasure) -> LatticeMeasure:
    if F.step != G.step:
        raise LatticeError(f"incompatible steps {F.step} and {G.step}")
    # origins only need to sit on a common lattice; the sum lattice starts at
    # origin_F + origin_G
    _offset(F, G)
    if len(F) == 0 or len(G) == 0:
        return LatticeMeasure(F.origin + G.origin, F.step, np.zeros(0))
    return LatticeMeasure(F.origin + G.origin, F.step, np.convolve(F.masses, G.masses))


def conv_power(F: LatticeMeasure, n: int) -> LatticeMeasure:
    if n < 1:
        raise ValueError("n must be >= 1")
    out = F
    for _ in range(n - 1):
        out = convolve(out, F)
    return out


def stieltjes_tail(F: LatticeMeasure, G: LatticeMeasure, x: float) -> float:
    """``sum_y tail(F, x - y) * G{y}``: the convolution tail without forming F*G."""
    pos, m = G.positions, G.masses
    if len(m) == 0:
        return 0.0
    return float(np.dot(tail(F, x - pos), m))


def regrid(F: LatticeMeasure, origin: float, step: float) -> LatticeMeasure:
    """Move every atom to the first point of the new grid at or to its right.

    This is the only place where a measure changes lattice; tails at points of
    the new grid are preserved exactly.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if len(F.masses) == 0:
        return LatticeMeasure(origin, step, np.zeros(0))
    pos = F.positions
    idx = np.ceil((pos - origin) / step - 1e-12).astype(np.int64)
    lo = min(0, int(idx.min()))
    new_origin = origin + lo * step
    out = np.zeros(int(idx.max()) - lo + 1)
    np.add.at(out, idx - lo, F.masses)
    return LatticeMeasure(new_origin, step, out)


def dumps(F: LatticeMeasure) -> str:
    """Columnar text: ``origin step count`` then one mass per line."""
    buf = io.StringIO()
    buf.write(f"{F.origin:.17g} {F.step:.17g} {len(F.masses)}\n")
    for v in F.masses:
        buf.write(f"{v:.17g}\n")
    return buf.getvalue()


def loads(text: str) -> LatticeMeasure:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty lattice file")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header line {lines[0]!r}")
    origin, step, count = float(head[0]), float(head[1]), int(head[2])
    body = lines[1:]
    if len(body) != count:
        raise ValueError(f"header announces {count} masses, found {len(body)}")
    return LatticeMeasure(origin, step, np.array([float(v) for v in body]))
