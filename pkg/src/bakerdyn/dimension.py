"""Two-map Moran lower bounds for the dimension of a Julia set piece.

If two conformal contractions map a disk D into disjoint subsets of D
and expand distances at least by factors b1 and b2 (lower bi-Lipschitz
constants), their attractor has dimension at least the root s of
b1^s + b2^s = 1. The constants are estimated from finitely many
boundary pairs and shrunk by a safety factor, so every bound produced
here is a numerical lower-bound estimate, not a certificate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .branches import BranchChain, Disk, apply_chain_inverse
from .catalog import EntireMapSpec
from .errors import DimensionBoundError, PreconditionError
from .rng import open_uniform

SAFETY = 0.9
PAIRS = 256
BOUNDARY_SAMPLES = 256
MAX_DIMENSION = 2.0


def moran_exponent(b1: float, b2: float) -> float:
    """The s > 0 with b1^s + b2^s = 1, by bisection down to adjacent doubles."""
    b1, b2 = float(b1), float(b2)
    if not (0.0 < b1 < 1.0 and 0.0 < b2 < 1.0):
        raise PreconditionError(f"need 0 < b1, b2 < 1, got ({b1}, {b2})")

    def h(s):
        return b1 ** s + b2 ** s - 1.0

    lo, hi = 0.0, 1.0
    while h(hi) > 0:
        lo, hi = hi, 2.0 * hi
    if h(hi) == 0.0:
        return hi
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        v = h(mid)
        if v == 0.0:
            return mid
        if v > 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(h(lo)) <= abs(h(hi)) else hi


@dataclass(frozen=True)
class Contraction:
    """A map of the base disk into itself, with provenance."""

    id: str
    fn: Callable[[complex], complex]


def similitude(a: complex, b: complex, id: str | None = None) -> Contraction:
    a, b = complex(a), complex(b)
    return Contraction(id or f"{a:g}*z+{b:g}", lambda z: a * z + b)


def chain_map(spec: EntireMapSpec, chain: BranchChain, id: str | None = None) -> Contraction:
    if not chain.valid:
        raise DimensionBoundError(f"chain is not valid: {chain.reason}")
    tag = id or f"{spec.id}:n={chain.n}:end={chain.endpoints[-1]:.6g}"
    return Contraction(tag, lambda z: apply_chain_inverse(spec, chain, z))


@dataclass(frozen=True)
class DimensionBound:
    s: float
    b1: float
    b2: float
    chain_ids: tuple
    disjointness_margin: float
    containment_margins: tuple
    s_unshrunk: float
    capped: bool = False
    label: str = "numerical lower-bound estimate"

    def replay(self) -> float:
        return self.b1 ** self.s + self.b2 ** self.s


def _inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts.real[:, None], pts.imag[:, None]
    xa, ya = poly.real[None, :], poly.imag[None, :]
    xb, yb = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = ((ya > y) != (yb > y)) & (x < (xb - xa) * (y - ya) / (yb - ya) + xa)
    return cross.sum(axis=1) % 2 == 1


def lower_lipschitz(F: Contraction, disk: Disk, pairs: int = PAIRS, seed: int = 0) -> float:
    """min |F(x) - F(y)| / |x - y| over boundary pairs drawn from the counter-based stream."""
    u = open_uniform(seed, 0, 2 * pairs).reshape(pairs, 2)
    x = disk.center + disk.radius * np.exp(2j * math.pi * u[:, 0])
    y = disk.center + disk.radius * np.exp(2j * math.pi * u[:, 1])
    ratios = [abs(F.fn(a) - F.fn(b)) / abs(a - b) for a, b in zip(x, y) if abs(a - b) > 0]
    return float(min(ratios))


def ifs_lower_bound(disk: Disk, F1: Contraction, F2: Contraction, pairs: int = PAIRS,
                    boundary_samples: int = BOUNDARY_SAMPLES,
                    safety: float = SAFETY) -> DimensionBound:
    """Moran bound for two maps of ``disk`` with disjoint images inside ``disk``."""
    c, r = complex(disk.center), disk.radius
    ring = disk.boundary(boundary_samples)
    img1 = np.array([F1.fn(v) for v in ring])
    img2 = np.array([F2.fn(v) for v in ring])
    m1 = r - float(np.abs(img1 - c).max())
    m2 = r - float(np.abs(img2 - c).max())
    if m1 <= 0:
        raise DimensionBoundError(f"{F1.id}(D) is not inside D (margin {m1:.3g})")
    if m2 <= 0:
        raise DimensionBoundError(f"{F2.id}(D) is not inside D (margin {m2:.3g})")
    sep = float(np.abs(img1[:, None] - img2[None, :]).min())
    if _inside(img1, img2).any() or _inside(img2, img1).any() or sep == 0.0:
        raise DimensionBoundError(f"{F1.id}(D) and {F2.id}(D) overlap")
    b1 = lower_lipschitz(F1, disk, pairs)
    b2 = lower_lipschitz(F2, disk, pairs)
    if not (0 < b1 < 1 and 0 < b2 < 1):
        raise DimensionBoundError(f"estimated constants ({b1:.3g}, {b2:.3g}) are not contractions")
    s_raw = moran_exponent(b1, b2)
    sb1, sb2 = safety * b1, safety * b2
    s = moran_exponent(sb1, sb2)
    capped = s > MAX_DIMENSION
    if capped:
        warnings.warn(f"Moran exponent {s:.4g} exceeds 2; the bi-Lipschitz estimates are off",
                      RuntimeWarning, stacklevel=2)
        s = MAX_DIMENSION
    return DimensionBound(s, sb1, sb2, (F1.id, F2.id), sep, (m1, m2), s_raw, capped)
