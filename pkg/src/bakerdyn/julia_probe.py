"""Circle-side sampling of the Julia set of an inner function.

For the rational Blaschke model the Julia set is the whole circle and a
preimage tree of any non-DW point accumulates on it; for z - cot(z)/2
the Julia set is the closure of the poles of the iterates, i.e. of the
pre-poles of the real boundary map. Both are reported as point sets
with the arcs they cover at a given radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import InnerFunctionSpec
from .circle import BoundaryPoint, preimage_tree, real_to_turns, wrap_turns
from .errors import PreconditionError

DEFAULT_BUDGET = 100_000
DEFAULT_POLE_RANGE = 16


@dataclass(frozen=True)
class CircleCover:
    """Sorted, pairwise disjoint arcs (in turns, each ``(start, end)`` with end > start)."""

    arcs: tuple
    eps: float

    @classmethod
    def from_points(cls, turns, eps: float) -> "CircleCover":
        t = np.sort(wrap_turns(np.asarray(turns, dtype=float)))
        if t.size == 0:
            return cls((), eps)
        if eps >= 0.5:
            return cls(((0.0, 1.0),), eps)
        arcs = []
        for a, b in zip(t - eps, t + eps):
            if arcs and a <= arcs[-1][1]:
                arcs[-1][1] = max(arcs[-1][1], b)
            else:
                arcs.append([a, b])
        # close up across 0
        if len(arcs) > 1 and arcs[-1][1] - 1.0 >= arcs[0][0]:
            arcs[0][0] = arcs.pop()[0] - 1.0
        if arcs[0][1] - arcs[0][0] >= 1.0:
            return cls(((0.0, 1.0),), eps)
        return cls(tuple((float(a), float(b)) for a, b in arcs), eps)

    @property
    def covered(self) -> float:
        return min(1.0, sum(b - a for a, b in self.arcs))

    @property
    def is_full(self) -> bool:
        return self.covered >= 1.0


def max_gap(turns) -> float:
    """Largest circular gap between consecutive points (1.0 for a single point, nan if empty)."""
    t = np.sort(wrap_turns(np.asarray(turns, dtype=float)))
    if t.size == 0:
        return math.nan
    gaps = np.diff(np.append(t, t[0] + 1.0))
    return float(gaps.max())


@dataclass
class JuliaSample:
    inner_id: str
    depth: int
    native: np.ndarray  # points in the model's own coordinate, aligned with turns
    turns: np.ndarray
    cover: CircleCover
    exhausted: bool
    max_gap: float = field(default=math.nan)


# --------------------------------------------------------------------------
# real boundary map of z - cot(z)/2


def _g_offset(delta):
    """g(k pi + delta) - k pi for delta in (0, pi)."""
    return delta - 0.5 / np.tan(delta)


def solve_in_pole_interval(target, k):
    """delta in (0, pi) with g(k pi + delta) = target, vectorised over target and k.

    On each interval (k pi, (k+1) pi) the boundary map increases from -inf
    to +inf, so the root is unique. The solution is kept as (k, delta)
    because near a pole g' is huge and k pi + delta rounded to a double
    is no longer a solution.
    """
    rhs = np.asarray(target, dtype=float) - np.asarray(k, dtype=float) * math.pi
    lo = np.zeros(np.shape(rhs))
    hi = np.full(np.shape(rhs), math.pi)
    with np.errstate(divide="ignore"):
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            done = (mid <= lo) | (mid >= hi)
            if np.all(done):
                break
            below = _g_offset(mid) < rhs
            lo = np.where(below & ~done, mid, lo)
            hi = np.where(~below & ~done, mid, hi)
    r_lo = np.abs(_g_offset(np.where(lo > 0, lo, hi)) - rhs)
    r_hi = np.abs(_g_offset(hi) - rhs)
    return np.where((lo > 0) & (r_lo <= r_hi), lo, hi)


def _fatou_inner_prepoles(depth: int, budget: int, K: int):
    K = max(0, min(K, (budget - 1) // 2))
    ks = np.arange(-K, K + 1)
    level = ks * math.pi
    pts = [level]
    total = level.size
    exhausted = False
    for _ in range(depth):
        T, J = np.meshgrid(level, ks, indexing="ij")
        nxt = (J * math.pi + solve_in_pole_interval(T, J)).ravel()
        room = budget - total
        if nxt.size > room:
            nxt = nxt[:room]
            exhausted = True
        pts.append(nxt)
        total += nxt.size
        level = nxt
        if exhausted or room <= 0:
            break
    return np.concatenate(pts), exhausted


def julia_on_circle(inner: InnerFunctionSpec, depth: int, budget: int = DEFAULT_BUDGET,
                    eps: float = 0.01, K: int = DEFAULT_POLE_RANGE) -> JuliaSample:
    """Points near J(g) on the circle: pre-poles (z - cot(z)/2) or a preimage tree (Blaschke).

    For z - cot(z)/2 the poles k pi with |k| <= K (fewer if the budget is
    smaller) are pulled back through the same K pole intervals.
    """
    if depth < 0:
        raise PreconditionError("depth must be non-negative")
    if budget <= 0:
        empty = np.array([], dtype=float)
        return JuliaSample(inner.id, depth, empty, empty, CircleCover((), eps), True)
    if inner.formula_kind == "fatou_inner":
        native, exhausted = _fatou_inner_prepoles(depth, budget, K)
        turns = real_to_turns(native)
    elif inner.formula_kind == "blaschke_baker":
        tree = preimage_tree(inner, BoundaryPoint("unit_disk", 0.5), depth, budget)
        turns = tree.turns()
        native, exhausted = turns, tree.exhausted
    else:
        raise PreconditionError("julia_on_circle supports blaschke_baker and fatou_inner")
    turns = np.asarray(turns, dtype=float)
    order = np.argsort(turns, kind="stable")
    turns, native = turns[order], np.asarray(native)[order]
    return JuliaSample(inner.id, depth, native, turns,
                       CircleCover.from_points(turns, eps), exhausted, max_gap(turns))


def density_profile(inner: InnerFunctionSpec, depths, budget: int = DEFAULT_BUDGET):
    """(depth, max gap in turns) for each depth."""
    return [(d, julia_on_circle(inner, d, budget).max_gap) for d in depths]


# --------------------------------------------------------------------------
# preimages accumulating at the singularity


@dataclass(frozen=True)
class ProbeHit:
    window: float
    k: int  # pole interval (k pi, (k+1) pi)
    delta: float
    residual: float

    @property
    def eta(self) -> float:
        return self.k * math.pi + self.delta


def boundary_map_residual(k: int, delta: float, target: float) -> float:
    """|g(k pi + delta) - target| using the pi-periodicity of cot."""
    return abs(math.fsum([k * math.pi, delta, -0.5 / math.tan(delta), -target]))


def singularity_preimage_probe(inner: InnerFunctionSpec, target: float, windows=(10.0, 100.0, 1000.0),
                               count: int = 1, side: int = 1):
    """``count`` solutions of g(eta) = target beyond each window |eta| > R.

    One solution per pole interval, taking the first ``count`` intervals past R
    on the given side (+1 or -1). Returns ``(hits, failures)``.
    """
    if inner.formula_kind != "fatou_inner":
        raise PreconditionError("the singularity probe needs the half-plane model z - cot(z)/2")
    target = float(target)
    if not math.isfinite(target):
        raise PreconditionError("target must be a finite real; infinity is the Denjoy-Wolff point")
    if side not in (1, -1):
        raise PreconditionError("side must be +1 or -1")
    hits, failures = [], []
    if count <= 0:
        return hits, failures
    for R in windows:
        if side > 0:
            ks = math.ceil(R / math.pi) + np.arange(count)
        else:
            ks = -math.ceil(R / math.pi) - 1 - np.arange(count)
        deltas = solve_in_pole_interval(np.full(count, target), ks)
        for k, d in zip(ks.tolist(), deltas.tolist()):
            res = boundary_map_residual(k, d, target)
            if 0.0 < d < math.pi and res < 1e-10:
                hits.append(ProbeHit(float(R), int(k), d, res))
            else:
                failures.append((float(R), int(k), d, res))
    return hits, failures
