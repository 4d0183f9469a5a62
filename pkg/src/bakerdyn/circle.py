"""Boundary dynamics of the model inner functions on the circle / real line.

Disk-model points are stored as turns in [0, 1); half-plane points as
extended reals (``math.inf`` is the point at infinity). The two are
related by the Cayley map ``M(z) = i(1+z)/(1-z)``, which on the circle
reads ``t -> -cot(pi t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .catalog import POLE_TOL, InnerFunctionSpec
from .errors import PreconditionError
from .rng import chunk_ranges, open_uniform

BRACKET_INTERVALS = 4096
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryPoint:
    model: str  # "unit_disk" | "upper_half_plane"
    coordinate: float

    def __post_init__(self):
        if self.model == "unit_disk":
            object.__setattr__(self, "coordinate", float(wrap_turns(self.coordinate)))

    @property
    def turns(self) -> float:
        if self.model == "unit_disk":
            return self.coordinate
        return float(real_to_turns(self.coordinate))

    def as_complex(self) -> complex:
        """Position on the unit circle (disk model) or on the real line."""
        if self.model == "unit_disk":
            a = 2 * math.pi * self.coordinate
            return complex(math.cos(a), math.sin(a))
        return complex(self.coordinate)


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    stderr: float
    samples: int
    iterations: int
    pole_hits: int = 0

    @classmethod
    def bernoulli(cls, hits: int, samples: int, iterations: int, pole_hits: int = 0):
        v = hits / samples
        return cls(v, math.sqrt(v * (1 - v) / samples), samples, iterations, pole_hits)


def wrap_turns(t):
    t = np.mod(t, 1.0)
    # mod can round a tiny negative up to exactly 1.0
    return np.where(t >= 1.0, 0.0, t)


def turns_to_real(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        x = -1.0 / np.tan(math.pi * t)
    return np.where(wrap_turns(t) == 0.0, np.inf, x)


def real_to_turns(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.isinf(x), 0.0, wrap_turns(0.5 + np.arctan(x) / math.pi))


def circular_distance(a, b):
    d = np.abs(wrap_turns(np.asarray(a) - np.asarray(b)))
    return np.minimum(d, 1.0 - d)


def cayley(z):
    """The disk-to-half-plane map i(1+z)/(1-z)."""
    return 1j * (1 + z) / (1 - z)


def inverse_cayley(w):
    return (w - 1j) / (w + 1j)


def boundary_step(inner: InnerFunctionSpec, u: np.ndarray):
    """One step of the boundary map in native coordinates.

    Returns ``(values, pole)``; ``pole`` marks inputs within 1e-12 of a pole of
    ``cot`` (their value is set to infinity).
    """
    u = np.asarray(u, dtype=float)
    kind = inner.formula_kind
    pole = np.zeros(u.shape, dtype=bool)
    if kind == "blaschke_baker":
        th = 2 * math.pi * u
        out = 2 * th - 2 * np.arctan2(np.sin(2 * th), 3 + np.cos(2 * th))
        return wrap_turns(out / (2 * math.pi)), pole
    finite = np.isfinite(u)
    if kind == "moebius_hyperbolic":
        return np.where(finite, inner.params["lam"] * u, np.inf), pole
    if kind == "moebius_parabolic":
        return np.where(finite, u + inner.params["sign"], np.inf), pole
    # fatou_inner on the real line
    k = np.rint(np.where(finite, u, 0.0) / math.pi)
    pole = finite & (np.abs(u - k * math.pi) < POLE_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = u - 0.5 / np.tan(u)
    out = np.where(finite & ~pole, out, np.inf)
    return out, pole


def circle_map_turns(inner: InnerFunctionSpec, t: np.ndarray) -> np.ndarray:
    """The boundary map conjugated to turns on the unit circle."""
    if inner.domain_model == "unit_disk":
        return boundary_step(inner, t)[0]
    return real_to_turns(boundary_step(inner, turns_to_real(t))[0])


@dataclass
class CircleOrbit:
    points: list
    pole_hit: bool


def iterate_circle(inner: InnerFunctionSpec, p0: BoundaryPoint, n: int) -> CircleOrbit:
    if p0.model != inner.domain_model:
        raise PreconditionError(f"{inner.id} lives on {inner.domain_model}, got {p0.model}")
    pts = [p0]
    u = np.array([p0.coordinate])
    for _ in range(n):
        if np.isinf(u[0]):
            # the point at infinity is the Denjoy-Wolff point of every half-plane model
            pts.append(BoundaryPoint(p0.model, math.inf))
            continue
        u, pole = boundary_step(inner, u)
        if pole[0]:
            return CircleOrbit(pts, True)
        pts.append(BoundaryPoint(p0.model, float(u[0])))
    return CircleOrbit(pts, False)


def _near_dw(inner: InnerFunctionSpec, u: np.ndarray, arc_eps: float) -> np.ndarray:
    if inner.domain_model == "unit_disk":
        # geodesic distance on the unit circle, in radians
        return 2 * math.pi * circular_distance(u, 0.0) < arc_eps
    return np.abs(u) > 1.0 / arc_eps


def _sample_native(inner, seed, start, count, t_lo=0.0, t_hi=1.0):
    t = t_lo + (t_hi - t_lo) * open_uniform(seed, start, count)
    if inner.domain_model == "unit_disk":
        return wrap_turns(t)
    return turns_to_real(t)


def dw_convergence_fraction(inner: InnerFunctionSpec, samples: int, n: int, arc_eps: float,
                            seed: int = 0, threads: int = 1) -> MeasureEstimate:
    """Fraction of uniform boundary starts whose n-th iterate is within ``arc_eps`` of the DW point."""
    if samples < 1:
        raise PreconditionError("samples must be positive")

    def chunk(rng_range):
        start, count = rng_range
        u = _sample_native(inner, seed, start, count)
        poled = np.zeros(count, dtype=bool)
        for _ in range(n):
            u, pole = boundary_step(inner, u)
            poled |= pole
        good = _near_dw(inner, u, arc_eps) & ~poled
        return int(good.sum()), int(poled.sum())

    parts = parallel_map(chunk, chunk_ranges(samples), threads)
    return MeasureEstimate.bernoulli(sum(p[0] for p in parts), samples, n,
                                     sum(p[1] for p in parts))


def _arc_turns(inner: InnerFunctionSpec, arc):
    a, b = float(arc[0]), float(arc[1])
    if not b > a:
        raise PreconditionError("arc must have positive length (a < b)")
    if inner.domain_model == "unit_disk":
        if not (0.0 < a and b < 1.0):
            raise PreconditionError("disk arc must lie inside (0, 1) turns, away from the DW point 1")
        return a, b
    if not (math.isfinite(a) and math.isfinite(b)):
        raise PreconditionError("half-plane arc must be a bounded interval (DW point is infinity)")
    return float(real_to_turns(a)), float(real_to_turns(b))


def recurrence_fraction(inner: InnerFunctionSpec, arc, samples: int, n: int,
                        seed: int = 0, threads: int = 1) -> MeasureEstimate:
    """Fraction of starts in ``arc`` whose orbit is back in ``arc`` at some step 1..n."""
    if samples < 1:
        raise PreconditionError("samples must be positive")
    t_lo, t_hi = _arc_turns(inner, arc)
    a, b = float(arc[0]), float(arc[1])

    def chunk(rng_range):
        start, count = rng_range
        u = _sample_native(inner, seed, start, count, t_lo, t_hi)
        back = np.zeros(count, dtype=bool)
        poled = np.zeros(count, dtype=bool)
        for _ in range(n):
            u, pole = boundary_step(inner, u)
            poled |= pole
            back |= (u >= a) & (u <= b) & ~poled
        return int(back.sum()), int(poled.sum())

    parts = parallel_map(chunk, chunk_ranges(samples), threads)
    return MeasureEstimate.bernoulli(sum(p[0] for p in parts), samples, n,
                                     sum(p[1] for p in parts))


def invariant_halves_measure(inner: InnerFunctionSpec, samples: int = 100_000, seed: int = 0,
                             threads: int = 1):
    """Lebesgue measure (pulled back to the circle) of the invariant sets {x > 0} and {x < 0}.

    Both sets are invariant under x -> lambda x; each has measure 1/2, so the
    boundary map is not ergodic.
    """
    if inner.formula_kind != "moebius_hyperbolic" or not inner.params.get("lam", 0) > 1:
        raise PreconditionError("invariant halves are defined for the hyperbolic model lambda z, lambda > 1")
    lam = inner.params["lam"]

    def chunk(rng_range):
        start, count = rng_range
        x = _sample_native(inner, seed, start, count)
        pos, neg = x > 0, x < 0
        # invariance of both halves under one step
        if not (np.array_equal(lam * x > 0, pos) and np.array_equal(lam * x < 0, neg)):
            raise AssertionError("half-line not invariant")
        return int(pos.sum()), int(neg.sum())

    parts = parallel_map(chunk, chunk_ranges(samples), threads)
    return (MeasureEstimate.bernoulli(sum(p[0] for p in parts), samples, 0),
            MeasureEstimate.bernoulli(sum(p[1] for p in parts), samples, 0))


# --------------------------------------------------------------------------
# preimages


def _signed_turns(d):
    return wrap_turns(np.asarray(d) + 0.5) - 0.5


def circle_preimages(inner: InnerFunctionSpec, targets, intervals: int = BRACKET_INTERVALS,
                     tol: float = BISECT_TOL, residual_tol: float = 1e-9) -> list:
    """All solutions t of G(t) = target (G the boundary map in turns), per target.

    Each of ``intervals`` equal subintervals of the circle is scanned for a
    sign change of the wrapped difference and refined by bisection.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    nodes = np.arange(intervals + 1) / intervals
    gn = circle_map_turns(inner, nodes)
    h = _signed_turns(gn[None, :] - targets[:, None])
    lo_v, hi_v = h[:, :-1], h[:, 1:]
    bracket = (np.sign(lo_v) != np.sign(hi_v)) & (np.abs(hi_v - lo_v) < 0.5)
    bracket |= lo_v == 0.0
    ti, ii = np.nonzero(bracket)
    lo = nodes[ii].copy()
    hi = nodes[ii + 1].copy()
    tau = targets[ti]
    flo = h[ti, ii]
    while True:
        wide = (hi - lo) > tol
        if not wide.any():
            break
        mid = 0.5 * (lo + hi)
        fm = _signed_turns(circle_map_turns(inner, mid) - tau)
        left = (np.sign(fm) == np.sign(flo)) & (fm != 0.0)
        lo = np.where(wide & left, mid, lo)
        flo = np.where(wide & left, fm, flo)
        hi = np.where(wide & ~left, mid, hi)
    roots = wrap_turns(0.5 * (lo + hi))
    resid = np.abs(_signed_turns(circle_map_turns(inner, roots) - tau))
    out = [[] for _ in targets]
    for t_idx, r, ok in zip(ti, roots, resid < residual_tol):
        if ok:
            out[t_idx].append(float(r))
    return [_dedupe_turns(sorted(o)) for o in out]


def _dedupe_turns(ts, eps=1e-10):
    res = []
    for t in ts:
        if not res or circular_distance(t, res[-1]) > eps:
            res.append(t)
    if len(res) > 1 and circular_distance(res[0], res[-1]) <= eps:
        res.pop()
    return res


def _distance_to_set(t, sorted_turns):
    i = np.searchsorted(sorted_turns, t)
    near = sorted_turns[[(i - 1) % len(sorted_turns), i % len(sorted_turns)]]
    return float(circular_distance(t, near).min())


@dataclass
class PreimageSet:
    points: list  # BoundaryPoint
    levels: list  # depth at which each point was found
    exhausted: bool

    def turns(self) -> np.ndarray:
        return np.array([p.turns for p in self.points])


def preimage_tree(inner: InnerFunctionSpec, target: BoundaryPoint, depth: int,
                  budget: int = 100_000) -> PreimageSet:
    """Solutions of g^k(xi) = target on the boundary for k = 0..depth, capped at ``budget`` points."""
    if target.model != inner.domain_model:
        raise PreconditionError("target lives in a different model")
    model = inner.domain_model
    level = [target.turns]
    pts, lv = [target], [0]
    exhausted = False
    for k in range(1, depth + 1):
        found = circle_preimages(inner, level)
        seen = np.sort([p.turns for p in pts])
        nxt = [t for t in _dedupe_turns(sorted({t for group in found for t in group}))
               if _distance_to_set(t, seen) > 1e-10]
        room = budget - len(pts)
        if len(nxt) > room:
            nxt, exhausted = nxt[:max(room, 0)], True
        for t in nxt:
            coord = t if model == "unit_disk" else float(turns_to_real(t))
            pts.append(BoundaryPoint(model, coord))
            lv.append(k)
        level = nxt
        if exhausted or not level:
            break
    return PreimageSet(pts, lv, exhausted)


def max_gap_turns(turns) -> float:
    """Largest gap between circularly consecutive points (1.0 for fewer than two points)."""
    t = np.sort(np.asarray(turns, dtype=float))
    if t.size < 2:
        return 1.0
    gaps = np.diff(np.concatenate([t, [t[0] + 1.0]]))
    return float(gaps.max())
