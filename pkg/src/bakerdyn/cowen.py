"""Numerical Cowen type of a catalog Baker domain.

The hyperbolic density of U is replaced by the quasi-hyperbolic one,
1/dist(z, dU), which agrees with it up to a factor 4 on simply connected
domains. dist(z, dU) is estimated by probing circles of dyadic radii
around z and asking the dynamics which component each probe belongs to.

Membership of U is decided by forward iteration: a point is in U when
its orbit enters the map's absorbing region (whose components are
labelled), and is not when the orbit overflows or never gets there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .catalog import EntireMapSpec, eval_map
from .catalog import eval_map_array
from .errors import BoundaryGapError, PreconditionError

DIRECTIONS = 64
RADII_PER_BATCH = 8
DEFAULT_PROBE_BUDGET = DIRECTIONS * 128
DEFAULT_LABEL_ITERATIONS = 200
DEFAULT_DEPTH = 64

TO_ZERO = 0.05
BOUNDED_BELOW = 0.2
MAX_SPREAD = 3.0


def component_labels(spec: EntireMapSpec, z, n_max: int = DEFAULT_LABEL_ITERATIONS) -> np.ndarray:
    """Absorbing-region component each orbit first lands in, or -1."""
    z = np.array(z, dtype=complex).ravel()
    region = spec.baker_meta.absorbing_hint
    lab = region.label(z).astype(np.int64)
    act = np.flatnonzero(lab < 0)
    cur = z[act]
    for _ in range(n_max):
        if act.size == 0:
            break
        cur, over = eval_map_array(spec, cur)
        over |= ~np.isfinite(cur)
        keep = ~over
        act, cur = act[keep], cur[keep]
        hit = region.label(cur)
        lab[act] = hit
        live = hit < 0
        act, cur = act[live], cur[live]
    return lab


def _first_radius(z: complex) -> float:
    scale = max(1.0, abs(z))
    return 2.0 ** (math.floor(math.log2(scale)) - 20)


def boundary_gap(spec: EntireMapSpec, z: complex, probe_budget: int = DEFAULT_PROBE_BUDGET,
                 n_max: int = DEFAULT_LABEL_ITERATIONS) -> float:
    """Estimated Euclidean distance from ``z`` to the boundary of its Baker domain component.

    Probes 64 directions on circles of radius r0, 2 r0, 4 r0, ... and
    returns the largest radius whose probes all carry ``z``'s label.
    """
    if probe_budget < DIRECTIONS:
        raise BoundaryGapError(f"probe_budget {probe_budget} cannot cover one circle of "
                               f"{DIRECTIONS} directions; raise it")
    z = complex(z)
    own = int(component_labels(spec, [z], n_max)[0])
    if own < 0:
        raise BoundaryGapError(f"{z!r} did not reach the absorbing region of {spec.id} in "
                               f"{n_max} steps; raise n_max or pick a point inside U")
    unit = np.exp(2j * math.pi * np.arange(DIRECTIONS) / DIRECTIONS)
    r0 = _first_radius(z)
    n_radii = probe_budget // DIRECTIONS
    passed = 0.0
    for b in range(0, n_radii, RADII_PER_BATCH):
        k = np.arange(b, min(b + RADII_PER_BATCH, n_radii))
        radii = r0 * 2.0 ** k
        probes = z + radii[:, None] * unit[None, :]
        same = (component_labels(spec, probes, n_max) == own).reshape(probes.shape).all(axis=1)
        if not same.all():
            first_bad = int(np.argmin(same))
            if first_bad == 0 and b == 0:
                raise BoundaryGapError(f"already the smallest probe circle (r={r0:g}) around "
                                       f"{z!r} leaves the component; z is too close to the boundary")
            return float(radii[first_bad - 1]) if first_bad > 0 else passed
        passed = float(radii[-1])
    raise BoundaryGapError(f"no boundary found within radius {passed:g} of {z!r}; "
                           f"raise probe_budget")


@dataclass
class IncrementSeries:
    start: complex
    increments: np.ndarray
    boundary_gaps: np.ndarray
    points: np.ndarray

    def tail_statistic(self) -> float:
        """Median of the last quartile of the increments."""
        d = self.increments
        q = max(1, math.ceil(len(d) / 4))
        return float(np.median(d[-q:]))


def increment_series(spec: EntireMapSpec, z0: complex, depth: int = DEFAULT_DEPTH,
                     probe_budget: int = DEFAULT_PROBE_BUDGET,
                     n_max: int = DEFAULT_LABEL_ITERATIONS) -> IncrementSeries:
    """Quasi-hyperbolic step lengths d_k = |z_{k+1} - z_k| / gap(z_k) along the orbit of z0."""
    if depth < 2:
        raise PreconditionError("depth must be at least 2")
    pts = [complex(z0)]
    for _ in range(depth - 1):
        pts.append(eval_map(spec, pts[-1]))
    pts = np.array(pts)
    gaps = np.array([boundary_gap(spec, p, probe_budget, n_max) for p in pts[:-1]])
    d = np.abs(np.diff(pts)) / gaps
    return IncrementSeries(complex(z0), d, gaps, pts)


@dataclass
class CowenDecision:
    map_id: str
    decision: str  # a Cowen type or "undecided"
    L: list
    starts: list
    reason: str
    series: list = field(default_factory=list, repr=False)


def _depth_into_region(spec: EntireMapSpec, z: complex) -> float:
    reg = spec.baker_meta.absorbing_hint
    if reg.kind == "left_half_plane":
        return reg.offset - z.real
    return z.real - reg.offset


def decide(L) -> tuple:
    """Apply the three-way rule to per-start statistics ordered by increasing depth."""
    L = np.asarray(L, dtype=float)
    if np.all(L < TO_ZERO):
        return "doubly_parabolic", f"every L < {TO_ZERO}"
    lo, hi = float(L.min()), float(L.max())
    if lo > BOUNDED_BELOW and hi / lo < MAX_SPREAD:
        return "hyperbolic", f"min L = {lo:.3g} > {BOUNDED_BELOW} with spread {hi / lo:.3g}"
    if np.all(L > 0) and np.all(np.diff(L) < 0) and L[0] / L[-1] >= MAX_SPREAD:
        return "simply_parabolic", f"L falls by a factor {L[0] / L[-1]:.3g} with depth"
    return "undecided", "L sits between the thresholds"


def classify_baker_type(spec: EntireMapSpec, starts=None, depth: int = DEFAULT_DEPTH,
                        probe_budget: int = DEFAULT_PROBE_BUDGET, threads: int = 1) -> CowenDecision:
    starts = [complex(s) for s in (starts if starts is not None else spec.baker_meta.classify_starts)]
    if len(starts) < 3:
        raise PreconditionError("need at least three starts at increasing depth")
    starts.sort(key=lambda s: _depth_into_region(spec, s))
    series = parallel_map(lambda s: increment_series(spec, s, depth, probe_budget), starts, threads)
    L = [s.tail_statistic() for s in series]
    decision, reason = decide(L)
    return CowenDecision(spec.id, decision, L, starts, reason, series)
