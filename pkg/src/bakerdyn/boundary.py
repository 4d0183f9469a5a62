"""Periodic points on the boundary of a Baker domain, and boundary orbit classes.

Periodic points come from branch chains of f^-n that map a target disk
strictly into itself: the chain then has a unique attracting fixed
point, found by iterating it, which is a repelling periodic point of f.
Candidate chains are read off from the roots of f^n(w) = centre inside
the disk; the forward orbit of such a root fixes the branch at each
step. Every reported point is re-verified by plain forward iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .branches import Disk, SingularData, lift_path, newton_preimage, singular_data
from .catalog import EntireMapSpec, eval_derivative, eval_derivative_array, eval_map, eval_map_array
from .cowen import component_labels
from .errors import BranchFailure, MapOverflowError, PreconditionError
from .rng import open_uniform


@dataclass(frozen=True)
class PeriodicBudgets:
    grid: int = 24  # Newton seeds per side of the disk's bounding square
    newton_iterations: int = 60
    boundary_samples: int = 32
    fixed_point_tol: float = 1e-12
    fixed_point_iterations: int = 200
    residual_tol: float = 1e-9
    minimality_tol: float = 1e-6
    max_candidates: int = 64

    def __post_init__(self):
        if self.grid < 1 or self.boundary_samples < 3 or self.fixed_point_iterations < 1:
            raise PreconditionError("budgets must be positive (boundary_samples >= 3)")


@dataclass
class PeriodicPointResult:
    found: bool
    point: complex | None = None
    period: int = 0
    multiplier: complex | None = None
    residual: float = math.nan
    boundary_witness: float = math.nan
    chain: list = field(default_factory=list, repr=False)  # F_k(centre), k = 0..n
    margin: float = -math.inf  # containment margin of the producing (or best) chain
    chains_tried: int = 0


def _iterate(spec, z, n):
    for _ in range(n):
        z = eval_map(spec, z)
    return z


def forward_residual(spec: EntireMapSpec, p: complex, n: int) -> float:
    try:
        return abs(_iterate(spec, p, n) - p)
    except MapOverflowError:
        return math.inf


def multiplier(spec: EntireMapSpec, p: complex, n: int) -> complex:
    m, z = 1.0 + 0j, complex(p)
    for _ in range(n):
        m *= eval_derivative(spec, z)
        z = eval_map(spec, z)
    return m


def minimal_period(spec: EntireMapSpec, p: complex, n: int, tol: float = 1e-6) -> int:
    for d in range(1, n + 1):
        if n % d == 0 and forward_residual(spec, p, d) < tol:
            return d
    return n


def boundary_witness(spec: EntireMapSpec, p: complex, n_max: int = 200) -> float:
    """Smallest dyadic radius around p whose 64-point probe circle reaches the Baker domain.

    An upper bound for dist(p, U); points of dU get the bottom of the ladder.
    """
    scale = max(1.0, abs(p))
    radii = scale * 2.0 ** np.arange(-24, 5)
    unit = np.exp(2j * math.pi * np.arange(64) / 64)
    lab = component_labels(spec, (p + radii[:, None] * unit[None, :]).ravel(), n_max)
    hit = (lab.reshape(len(radii), -1) >= 0).any(axis=1)
    return float(radii[np.argmax(hit)]) if hit.any() else math.inf


def _roots_in_disk(spec, disk: Disk, n: int, budgets: PeriodicBudgets) -> list:
    """Roots of f^n(w) = centre inside the disk, by vectorised Newton from a grid."""
    c, r = complex(disk.center), disk.radius
    s = (np.arange(budgets.grid) + 0.5) / budgets.grid * 2 - 1
    w = (c + r * (s[None, :] + 1j * s[:, None])).ravel()
    w = w[np.abs(w - c) < r]
    ok = np.ones(w.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(budgets.newton_iterations):
            z, d = w.copy(), np.ones(w.size, dtype=complex)
            for _ in range(n):
                d = d * eval_derivative_array(spec, z)
                z, over = eval_map_array(spec, z)
                ok &= ~over
            ok &= np.isfinite(z) & np.isfinite(d) & (np.abs(d) > 1e-12)
            w = np.where(ok, w - (z - c) / np.where(ok, d, 1.0), w)
            ok &= np.isfinite(w)
        z = w.copy()
        for _ in range(n):
            z, over = eval_map_array(spec, z)
            ok &= ~over
        ok &= np.abs(z - c) < 1e-10 * max(1.0, abs(c))
    roots = []
    for q in w[ok & (np.abs(w - c) < r)]:
        if all(abs(q - p) > 1e-9 for p in roots):
            roots.append(complex(q))
    roots.sort(key=lambda q: abs(q - c))
    return roots


def _chain_from_root(spec, root, n) -> list:
    """[F_0(c), F_1(c), ..., F_n(c)] where F_n(c) = root, read off the forward orbit."""
    orbit = [complex(root)]
    for _ in range(n):
        orbit.append(eval_map(spec, orbit[-1]))
    return orbit[::-1]


def containment_margin(spec, disk: Disk, chain: list, samples: int) -> float:
    """r - max |F_n(v) - c| over pulled-back boundary samples v (negative if not inside)."""
    c = complex(disk.center)
    t = np.linspace(0.0, 1.0, 5)
    worst = 0.0
    for v in disk.boundary(samples):
        path = c + t * (v - c)
        for w in chain[1:]:
            path = lift_path(spec, path, w)
        worst = max(worst, abs(path[-1] - c))
    return disk.radius - worst


def _apply_chain(spec, z, seeds):
    out = []
    for s in seeds:
        z = newton_preimage(spec, z, s)
        out.append(z)
    return out


def _fixed_point(spec, chain, budgets):
    """Iterate z -> F_n(z) from F_n(c), reseeding each branch step from the previous pass."""
    seeds = chain[1:]
    z = seeds[-1]
    for _ in range(budgets.fixed_point_iterations):
        seeds = _apply_chain(spec, z, seeds)
        z_new = seeds[-1]
        if abs(z_new - z) < budgets.fixed_point_tol * max(1.0, abs(z)):
            return z_new
        z = z_new
    return z


def _check_region(spec, disk: Disk, sing: SingularData):
    gap = float(sing.distance(disk.center)[0])
    if gap <= disk.radius + sing.exclusion_radius:
        raise PreconditionError(f"target disk meets the postsingular exclusion zone of {spec.id}")


def periodic_candidates(spec: EntireMapSpec, disk: Disk, max_period: int,
                        budgets: PeriodicBudgets | None = None, sing: SingularData | None = None):
    """All verified periodic points produced by contracting chains of length <= max_period.

    Returns ``(results, best_margin, chains_tried)``.
    """
    budgets = budgets or PeriodicBudgets()
    if max_period < 1:
        raise PreconditionError("max_period must be at least 1")
    sing = sing or singular_data(spec)
    _check_region(spec, disk, sing)
    results, best, tried = [], -math.inf, 0
    for n in range(1, max_period + 1):
        for root in _roots_in_disk(spec, disk, n, budgets)[: budgets.max_candidates]:
            tried += 1
            chain = _chain_from_root(spec, root, n)
            try:
                margin = containment_margin(spec, disk, chain, budgets.boundary_samples)
            except BranchFailure:
                continue
            best = max(best, margin)
            if margin <= 0:
                continue
            try:
                p = _fixed_point(spec, chain, budgets)
            except BranchFailure:
                continue
            res = _verify(spec, p, n, budgets)
            if res is not None:
                res.chain, res.margin = chain, margin
                if all(abs(res.point - q.point) > 1e-6 for q in results):
                    results.append(res)
    return results, best, tried


def _verify(spec, p, n, budgets):
    if forward_residual(spec, p, n) >= budgets.residual_tol:
        return None
    k = minimal_period(spec, p, n, budgets.minimality_tol)
    res = forward_residual(spec, p, k)
    if res >= budgets.residual_tol:
        return None
    m = multiplier(spec, p, k)
    if not abs(m) > 1.0:
        return None
    return PeriodicPointResult(True, complex(p), k, m, res, boundary_witness(spec, p))


def find_periodic_point(spec: EntireMapSpec, target_region: Disk, max_period: int,
                        budgets: PeriodicBudgets | None = None,
                        sing: SingularData | None = None) -> PeriodicPointResult:
    """First verified periodic point (smallest chain length) whose chain contracts the region."""
    results, best, tried = periodic_candidates(spec, target_region, max_period, budgets, sing)
    if not results:
        return PeriodicPointResult(False, margin=best, chains_tried=tried)
    r = results[0]
    r.chains_tried = tried
    return r


# --------------------------------------------------------------------------
# census


@dataclass
class Census:
    points: list
    disks_probed: int
    disks_with_point: int

    @property
    def coverage(self) -> float:
        return self.disks_with_point / self.disks_probed if self.disks_probed else 0.0


def census_disks(region, nx: int, ny: int) -> list:
    xmin, xmax, ymin, ymax = region
    dx, dy = (xmax - xmin) / nx, (ymax - ymin) / ny
    r = 0.5 * math.hypot(dx, dy)
    return [Disk(complex(xmin + (i + 0.5) * dx, ymin + (j + 0.5) * dy), r)
            for j in range(ny) for i in range(nx)]


def periodic_census(spec: EntireMapSpec, region, count: int, max_period: int,
                    budgets: PeriodicBudgets | None = None, grid=(3, 8),
                    threads: int = 1) -> Census:
    """Periodic points from a grid of target disks covering ``region``.

    Disks meeting the postsingular exclusion zone are skipped. The disks
    overhang the region's edges; points outside the region are dropped.
    The rest are merged in disk order, dropping any within 1e-6 of an
    earlier one, then ordered by period and cut at ``count``.
    """
    xmin, xmax, ymin, ymax = region
    sing = singular_data(spec)
    disks = []
    for d in census_disks(region, *grid):
        try:
            _check_region(spec, d, sing)
            disks.append(d)
        except PreconditionError:
            pass

    def probe(d):
        return periodic_candidates(spec, d, max_period, budgets, sing)[0]

    per_disk = parallel_map(probe, disks, threads)
    points = []
    for found in per_disk:
        for r in found:
            if not (xmin <= r.point.real <= xmax and ymin <= r.point.imag <= ymax):
                continue
            if all(abs(r.point - q.point) > 1e-6 for q in points):
                points.append(r)
    points.sort(key=lambda r: r.period)  # stable: disk order within a period
    return Census(points[:count], len(disks), sum(1 for f in per_disk if f))


# --------------------------------------------------------------------------
# boundary orbit classes

YES, NO, UNDECIDED = "yes", "no", "undecided"


@dataclass
class BoundaryOrbitClass:
    start: complex
    dw_set_member: str
    caratheodory_member: str
    evidence: dict = field(default_factory=dict)


def _access_holds(predicate: str, tail: np.ndarray, threshold: float) -> bool:
    if predicate == "re_to_plus_infinity":
        v = tail.real
    elif predicate == "re_to_minus_infinity":
        v = -tail.real
    elif predicate == "im_to_plus_infinity":
        v = tail.imag
    elif predicate == "im_to_infinity":
        v = np.abs(tail.imag)
    else:
        raise ValueError(f"unknown access predicate {predicate!r}")
    return bool(np.all(np.diff(v) > 0) and v[-1] > threshold)


def classify_boundary_orbit(spec: EntireMapSpec, x: complex, horizon: int = 500,
                            radius: float = 50.0, sustain: int = 5,
                            periodic_tol: float = 1e-9) -> BoundaryOrbitClass:
    """Tri-state membership of the Denjoy-Wolff and Caratheodory sets at a finite horizon.

    ``radius`` is both the spherical escape radius and the access threshold;
    the last ``sustain`` recorded iterates must satisfy a criterion for a yes.
    """
    pts = [complex(x)]
    overflow = periodic = False
    for _ in range(horizon):
        try:
            z = eval_map(spec, pts[-1])
        except MapOverflowError:
            overflow = True
            break
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            overflow = True
            break
        pts.append(z)
        if any(abs(z - q) < periodic_tol * max(1.0, abs(z)) for q in pts[-9:-1]):
            periodic = True
            break
    orbit = np.array(pts)
    tail = orbit[-sustain:]
    mods = np.abs(orbit)
    if periodic:
        dw = NO
    elif overflow:
        # the next iterate has modulus beyond exp(overflow_guard)
        dw = YES
    elif len(orbit) > sustain and np.all(np.abs(tail) > radius):
        dw = YES
    else:
        dw = UNDECIDED
    predicate = spec.baker_meta.access_predicate_id
    if dw == NO:
        car = NO
    elif len(tail) >= 2 and _access_holds(predicate, tail, radius):
        car = YES
    else:
        car = UNDECIDED
    evidence = {"steps": len(orbit) - 1, "overflow": overflow, "periodic": periodic,
                "max_modulus": float(mods.max()), "last": complex(orbit[-1]),
                "predicate": predicate}
    return BoundaryOrbitClass(complex(x), dw, car, evidence)


def sample_boundary_points(spec: EntireMapSpec, window, count: int, seed: int = 0,
                           tol: float = 1e-12, n_max: int = 200) -> np.ndarray:
    """Points of dU located by bisection between a U point and a non-U point of the window.

    Candidate pairs are drawn from the counter-based stream, so the sample
    depends only on (window, count, seed).
    """
    xmin, xmax, ymin, ymax = window
    out, start = [], 0
    while len(out) < count and start < 1000 * max(count, 1):
        u = open_uniform(seed, start, 4 * 256).reshape(256, 4)
        start += 4 * 256
        a = xmin + (xmax - xmin) * u[:, 0] + 1j * (ymin + (ymax - ymin) * u[:, 1])
        b = xmin + (xmax - xmin) * u[:, 2] + 1j * (ymin + (ymax - ymin) * u[:, 3])
        la = component_labels(spec, a, n_max) >= 0
        lb = component_labels(spec, b, n_max) >= 0
        for i in np.flatnonzero(la != lb):
            lo, hi = (a[i], b[i]) if la[i] else (b[i], a[i])  # lo in U
            while abs(hi - lo) > tol:
                mid = (lo + hi) / 2
                if component_labels(spec, [mid], n_max)[0] >= 0:
                    lo = mid
                else:
                    hi = mid
            out.append(complex(hi))
            if len(out) == count:
                break
    return np.array(out, dtype=complex)
