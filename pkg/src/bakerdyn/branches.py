"""Local inverse branches of catalog maps and their contraction.

Branches are realised by Newton's method, continued along paths with a
predictor-corrector whose step is halved until the new point stays in
the disk where the current branch is univalent. A path that runs into a
critical value therefore forces the step below ``MIN_STEP`` and raises
an obstruction instead of silently hopping to another branch.

The postsingular set P(f) is represented by finitely many forward orbit
samples of the critical values; distances to that sample set stand in
for the boundary distance of W = C \\ P(f).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import (EntireMapSpec, InnerFunctionSpec, eval_derivative,
                      eval_derivative_array, eval_map, eval_map_array, eval_second_derivative)
from .errors import BranchFailure, MapOverflowError, PathLiftObstruction, PreconditionError

LATTICE_K = 8
ORBIT_DEPTH = 50
ORBIT_CUTOFF = 1e8
EXCLUSION_RADIUS = 1e-3
MIN_DERIVATIVE = 1e-8
NEWTON_MAX_ITER = 100
MIN_STEP = 1e-12
SCAN_SIZE = 32


# --------------------------------------------------------------------------
# singular data


def _critical_point(spec: EntireMapSpec, k: int) -> complex:
    two_pi_i = 2j * math.pi
    kind = spec.formula_kind
    if kind in ("baker_abel", "fatou"):
        return two_pi_i * k
    if kind == "herman":
        return 1j * math.pi * (2 * k + 1)
    if kind == "bergweiler":
        return math.log(2.0) + two_pi_i * k
    return math.log(2.0) + 1j * math.pi * (2 * k + 1)


def _orbit_samples(step, seeds, depth, cutoff):
    out = []
    for s in seeds:
        z = s
        for _ in range(depth):
            try:
                z = step(z)
            except (MapOverflowError, ZeroDivisionError, ValueError):
                break
            if not abs(z) <= cutoff:
                break
            out.append(z)
    return out


@dataclass(frozen=True)
class SingularData:
    map_id: str
    critical_points: tuple
    critical_values: tuple
    asymptotic_values: tuple
    postsingular_samples: np.ndarray = field(repr=False)
    exclusion_radius: float = EXCLUSION_RADIUS

    def distance(self, z) -> np.ndarray:
        """Distance from each z to the nearest postsingular sample."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        P = self.postsingular_samples
        return np.abs(z[:, None] - P[None, :]).min(axis=1)

    def distance_to_critical_values(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        cv = np.asarray(self.critical_values)
        return np.abs(z[:, None] - cv[None, :]).min(axis=1)


def singular_data(spec: EntireMapSpec, K: int = LATTICE_K, depth: int = ORBIT_DEPTH,
                  cutoff: float = ORBIT_CUTOFF,
                  exclusion_radius: float = EXCLUSION_RADIUS) -> SingularData:
    """Critical lattice |k| <= K, its values, and their forward orbits up to ``depth``.

    None of the catalog maps has a finite asymptotic value: f(z) - az is
    a single exponential, which tends to 0 or infinity along any path to
    infinity, and the linear term then forces f to infinity.
    """
    cps = tuple(_critical_point(spec, k) for k in range(-K, K + 1))
    cvs = tuple(eval_map(spec, c) for c in cps)
    samples = list(cvs) + _orbit_samples(lambda z: eval_map(spec, z), cvs, depth, cutoff)
    return SingularData(spec.id, cps, cvs, (), np.array(samples, dtype=complex), exclusion_radius)


# --------------------------------------------------------------------------
# single preimages


def newton_preimage(spec: EntireMapSpec, target: complex, seed: complex, tol: float = 1e-12,
                    max_iter: int = NEWTON_MAX_ITER) -> complex:
    """Solve f(w) = target by Newton's method from ``seed``.

    ``tol`` is relative to max(1, |target|).
    """
    target = complex(target)
    w = complex(seed)
    scale = max(1.0, abs(target))
    for _ in range(max_iter):
        try:
            r = eval_map(spec, w) - target
            d = eval_derivative(spec, w)
        except MapOverflowError as exc:
            raise BranchFailure(f"Newton iterate {w!r} overflowed for {spec.id}") from exc
        # no local branch at a critical point, even if it solves the equation
        if abs(d) < MIN_DERIVATIVE:
            raise BranchFailure(f"|f'| = {abs(d):.2e} < {MIN_DERIVATIVE:g} at {w!r}: "
                                f"too close to a critical point of {spec.id}")
        if abs(r) < tol * scale:
            return w
        w = w - r / d
    raise BranchFailure(f"Newton did not reach |f(w) - target| < {tol:g} in {max_iter} steps")


def preimage_scan(spec: EntireMapSpec, target: complex, around: complex, half_width: float = math.pi,
                  size: int = SCAN_SIZE, iterations: int = 60, tol: float = 1e-10) -> np.ndarray:
    """Distinct preimages of ``target`` reached by Newton from a size x size grid around ``around``."""
    s = (np.arange(size) + 0.5) / size * 2 - 1
    w = (around + half_width * (s[None, :] + 1j * s[:, None])).ravel()
    scale = max(1.0, abs(target))
    ok = np.ones(w.size, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(iterations):
            fw, over = eval_map_array(spec, w)
            d = eval_derivative_array(spec, w)
            ok &= ~over & (np.abs(d) >= MIN_DERIVATIVE) & np.isfinite(fw)
            w = np.where(ok, w - (fw - target) / np.where(ok, d, 1.0), w)
        fw, over = eval_map_array(spec, w)
        ok &= ~over & (np.abs(fw - target) < tol * scale)
    roots = np.sort_complex(w[ok])
    out = []
    for r in roots:
        if all(abs(r - q) > 1e-7 * max(1.0, abs(r)) for q in out):
            out.append(r)
    return np.array(out, dtype=complex)


def nearest_preimage(spec: EntireMapSpec, target: complex, anchor: complex,
                     half_width: float = math.pi) -> complex:
    roots = preimage_scan(spec, target, anchor, half_width)
    if roots.size == 0:
        raise BranchFailure(f"no preimage of {target!r} found within {half_width:g} of {anchor!r}")
    best = roots[np.argmin(np.abs(roots - anchor))]
    return newton_preimage(spec, target, best)


# --------------------------------------------------------------------------
# path lifting


def _univalence_radius(spec, w):
    d2 = abs(eval_second_derivative(spec, w))
    d1 = abs(eval_derivative(spec, w))
    return math.inf if d2 == 0 else d1 / d2


def lift_path(spec: EntireMapSpec, path, w_start: complex, tol: float = 1e-12,
              initial_step: float = 0.125, min_step: float = MIN_STEP) -> np.ndarray:
    """Continue the branch through ``w_start`` along the polyline ``path``.

    Returns one lifted point per path vertex. The parameter reported by an
    obstruction is ``segment_index + t`` with t in [0, 1].
    """
    path = [complex(p) for p in path]
    w = complex(w_start)
    scale0 = max(1.0, abs(path[0]))
    if abs(eval_map(spec, w) - path[0]) > 1e-8 * scale0:
        raise PreconditionError("f(w_start) does not match the start of the path")
    out = [w]
    h = initial_step
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        t = 0.0
        while t < 1.0:
            t_new = min(1.0, t + h)
            p_old, p_new = a + (b - a) * t, a + (b - a) * t_new
            accepted = False
            try:
                d = eval_derivative(spec, w)
                if abs(d) >= MIN_DERIVATIVE:
                    w_pred = w + (p_new - p_old) / d
                    w_new = newton_preimage(spec, p_new, w_pred, tol, max_iter=8)
                    step = abs(w_new - w)
                    # stay well inside the disk on which the branch is univalent
                    accepted = (step <= 0.25 * _univalence_radius(spec, w)
                                and abs(w_new - w_pred) <= 0.25 * step + 1e-14 * max(1.0, abs(w)))
            except BranchFailure:
                accepted = False
            if accepted:
                w, t = w_new, t_new
                h = min(2 * h, initial_step)
            else:
                h /= 2
                if h < min_step:
                    raise PathLiftObstruction(
                        f"step fell below {min_step:g} at path parameter {i + t:.15g} "
                        f"(point {p_old!r}); the path runs into a critical value",
                        parameter=i + t, point=p_old)
        out.append(w)
    return np.array(out)


# --------------------------------------------------------------------------
# branch chains


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def boundary(self, m: int) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * math.pi * np.arange(m) / m)


@dataclass
class BranchChain:
    map_id: str
    base_disk: Disk
    choices: list
    endpoints: list  # endpoints[k] = F_k(center); endpoints[0] is the centre
    step_contraction: list
    cumulative: list
    gaps: list
    polygons: list  # pulled-back boundary samples, polygons[0] is the base circle
    valid: bool
    reason: str = ""
    min_margin: float = math.inf

    @property
    def n(self) -> int:
        return len(self.endpoints) - 1

    @property
    def contraction(self) -> float:
        return self.cumulative[-1]

    @property
    def final_polygon(self) -> np.ndarray:
        return self.polygons[-1]

    def rows(self):
        """(step, re, im, step contraction, cumulative contraction, gap) for a CSV dump."""
        out = []
        for k, e in enumerate(self.endpoints):
            sc = 1.0 if k == 0 else self.step_contraction[k - 1]
            out.append((k, e.real, e.imag, sc, self.cumulative[k], self.gaps[k]))
        return out


def _radial_paths(disk: Disk, m: int, points: int) -> list:
    t = np.linspace(0.0, 1.0, points)
    return [disk.center + t * (v - disk.center) for v in disk.boundary(m)]


def _polygon_distance(poly: np.ndarray, P: np.ndarray) -> float:
    """Signed-free distance from the sample set P to the closed polygon (0 if inside)."""
    if P.size == 0:
        return math.inf
    a, b = poly, np.roll(poly, -1)
    ab = b - a
    denom = np.where(np.abs(ab) == 0, 1.0, np.abs(ab) ** 2)
    t = np.clip(((P[:, None] - a[None, :]) * np.conj(ab)[None, :]).real / denom[None, :], 0, 1)
    edge = np.abs(P[:, None] - (a[None, :] + t * ab[None, :])).min(axis=1)
    inside = _inside(poly, P)
    return float(np.where(inside, 0.0, edge).min())


def _inside(poly: np.ndarray, P: np.ndarray) -> np.ndarray:
    x, y = P.real[:, None], P.imag[:, None]
    xa, ya = poly.real[None, :], poly.imag[None, :]
    xb, yb = np.roll(poly.real, -1)[None, :], np.roll(poly.imag, -1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = ((ya > y) != (yb > y)) & (x < (xb - xa) * (y - ya) / (yb - ya) + xa)
    return cross.sum(axis=1) % 2 == 1


def chain_contraction(spec: EntireMapSpec, base_disk: Disk, n: int, choice_rule="nearest",
                      sing: SingularData | None = None, boundary_samples: int = 32,
                      radial_points: int = 6) -> BranchChain:
    """Pull ``base_disk`` back ``n`` times along chosen inverse branches.

    ``choice_rule`` is "nearest" (preimage closest to the previous
    endpoint) or a sequence of ``n`` seeds, one per step, for Newton.
    Step contraction is the quasi-hyperbolic ratio |F'(c)| gap(c)/gap(F(c)).
    """
    if n < 0:
        raise PreconditionError("n must be non-negative")
    if not base_disk.radius > 0:
        raise PreconditionError("base disk needs a positive radius")
    sing = sing or singular_data(spec)
    P = sing.postsingular_samples
    c = complex(base_disk.center)
    gap0 = float(sing.distance(c)[0])
    if gap0 <= base_disk.radius + sing.exclusion_radius:
        raise PreconditionError(f"base disk meets the postsingular exclusion zone "
                                f"(gap {gap0:.3g} <= r + {sing.exclusion_radius:g})")
    anchors = None
    if not isinstance(choice_rule, str):
        anchors = [complex(a) for a in choice_rule]
        if len(anchors) < n:
            raise PreconditionError("need one seed per step")
    elif choice_rule != "nearest":
        raise PreconditionError(f"unknown choice rule {choice_rule!r}")

    endpoints, choices = [c], []
    steps, cum, gaps = [], [1.0], [gap0]
    radials = _radial_paths(base_disk, boundary_samples, radial_points)
    polygons = [np.array([r[-1] for r in radials])]
    valid, reason, margin = True, "", gap0 - base_disk.radius
    for k in range(n):
        prev = endpoints[-1]
        if anchors is None:
            seed = prev
            w = nearest_preimage(spec, prev, prev)
        else:
            seed = anchors[k]
            w = newton_preimage(spec, prev, seed)
        choices.append(seed)
        g = float(sing.distance(w)[0])
        sc = abs(1.0 / eval_derivative(spec, w)) * gaps[-1] / g
        endpoints.append(w)
        steps.append(sc)
        cum.append(cum[-1] * sc)
        gaps.append(g)
        if valid:
            try:
                radials = [lift_path(spec, r, w) for r in radials]
            except BranchFailure as exc:
                valid, reason = False, f"step {k + 1}: boundary pull-back failed ({exc})"
                continue
            poly = np.array([r[-1] for r in radials])
            polygons.append(poly)
            dist = _polygon_distance(poly, P)
            margin = min(margin, dist)
            if dist <= sing.exclusion_radius:
                valid, reason = False, (f"step {k + 1}: pulled-back disk within "
                                        f"{sing.exclusion_radius:g} of the postsingular samples")
    return BranchChain(spec.id, base_disk, choices, endpoints, steps, cum, gaps, polygons,
                       valid, reason, margin)


def apply_chain_inverse(spec: EntireMapSpec, chain: BranchChain, z: complex) -> complex:
    """F_n(z) for z in the base disk, by lifting the segment centre -> z through the chain."""
    path = np.linspace(chain.base_disk.center, complex(z), 6)
    for w in chain.endpoints[1:]:
        path = lift_path(spec, path, w)
    return complex(path[-1])


# --------------------------------------------------------------------------
# Stolz angles for the half-plane inner function z - cot(z)/2


@dataclass(frozen=True)
class StolzRegion:
    vertex: float
    rho: float
    alpha: float

    def __post_init__(self):
        if not (0 < self.alpha < math.pi / 2):
            raise PreconditionError("opening alpha must lie in (0, pi/2)")
        if not self.rho > 0:
            raise PreconditionError("height rho must be positive")

    def margin(self, w) -> np.ndarray:
        """Positive exactly on the region; min of the two normalised slacks."""
        w = np.asarray(w, dtype=complex)
        y = w.imag
        with np.errstate(divide="ignore", invalid="ignore"):
            cone = np.where(y > 0, self.alpha - np.abs(w.real - self.vertex) / y, -np.inf)
        return np.minimum(cone / self.alpha, (self.rho - y) / self.rho)

    def contains(self, w) -> np.ndarray:
        return self.margin(w) > 0


@dataclass
class StolzReport:
    status: str  # "pass" | "fail" | "inconclusive"
    worst_margin: float
    region: StolzRegion | None
    n: int
    samples: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _g(w: complex) -> complex:
    return w - cmath.cos(w) / cmath.sin(w) / 2.0


def _dg(w: complex) -> complex:
    s = cmath.sin(w)
    return 1.0 + 1.0 / (2.0 * s * s)


def _g_newton(target: complex, seed: complex, tol=1e-13, max_iter=NEWTON_MAX_ITER) -> complex:
    w = complex(seed)
    for _ in range(max_iter):
        r = _g(w) - target
        if abs(r) < tol * max(1.0, abs(target)):
            return w
        d = _dg(w)
        if abs(d) < MIN_DERIVATIVE:
            raise BranchFailure(f"critical point of the inner function near {w!r}")
        w = w - r / d
    raise BranchFailure("Newton for the inner function did not converge")


# z - cot(z)/2 has critical points k*pi + i*asinh(1/sqrt(2)) in the upper half-plane
_INNER_CRIT_Y = math.asinh(1.0 / math.sqrt(2.0))


def inner_postsingular(K: int = LATTICE_K, depth: int = ORBIT_DEPTH,
                       cutoff: float = ORBIT_CUTOFF) -> np.ndarray:
    """Forward-orbit samples of the critical values of z - cot(z)/2 in the upper half-plane."""
    seeds = [_g(k * math.pi + 1j * _INNER_CRIT_Y) for k in range(-K, K + 1)]
    return np.array(seeds + _orbit_samples(_g, seeds, depth, cutoff), dtype=complex)


def _real_preimage_nearest(x: float) -> float:
    """Preimage of x under the real boundary map nearest to x (one per pole interval)."""
    from scipy.optimize import brentq

    best = None
    k0 = math.floor(x / math.pi)
    for k in (k0 - 1, k0, k0 + 1):
        lo, hi = k * math.pi + 1e-9, (k + 1) * math.pi - 1e-9
        h = lambda u: u - 0.5 / math.tan(u) - x
        if h(lo) < 0 < h(hi):
            r = brentq(h, lo, hi, xtol=1e-15, rtol=1e-15)
            if best is None or abs(r - x) < abs(best - x):
                best = r
    if best is None:
        raise BranchFailure(f"no real preimage of {x} bracketed")
    return best


def stolz_containment(inner: InnerFunctionSpec, x: float, rho: float, alpha: float, n: int,
                      samples: int = 64) -> StolzReport:
    """Pull the radial segment x + i(0, rho) back n steps and test it against the Stolz angle."""
    if inner.formula_kind != "fatou_inner":
        raise PreconditionError("Stolz containment is implemented for the half-plane model "
                                "z - cot(z)/2 only")
    if n < 0 or samples < 1:
        raise PreconditionError("need n >= 0 and samples >= 1")
    x = float(x)
    region0 = StolzRegion(x, rho, alpha)
    pole_gap = abs(x - round(x / math.pi) * math.pi)
    if pole_gap <= rho:
        raise PreconditionError(f"x = {x} is within rho = {rho} of a pole of cot "
                                f"(distance {pole_gap:.3g})")
    ps_gap = float(np.abs(inner_postsingular() - x).min())
    if ps_gap <= rho:
        raise PreconditionError(f"disk of radius {rho} at {x} meets the postsingular samples")
    ys = rho * (np.arange(samples) + 1) / (samples + 1)
    pts = x + 1j * ys
    if n == 0:
        return StolzReport("pass", float(region0.margin(pts).min()), region0, 0, samples)
    xs = [x]
    try:
        for _ in range(n):
            x_next = _real_preimage_nearest(xs[-1])
            # continue the branch upward along the segment, one sample at a time
            prev_w, prev_p, out = complex(x_next), complex(xs[-1]), []
            for p in pts:
                w = _g_newton(p, prev_w + (p - prev_p) / _dg(prev_w))
                out.append(w)
                prev_w, prev_p = w, p
            pts = np.array(out)
            xs.append(x_next)
    except (BranchFailure, ZeroDivisionError) as exc:
        return StolzReport("inconclusive", math.nan, None, n, samples, str(exc))
    region = StolzRegion(xs[-1], rho, alpha)
    m = region.margin(pts)
    worst = float(m.min())
    return StolzReport("pass" if worst > 0 else "fail", worst, region, n, samples,
                       f"H_n(x) = {xs[-1]!r}")


def search_stolz_rho(inner: InnerFunctionSpec, x: float, rho0: float, alpha: float, n: int,
                     samples: int = 64, max_halvings: int = 30):
    """Largest dyadic rho0 / 2^j for which the containment test passes, or None."""
    rho = rho0
    for _ in range(max_halvings + 1):
        try:
            rep = stolz_containment(inner, x, rho, alpha, n, samples)
        except PreconditionError:
            rep = None
        if rep is not None and rep.passed:
            return rho, rep
        rho /= 2
    return None, None
