"""Forward iteration, orbit classification and Fatou/Julia rasterisation.

A single vectorised kernel drives everything: ``iterate_orbit`` and
``classify_point`` run it on a one-element array, ``render_plane`` on one
pixel row at a time. Sharing the kernel keeps scalar and raster
classifications bit-identical.

Classification rules, in order of precedence:

* escaping  -- exp overflow, entry into the map's absorbing region (which
  lies inside the Baker domain), or ``|z| > escape_radius`` for
  ``persistence`` consecutive steps;
* bounded   -- the orbit numerically closed up (periodicity check) or
  never left ``|z| <= bounded_radius``;
* bungee    -- ``sup |z_k| > escape_radius`` and the tail half came back
  inside ``bounded_radius``;
* undecided -- anything else, including a zero iteration budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import parallel_map
from .catalog import EntireMapSpec, eval_map_array
from .errors import PreconditionError

UNDECIDED, ESCAPING, BOUNDED, BUNGEE = 0, 1, 2, 3
CLASS_NAMES = {UNDECIDED: "undecided", ESCAPING: "escaping", BOUNDED: "bounded", BUNGEE: "bungee"}
MAX_PIXELS = 10**8


@dataclass(frozen=True)
class Budgets:
    n_max: int = 500
    escape_radius: float = 1e6
    bounded_radius: float = 1e3
    persistence: int = 5
    use_absorbing: bool = True
    periodicity_tol: float = 1e-13

    def __post_init__(self):
        if self.n_max < 0:
            raise PreconditionError("n_max must be non-negative")
        if not (self.escape_radius > self.bounded_radius > 0):
            raise PreconditionError("need escape_radius > bounded_radius > 0")
        if self.persistence < 1:
            raise PreconditionError("persistence must be at least 1")


@dataclass
class OrbitRecord:
    points: list
    classification: str
    escape_index: int | None
    sup_radius: float
    inf_tail_radius: float


@dataclass
class _KernelResult:
    cls: np.ndarray
    escape_index: np.ndarray
    iterations: np.ndarray
    sup: np.ndarray
    inf_tail: np.ndarray
    last: np.ndarray
    points: list = field(default_factory=list)


def _orbit_kernel(spec: EntireMapSpec, z0, budgets: Budgets, record: bool = False,
                  stop_on_absorb: bool = True) -> _KernelResult:
    z = np.array(z0, dtype=complex).ravel()
    n = z.size
    cls = np.zeros(n, dtype=np.uint8)
    esc = np.full(n, -1, dtype=np.int64)
    iters = np.zeros(n, dtype=np.int64)
    res = _KernelResult(cls, esc, iters, np.abs(z), np.full(n, np.inf), z.copy())
    if record:
        res.points.append(complex(z[0]))
    n_max = budgets.n_max
    if n_max == 0:
        return res

    R, B = budgets.escape_radius, budgets.bounded_radius
    tail_from = n_max // 2
    region = spec.baker_meta.absorbing_hint
    mod = np.abs(z)
    if tail_from == 0:
        res.inf_tail = mod.copy()
    consec = (mod > R).astype(np.int64)
    absorbed = np.zeros(n, dtype=bool)
    done = np.zeros(n, dtype=bool)
    if budgets.use_absorbing:
        absorbed = region.label(z) >= 0
        esc[absorbed] = 0
        cls[absorbed] = ESCAPING
        if stop_on_absorb:
            done |= absorbed
    zref = z.copy()
    cur = z.copy()

    for k in range(1, n_max + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        w, over = eval_map_array(spec, cur[act])
        over |= ~np.isfinite(w)
        iters[act] = k
        # overflow
        oi = act[over]
        fresh = oi[cls[oi] != ESCAPING]
        cls[fresh] = ESCAPING
        esc[fresh] = k
        done[oi] = True
        keep = ~over
        act, w = act[keep], w[keep]
        cur[act] = w
        m = np.abs(w)
        res.sup[act] = np.maximum(res.sup[act], m)
        if k >= tail_from:
            res.inf_tail[act] = np.minimum(res.inf_tail[act], m)
        if record and act.size:
            res.points.append(complex(w[0]))
        if budgets.use_absorbing:
            hit = region.label(w) >= 0
            newly = act[hit & ~absorbed[act]]
            absorbed[newly] = True
            cls[newly] = ESCAPING
            esc[newly] = k
            if stop_on_absorb:
                done[newly] = True
        big = m > R
        consec[act] = np.where(big, consec[act] + 1, 0)
        pers = act[consec[act] >= budgets.persistence]
        pers = pers[cls[pers] != ESCAPING]
        cls[pers] = ESCAPING
        esc[pers] = k - budgets.persistence + 1
        done[pers] = True
        # periodicity check against a reference refreshed at powers of two
        tol = budgets.periodicity_tol * np.maximum(1.0, m)
        closed = (np.abs(w - zref[act]) <= tol) & (cls[act] != ESCAPING)
        cidx = act[closed]
        cls[cidx] = BOUNDED
        done[cidx] = True
        if k & (k - 1) == 0:
            zref[act] = w

    res.last = cur
    rest = cls == UNDECIDED
    bungee = rest & (res.sup > R) & (res.inf_tail < B)
    cls[bungee] = BUNGEE
    bounded = rest & ~bungee & (res.sup <= B)
    cls[bounded] = BOUNDED
    return res


def iterate_orbit(spec: EntireMapSpec, z0: complex, n_max: int = 500,
                  escape_radius: float = 1e6, bounded_radius: float = 1e3,
                  **budget_kw) -> OrbitRecord:
    """Iterate ``spec`` from ``z0`` and classify the orbit.

    The orbit keeps going after entering the absorbing region (only
    overflow, persistent escape, a closed-up cycle or ``n_max`` stop it),
    so the recorded points are the genuine forward orbit.
    """
    if n_max < 1:
        raise PreconditionError("n_max must be at least 1")
    budgets = Budgets(n_max=n_max, escape_radius=escape_radius,
                      bounded_radius=bounded_radius, **budget_kw)
    r = _orbit_kernel(spec, [z0], budgets, record=True, stop_on_absorb=False)
    pts = r.points
    tail = pts[(len(pts) - 1) // 2:]
    esc = int(r.escape_index[0])
    return OrbitRecord(points=pts, classification=CLASS_NAMES[int(r.cls[0])],
                       escape_index=esc if esc >= 0 else None,
                       sup_radius=max(abs(p) for p in pts),
                       inf_tail_radius=min(abs(p) for p in tail))


def classify_point(spec: EntireMapSpec, z0: complex, budgets: Budgets | None = None) -> str:
    budgets = budgets or Budgets()
    r = _orbit_kernel(spec, [z0], budgets)
    return CLASS_NAMES[int(r.cls[0])]


def classify_array(spec: EntireMapSpec, z, budgets: Budgets | None = None):
    """Classification codes and iteration counts for an array of starts."""
    budgets = budgets or Budgets()
    z = np.asarray(z, dtype=complex)
    r = _orbit_kernel(spec, z.ravel(), budgets)
    count = np.where(r.escape_index >= 0, r.escape_index, r.iterations)
    return r.cls.reshape(z.shape), count.reshape(z.shape)


# --------------------------------------------------------------------------
# rasterisation


@dataclass(frozen=True)
class Window:
    center: complex
    width: float
    height: float

    @classmethod
    def from_bounds(cls, xmin, xmax, ymin, ymax):
        return cls(complex((xmin + xmax) / 2, (ymin + ymax) / 2), xmax - xmin, ymax - ymin)

    def pixel_centers(self, W: int, H: int):
        """Complex grid of pixel centres, row 0 at the top."""
        x0 = self.center.real - self.width / 2
        y0 = self.center.imag + self.height / 2
        xs = x0 + (np.arange(W) + 0.5) * (self.width / W)
        ys = y0 - (np.arange(H) + 0.5) * (self.height / H)
        return xs[None, :] + 1j * ys[:, None]


@dataclass
class GridRender:
    window: Window
    resolution: tuple
    classes: np.ndarray  # (H, W) uint8 codes
    counts: np.ndarray  # (H, W) escape index or iterations used
    n_max: int

    @property
    def cells(self):
        return list(zip(self.classes.ravel().tolist(), self.counts.ravel().tolist()))

    def to_rgb(self) -> np.ndarray:
        return palette(self.classes, self.counts, self.n_max)

    def write_ppm(self, path):
        write_ppm(path, self.to_rgb())


def render_plane(spec: EntireMapSpec, window: Window, resolution: tuple,
                 budgets: Budgets | None = None, threads: int = 1) -> GridRender:
    W, H = (int(v) for v in resolution)
    if W < 1 or H < 1:
        raise PreconditionError("resolution must be at least 1x1")
    if W * H > MAX_PIXELS:
        raise PreconditionError(f"{W}x{H} exceeds the {MAX_PIXELS} pixel guard")
    budgets = budgets or Budgets()
    grid = window.pixel_centers(W, H)

    def row(j):
        return classify_array(spec, grid[j], budgets)

    rows = parallel_map(row, range(H), threads)
    classes = np.stack([r[0] for r in rows])
    counts = np.stack([r[1] for r in rows]).astype(np.int64)
    return GridRender(window, (W, H), classes, counts, budgets.n_max)


def palette(classes: np.ndarray, counts: np.ndarray, n_max: int) -> np.ndarray:
    """RGB image: escaping white->blue by escape index, bounded black, bungee red, undecided gray."""
    H, W = classes.shape
    rgb = np.full((H, W, 3), 128, dtype=np.uint8)
    t = np.log1p(np.maximum(counts, 0)) / math.log1p(max(n_max, 1))
    t = np.clip(t, 0.0, 1.0)
    fade = np.rint(255.0 * (1.0 - t)).astype(np.uint8)
    e = classes == ESCAPING
    rgb[e, 0] = fade[e]
    rgb[e, 1] = fade[e]
    rgb[e, 2] = 255
    rgb[classes == BOUNDED] = (0, 0, 0)
    rgb[classes == BUNGEE] = (255, 0, 0)
    return rgb


def write_ppm(path, rgb: np.ndarray):
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    H, W, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (W, H))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    W, H, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    return np.frombuffer(parts[4][: W * H * 3], dtype=np.uint8).reshape(H, W, 3)
