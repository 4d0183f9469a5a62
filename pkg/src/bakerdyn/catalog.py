"""Closed catalog of transcendental maps with Baker domains and of model inner functions.

Every entry stores its closed-form derivative and enough metadata
(Cowen type, an absorbing region inside the Baker domain, the access
predicate for boundary orbits) for the other modules to work without
any per-map special casing.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CatalogMissError, MapOverflowError, PoleError, PreconditionError

GOLDEN_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_OVERFLOW_GUARD = 700.0
POLE_TOL = 1e-12

FORMULA_KINDS = ("baker_abel", "fatou", "herman", "bergweiler", "bargmann")
COWEN_TYPES = ("doubly_parabolic", "hyperbolic", "simply_parabolic")


@dataclass(frozen=True)
class AbsorbingRegion:
    """A half-plane, or a periodic family of half-strips, lying inside the Baker domain.

    ``label`` returns the index of the component a point lies in (the
    strip number for a strip family, 0 for a half-plane) or -1.
    """

    kind: str  # "right_half_plane" | "left_half_plane" | "strip_family"
    offset: float
    half_width: float = 0.0
    period: float = 2.0 * math.pi

    def label(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        if self.kind == "right_half_plane":
            return np.where(x > self.offset, 0, -1)
        if self.kind == "left_half_plane":
            return np.where(x < self.offset, 0, -1)
        if self.kind == "strip_family":
            k = np.rint(y / self.period)
            inside = (x > self.offset) & (np.abs(y - k * self.period) < self.half_width)
            k = np.clip(np.where(np.isfinite(k), k, 0), -2**62, 2**62).astype(np.int64)
            return np.where(inside, k, -1)
        raise ValueError(f"unknown absorbing region kind {self.kind!r}")

    def contains(self, z) -> bool:
        return bool(self.label(z) >= 0)

    def describe(self) -> str:
        if self.kind == "right_half_plane":
            return f"Re z > {self.offset:g}"
        if self.kind == "left_half_plane":
            return f"Re z < {self.offset:g}"
        return (f"Re z > {self.offset:g}, |Im z - {self.period:g}k| < {self.half_width:g}")


@dataclass(frozen=True)
class BakerMeta:
    known_type: str
    univalent: bool
    absorbing_hint: AbsorbingRegion
    access_predicate_id: str
    classify_starts: tuple = ()


@dataclass(frozen=True)
class EntireMapSpec:
    id: str
    formula_kind: str
    formula: str
    derivative: str
    baker_meta: BakerMeta
    params: dict = field(default_factory=dict)
    overflow_guard: float = DEFAULT_OVERFLOW_GUARD

    def __post_init__(self):
        if self.formula_kind not in FORMULA_KINDS:
            raise PreconditionError(f"formula_kind must be one of {FORMULA_KINDS}")
        if not self.overflow_guard > 0:
            raise PreconditionError("overflow_guard must be positive")

    # exp(sign * z) is the only transcendental term in every formula
    @property
    def exp_sign(self) -> int:
        return -1 if self.formula_kind in ("baker_abel", "fatou") else 1

    def __hash__(self):
        return hash((self.id, tuple(sorted(self.params.items())), self.overflow_guard))


def _map_table():
    strip = AbsorbingRegion("strip_family", 1.0, half_width=math.pi / 2)
    return {
        "baker_abel": dict(
            formula="z + exp(-z)", derivative="1 - exp(-z)",
            meta=BakerMeta("doubly_parabolic", False, strip, "re_to_plus_infinity",
                           (5.0, 10.0, 20.0))),
        "fatou": dict(
            formula="z + 1 + exp(-z)", derivative="1 - exp(-z)",
            meta=BakerMeta("doubly_parabolic", False, AbsorbingRegion("right_half_plane", 1.0),
                           "re_to_plus_infinity", (20.0, 50.0, 100.0))),
        "herman": dict(
            formula="z + 2*pi*i*alpha + exp(z)", derivative="1 + exp(z)",
            meta=BakerMeta("simply_parabolic", True, AbsorbingRegion("left_half_plane", -4.0),
                           "im_to_plus_infinity", (-20.0, -60.0, -200.0))),
        "bergweiler": dict(
            formula="2 - log(2) + 2z - exp(z)", derivative="2 - exp(z)",
            meta=BakerMeta("hyperbolic", True, AbsorbingRegion("left_half_plane", -3.0),
                           "re_to_minus_infinity", (-10.0, -30.0, -100.0))),
        "bargmann": dict(
            formula="2z - 3 + exp(z)", derivative="2 + exp(z)",
            meta=BakerMeta("hyperbolic", False, AbsorbingRegion("left_half_plane", -3.0),
                           "im_to_infinity", (-10.0, -30.0, -100.0))),
    }


def map_ids():
    return FORMULA_KINDS


def get_map(id: str, *, alpha: float = GOLDEN_ALPHA,
            overflow_guard: float = DEFAULT_OVERFLOW_GUARD) -> EntireMapSpec:
    """Return the catalog entry for ``id``.

    ``alpha`` only affects ``herman``; it is treated as an opaque rotation
    parameter.
    """
    table = _map_table()
    if id not in table:
        raise CatalogMissError(id, table)
    row = table[id]
    params = {"alpha": float(alpha)} if id == "herman" else {}
    return EntireMapSpec(id=id, formula_kind=id, formula=row["formula"],
                         derivative=row["derivative"], baker_meta=row["meta"],
                         params=params, overflow_guard=overflow_guard)


def _exp_term(spec: EntireMapSpec, z: complex) -> complex:
    arg = spec.exp_sign * z
    if not arg.real < spec.overflow_guard:  # also catches nan
        raise MapOverflowError(z)
    return cmath.exp(arg)


def eval_map(spec: EntireMapSpec, z: complex) -> complex:
    z = complex(z)
    e = _exp_term(spec, z)
    kind = spec.formula_kind
    if kind == "baker_abel":
        return z + e
    if kind == "fatou":
        return z + 1.0 + e
    if kind == "herman":
        return z + 2j * math.pi * spec.params["alpha"] + e
    if kind == "bergweiler":
        return 2.0 - math.log(2.0) + 2.0 * z - e
    return 2.0 * z - 3.0 + e


def eval_derivative(spec: EntireMapSpec, z: complex) -> complex:
    z = complex(z)
    e = _exp_term(spec, z)
    kind = spec.formula_kind
    if kind in ("baker_abel", "fatou"):
        return 1.0 - e
    if kind == "herman":
        return 1.0 + e
    if kind == "bergweiler":
        return 2.0 - e
    return 2.0 + e


def eval_second_derivative(spec: EntireMapSpec, z: complex) -> complex:
    z = complex(z)
    e = _exp_term(spec, z)
    return -e if spec.formula_kind == "bergweiler" else e


def eval_map_array(spec: EntireMapSpec, z: np.ndarray):
    """Vectorised ``eval_map``. Returns ``(values, overflowed)``; overflowed entries hold nan."""
    z = np.asarray(z, dtype=complex)
    arg = spec.exp_sign * z
    over = ~(arg.real < spec.overflow_guard)
    safe = np.where(over, 0.0, arg)
    e = np.exp(safe)
    kind = spec.formula_kind
    if kind == "baker_abel":
        w = z + e
    elif kind == "fatou":
        w = z + 1.0 + e
    elif kind == "herman":
        w = z + 2j * math.pi * spec.params["alpha"] + e
    elif kind == "bergweiler":
        w = 2.0 - math.log(2.0) + 2.0 * z - e
    else:
        w = 2.0 * z - 3.0 + e
    w = np.where(over, complex(np.nan, np.nan), w)
    return w, over


def eval_derivative_array(spec: EntireMapSpec, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    arg = spec.exp_sign * z
    over = ~(arg.real < spec.overflow_guard)
    e = np.exp(np.where(over, 0.0, arg))
    kind = spec.formula_kind
    if kind in ("baker_abel", "fatou"):
        d = 1.0 - e
    elif kind == "herman":
        d = 1.0 + e
    elif kind == "bergweiler":
        d = 2.0 - e
    else:
        d = 2.0 + e
    return np.where(over, complex(np.nan, np.nan), d)


# --------------------------------------------------------------------------
# inner functions

INNER_KINDS = ("blaschke_baker", "fatou_inner", "moebius_hyperbolic", "moebius_parabolic")
INF = math.inf


@dataclass(frozen=True)
class InnerFunctionSpec:
    id: str
    domain_model: str  # "unit_disk" | "upper_half_plane"
    formula_kind: str
    formula: str
    dw_point: complex | float
    cowen_type: str
    singularities: tuple = ()
    params: dict = field(default_factory=dict)

    def __hash__(self):
        return hash((self.id, tuple(sorted(self.params.items()))))


def inner_ids():
    return INNER_KINDS


def get_inner(id: str, *, lam: float = 2.0, sign: int = 1) -> InnerFunctionSpec:
    if id == "blaschke_baker":
        return InnerFunctionSpec(id, "unit_disk", id, "(3z^2 + 1)/(3 + z^2)",
                                 dw_point=1 + 0j, cowen_type="doubly_parabolic")
    if id == "fatou_inner":
        return InnerFunctionSpec(id, "upper_half_plane", id, "z - cot(z)/2",
                                 dw_point=INF, cowen_type="doubly_parabolic",
                                 singularities=(INF,))
    if id == "moebius_hyperbolic":
        if not lam > 1.0:
            raise PreconditionError(f"hyperbolic model needs lambda > 1, got {lam}")
        return InnerFunctionSpec(id, "upper_half_plane", id, f"{lam:g} z", dw_point=INF,
                                 cowen_type="hyperbolic", params={"lam": float(lam)})
    if id == "moebius_parabolic":
        if sign not in (1, -1):
            raise PreconditionError("parabolic model translation sign must be +1 or -1")
        return InnerFunctionSpec(id, "upper_half_plane", id, f"z {'+' if sign > 0 else '-'} 1",
                                 dw_point=INF, cowen_type="simply_parabolic",
                                 params={"sign": int(sign)})
    raise CatalogMissError(id, INNER_KINDS)


def _nearest_cot_pole(z: complex) -> complex:
    return complex(round(z.real / math.pi) * math.pi, 0.0)


def _check_poles(spec: InnerFunctionSpec, z: complex):
    if spec.formula_kind == "fatou_inner":
        p = _nearest_cot_pole(z)
        if abs(z - p) < POLE_TOL:
            raise PoleError(z, p)
    elif spec.formula_kind == "blaschke_baker":
        for p in (1j * math.sqrt(3.0), -1j * math.sqrt(3.0)):
            if abs(z - p) < POLE_TOL:
                raise PoleError(z, p)


def eval_inner(spec: InnerFunctionSpec, z: complex) -> complex:
    z = complex(z)
    _check_poles(spec, z)
    kind = spec.formula_kind
    if kind == "blaschke_baker":
        z2 = z * z
        return (3.0 * z2 + 1.0) / (3.0 + z2)
    if kind == "fatou_inner":
        return z - cmath.cos(z) / cmath.sin(z) / 2.0
    if kind == "moebius_hyperbolic":
        return spec.params["lam"] * z
    return z + spec.params["sign"]


def eval_inner_derivative(spec: InnerFunctionSpec, z: complex) -> complex:
    z = complex(z)
    _check_poles(spec, z)
    kind = spec.formula_kind
    if kind == "blaschke_baker":
        return 16.0 * z / (3.0 + z * z) ** 2
    if kind == "fatou_inner":
        s = cmath.sin(z)
        return 1.0 + 1.0 / (2.0 * s * s)
    if kind == "moebius_hyperbolic":
        return complex(spec.params["lam"])
    return 1.0 + 0j
