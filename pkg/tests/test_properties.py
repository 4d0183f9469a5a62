import cmath
import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from bakerdyn._parallel import parallel_map
from bakerdyn.branches import StolzRegion, newton_preimage
from bakerdyn.catalog import (eval_derivative, eval_inner, eval_map, get_inner, get_map, map_ids)
from bakerdyn.circle import (BoundaryPoint, circle_map_turns, circular_distance, preimage_tree,
                             real_to_turns, turns_to_real, wrap_turns)
from bakerdyn.config import config_hash, parse_text, validate
from bakerdyn.dimension import moran_exponent
from bakerdyn.dynamics import iterate_orbit
from bakerdyn.julia_probe import CircleCover, boundary_map_residual, solve_in_pole_interval
from bakerdyn.rng import open_uniform

COMMON = settings(max_examples=60, deadline=None)

coord = st.floats(-5, 5, allow_nan=False)
unit = st.floats(0.001, 0.999, allow_nan=False)
contraction = st.floats(0.01, 0.99, allow_nan=False)


@COMMON
@given(st.sampled_from(map_ids()), coord, coord)
def test_derivative_matches_central_difference(mid, x, y):
    spec, z, h = get_map(mid), complex(x, y), 1e-6
    fd = (eval_map(spec, z + h) - eval_map(spec, z - h)) / (2 * h)
    d = eval_derivative(spec, z)
    assert abs(d - fd) < 1e-5 * (1 + abs(d))


@COMMON
@given(st.floats(0, 2 * math.pi))
def test_blaschke_maps_circle_to_circle(theta):
    w = eval_inner(get_inner("blaschke_baker"), cmath.exp(1j * theta))
    assert abs(abs(w) - 1) < 1e-9


@COMMON
@given(st.sampled_from(["baker_abel", "fatou", "bergweiler", "bargmann"]), coord, coord)
def test_conjugation_symmetry(mid, x, y):
    spec, z = get_map(mid), complex(x, y)
    assert abs(eval_map(spec, z.conjugate()) - eval_map(spec, z).conjugate()) < 1e-12


@COMMON
@given(contraction, contraction)
def test_moran_symmetric_and_replays(a, b):
    s = moran_exponent(a, b)
    assert s == moran_exponent(b, a)
    assert abs(a ** s + b ** s - 1) < 1e-10
    assert s > 0


@COMMON
@given(contraction, contraction, st.floats(1e-3, 0.2))
def test_moran_increases_with_either_factor(a, b, bump):
    assume(a + bump < 0.999)
    assert moran_exponent(a + bump, b) > moran_exponent(a, b)


@COMMON
@given(st.floats(-3, 10))
def test_real_baker_abel_orbits_increase(x0):
    xs = [p.real for p in iterate_orbit(get_map("baker_abel"), x0, n_max=60).points]
    assert all(b > a for a, b in zip(xs, xs[1:]))


@COMMON
@given(st.sampled_from(map_ids()), st.floats(-3, 3), st.floats(-6, 6), st.floats(0, 1))
def test_newton_round_trip(mid, x, y, phase):
    spec, w = get_map(mid), complex(x, y)
    assume(abs(eval_derivative(spec, w)) >= 0.5)
    target = eval_map(spec, w)
    p = newton_preimage(spec, target, w + 1e-3 * cmath.exp(2j * math.pi * phase))
    assert abs(p - w) < 1e-9


@COMMON
@given(st.floats(0.0, 1.0, exclude_max=True), st.sampled_from([2.0, 3.0, 10.0]))
def test_cayley_conjugacy_of_dilation(t, lam):
    assume(circular_distance(t, 0.5) > 1e-6 and circular_distance(t, 0.0) > 1e-6)
    # lambda w on the half-plane is ((l+1)z + (l-1)) / ((l-1)z + (l+1)) on the disk
    x, z = float(turns_to_real(t)), cmath.exp(2j * math.pi * t)
    for _ in range(50):
        x *= lam
        z = ((lam + 1) * z + (lam - 1)) / ((lam - 1) * z + (lam + 1))
        z /= abs(z)
    disk_turns = (cmath.phase(z) / (2 * math.pi)) % 1.0
    assert circular_distance(float(real_to_turns(x)), disk_turns) < 1e-9


@COMMON
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=40), st.floats(1e-4, 0.3))
def test_cover_arcs_are_sorted_disjoint_and_positive(ts, eps):
    cov = CircleCover.from_points(ts, eps)
    arcs = cov.arcs
    assert all(b > a for a, b in arcs)
    assert all(arcs[i][1] < arcs[i + 1][0] for i in range(len(arcs) - 1))
    assert 0 < cov.covered <= 1
    # every point is covered
    for t in wrap_turns(np.array(ts)):
        assert any(a <= t <= b or a <= t + 1 <= b or a <= t - 1 <= b for a, b in arcs)


@COMMON
@given(st.floats(-1e6, 1e6))
def test_wrapped_turns_stay_in_unit_interval(t):
    w = float(wrap_turns(t))
    assert 0.0 <= w < 1.0


@COMMON
@given(st.integers(0, 2**32), st.integers(0, 500), st.integers(1, 300), st.integers(1, 299))
def test_random_stream_is_chunk_invariant(seed, start, count, cut):
    cut = min(cut, count)
    whole = open_uniform(seed, start, count)
    parts = np.concatenate([open_uniform(seed, start, cut),
                            open_uniform(seed, start + cut, count - cut)])
    assert np.array_equal(whole, parts)
    assert np.all((whole > 0) & (whole < 1))


@COMMON
@given(st.lists(st.integers(), max_size=30), st.integers(1, 6))
def test_parallel_map_keeps_order(items, threads):
    assert parallel_map(lambda v: 3 * v + 1, items, threads) == [3 * v + 1 for v in items]


@COMMON
@given(st.floats(-100, 100), st.floats(0.01, 10), st.floats(0.01, 1.5), st.floats(0.001, 0.999))
def test_radial_segment_lies_in_every_stolz_angle(x, rho, alpha, frac):
    assert StolzRegion(x, rho, alpha).contains(complex(x, frac * rho))


@COMMON
@given(st.floats(0.0, 1.0, exclude_max=True))
def test_blaschke_has_two_preimages_per_point(t):
    assume(circular_distance(t, 0.0) > 1e-3)
    tree = preimage_tree(get_inner("blaschke_baker"), BoundaryPoint("unit_disk", t), 1)
    pre = tree.turns()[1:]
    assert len(pre) == 2
    assert circular_distance(circle_map_turns(get_inner("blaschke_baker"), pre), t).max() < 1e-9


@COMMON
@given(st.floats(-1e3, 1e3), st.integers(-10**4, 10**4))
def test_each_pole_interval_hits_every_target(target, k):
    d = float(solve_in_pole_interval(np.array([target]), np.array([k]))[0])
    assert 0 < d < math.pi
    # the residual is limited by the slope of g near a pole
    slope = 1 + 0.5 / math.sin(d) ** 2
    assert boundary_map_residual(k, d, target) < 1e-13 * slope * (1 + abs(target) + abs(k))


@COMMON
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 64))
def test_config_hash_tracks_semantics_only(b1, b2, threads):
    text = f"experiment = dimension\nb1 = {b1!r}\nb2 = {b2!r}\nthreads = {threads}\n"
    cfg = validate(parse_text(text))
    ref = validate({"experiment": "dimension", "b1": b1, "b2": b2})
    assert config_hash(cfg) == config_hash(ref)
