import math

import mpmath
import numpy as np
import pytest

from bakerdyn.catalog import get_inner
from bakerdyn.circle import circle_map_turns
from bakerdyn.errors import PreconditionError
from bakerdyn.julia_probe import (CircleCover, boundary_map_residual, density_profile,
                                  julia_on_circle, max_gap, singularity_preimage_probe,
                                  solve_in_pole_interval)


def test_depth_zero_is_the_pole_lattice():
    s = julia_on_circle(get_inner("fatou_inner"), 0, K=5)
    assert np.allclose(np.sort(s.native), np.arange(-5, 6) * math.pi)
    assert not s.exhausted


def test_budget_limits_the_pole_range():
    s = julia_on_circle(get_inner("fatou_inner"), 0, budget=7)
    assert np.allclose(np.sort(s.native), np.arange(-3, 4) * math.pi)


def test_pre_poles_map_to_poles():
    s = julia_on_circle(get_inner("fatou_inner"), 1, K=3)
    assert s.native.size == 7 + 49
    x = s.native
    x = x[np.abs(x - np.rint(x / math.pi) * math.pi) > 1e-9]  # drop the depth-0 poles
    assert x.size == 49
    img = x - 0.5 / np.tan(x)
    k = np.rint(img / math.pi)
    # g' = 1 + csc^2/2 magnifies the rounding of x
    assert np.all(np.abs(img - k * math.pi) < 1e-12 * (1 + 1 / np.sin(x) ** 2) * (1 + np.abs(x)))


def test_empty_budget():
    for inner in ("fatou_inner", "blaschke_baker"):
        s = julia_on_circle(get_inner(inner), 3, budget=0)
        assert s.exhausted and s.turns.size == 0 and s.cover.arcs == ()


def test_other_models_are_rejected():
    with pytest.raises(PreconditionError):
        julia_on_circle(get_inner("moebius_parabolic"), 2)


def test_blaschke_tree_points_are_preimages_of_minus_one():
    s = julia_on_circle(get_inner("blaschke_baker"), 6)
    b = get_inner("blaschke_baker")
    t = s.turns
    hit = np.zeros(t.size, dtype=bool)
    for _ in range(7):
        hit |= np.abs(t - 0.5) < 1e-9
        t = circle_map_turns(b, t)
    assert hit.all()
    assert s.turns.size == 2 ** 7 - 1


def test_blaschke_density_improves_with_depth():
    prof = density_profile(get_inner("blaschke_baker"), [2, 4, 8, 12])
    gaps = [g for _, g in prof]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # the largest gap sits next to the parabolic point 1 (turn 0)
    s = julia_on_circle(get_inner("blaschke_baker"), 12)
    t = np.sort(s.turns)
    widest = int(np.argmax(np.diff(np.append(t, t[0] + 1))))
    assert t[widest] > 0.8 or t[(widest + 1) % t.size] < 0.2


def test_cover_arcs():
    cov = CircleCover.from_points([0.1, 0.12, 0.5, 0.99], 0.02)
    arcs = cov.arcs
    assert all(b > a for a, b in arcs)
    assert all(arcs[i][1] < arcs[i + 1][0] for i in range(len(arcs) - 1))
    assert len(arcs) == 3
    assert abs(cov.covered - (0.06 + 0.04 + 0.04)) < 1e-12
    wrapped = CircleCover.from_points([0.005, 0.5, 0.985], 0.02)
    assert len(wrapped.arcs) == 2 and abs(wrapped.covered - (0.06 + 0.04)) < 1e-12
    assert CircleCover.from_points(np.linspace(0, 1, 60, endpoint=False), 0.01).is_full
    assert not CircleCover.from_points([0.2], 0.01).is_full


def test_max_gap():
    assert max_gap([0.0, 0.5]) == 0.5
    assert max_gap([0.1]) == 1.0
    assert math.isnan(max_gap([]))


def test_interval_solver():
    k = np.arange(-5, 6)
    d = solve_in_pole_interval(np.full(k.size, 0.3), k)
    assert np.all((d > 0) & (d < math.pi))
    for ki, di in zip(k, d):
        assert boundary_map_residual(int(ki), float(di), 0.3) < 1e-12


def test_singularity_probe_windows():
    hits, fails = singularity_preimage_probe(get_inner("fatou_inner"), 0.3)
    assert not fails
    assert [h.window for h in hits] == [10.0, 100.0, 1000.0]
    mpmath.mp.dps = 50
    for h in hits:
        assert h.eta > h.window and h.residual < 1e-10
        eta = h.k * mpmath.pi + mpmath.mpf(h.delta)
        assert abs(eta - mpmath.cot(eta) / 2 - mpmath.mpf("0.3")) < 1e-10


def test_singularity_probe_negative_side_and_counts():
    f = get_inner("fatou_inner")
    hits, fails = singularity_preimage_probe(f, 0.3, (50.0,), count=4, side=-1)
    assert len(hits) == 4 and not fails
    assert all(h.eta < -50 for h in hits)
    assert len({h.k for h in hits}) == 4
    assert singularity_preimage_probe(f, 0.3, count=0) == ([], [])


def test_singularity_probe_preconditions():
    f = get_inner("fatou_inner")
    with pytest.raises(PreconditionError):
        singularity_preimage_probe(f, math.inf)
    with pytest.raises(PreconditionError):
        singularity_preimage_probe(get_inner("blaschke_baker"), 0.3)
    with pytest.raises(PreconditionError):
        singularity_preimage_probe(f, 0.3, side=0)
