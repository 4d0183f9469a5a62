import math

import numpy as np
import pytest

from bakerdyn.catalog import get_map
from bakerdyn.cowen import boundary_gap, classify_baker_type, component_labels, decide, increment_series
from bakerdyn.errors import BoundaryGapError, PreconditionError


def test_gap_deep_in_the_half_plane():
    assert boundary_gap(get_map("fatou"), 100) >= 50


def test_gap_next_to_a_repelling_fixed_point():
    assert boundary_gap(get_map("fatou"), 1j * math.pi + 0.01) <= 0.02


@pytest.mark.parametrize("mid", ["fatou", "bargmann", "herman"])
def test_zero_budget_is_an_error(mid):
    spec = get_map(mid)
    z = spec.baker_meta.classify_starts[0]
    with pytest.raises(BoundaryGapError):
        boundary_gap(spec, z, probe_budget=0)


def test_gap_rejects_points_outside_the_domain():
    with pytest.raises(BoundaryGapError):
        boundary_gap(get_map("bargmann"), 5 + 0j)


def test_gap_is_bounded_by_a_known_boundary_point():
    # i pi lies on the boundary of the Baker domain of Fatou's function; the
    # probe radii are dyadic, so the estimate is only good to a factor 2
    for z in (20, 30 + 2j, 60):
        assert boundary_gap(get_map("fatou"), z) <= 2 * abs(z - 1j * math.pi)


def test_quasi_hyperbolic_sandwich():
    # U contains Re z > 1 and its boundary reaches Re z = 0 at i pi: c = 0
    for x in (12.0, 20.0, 40.0, 80.0):
        g = boundary_gap(get_map("fatou"), x)
        assert (x - 0.0) / 4 <= g <= 4 * (x - 0.0)


def test_component_labels():
    spec = get_map("baker_abel")
    lab = component_labels(spec, [5 + 0j, 5 + 2j * math.pi, 1j * math.pi])
    assert lab[0] == 0 and lab[1] == 1


def test_fatou_increments_tend_to_zero():
    s = increment_series(get_map("fatou"), 50, depth=32)
    assert len(s.increments) == 31 and len(s.boundary_gaps) == 31
    assert np.all(s.increments >= 0)
    assert s.tail_statistic() < 0.05
    assert s.increments[-1] <= s.increments[0]


def test_bergweiler_increments_stay_large():
    s = increment_series(get_map("bergweiler"), -10, depth=16)
    assert s.increments.min() > 0.2


def test_herman_increments_shrink_with_depth():
    spec = get_map("herman")
    shallow = increment_series(spec, -20, depth=32).tail_statistic()
    deep = increment_series(spec, -200, depth=32).tail_statistic()
    assert shallow > deep > 0


def test_increment_series_needs_depth():
    with pytest.raises(PreconditionError):
        increment_series(get_map("fatou"), 50, depth=1)


def test_decision_rule():
    assert decide([0.01, 0.02, 0.001])[0] == "doubly_parabolic"
    assert decide([0.5, 0.9, 1.2])[0] == "hyperbolic"
    assert decide([0.3, 0.1, 0.02])[0] == "simply_parabolic"
    assert decide([0.1, 0.1, 0.1])[0] == "undecided"
    assert decide([0.3, 2.0, 0.3])[0] == "undecided"


@pytest.mark.parametrize("mid, starts, label", [
    ("fatou", (20, 50, 100), "doubly_parabolic"),
    ("bergweiler", (-10, -30, -100), "hyperbolic"),
    ("herman", (-20, -60, -200), "simply_parabolic"),
])
def test_classification_examples(mid, starts, label):
    d = classify_baker_type(get_map(mid), starts)
    assert d.decision == label
    assert len(d.L) == 3 and len(d.series) == 3


@pytest.mark.parametrize("mid", ["baker_abel", "fatou", "herman", "bergweiler", "bargmann"])
def test_classifier_matches_catalog(mid):
    spec = get_map(mid)
    assert classify_baker_type(spec).decision == spec.baker_meta.known_type


@pytest.mark.parametrize("mid", ["bergweiler", "bargmann"])
def test_hyperbolic_start_invariance(mid):
    spec = get_map(mid)
    for starts in [(-8, -16, -32), (-12 + 1j, -40 - 2j, -90 + 3j)]:
        assert classify_baker_type(spec, starts, depth=32).decision == "hyperbolic"


def test_needs_three_starts():
    with pytest.raises(PreconditionError):
        classify_baker_type(get_map("fatou"), [20, 50])


def test_starts_are_ordered_by_depth():
    d = classify_baker_type(get_map("fatou"), [100, 20, 50], depth=16)
    assert d.starts == [20, 50, 100]
