import math

import numpy as np
import pytest

from sepclean.generators import enumerate_small_class_c
from sepclean.grid_core import Contamination, Perception, circumference, is_critical, layer_array
from sepclean.oracles import (
    bf_circumference, bf_connected, bf_critical, bf_critical_window, bf_layers, enumerate_polyominoes,
    greedy_counting_holds, greedy_lower_bound, orthogonally_convex, outer_border_cells,
    sep_speed_threshold, sep_step_bound, square_counting_holds, square_counting_integer_form,
    square_excluded_speeds, square_lower_bound,
)


def test_bf_connected():
    assert not bf_connected([(0, 0), (1, 1)])
    assert bf_connected(Contamination.rectangle(4, 3))
    split_strip = [(0, 0)] + [(x, 0) for x in range(2, 12)]
    assert not bf_connected(split_strip)
    assert bf_connected([])


def test_critical_agrees_on_every_window():
    for ring in range(256):
        p = Perception(ring | 1 << 8)
        assert is_critical(p) == bf_critical_window(p), ring


def test_bf_critical_on_contamination():
    c = Contamination.from_cells([(0, 0), (0, 1), (0, 2)])
    assert bf_critical(c, (0, 1)) and not bf_critical(c, (0, 0))
    assert not bf_critical(Contamination.rectangle(3, 3), (1, 1))
    with pytest.raises(ValueError):
        bf_critical(c, (5, 5))


def test_speed_threshold():
    assert sep_speed_threshold(1, 1) == 12
    assert sep_speed_threshold(10, 10) == 66
    assert sep_speed_threshold(3, 7) == 36


def test_step_bound():
    assert sep_step_bound(1, 1, 0, 12) == 84
    assert sep_step_bound(6, 8, 4, 48) == 1008
    assert sep_step_bound(10, 10, 0, 66) == 1650
    assert sep_step_bound(5, 5, 3, 10) == sep_step_bound(5, 5, 4, 10)


def test_step_bound_monotone():
    base = (4, 5, 2, 30)
    for i in range(4):
        bumped = list(base)
        bumped[i] += 1
        assert sep_step_bound(*bumped) >= sep_step_bound(*base)


def test_square_bound():
    assert square_lower_bound(10) == pytest.approx(24.2842712)
    assert square_lower_bound(1) == pytest.approx(-1.1715729)
    assert square_lower_bound(100) == pytest.approx(278.8427125)
    assert all(square_counting_integer_form(10, d) for d in range(25))
    assert list(square_excluded_speeds(1)) == []
    assert list(square_excluded_speeds(10))[-1] == 24


def test_greedy_bound():
    assert greedy_lower_bound(12, 1) == 36
    assert greedy_counting_holds(10, 35) and 16 * 100 + 160 + 20 == 1780 and 39 ** 2 == 1521
    assert 4 * 5 - 4 == 16


def test_counting_arguments_small_cases():
    assert square_counting_holds(2, 1)
    assert not square_counting_holds(2, 4)


def test_layers_by_peeling_match_formula():
    for h in range(1, 8):
        for w in range(1, 8):
            assert np.array_equal(np.array(bf_layers(h, w)), layer_array((h, w)))


def test_circumference_formula_matches_search():
    for c in enumerate_small_class_c(3, 4, max_holes=1):
        assert bf_circumference(c) == circumference(c)


def test_circumference_search_on_larger_shapes():
    rows = ["..###.", ".#####", "######", "##.###", "######", ".####."]
    c = Contamination.from_cells((x, 5 - y) for y, r in enumerate(rows) for x, ch in enumerate(r) if ch == "#")
    assert bf_circumference(c) == circumference(c) == 20


def test_outer_border_excludes_hole_rims():
    c = Contamination.from_cells([(x, y) for x in range(5) for y in range(5) if (x, y) != (2, 2)])
    assert len(outer_border_cells(c)) == 16


def test_convexity_oracle():
    assert orthogonally_convex(Contamination.from_cells([(0, 0), (1, 0), (1, 1)]))
    assert not orthogonally_convex(Contamination.from_cells([(0, 0), (1, 0), (2, 0), (0, 1), (2, 1)]))


def test_polyomino_counts():
    counts = [0] * 8
    for p in enumerate_polyominoes(7):
        counts[len(p)] += 1
    assert counts[1:] == [1, 2, 6, 19, 63, 216, 760]
    assert math.isclose(sum(counts), 1067)
