import math

import pytest

from sepclean.dynamics import (
    diamond_size, isoperimetric_lower_bound, new_cell_count, spread, spread_times,
)
from sepclean.generators import GenSpec, enumerate_small_class_c, generate_retrying
from sepclean.grid_core import Contamination, circumference, layer_of, validate_class_c
from sepclean.oracles import bf_spread


def test_single_cell_becomes_plus():
    c = spread(Contamination.from_cells([(0, 0)]))
    assert c.cells == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


@pytest.mark.parametrize("k", range(8))
def test_diamond_counts(k):
    assert spread_times(Contamination.from_cells([(0, 0)]), k).count == diamond_size(k) == 2 * k * k + 2 * k + 1


def test_spread_is_pure_and_grows_box():
    c = Contamination.from_cells([(0, 0), (1, 0), (1, 1)])
    before = c.cells
    d = spread(c)
    assert c.cells == before
    assert c.cells < d.cells
    assert (d.width, d.height) == (c.width + 2, c.height + 2)
    assert d.cells == bf_spread(c)


def test_spread_of_empty_is_empty():
    assert spread(Contamination.from_cells([])).is_empty


def test_new_cell_count_examples():
    one = Contamination.from_cells([(0, 0)])
    assert new_cell_count(one) == 4
    assert new_cell_count(one) >= math.ceil(isoperimetric_lower_bound(1))
    diamond2 = spread_times(one, 2)
    assert diamond2.count == 13
    assert new_cell_count(diamond2) == 12
    assert math.ceil(isoperimetric_lower_bound(13)) == 10


def test_isoperimetric_values():
    assert isoperimetric_lower_bound(1) == 2.0
    assert isoperimetric_lower_bound(13) == 10.0
    assert isoperimetric_lower_bound(5) == 6.0
    with pytest.raises(ValueError):
        isoperimetric_lower_bound(0)


@pytest.mark.parametrize("k", range(1, 12))
def test_diamonds_sit_close_to_the_bound(k):
    c = spread_times(Contamination.from_cells([(0, 0)]), k)
    # new cells of a diamond: 4(k+1); bound gap stays below four
    assert new_cell_count(c) == 4 * (k + 1)
    assert new_cell_count(c) - isoperimetric_lower_bound(c.count) <= 4


def test_class_c_closure_and_dimension_laws_on_small_instances():
    for c in enumerate_small_class_c(3, 4, max_holes=1):
        d = spread(c)
        assert validate_class_c(d)[0]
        assert circumference(d) == circumference(c) + 8
        assert len(d.holes) <= len(c.holes)


def test_hole_retreat_on_generated_instances():
    for seed in range(40):
        inst = generate_retrying(GenSpec(seed=seed, target_h=12, target_w=12, hole_count=2, max_hole_side=4))
        d = spread(inst.contamination)
        for hole in d.holes:
            assert all(layer_of(cell, d.bounding_box) >= 4 for cell in hole.cells())
