import math

import pytest

from arimoto_speed import reproduce as repro
from arimoto_speed.reproduce import Anchor, TargetResult


def test_anchor_absolute_relative_and_boolean():
    assert Anchor("t", "q", 1.0, 1.0009, tol=1e-3).passed
    assert not Anchor("t", "q", 1.0, 1.0011, tol=1e-3).passed
    assert Anchor("t", "q", 200.0, 201.5, tol=1e-2, relative=True).passed
    assert not Anchor("t", "q", -2.0, -2.03, tol=1e-2, relative=True).passed
    assert Anchor("t", "q", True, 1).passed and not Anchor("t", "q", False, True).passed
    assert not Anchor("t", "q", 1.0, math.nan, tol=1.0).passed
    assert Anchor("t", "q", True, True).error is None


def test_target_result_requires_every_anchor():
    ok, bad = Anchor("t", "a", 0.0, 0.0), Anchor("t", "b", 0.0, 1.0)
    assert TargetResult("t", [ok]).passed
    assert not TargetResult("t", [ok, bad]).passed


def test_expand_targets():
    assert repro.expand_targets("all") == list(repro.TARGETS)
    assert repro.expand_targets("table2, example1") == ["table2", "example1"]
    with pytest.raises(KeyError, match="example9"):
        repro.expand_targets("example9")


@pytest.mark.parametrize("name", ["example1", "example2", "example3", "example4", "table1"])
def test_fully_reproduced_targets(name):
    res = repro.run_target(name)
    assert res.passed, repro.format_table([res])


def test_structural_anchors_of_right_triangle_example():
    res = repro.run_target("example6")
    structural = [a for a in res.anchors if not a.quantity.startswith("N mu^N")]
    assert structural and all(a.passed for a in structural), repro.format_table([res])


def test_five_symbol_example_dynamics_anchors():
    res = repro.run_target("example7")
    checked = [a for a in res.anchors if a.quantity.startswith(("canonical", "N mu_bar", "ordering", "diagonally"))]
    assert len(checked) == 9 + 5 + 1 + 1
    assert all(a.passed for a in checked), repro.format_table([res])


def test_series_are_attached_for_charts():
    res = repro.run_target("example4")
    assert res.series
    s = res.series[0]
    assert all(len(col) == len(s.x) for col in s.columns.values())


def test_parallel_run_preserves_order_and_results():
    names = ["example2", "example1"]
    serial = repro.run_targets(names, jobs=1)
    parallel = repro.run_targets(names, jobs=2)
    assert [r.target for r in parallel] == names
    assert [[a.computed for a in r.anchors] for r in serial] == [[a.computed for a in r.anchors] for r in parallel]


def test_format_table_counts():
    text = repro.format_table([TargetResult("t", [Anchor("t", "a", 1.0, 1.0, 0.1), Anchor("t", "b", True, False)])])
    assert "1/2 anchors passed" in text
    assert "PASS" in text and "FAIL" in text
