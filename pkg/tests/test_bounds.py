import math

import pytest
from hypothesis import given, strategies as st

from disclab import bounds
from disclab.discrepancy import Measure

eps_st = st.floats(0.01, 0.99)


def test_curse_examples():
    assert bounds.curse_lower_bound_bmo(0.5, 10) == pytest.approx(1048576 / 59049 * 0.75,
                                                                  abs=1e-3)
    # (4/3)^20 * 0.75 = 236.50...
    assert bounds.curse_lower_bound_bmo(0.5, 20) == pytest.approx((4 / 3) ** 20 * 0.75,
                                                                  rel=1e-12)
    assert bounds.curse_lower_bound_extreme(0.5, 10) == pytest.approx(2.25 ** 10 * 0.75,
                                                                      rel=1e-12)
    assert bounds.curse_lower_bound_bmo(1 - 1e-12, 5) < 1e-10


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.2, 1.5])
def test_curse_domain(eps):
    with pytest.raises(ValueError):
        bounds.curse_lower_bound_bmo(eps, 3)
    with pytest.raises(ValueError):
        bounds.curse_lower_bound_extreme(eps, 3)


@given(eps_st, st.integers(1, 60))
def test_curse_ratios_and_order(eps, d):
    b0, b1 = bounds.curse_lower_bound_bmo(eps, d), bounds.curse_lower_bound_bmo(eps, d + 1)
    e0, e1 = (bounds.curse_lower_bound_extreme(eps, d),
              bounds.curse_lower_bound_extreme(eps, d + 1))
    assert b1 / b0 == pytest.approx(4 / 3, rel=1e-12)
    assert e1 / e0 == pytest.approx(9 / 4, rel=1e-12)
    assert e0 >= b0


def test_curse_table_rows():
    rows = bounds.curse_table(0.5, 10)
    assert [r["dim"] for r in rows] == list(range(1, 11))
    assert rows[-1]["bmo_lower"] == pytest.approx(13.318, abs=1e-3)


def test_inverse_small_cases():
    # N = 1 is always tested; {0.5} sits exactly at the initial value, so 0.999 needs N > 1
    res = bounds.inverse_search(0.999, 1, Measure.EXTREME_L2, restarts=0)
    assert 1 in res.tested and res.n is not None and res.n >= 1
    for eps, d in ((0.3, 1), (0.5, 1), (0.5, 2)):
        n = bounds.empirical_inverse(eps, d, "EXTREME_L2", n_max=4096)
        assert n >= math.ceil(bounds.curse_lower_bound_extreme(eps, d))


def test_inverse_monotone_in_eps():
    ns = [bounds.empirical_inverse(e, 1, Measure.STAR_L2, "hammersley", 1024, 1, 0)
          for e in (0.3, 0.5, 0.7)]
    assert all(n is not None and n <= 1024 for n in ns)
    assert ns[0] >= ns[1] >= ns[2]


def test_inverse_budget_exhausted():
    res = bounds.inverse_search(0.05, 3, Measure.EXTREME_L2, n_max=8, restarts=1)
    assert res.n is None and max(res.tested) == 8


def test_inverse_bmo_is_heuristic():
    rep = bounds.inverse_report(0.7, 1, Measure.BMO_LOWER, n_max=64, restarts=1, J=8)
    assert rep.heuristic and any("heuristic" in n for n in rep.notes)
    assert rep.bmo_lower <= rep.extreme_lower


def test_inverse_unknown_family():
    with pytest.raises(ValueError):
        bounds.inverse_search(0.5, 1, Measure.EXTREME_L2, family="sobol")


def test_roth_curve():
    rows = bounds.roth_curve(1, [2, 4, 8], with_bmo=False)
    assert [r["shape"] for r in rows] == [1 / 2, 1 / 4, 1 / 8]
    rows = bounds.roth_curve(2, [4, 16, 64], J=8)
    shapes = [r["shape"] for r in rows]
    assert shapes == [math.sqrt(1 + math.log(n)) / n for n in (4, 16, 64)]
    assert shapes[0] > shapes[1] > shapes[2]
    assert all(r["ratio_extreme"] > 0 and r["ratio_bmo"] > 0 for r in rows)


def test_notes_present():
    assert {"inverse", "curse", "polynomial", "weak"} <= set(bounds.TRACTABILITY_NOTES)
