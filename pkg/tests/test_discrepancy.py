import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab import discrepancy as D, oracle
from disclab.discrepancy import Measure, Method
from disclab.pointset import PointSet, empty, from_points, gen_corner, gen_random

ONE = from_points([[0.5]])


def test_star_examples():
    assert D.star_l2(gen_corner(1, 1)).value == pytest.approx(3 ** -0.5, abs=1e-15)
    assert D.star_l2(ONE).value == pytest.approx(12 ** -0.5, abs=1e-15)
    assert D.star_l2(empty(2)).value == pytest.approx(1 / 3, abs=1e-15)


def test_extreme_examples():
    for d in range(1, 9):
        r = D.extreme_l2(empty(d))
        assert r.value == 12.0 ** (-d / 2) and r.method is Method.CLOSED_FORM
    assert D.extreme_l2(gen_corner(1, 1)).value == pytest.approx(12 ** -0.5, abs=1e-15)
    assert D.extreme_l2(ONE).squared == pytest.approx(1 / 12, abs=1e-16)


def test_haar_examples():
    r = D.extreme_l2_haar(empty(1), 3)
    assert r.squared == 85 / 1024 and r.method is Method.HAAR_TRUNCATED
    assert r.truncation_order == 3 and r.tail_bound >= 1 / 12 - 85 / 1024
    assert D.extreme_l2_haar(gen_corner(1, 1), 0).squared == 1 / 16
    s = D.star_l2_haar(empty(1), 30)
    assert abs(s.squared - 1 / 3) <= s.tail_bound
    s = D.star_l2_haar(ONE, 6)
    assert s.squared <= 1 / 12 <= s.squared + s.tail_bound


def test_result_serialises():
    d = D.extreme_l2_haar(ONE, 4).to_dict()
    assert json.loads(json.dumps(d))["method"] == "HAAR_TRUNCATED"
    assert set(d) == {"measure", "value", "squared", "method", "truncation_order", "tail_bound"}


def test_value_is_sqrt_of_squared():
    P = gen_random(30, 3, seed=1)
    for r in (D.star_l2(P), D.extreme_l2(P), D.star_l2_haar(P, 8), D.extreme_l2_haar(P, 8)):
        assert r.value == math.sqrt(r.squared) and r.squared >= 0


sets = st.builds(lambda s, n, d: gen_random(n, d, s),
                 st.integers(0, 10 ** 6), st.integers(1, 40), st.integers(1, 5))


@given(sets, st.randoms(use_true_random=False))
def test_permutation_invariance(P, rnd):
    order = list(range(P.n))
    rnd.shuffle(order)
    Q = PointSet(P.dim, P.points[order])
    for fn in (D.star_l2, D.extreme_l2):
        assert fn(Q).squared == pytest.approx(fn(P).squared, rel=1e-12, abs=1e-17)


@given(sets)
def test_duplication_invariance(P):
    Q = PointSet(P.dim, np.concatenate([P.points, P.points]))
    for fn in (D.star_l2, D.extreme_l2):
        assert fn(Q).squared == pytest.approx(fn(P).squared, rel=1e-12, abs=1e-17)


@given(sets)
def test_domination(P):
    assert D.extreme_l2(P).value <= D.star_l2(P).value * (1 + 1e-12)


@given(st.integers(0, 10 ** 6), st.integers(0, 32))
def test_one_dimensional_oracles(seed, n):
    P = gen_random(n, 1, seed)
    assert abs(D.star_l2(P).value - oracle.star_l2_exact_1d(P)) <= 1e-12
    assert abs(D.extreme_l2(P).value - oracle.extreme_l2_exact_1d(P)) <= 1e-12


@pytest.mark.parametrize("seed,d,n", [(0, 1, 7), (1, 2, 30), (2, 3, 12), (3, 4, 64)])
def test_haar_brackets_closed_form(seed, d, n):
    P = gen_random(n, d, seed)
    for closed, series in ((D.extreme_l2, D.extreme_l2_haar), (D.star_l2, D.star_l2_haar)):
        c, h = closed(P), series(P, 14)
        assert h.squared <= c.squared * (1 + 1e-12) + 1e-17
        assert c.squared <= h.squared + h.tail_bound
    assert D.star_l2_haar(P, 10).squared >= D.extreme_l2_haar(P, 10).squared


def test_pair_sum_blocks_agree():
    # row-blocked pair sum does not depend on the block size
    P = gen_random(300, 3, seed=8)
    ref = D.extreme_l2(P).squared
    old = D._ROW_BLOCK_ELEMS
    try:
        D._ROW_BLOCK_ELEMS = 500
        assert D.extreme_l2(P).squared == pytest.approx(ref, rel=1e-13)
    finally:
        D._ROW_BLOCK_ELEMS = old


def test_initial_values():
    for d in range(1, 9):
        assert D.star_initial(d) == 3.0 ** (-d / 2)
        assert D.extreme_initial(d) == 12.0 ** (-d / 2)
    assert Measure("STAR_L2") is Measure.STAR_L2
