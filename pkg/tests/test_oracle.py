import math

import numpy as np
import pytest

from disclab import oracle
from disclab.pointset import empty, from_points, gen_random


def test_local_discrepancy():
    P = from_points([[0.25], [0.75]])
    assert oracle.local_discrepancy(P, [0.0], [0.5]) == 0.0
    assert oracle.local_discrepancy(P, [0.0], [0.25]) == -0.25
    assert oracle.local_discrepancy(empty(2), [0, 0], [0.5, 0.5]) == -0.25
    with pytest.raises(ValueError):
        oracle.local_discrepancy(P, [0.5], [0.25])


def test_exact_1d_hand_values():
    assert oracle.star_l2_exact_1d(empty(1)) == pytest.approx(3 ** -0.5, abs=1e-15)
    assert oracle.extreme_l2_exact_1d(empty(1)) == pytest.approx(12 ** -0.5, abs=1e-15)
    assert oracle.star_l2_exact_1d(from_points([[0.5]])) == pytest.approx(12 ** -0.5, abs=1e-15)
    # any single point in d = 1 has extreme L2 discrepancy sqrt(1/12)
    for x in (0.0, 0.1, 0.5, 0.9):
        assert oracle.extreme_l2_exact_1d(from_points([[x]])) == pytest.approx(
            12 ** -0.5, abs=1e-14)


def test_exact_haar_guard():
    with pytest.raises(oracle.OracleGuardError):
        oracle.exact_haar_coefficient(gen_random(4, 4, 0), [0] * 4, [0] * 4)
    with pytest.raises(oracle.OracleGuardError):
        oracle.exact_haar_coefficient(gen_random(17, 1, 0), [0], [0])


def test_exact_haar_empty_set():
    # <-lambda, h_{-1}> = -1/2 and <-lambda, h_{0,0}> = 1/4 in d = 1
    assert oracle.exact_haar_coefficient(empty(1), [-1], [0]) == -0.5
    assert oracle.exact_haar_coefficient(empty(1), [0], [0]) == 0.25


def test_mc_oracles_close_to_exact_1d():
    P = gen_random(10, 1, seed=3)
    for mc, exact in ((oracle.star_l2_mc, oracle.star_l2_exact_1d),
                      (oracle.extreme_l2_mc, oracle.extreme_l2_exact_1d)):
        est, se = mc(P, 100_000, seed=1)
        assert abs(est - exact(P) ** 2) <= 5 * se
    with pytest.raises(ValueError):
        oracle.extreme_l2_mc(P, samples=10)


def test_mc_deterministic():
    P = gen_random(6, 2, seed=0)
    assert oracle.extreme_l2_mc(P, 2000, seed=5) == oracle.extreme_l2_mc(P, 2000, seed=5)
