import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab.pointset import (PointSet, PointSetAmbiguityError, PointSetDomainError,
                              PointSetError, PointSetFormatError, dump_pointset, empty,
                              first_primes, from_points, gen_corner, gen_hammersley,
                              gen_random, generate, load_pointset, pointset_from_json,
                              pointset_to_json, radical_inverse)

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


@st.composite
def point_sets(draw, max_dim=4, max_n=20):
    d = draw(st.integers(1, max_dim))
    n = draw(st.integers(0, max_n))
    rows = draw(st.lists(st.lists(unit, min_size=d, max_size=d), min_size=n, max_size=n))
    return PointSet(d, np.array(rows).reshape(n, d))


@given(point_sets())
def test_text_roundtrip_bit_exact(P):
    Q = load_pointset(dump_pointset(P), dim_hint=P.dim)
    assert Q == P
    assert Q.points.tobytes() == P.points.tobytes()


@given(point_sets())
def test_json_roundtrip(P):
    assert pointset_from_json(pointset_to_json(P)) == P


def test_parse_separators_and_comments():
    P = load_pointset("# header\n0.1, 0.2\n\n0.3 0.4\n0.5\t0.6\n")
    assert P.dim == 2 and P.n == 3
    assert P.points[2, 1] == 0.6


def test_stream_input():
    assert load_pointset(io.StringIO("0.25\n0.5\n")).n == 2


def test_empty_needs_dim():
    with pytest.raises(PointSetAmbiguityError):
        load_pointset("# nothing\n")
    P = load_pointset("", dim_hint=3)
    assert P.n == 0 and P.dim == 3 and P.points.shape == (0, 3)


@pytest.mark.parametrize("text,err", [
    ("0.1,0.2\n0.3\n", PointSetFormatError),
    ("0.1,abc\n", PointSetFormatError),
    ("1.0\n", PointSetDomainError),
    ("-0.1\n", PointSetDomainError),
    ("nan\n", PointSetDomainError),
])
def test_parse_errors(text, err):
    with pytest.raises(err):
        load_pointset(text)


def test_dim_hint_mismatch():
    with pytest.raises(PointSetFormatError):
        load_pointset("0.1,0.2\n", dim_hint=3)


def test_points_read_only():
    P = gen_random(4, 2, seed=0)
    with pytest.raises(ValueError):
        P.points[0, 0] = 0.5


def test_constructor_validation():
    with pytest.raises(PointSetError):
        PointSet(0, np.zeros((0, 0)))
    with pytest.raises(PointSetError):
        PointSet(2, np.zeros((3, 3)))
    assert from_points([], dim=2) == empty(2)
    with pytest.raises(PointSetAmbiguityError):
        from_points([])


def test_random_deterministic_and_seed_sensitive():
    assert gen_random(8, 3, seed=42) == gen_random(8, 3, seed=42)
    assert gen_random(8, 3, seed=42) != gen_random(8, 3, seed=43)


def test_hammersley_small():
    P = gen_hammersley(4, 2)
    np.testing.assert_array_equal(P.points, [[0, 0], [0.25, 0.5], [0.5, 0.25], [0.75, 0.75]])


def test_radical_inverse_and_primes():
    assert [radical_inverse(i, 2) for i in range(1, 8)] == [0.5, 0.25, 0.75, 0.125, 0.625,
                                                            0.375, 0.875]
    assert radical_inverse(5, 3) == 7 / 9
    assert first_primes(6) == [2, 3, 5, 7, 11, 13]


def test_hammersley_projections_are_permutations():
    # first coordinate i/n and the base-2 coordinate for n = 2^k both hit each 1/n cell once
    P = gen_hammersley(64, 3)
    for col in (0, 1):
        assert sorted(np.floor(P.points[:, col] * 64).astype(int)) == list(range(64))


def test_corner_and_generate():
    assert np.all(gen_corner(5, 2).points == 0)
    assert generate("hammersley", 4, 2) == gen_hammersley(4, 2)
    with pytest.raises(PointSetError):
        generate("sobol", 4, 2)
    with pytest.raises(PointSetError):
        gen_random(-1, 2, seed=0)
