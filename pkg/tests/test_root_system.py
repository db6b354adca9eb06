import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scswalk.root_system import (
    EnumerationCapError,
    RootSystemError,
    build_root_datum,
    chamber_sign,
    from_json,
    is_minuscule,
    pair_root_coweight,
    minuscule_coweights,
    reflect,
    to_json,
    weyl_group,
    weyl_orbit,
)

WEYL_ORDERS = {"A1": 2, "A2": 6, "A3": 24, "B2": 8, "C2": 8, "B3": 48, "C3": 48, "D4": 192, "E6": 51840}
POSITIVE_ROOTS = {"A1": 1, "A2": 3, "A3": 6, "B3": 9, "C3": 9, "D4": 12, "D5": 20, "E6": 36, "E7": 63}
SMALL_TYPES = ["A1", "A2", "A3", "B2", "B3", "C2", "C3", "D4"]


def test_cartan_matrices():
    assert build_root_datum("A2").cartan == ((2, -1), (-1, 2))
    # alpha_2 is the long root of C2, so <alpha_1, alpha_2^vee> = -1 and <alpha_2, alpha_1^vee> = -2.
    assert build_root_datum("C2").cartan == ((2, -1), (-2, 2))
    assert build_root_datum("B2").cartan == ((2, -2), (-1, 2))
    d4 = build_root_datum("D4").cartan
    assert [d4[1][j] for j in range(4)] == [-1, 2, -1, -1]


@pytest.mark.parametrize("label,count", POSITIVE_ROOTS.items())
def test_positive_root_counts(label, count):
    assert len(build_root_datum(label).positive_roots) == count


def test_highest_root_and_rho():
    c2 = build_root_datum("C2")
    assert c2.highest_root == (2, 1)
    assert pair_root_coweight(c2, c2.highest_root, (1, 0)) == 2
    assert pair_root_coweight(c2, c2.highest_root, (0, 1)) == 1
    assert c2.rho_pairing((1, 0)) == 2  # rho = 2 alpha_1 + 3/2 alpha_2
    assert build_root_datum("A2").rho_pairing((1, 1)) == 2


def test_reflection_example():
    assert reflect(build_root_datum("A2"), 0, (1, 1)) == (-1, 2)


@pytest.mark.parametrize("label,order", WEYL_ORDERS.items())
def test_weyl_group_order(label, order):
    assert len(weyl_group(build_root_datum(label))) == order


def test_weyl_group_lengths_and_signs():
    table = weyl_group(build_root_datum("A3"))
    lengths = np.asarray(table.lengths)
    # Poincare polynomial of S_4: (1)(1+t)(1+t+t^2)(1+t+t^2+t^3)
    assert np.bincount(lengths).tolist() == [1, 3, 5, 6, 5, 3, 1]
    assert table.signs.sum() == 0


def test_orbits():
    assert len(weyl_orbit(build_root_datum("D4"), (1, 0, 0, 0))) == 8
    assert len(weyl_orbit(build_root_datum("E6"), (1, 0, 0, 0, 0, 0))) == 27
    assert len(weyl_orbit(build_root_datum("E7"), (0, 0, 0, 0, 0, 0, 1))) == 56
    assert sorted(weyl_orbit(build_root_datum("A2"), (1, 0))) == [(-1, 1), (0, -1), (1, 0)]


def test_minuscule_lists():
    assert minuscule_coweights(build_root_datum("A3")) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert minuscule_coweights(build_root_datum("B3")) == [(1, 0, 0)]
    assert minuscule_coweights(build_root_datum("C3")) == [(0, 0, 1)]
    assert minuscule_coweights(build_root_datum("C2")) == [(0, 1)]
    assert minuscule_coweights(build_root_datum("D5")) == [(1, 0, 0, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)]
    assert minuscule_coweights(build_root_datum("E6")) == [(1, 0, 0, 0, 0, 0), (0, 0, 0, 0, 0, 1)]


def test_minuscule_rejects_zero_and_non_dominant():
    a2 = build_root_datum("A2")
    assert not is_minuscule(a2, (0, 0))
    assert not is_minuscule(a2, (-1, 1))
    assert not is_minuscule(a2, (1, 1))


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        weyl_group(build_root_datum("E7"), cap=5000)
    with pytest.raises(EnumerationCapError):
        weyl_orbit(build_root_datum("E7"), (0, 0, 0, 0, 0, 0, 1), cap=10)


@pytest.mark.parametrize("label", ["A0", "B1", "C1", "D3", "E8", "F4", "G2", "X"])
def test_unsupported_types(label):
    with pytest.raises(RootSystemError):
        build_root_datum(label)


@pytest.mark.parametrize("label", SMALL_TYPES + ["E6", "E7"])
def test_json_round_trip(label):
    d = build_root_datum(label)
    assert from_json(to_json(d)) == d


def test_w0():
    a2 = build_root_datum("A2")
    assert a2.w0((1, 0)) == (0, -1)
    c2 = build_root_datum("C2")
    assert c2.w0((1, 2)) == (-1, -2)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SMALL_TYPES), st.data())
def test_reflections_are_involutions(label, data):
    d = build_root_datum(label)
    mu = tuple(data.draw(st.lists(st.integers(-5, 5), min_size=d.rank, max_size=d.rank)))
    for i in range(d.rank):
        assert reflect(d, i, reflect(d, i, mu)) == mu
        # s_i negates the simple coroot
        assert reflect(d, i, d.simple_coroot(i)) == tuple(-x for x in d.simple_coroot(i))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL_TYPES), st.data())
def test_orbit_is_closed_and_unique_dominant(label, data):
    d = build_root_datum(label)
    mu = tuple(data.draw(st.lists(st.integers(0, 2), min_size=d.rank, max_size=d.rank)))
    orbit = set(weyl_orbit(d, mu))
    for v in orbit:
        for i in range(d.rank):
            assert reflect(d, i, v) in orbit
    assert [v for v in orbit if d.is_dominant(v)] == [mu]
    assert len(weyl_group(d)) % len(orbit) == 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL_TYPES), st.data())
def test_chamber_sign_matches_group_element(label, data):
    d = build_root_datum(label)
    table = weyl_group(d)
    k = data.draw(st.integers(0, len(table) - 1))
    w = table.element(k)
    image = w.apply(d.rho_vee)
    assert chamber_sign(d, image) == w.sign
    assert int(np.count_nonzero(d.roots_array() @ np.asarray(image) < 0)) == w.length
