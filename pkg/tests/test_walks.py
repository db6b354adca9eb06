import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scswalk.root_system import build_root_datum, weyl_orbit
from scswalk.spectral import SpectralPoint
from scswalk.walks import (
    WalkError,
    functional_F,
    increment_law,
    mean_drift_pairings,
    position_law_chi_square,
    randomized_start_law,
    reflect_path,
    reflection_identity_mc,
    sample_path,
    stopped_path,
    survival_dp,
    survival_dp_run,
    survival_dp_table,
    survival_mc,
    survival_reflection,
)

A1 = build_root_datum("A1")
A2 = build_root_datum("A2")
C2 = build_root_datum("C2")

# First eight positions of the A1 walk at u = 0.5 with seed 42.
GOLDEN_A1_SEED42 = [0, 1, 2, 3, 2, 1, 2, 3]


def enumerate_survival(law, lam, T):
    """Survival to time T by summing over every step sequence."""
    total = 0.0
    for seq in itertools.product(range(len(law.probs)), repeat=T):
        pos = np.array(lam)
        ok = True
        prob = 1.0
        for i in seq:
            pos = pos + law.support[i]
            prob *= law.probs[i]
            if np.any(pos < 0):
                ok = False
                break
        if ok:
            total += prob
    return total


def test_increment_law():
    z = SpectralPoint(A2, (0.4, 0.4))
    law = increment_law(A2, (1, 0), z)
    assert sorted(map(tuple, law.support)) == sorted(weyl_orbit(A2, (1, 0)))
    assert law.probs.sum() == pytest.approx(1.0, abs=1e-15)
    weights = np.exp(law.support @ z.array)
    assert law.probs == pytest.approx(weights / weights.sum(), rel=1e-14)
    a1 = increment_law(A1, (1,), SpectralPoint(A1, (0.5,)))
    assert a1.probs[a1.support[:, 0] == 1][0] == pytest.approx(0.731059, abs=1e-6)


def test_increment_law_rejects_bad_input():
    with pytest.raises(WalkError):
        increment_law(A2, (1, 1), SpectralPoint(A2, (0.4, 0.4)))
    with pytest.raises(WalkError):
        increment_law(C2, (1, 0), SpectralPoint.from_coroot_pairings(C2, (0.4, 0.4)))


def test_drift_symmetry():
    """The diagram automorphism of A2 swaps omega_1 and omega_2 and reverses the drift."""
    z = SpectralPoint(A2, (0.4, 0.4))
    d1 = mean_drift_pairings(increment_law(A2, (1, 0), z))
    d2 = mean_drift_pairings(increment_law(A2, (0, 1), z))
    assert d1 == pytest.approx(d2[::-1], rel=1e-14)
    norm = math.exp(0.4) + 1 + math.exp(-0.4)
    assert d1 == pytest.approx([(math.exp(0.4) - 1) / norm, (1 - math.exp(-0.4)) / norm], rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["A1", "A2", "A3", "C2", "B3", "D4"]), st.data())
def test_drift_strictly_positive(label, data):
    d = build_root_datum(label)
    a = data.draw(st.lists(st.floats(0.01, 3.0), min_size=d.rank, max_size=d.rank))
    z = SpectralPoint.from_coroot_pairings(d, a)
    from scswalk.root_system import minuscule_coweights

    for Lam in minuscule_coweights(d):
        assert np.all(mean_drift_pairings(increment_law(d, Lam, z)) > 0)


def test_sample_path_determinism():
    law = increment_law(A1, (1,), SpectralPoint(A1, (0.5,)))
    a = sample_path(law, (0,), 50, 42)
    b = sample_path(law, (0,), 50, 42)
    assert np.array_equal(a.positions, b.positions)
    assert a.positions[:8, 0].tolist() == GOLDEN_A1_SEED42
    empty = sample_path(law, (2,), 0, 1)
    assert empty.shifted.tolist() == [[2]]
    assert empty.running_minima.tolist() == [[0]]


def test_survival_reflection_values():
    z = SpectralPoint(A1, (0.5,))
    assert survival_reflection(A1, (0,), z) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert survival_reflection(A1, (2,), SpectralPoint(A1, (0.3,))) == pytest.approx(0.834701, abs=1e-6)
    z2 = SpectralPoint(A2, (0.4, 0.4))
    want = 1 - 2 * math.exp(-0.4) + 2 * math.exp(-1.2) - math.exp(-1.6)
    assert survival_reflection(A2, (0, 0), z2) == pytest.approx(want, rel=1e-13)
    assert survival_reflection(A2, (0, 0), z2, (0, 1)) == survival_reflection(A2, (0, 0), z2)
    with pytest.raises(WalkError):
        survival_reflection(A2, (-1, 0), z2)


def test_dp_small_horizon_matches_enumeration():
    for d, Lam, u in ((A2, (1, 0), (0.4, 0.4)), (C2, (0, 1), (0.3, 0.5))):
        z = SpectralPoint.from_coroot_pairings(d, u)
        law = increment_law(d, Lam, z)
        for lam in ((0, 0), (1, 0), (0, 2)):
            for T in (0, 1, 4, 6):
                exact = enumerate_survival(law, lam, T)
                assert survival_dp_run(law, lam, [T]).values[T] == pytest.approx(exact, abs=1e-14)
    assert survival_dp(A1, (0,), SpectralPoint(A1, (0.5,)), (1,), 1) == pytest.approx(0.731059, abs=1e-6)


def test_backward_table_matches_forward():
    z = SpectralPoint.from_coroot_pairings(C2, (0.4, 0.8))
    law = increment_law(C2, (0, 1), z)
    starts = [(0, 0), (2, 1), (1, 2)]
    table = survival_dp_table(law, starts, [50, 200])
    for s in starts:
        fwd = survival_dp_run(law, s, [50, 200]).values
        assert table[50][s] == pytest.approx(fwd[50], abs=1e-14)
        assert table[200][s] == pytest.approx(fwd[200], abs=1e-14)


def test_dp_monotone_and_above_limit():
    z = SpectralPoint(A2, (0.4, 0.4))
    law = increment_law(A2, (1, 0), z)
    hs = [0, 10, 50, 100, 200, 400]
    vals = survival_dp_run(law, (0, 0), hs).values
    seq = [vals[h] for h in hs]
    assert seq[0] == 1.0
    assert all(b <= a for a, b in zip(seq, seq[1:]))
    assert seq[-1] >= survival_reflection(A2, (0, 0), z)
    assert seq[-1] == pytest.approx(0.059851, abs=5e-5)


def test_dp_converges_to_reflection_for_strong_drift():
    z = SpectralPoint.from_coroot_pairings(A2, (0.8, 0.8))
    law = increment_law(A2, (1, 0), z)
    table = survival_dp_table(law, [(0, 0)], [400])
    assert table[400][(0, 0)] == pytest.approx(survival_reflection(A2, (0, 0), z), abs=1e-8)


def test_collapse_error_bound_is_honest():
    d = build_root_datum("A3")
    z = SpectralPoint.from_coroot_pairings(d, (0.8, 0.8, 0.8))
    law = increment_law(d, (0, 1, 0), z)
    exact = survival_dp_run(law, (0, 0, 0), [60]).values[60]
    approx = survival_dp_run(law, (0, 0, 0), [60], prune=1e-14, collapse=1e-10)
    assert approx.error_bound > 0
    assert abs(approx.values[60] - exact) <= approx.error_bound + 1e-15


def test_mc_covers_dp_and_threads_do_not_matter():
    z = SpectralPoint(A2, (0.4, 0.4))
    dp = survival_dp(A2, (1, 0), z, (1, 0), 60)
    one = survival_mc(A2, (1, 0), z, (1, 0), 60, 20_000, 3, threads=1)
    two = survival_mc(A2, (1, 0), z, (1, 0), 60, 20_000, 3, threads=3)
    assert one == two
    assert one.covers(dp, 4)


def test_randomized_start_law():
    images, p = randomized_start_law(A1, (0,), SpectralPoint(A1, (0.5,)))
    assert p.sum() == pytest.approx(1.0)
    assert p[images[:, 0] == 1][0] == pytest.approx(0.731059, abs=1e-6)
    images, p = randomized_start_law(A2, (0, 0), SpectralPoint(A2, (20.0, 20.0)))
    assert p[np.all(images == 1, axis=1)][0] > 0.999


def test_functional_F():
    assert functional_F(A2, (-1, 2)) == -1
    assert functional_F(A2, (1, 1)) == 1
    assert functional_F(A2, (0, 1)) == 0
    w0_rho = A2.w0(A2.rho_vee)
    assert functional_F(A2, w0_rho) == (-1) ** len(A2.positive_roots)


def exact_reflection_identity(d, Lam, z, T):
    """E[F(start) 1{tau <= T}] summed over all starts and step sequences."""
    law = increment_law(d, Lam, z)
    images, p = randomized_start_law(d, (0,) * d.rank, z)
    roots = d.roots_array()
    total = 0.0
    for start, ps in zip(images, p):
        sign = functional_F(d, start)
        for seq in itertools.product(range(len(law.probs)), repeat=T):
            pos = start.copy()
            prob = ps
            hit = np.any(roots @ pos == 0)
            for i in seq:
                pos = pos + law.support[i]
                prob *= law.probs[i]
                hit = hit or np.any(roots @ pos == 0)
            if hit:
                total += sign * prob
    return total


def test_reflection_identity_exact_at_finite_horizon():
    assert abs(exact_reflection_identity(A1, (1,), SpectralPoint(A1, (0.5,)), 7)) < 1e-15
    z = SpectralPoint(A2, (0.4, 0.4))
    assert abs(exact_reflection_identity(A2, (1, 0), z, 4)) < 1e-15


def test_reflection_identity_mc():
    z = SpectralPoint(A2, (0.4, 0.4))
    res = reflection_identity_mc(A2, (0, 0), z, (1, 0), 100, 20_000, 5)
    assert res.estimate.covers(0.0, 4)
    with pytest.raises(WalkError):
        reflection_identity_mc(A2, (0, 0), z, (1, 0), 100, 0, 5)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["A1", "A2", "C2"]))
def test_reflection_is_an_involution(seed, label):
    d = build_root_datum(label)
    z = SpectralPoint.from_coroot_pairings(d, (0.3,) * d.rank)
    Lam = (0, 1) if label == "C2" else d.fundamental_coweight(0)
    law = increment_law(d, Lam, z)
    images, p = randomized_start_law(d, (0,) * d.rank, z)
    rng = np.random.default_rng(seed)
    start = images[rng.choice(len(p), p=p)]
    path = sample_path(law, start, 40, seed).shifted
    sp = stopped_path(d, path)
    rp = reflect_path(sp)
    assert np.array_equal(reflect_path(rp).positions, sp.positions)
    assert (rp.tau, rp.hit_root) == (sp.tau, sp.hit_root)
    if sp.tau is not None:
        assert np.array_equal(rp.positions[sp.tau:], sp.positions[sp.tau:])
        assert functional_F(d, rp.positions[0]) == -functional_F(d, sp.positions[0])
        steps = np.diff(rp.positions, axis=0)
        orbit = set(weyl_orbit(d, Lam))
        assert all(tuple(s) in orbit for s in steps)


def test_position_law_preserved():
    z = SpectralPoint(A2, (0.4, 0.4))
    assert position_law_chi_square(A2, (0, 0), z, (1, 0), 60, 10, 10_000, 2) > 0.001
