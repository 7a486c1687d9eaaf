import itertools

import numpy as np
import pytest

from epsapprox.geometry import DirectionSet, RangeFamily, WeightedPointSet
from epsapprox.merge_reduce import ReduceConfig
from epsapprox.sentinel import (SentinelFamily, build_sentinels, disjoint_sentinels,
                                verify_sentinel)


def brute_sentinel(P, D, eps):
    """Both conditions over every rectangle with sides at coordinates of D."""
    xs, ys = np.unique(D.points[:, 0]), np.unique(D.points[:, 1])
    nd, npt = len(D), len(P)
    for x0, x1 in itertools.combinations_with_replacement(xs, 2):
        for y0, y1 in itertools.combinations_with_replacement(ys, 2):
            def cnt(A):
                q = A.points
                return int(np.sum((q[:, 0] >= x0) & (q[:, 0] <= x1) & (q[:, 1] >= y0) & (q[:, 1] <= y1)))
            cd, cp = cnt(D), cnt(P)
            if cd >= eps * nd and cp < 0.75 * eps * npt:
                return False
            if cp >= 0.75 * eps * npt and cd < eps * nd / 2:
                return False
    return True


def test_ground_set_is_its_own_sentinel(rng):
    D = WeightedPointSet(rng.random((40, 2)))
    v = verify_sentinel(D, D, 0.2)
    assert v.ok and bool(v) and v.ranges_checked == (40 * 41 // 2) ** 2


def test_single_point_fails_with_witness(rng):
    D = WeightedPointSet(rng.random((64, 2)))
    P = D.subset([0])
    v = verify_sentinel(P, D, 0.25)
    assert not v.ok and v.condition in (1, 2)
    inside = v.witness.contains_many(D.points)
    assert inside.sum() == v.ground_count
    assert v.witness.contains_many(P.points).sum() == v.sentinel_count
    if v.condition == 1:
        assert v.ground_count >= 0.25 * 64 and v.sentinel_count < 0.75 * 0.25
    else:
        assert v.sentinel_count >= 0.75 * 0.25 and v.ground_count < 0.125 * 64
    assert v.to_json()["witness"] is not None


def test_not_contained_raises(rng):
    D = WeightedPointSet(rng.random((10, 2)))
    with pytest.raises(ValueError):
        verify_sentinel(WeightedPointSet([[2.0, 2.0]]), D, 0.3)
    with pytest.raises(ValueError):
        verify_sentinel(WeightedPointSet(np.repeat(D.points[:1], 2, axis=0)), D, 0.3)


@pytest.mark.parametrize("seed", range(6))
def test_matches_brute_force(seed):
    r = np.random.default_rng(seed)
    D = WeightedPointSet(np.round(r.random((14, 2)), 1))
    P = D.subset(np.sort(r.choice(14, size=r.integers(1, 14), replace=False)))
    eps = float(r.choice([0.2, 0.35, 0.5]))
    assert verify_sentinel(P, D, eps).ok == brute_sentinel(P, D, eps)


@pytest.mark.parametrize("n,eps", [(256, 0.3), (512, 0.2), (512, 0.5)])
def test_build_sentinels_verify(rng, n, eps):
    D = WeightedPointSet(rng.random((n, 2)))
    P = build_sentinels(D, ReduceConfig(eps, check_decrease=False))
    assert len(P) <= n
    assert set(map(tuple, P.points)) <= set(map(tuple, D.points))
    assert verify_sentinel(P, D, eps).ok


def test_monotone_in_eps(rng):
    D = WeightedPointSet(rng.random((256, 2)))
    P = build_sentinels(D, ReduceConfig(0.3, check_decrease=False))
    for e in (0.3, 0.45, 0.6):
        assert verify_sentinel(P, D, e).ok


def test_two_clusters_represented(rng):
    D = WeightedPointSet(np.concatenate([0.1 * rng.random((128, 2)), 0.9 + 0.1 * rng.random((128, 2))]))
    P = build_sentinels(D, ReduceConfig(0.4, check_decrease=False))
    assert np.any(P.points[:, 0] < 0.5) and np.any(P.points[:, 0] > 0.5)
    assert verify_sentinel(P, D, 0.4).ok


def test_one_direction_and_three_directions(rng):
    D = WeightedPointSet(rng.random((24, 2)))
    fam1 = RangeFamily.kdir(DirectionSet([[1.0, 0.0]]))
    xs = np.sort(D.points[:, 0])
    for take, eps in ((np.argsort(D.points[:, 0])[::2], 0.5), (np.array([0, 1]), 0.3)):
        P = D.subset(np.sort(take))
        px = P.points[:, 0]
        want = True
        for a, b in itertools.combinations_with_replacement(xs, 2):
            cd = np.sum((xs >= a) & (xs <= b))
            cp = np.sum((px >= a) & (px <= b))
            if (cd >= eps * 24 and cp < 0.75 * eps * len(P)) or (cp >= 0.75 * eps * len(P) and cd < eps * 12):
                want = False
        assert verify_sentinel(P, D, eps, fam1).ok == want
    fam3 = RangeFamily.kdir(DirectionSet([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], normalize=True))
    assert verify_sentinel(D, D, 0.3, fam3).ok
    assert not verify_sentinel(D.subset([3]), D, 0.3, fam3).ok


def test_family_validation(rng):
    D = WeightedPointSet(rng.random((8, 2)))
    with pytest.raises(ValueError):
        SentinelFamily((D.subset([0, 1]), D.subset([1, 2])), 0.3, RangeFamily.rect(), (np.array([0, 1]), np.array([1, 2])))
    with pytest.raises(ValueError):
        disjoint_sentinels(D, 1.5)


def test_disjoint_small_input_returns_ground(rng):
    D = WeightedPointSet(rng.random((1, 2)))
    fam = disjoint_sentinels(D, 0.3)
    assert len(fam) == 1


@pytest.mark.slow
def test_disjoint_sentinels_1024():
    D = WeightedPointSet(np.random.default_rng(7).random((1024, 2)))
    fam = disjoint_sentinels(D, 0.25, block_size=256)
    assert len(fam) >= 2
    idx = np.concatenate(fam.index_sets)
    assert len(np.unique(idx)) == len(idx)
    for s in fam.sets:
        assert verify_sentinel(s, D, 0.25).ok
