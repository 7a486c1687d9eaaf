import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import tent_terrain
from epsapprox.geometry import (AxisRect, ConvexPolygon, DirectionSet, KOrientedRange, LinearPatch,
                                PLTerrain, WeightedPointSet, box_linear_integral, clip, contains,
                                integrate_linear, terrain_measure)
from epsapprox.oracle import mc_check

UNIT = AxisRect([0, 0], [1, 1])
SQUARE = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_contains_interior_and_closed_boundary():
    assert contains(UNIT, (0.5, 0.5))
    assert contains(UNIT, (1.0, 1.0))


def test_contains_slab_pair():
    dirs = DirectionSet([[1, 0], [1, 1]], normalize=True)
    r = KOrientedRange(dirs, [[0, 1], [0, 1 / math.sqrt(2)]])
    assert not contains(r, (0.9, 0.9))
    assert contains(r, (0.2, 0.3))


def test_clip_examples():
    same = clip(SQUARE, ((1, 0), 1.0))
    assert same.area == pytest.approx(1.0)
    half = clip(SQUARE, ((1, 0), 0.5))
    assert half.area == pytest.approx(0.5)
    assert np.allclose(half.bbox().hi, [0.5, 1.0])
    tri = clip(SQUARE, ((1, 1), 1.0))
    assert tri.area == pytest.approx(0.5)
    assert {tuple(np.round(v, 12)) for v in tri.vertices} == {(0, 0), (1, 0), (0, 1)}
    assert clip(SQUARE, ((1, 0), -0.1)) is None


def test_integrate_linear_examples():
    assert integrate_linear(SQUARE, (0, 0, 1)) == pytest.approx(1.0, abs=1e-15)
    assert integrate_linear(SQUARE, (1, 0, 0)) == pytest.approx(0.5, abs=1e-15)
    tri = ConvexPolygon([(0, 0), (1, 0), (0, 1)])
    assert integrate_linear(tri, (0, 0, 2)) == pytest.approx(1.0, abs=1e-15)


def test_terrain_measure_examples():
    flat = PLTerrain.flat(UNIT, 1.0)
    assert terrain_measure(flat, AxisRect([0, 0], [0.5, 0.5])) == pytest.approx(0.25)
    ramp = PLTerrain([[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]], [(1, 0, 0)] * 2)
    assert terrain_measure(ramp, UNIT) == pytest.approx(0.5)
    T = tent_terrain()
    est, err = mc_check(T, UNIT, 10**6, seed=3)
    assert abs(est - terrain_measure(T, UNIT)) <= 3 * err


def test_weighted_point_set_validation():
    with pytest.raises(ValueError):
        WeightedPointSet([[0, 0]], [0.0])
    with pytest.raises(ValueError):
        WeightedPointSet([[0, np.nan]])
    P = WeightedPointSet([[0, 0], [1, 1]], [1, 3])
    assert P.total_weight == 4.0
    assert P.subset([1]).weights.tolist() == [3.0]


def test_terrain_validation_rejects_gaps_and_jumps():
    with pytest.raises(ValueError):
        PLTerrain([[(0, 0), (1, 0), (1, 1)]], [(0, 0, 1)], base_box=UNIT)
    with pytest.raises(ValueError):
        PLTerrain([[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]], [(0, 0, 1), (0, 0, 2)])


def test_linear_patch_requires_positive_height():
    with pytest.raises(ValueError):
        LinearPatch(UNIT, (-2, 0, 1))
    assert LinearPatch(UNIT, (1, 0, 0.1)).mass == pytest.approx(0.6)


def test_split_at_zero_preserves_signed_mass():
    T = PLTerrain.from_mesh([[0, 0, 1], [1, 0, -1], [1, 1, -1], [0, 1, 1]], [[0, 1, 2], [0, 2, 3]])
    pos, neg = T.split_at_zero()
    assert not pos.has_negative and not neg.has_negative
    signed = sum(integrate_linear(ConvexPolygon(t), c) for t, c in zip(T.triangles, T.coeffs))
    assert pos.total_mass - neg.total_mass == pytest.approx(signed, abs=1e-12)


coord = st.floats(-5, 5, allow_nan=False)


@st.composite
def boxes(draw):
    x = sorted([draw(coord), draw(coord)])
    y = sorted([draw(coord), draw(coord)])
    return x, y


@given(boxes(), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_box_integral_matches_closed_form(b, a, bb, c):
    (x1, x2), (y1, y2) = b
    if x2 - x1 < 1e-6 or y2 - y1 < 1e-6:
        return
    poly = ConvexPolygon([(x1, y1), (x2, y1), (x2, y2), (x1, y2)])
    want = a * (x2**2 - x1**2) * (y2 - y1) / 2 + bb * (y2**2 - y1**2) * (x2 - x1) / 2 + c * (x2 - x1) * (y2 - y1)
    scale = 1 + abs(a) * 25 * 100 + abs(bb) * 25 * 100 + abs(c) * 100
    assert abs(integrate_linear(poly, (a, bb, c)) - want) <= 1e-12 * scale
    assert box_linear_integral((x1, y1), (x2, y2), (a, bb, c)) == pytest.approx(want, abs=1e-12 * scale)


@given(st.floats(0, 2 * math.pi), st.floats(-1.5, 1.5))
def test_clip_monotone_in_area(theta, off):
    out = clip(SQUARE, ((math.cos(theta), math.sin(theta)), off))
    assert out is None or out.area <= SQUARE.area + 1e-12


@given(st.integers(0, 8), st.integers(0, 8), st.integers(-8, 8), st.integers(1, 3), st.integers(-3, 3))
def test_contains_consistent_with_clip(px, py, off, nx, ny):
    p = np.array([px, py]) / 8.0
    normal = (nx, ny)
    lhs = nx * p[0] + ny * p[1]
    if abs(lhs - off / 8) < 1e-9:
        return
    out = clip(SQUARE, (normal, off / 8))
    expect = lhs < off / 8
    got = out is not None and bool(out.contains_many(p[None])[0])
    assert got == expect


@given(st.floats(0.01, 0.99), st.floats(0, 1), st.floats(0, 1))
def test_terrain_measure_additive(cut, y0, y1):
    T = tent_terrain()
    lo, hi = min(y0, y1), max(y0, y1)
    R = AxisRect([0, lo], [1, hi])
    R1, R2 = AxisRect([0, lo], [cut, hi]), AxisRect([cut, lo], [1, hi])
    assert terrain_measure(T, R) == pytest.approx(terrain_measure(T, R1) + terrain_measure(T, R2), abs=1e-9)
