import math
from statistics import NormalDist

import numpy as np
import pytest

from conftest import random_pl_terrain, tent_terrain
from epsapprox.geometry import AxisRect, PLTerrain, terrain_measure
from epsapprox.merge_reduce import ReduceConfig
from epsapprox.oracle import (eps_error_density, eps_error_gaussian, eps_error_terrain,
                              gaussian_rect_mass)
from epsapprox.terrain import (GaussianSpec, SmoothTerrainSpec, allocate_samples,
                               gaussian_approx, gaussian_truncate, pl_decompose,
                               pl_terrain_approx, sample_certificate, smooth_split,
                               smooth_terrain_approx, truncation_half_width)

UNIT = AxisRect([0, 0], [1, 1])


def paraboloid():
    h = lambda p: 1 + p[:, 0] ** 2 + p[:, 1] ** 2
    g = lambda p: 2 * p[0]
    return SmoothTerrainSpec(UNIT, h, 2.0, 1.0, g)


def test_decompose_single_and_pair():
    one = PLTerrain([[(0, 0), (1, 0), (0, 1)]], [(0, 0, 1)], check=False)
    assert len(pl_decompose(one)) == 1
    sq = PLTerrain.flat(UNIT, 2.0)
    pieces = pl_decompose(sq)
    assert len(pieces) == 2
    assert sum(p.mass for p in pieces) == pytest.approx(terrain_measure(sq, UNIT))


def test_decompose_tent_planes():
    pieces = pl_decompose(tent_terrain())
    got = sorted(tuple(np.round(p.coeffs, 12)) for p in pieces)
    assert got == sorted([(0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]) or got == sorted([(-1.0, 1.0, 1.0), (1.0, -1.0, 1.0)])
    for p in pieces:
        for v in p.vertices:
            z = tent_terrain().height(v[None])[0]
            assert p.coeffs[0] * v[0] + p.coeffs[1] * v[1] + p.coeffs[2] == pytest.approx(z, abs=1e-12)


def test_flat_terrain_approx():
    T = PLTerrain.flat(UNIT)
    P, cert = pl_terrain_approx(T, ReduceConfig(0.1))
    assert eps_error_terrain(P, T, 64).max_error <= 0.1
    assert P.total_weight == pytest.approx(T.total_mass, abs=1e-9)
    assert cert.accumulated_error <= 0.1


def test_tent_terrain_approx():
    T = tent_terrain()
    P, cert = pl_terrain_approx(T, ReduceConfig(0.2))
    assert eps_error_terrain(P, T, 64).max_error <= 0.2
    assert P.total_weight == pytest.approx(T.total_mass, abs=1e-9)


def test_random_terrain_approx(rng):
    T = random_pl_terrain(rng, g=3)
    P, cert = pl_terrain_approx(T, ReduceConfig(0.25))
    assert eps_error_terrain(P, T, 64).max_error <= 0.25
    assert P.total_weight == pytest.approx(T.total_mass, rel=1e-9)


def test_zero_terrain_gives_empty_output():
    P, cert = pl_terrain_approx(PLTerrain.flat(UNIT, 0.0), ReduceConfig(0.1))
    assert len(P) == 0 and P.total_weight == 0.0


def test_negative_terrain_rejected(rng):
    with pytest.raises(ValueError):
        pl_terrain_approx(random_pl_terrain(rng, 2, negative=True), ReduceConfig(0.2))


def test_split_constant_is_single_patch():
    spec = SmoothTerrainSpec(UNIT, lambda p: np.full(len(p), 3.0), 0.0, 3.0)
    patches = smooth_split(spec, 0.2)
    assert len(patches) == 1
    assert patches[0].coeffs == pytest.approx((0, 0, 3.0), abs=1e-6)


def test_split_paraboloid_sandwich_and_tiling():
    spec = paraboloid()
    eps = 0.5
    patches = smooth_split(spec, eps)
    g = np.linspace(0, 1, 16)
    for p in patches:
        X, Y = np.meshgrid(g, g, indexing="ij")
        pts = p.rect.lo + np.column_stack([X.ravel(), Y.ravel()]) * (p.rect.hi - p.rect.lo)
        gap = spec.height(pts) - p.height(pts)
        assert gap.min() >= -1e-9 and gap.max() <= eps * spec.z_min + 1e-9
    assert sum(p.rect.area for p in patches) == pytest.approx(1.0, abs=1e-9)
    lam, d2 = 2.0, 2.0
    assert len(patches) <= math.ceil(4 * lam * d2 / (spec.z_min * eps))


def test_split_monotone_in_eps():
    spec = paraboloid()
    assert len(smooth_split(spec, 0.1)) >= len(smooth_split(spec, 0.2)) >= len(smooth_split(spec, 0.4))


def test_split_rejects_bad_curvature():
    spec = SmoothTerrainSpec(UNIT, lambda p: 1 + 5 * p[:, 0] ** 2, 0.1, 1.0)
    with pytest.raises(ValueError):
        smooth_split(spec, 0.1)


def test_spec_rejects_low_height():
    with pytest.raises(ValueError):
        SmoothTerrainSpec(UNIT, lambda p: p[:, 0], 0.0, 0.5)


def test_sample_certificate_shrinks_with_more_points():
    patches = smooth_split(paraboloid(), 0.3)
    counts, cert = allocate_samples(patches, 0.05)
    assert cert <= 0.05
    assert sample_certificate(patches, counts * 2) < cert


def test_smooth_constant_height():
    spec = SmoothTerrainSpec(UNIT, lambda p: np.full(len(p), 2.0), 0.0, 2.0)
    P, cert = smooth_terrain_approx(spec, ReduceConfig(0.3))
    assert eps_error_density(P, spec.height, UNIT, 64).max_error <= 0.3


def test_smooth_paraboloid():
    spec = paraboloid()
    P, cert = smooth_terrain_approx(spec, ReduceConfig(0.5))
    assert cert.accumulated_error <= 0.5
    assert eps_error_density(P, spec.height, UNIT, 64).max_error <= 0.5


def test_smooth_homogeneous_in_scale():
    spec = paraboloid()
    cfg = ReduceConfig(0.5)
    P, _ = smooth_terrain_approx(spec, cfg)
    Q, _ = smooth_terrain_approx(spec.scaled(10.0), cfg)
    assert len(P) == len(Q)
    assert np.allclose(P.points, Q.points, rtol=0, atol=1e-12)
    assert np.allclose(Q.weights, 10 * P.weights, rtol=1e-12)


def test_half_width_formula():
    assert truncation_half_width(1.0, 0.1) == pytest.approx(2.0384, abs=1e-3)
    assert truncation_half_width(2.0, 0.1) == 2 * truncation_half_width(1.0, 0.1)


def test_truncate_tail_and_mass():
    g = GaussianSpec((0, 0), (1, 1))
    box = gaussian_truncate(g, 0.1)
    w = box.hi[0]
    assert 1 - NormalDist().cdf(w) <= 0.1 / 8
    for eps in (0.2, 0.1, 0.05):
        for s in (0.5, 1.0, 2.0):
            b = gaussian_truncate(GaussianSpec((1, -1), (s, 2 * s)), eps)
            assert gaussian_rect_mass((1, -1), (s, 2 * s), b) >= 1 - eps / 2


def test_truncate_scales_with_sigma():
    a = gaussian_truncate(GaussianSpec((0, 0), (1, 1)), 0.1)
    b = gaussian_truncate(GaussianSpec((0, 0), (2, 2)), 0.1)
    assert np.array_equal(b.hi, 2 * a.hi)


def test_gaussian_spec_validation():
    with pytest.raises(ValueError):
        GaussianSpec((0, 0), (1, 0))


@pytest.fixture(scope="module")
def gauss_run():
    g = GaussianSpec((0.0, 0.0), (1.0, 1.0))
    return g, gaussian_approx(g, 0.3)


def test_gaussian_total_weight(gauss_run):
    g, (P, cert) = gauss_run
    assert 1 - 0.3 <= P.total_weight <= 1.0
    assert cert.accumulated_error <= 0.3


def test_gaussian_quadrants_balanced(gauss_run):
    g, (P, cert) = gauss_run
    quads = []
    for sx in (-1, 1):
        for sy in (-1, 1):
            m = (np.sign(P.points[:, 0]) == sx) & (np.sign(P.points[:, 1]) == sy)
            quads.append(P.weights[m].sum() / P.total_weight)
    assert max(quads) - min(quads) <= 0.3


def test_gaussian_rectangle_error(gauss_run):
    g, (P, cert) = gauss_run
    assert eps_error_gaussian(P, g.mean, g.sigmas, resolution=64).max_error <= 0.3
