import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from epsapprox.geometry import PLTerrain, WeightedPointSet

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_rect_gap(P, D):
    """Max fraction gap over closed rectangles, by explicit quadruple loops."""
    xs = np.unique(np.concatenate([P.points[:, 0], D.points[:, 0]]))
    ys = np.unique(np.concatenate([P.points[:, 1], D.points[:, 1]]))
    wp = P.weights / P.total_weight
    wd = D.weights / D.total_weight
    best = 0.0
    for x0, x1 in itertools.combinations_with_replacement(xs, 2):
        inp = (P.points[:, 0] >= x0) & (P.points[:, 0] <= x1)
        ind = (D.points[:, 0] >= x0) & (D.points[:, 0] <= x1)
        for y0, y1 in itertools.combinations_with_replacement(ys, 2):
            a = wp[inp & (P.points[:, 1] >= y0) & (P.points[:, 1] <= y1)].sum()
            b = wd[ind & (D.points[:, 1] >= y0) & (D.points[:, 1] <= y1)].sum()
            best = max(best, abs(a - b))
    return best


def tent_terrain():
    """Unit square split on the main diagonal, height 1 on the diagonal, 0 at the other corners."""
    v = [[0, 0, 1], [1, 0, 0], [1, 1, 1], [0, 1, 0]]
    return PLTerrain.from_mesh(v, [[0, 1, 2], [0, 2, 3]])


def random_pl_terrain(rng, g=4, negative=False):
    xs = np.linspace(0, 1, g + 1)
    verts, tris = [], []
    for i in range(g + 1):
        for j in range(g + 1):
            z = rng.uniform(-1, 1) if negative else rng.uniform(0.1, 1.0)
            verts.append([xs[i], xs[j], z])
    for i in range(g):
        for j in range(g):
            a, b, c, d = i * (g + 1) + j, (i + 1) * (g + 1) + j, (i + 1) * (g + 1) + j + 1, i * (g + 1) + j + 1
            tris += [[a, b, c], [a, c, d]]
    return PLTerrain.from_mesh(verts, tris)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def uniform_set(rng, n, dim=2):
    return WeightedPointSet(rng.random((n, dim)))
