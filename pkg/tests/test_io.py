import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from epsapprox.geometry import WeightedPointSet
from epsapprox.io import (dumps, load_patch_json, load_terrain_json, parse_points_csv,
                         points_to_csv)
from epsapprox.merge_reduce import ApproxCertificate, LogEntry

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.tuples(finite, finite, st.floats(1e-300, 1e300)), min_size=1, max_size=30))
def test_csv_round_trip_is_lossless(rows):
    arr = np.array(rows)
    P = WeightedPointSet(arr[:, :2], arr[:, 2])
    Q = parse_points_csv(points_to_csv(P, with_weights=True))
    assert np.array_equal(P.points, Q.points)
    assert np.array_equal(P.weights, Q.weights)


def test_csv_header_and_default_weight():
    P = parse_points_csv("x,y\n0.5,0.25\n1,2,3\n")
    assert P.points.tolist() == [[0.5, 0.25], [1, 2]]
    assert P.weights.tolist() == [1.0, 3.0]
    with pytest.raises(ValueError):
        parse_points_csv("1,2\nfoo,3\n")
    with pytest.raises(ValueError):
        parse_points_csv("1,2,3,4\n")


def test_unit_weights_omitted():
    assert points_to_csv(WeightedPointSet([[0.0, 0.0]])) == "0,0\n"


def test_terrain_json_reads_heights_from_vertices():
    T = load_terrain_json({"vertices": [[0, 0, 0], [1, 0, 1], [1, 1, 1], [0, 1, 0]],
                           "triangles": [[0, 1, 2], [0, 2, 3]]})
    assert np.allclose(T.coeffs, [[1, 0, 0], [1, 0, 0]])


def test_patch_json():
    p = load_patch_json({"lo": [0, 0], "hi": [2, 1], "coeffs": [0, 0, 1]})
    assert p.mass == 2.0


def test_certificate_json_round_trip():
    cert = ApproxCertificate(0.2, 0.1, (LogEntry("merge", 64, 0.1),), 32, 128, 64, None)
    back = json.loads(dumps(cert))
    assert back["halve_log"] == [{"stage": "merge", "size": 64, "error": 0.1}]
    assert back["accumulated_error"] == 0.1
