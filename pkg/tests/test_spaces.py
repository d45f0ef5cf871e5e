import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccmeasure import spaces as sp
from ccmeasure.errors import InputError

coord = st.floats(-3, 3, allow_nan=False)
heis_pt = st.tuples(coord, coord, coord).map(np.array)
engel_pt = st.tuples(coord, coord, coord, coord).map(np.array)
lam = st.floats(0.0, 5.0)


def test_heisenberg_anchor(H):
    res = sp.distance(H, [0, 0, 0], [0, 0, 1])
    assert res.kind == "exact"
    assert abs(res.value - 2 * math.sqrt(math.pi)) < 1e-9
    assert abs(res.value - 3.544907701811) < 1e-9


def test_euclidean_distance(E2):
    assert sp.distance(E2, [0, 0], [3, 4]).value == pytest.approx(5.0)
    assert sp.distance(E2, [1, 1], [1, 1]).value == 0.0


def test_identical_points_exact_zero(H):
    res = sp.distance(H, [1, 2, 3], [1, 2, 3])
    assert res.value == 0.0 and res.gap_estimate == 0.0


def test_dilation_examples(H):
    E = sp.engel()
    assert np.allclose(sp.dilate(H, 2, [1, 1, 1]), [2, 2, 4])
    assert np.allclose(sp.dilate(E, 2, [1, 1, 1, 1]), [2, 2, 4, 8])
    assert np.allclose(sp.dilate(H, 0, [1, 2, 3]), 0)
    with pytest.raises(InputError):
        sp.dilate(H, -1, [1, 1, 1])


def test_compose_example(H):
    assert np.allclose(sp.group_compose(H, [1, 0, 0], [0, 1, 0]), [1, 1, 0.5])


def test_horizontal_points_have_euclidean_norm(H):
    for p in ([1, 0, 0], [0.3, -0.4, 0], [2, 2, 0]):
        assert sp.distance(H, [0, 0, 0], p).value == pytest.approx(np.hypot(p[0], p[1]), abs=1e-12)


def test_bad_inputs(H):
    with pytest.raises(InputError):
        sp.distance(H, [0, 0], [0, 0, 1])
    with pytest.raises(InputError):
        sp.distance(H, [0, 0, np.nan], [0, 0, 1])
    with pytest.raises(InputError):
        sp.space_from_name("euclidean:0")
    with pytest.raises(InputError):
        sp.normalize_homogeneous(H, [0, 0, 0])


def test_space_names():
    assert sp.space_from_name("euclidean:3").dimension == 3
    assert sp.space_from_name("heisenberg").weights == (1, 1, 2)
    assert sp.space_from_name("engel").weights == (1, 1, 2, 3)


@given(heis_pt, heis_pt, heis_pt)
def test_heisenberg_group_axioms(p, q, r):
    H = sp.heisenberg()
    lhs = sp.group_compose(H, sp.group_compose(H, p, q), r)
    rhs = sp.group_compose(H, p, sp.group_compose(H, q, r))
    assert np.allclose(lhs, rhs, atol=1e-9)
    assert np.allclose(sp.group_compose(H, p, sp.group_inverse(H, p)), 0, atol=1e-12)


@given(engel_pt, engel_pt, engel_pt)
def test_engel_group_axioms(p, q, r):
    E = sp.engel()
    lhs = sp.group_compose(E, sp.group_compose(E, p, q), r)
    rhs = sp.group_compose(E, p, sp.group_compose(E, q, r))
    assert np.allclose(lhs, rhs, atol=1e-8)
    assert np.allclose(sp.group_compose(E, p, sp.group_inverse(E, p)), 0, atol=1e-9)
    assert np.allclose(sp.group_compose(E, sp.group_inverse(E, p), p), 0, atol=1e-9)


@given(engel_pt, engel_pt, lam)
def test_engel_dilation_is_automorphism(p, q, s):
    E = sp.engel()
    lhs = sp.dilate(E, s, sp.group_compose(E, p, q))
    rhs = sp.group_compose(E, sp.dilate(E, s, p), sp.dilate(E, s, q))
    assert np.allclose(lhs, rhs, atol=1e-7 * max(1, s) ** 3)


def test_engel_frame_left_invariant(rng):
    # X2 at p equals the differential of left translation by p applied to X2(0)
    E = sp.engel()
    for _ in range(20):
        p = rng.normal(size=4)
        h = 1e-6
        dq = (sp.group_compose(E, p, [0, h, 0, 0]) - sp.group_compose(E, p, [0, -h, 0, 0])) / (2 * h)
        assert np.allclose(dq, [0, 1, p[0], p[0] ** 2 / 2], atol=1e-6)
        dq = (sp.group_compose(E, p, [h, 0, 0, 0]) - sp.group_compose(E, p, [-h, 0, 0, 0])) / (2 * h)
        assert np.allclose(dq, [1, 0, 0, 0], atol=1e-6)


def test_homogeneity_and_left_invariance_bulk(H, rng):
    """10^3 random triples, vectorized, within 1e-9."""
    n = 1000
    P, Q, G = rng.normal(size=(3, n, 3))
    lam = rng.uniform(0.1, 4, size=n)
    d, _ = sp.distances(H, P, Q)
    w = np.array([1, 1, 2])
    dl, _ = sp.distances(H, P * lam[:, None] ** w, Q * lam[:, None] ** w)
    assert np.max(np.abs(dl - lam * d) / np.maximum(1, lam * d)) < 1e-9
    dg, _ = sp.distances(H, sp.group_compose(H, G, P), sp.group_compose(H, G, Q))
    assert np.max(np.abs(dg - d) / np.maximum(1, d)) < 1e-9


@settings(max_examples=200)
@given(heis_pt, heis_pt, heis_pt)
def test_heisenberg_metric_axioms(p, q, r):
    H = sp.heisenberg()
    dpq = sp.distance(H, p, q).value
    assert dpq >= 0
    assert dpq == pytest.approx(sp.distance(H, q, p).value, rel=1e-9, abs=1e-12)
    dpr, drq = sp.distance(H, p, r).value, sp.distance(H, r, q).value
    assert dpq <= dpr + drq + 1e-9 * (1 + dpq)


def test_heisenberg_norm_vectorized_matches_scalar(H, rng):
    P = rng.normal(size=(50, 3))
    v, _ = sp.distances(H, P, np.zeros(3))
    for p, x in zip(P, v):
        assert sp.distance(H, [0, 0, 0], p).value == pytest.approx(x, rel=1e-12)


def test_heisenberg_axis_formula(H):
    for z in (1e-6, 0.3, 1.0, 25.0):
        assert sp.distance(H, [0, 0, 0], [0, 0, z]).value == pytest.approx(
            2 * math.sqrt(math.pi * z), rel=1e-12)


def test_engel_plane_ratio(engel_space):
    # dilation by 2 maps (0,0,1,0) to (0,0,4,0): distances scale by 2
    d1 = sp.distance(engel_space, [0, 0, 0, 0], [0, 0, 1, 0])
    d4 = sp.distance(engel_space, [0, 0, 0, 0], [0, 0, 4, 0])
    assert d1.kind == "upper_bound"
    assert d4.value == pytest.approx(2 * d1.value, rel=1e-9)
    # z-axis points reduce to the Heisenberg case
    assert abs(d1.value - 2 * math.sqrt(math.pi)) <= d1.gap_estimate + 1e-6


def test_engel_distance_symmetric_and_invariant(engel_space, rng):
    E = engel_space
    p = np.array([0.1, -0.2, 0.3, 0.05])
    q = np.array([-0.1, 0.2, 0.0, 0.4])
    a = sp.distance(E, p, q)
    b = sp.distance(E, q, p)
    assert a.value == b.value
    g = np.array([0.5, 0.2, -0.3, 0.7])
    c = sp.distance(E, sp.group_compose(E, g, p), sp.group_compose(E, g, q))
    assert abs(c.value - a.value) <= a.gap_estimate + 1e-6


def test_engel_isometry_folding(engel_space):
    E = engel_space
    base = sp.distance(E, [0, 0, 0, 0], [0, 0, 0.3, 0.5]).value
    for z, w in ((-0.3, 0.5), (0.3, -0.5), (-0.3, -0.5)):
        assert sp.distance(E, [0, 0, 0, 0], [0, 0, z, w]).value == pytest.approx(base, rel=1e-12)


def test_resolution_floor(H, engel_space):
    assert sp.resolution_floor(H) < 1e-9
    assert sp.resolution_floor(engel_space) >= sp.resolution_floor(H)


def _norm_reference(t):
    """d(0, (1, 0, t)) to 50 digits, by root-finding in the arc angle."""
    import mpmath as mp

    mp.mp.dps = 50
    t = mp.mpf(t)
    if t > 10:
        # near the axis: solve for x = 2 pi - phi
        x0 = mp.sqrt(mp.pi / (2 * t))
        x = mp.findroot(lambda x: 8 * mp.sin(x / 2) ** 2 * t - (2 * mp.pi - x + mp.sin(x)),
                        (x0 / 2, 2 * x0), solver="anderson")
        phi = 2 * mp.pi - x
        return float(mp.sqrt(2 * t * phi**2 / (phi - mp.sin(phi))))
    phi = mp.findroot(lambda p: (p - mp.sin(p)) / (8 * mp.sin(p / 2) ** 2) - t,
                      (mp.mpf("1e-30"), 2 * mp.pi - mp.mpf("1e-9")), solver="anderson")
    if phi < mp.pi:
        return float((phi / 2) / mp.sin(phi / 2))
    return float(mp.sqrt(2 * t * phi**2 / (phi - mp.sin(phi))))


@pytest.mark.parametrize("t", [1e-9, 1e-3, 0.05, 1.0, 10.0, 1e4, 1e8, 1e12, 1.3e16, 1e20, 1e40])
def test_heisenberg_norm_high_precision(t):
    got = sp.heisenberg_norm(np.array([1.0, 0.0, t]))
    assert got == pytest.approx(_norm_reference(t), rel=1e-14)


def test_heisenberg_norm_degenerate_inputs():
    P = np.array([[1e-300, 0, 1.0], [1.0, 0, 1e-300], [1e-200, 0, 0], [0, 0, 0]])
    out = sp.heisenberg_norm(P)
    assert np.all(np.isfinite(out))
    assert out[0] == pytest.approx(2 * math.sqrt(math.pi))
    assert out[1] == pytest.approx(1.0) and out[2] == 1e-200 and out[3] == 0.0
