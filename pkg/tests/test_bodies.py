import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import property_checks as P
from crofton import bodies as B
from crofton.grassmannian import Subspace, sample_frames


def rng(seed=0):
    return np.random.default_rng(seed)


E3 = np.array([0.0, 0, 1])


# -- space forms -------------------------------------------------------------

@pytest.mark.parametrize("kind, p, q, amb, sigma", [
    ("pseudosphere", 2, 0, (3, 0), 1), ("pseudosphere", 1, 1, (2, 1), 1),
    ("pseudohyperbolic", 1, 1, (1, 2), -1), ("flat", 1, 1, (1, 1), 0),
])
def test_space_forms(kind, p, q, amb, sigma):
    sf = B.SpaceForm(kind, p, q)
    assert (sf.ambient.p, sf.ambient.q) == amb and sf.sigma == sigma and sf.n == p + q


def test_space_form_rejects_unknown_kind():
    with pytest.raises(ValueError):
        B.SpaceForm("torus", 1, 1)


# -- convex bodies -----------------------------------------------------------

def test_cap_examples():
    cap = B.Cap(E3, math.pi / 3)
    assert cap.chi(Subspace.span([1, 0, 0], [0, 1, 0])).chi == 0
    assert cap.chi(Subspace.span([0, 1, 0], [0, 0, 1])).chi == 1
    assert B.euler_convex(cap, Subspace.span([0, 1, 0], [0, 0, 1])).chi == 1


def test_cap_tangent_plane_flagged():
    r = 0.7
    # plane whose projection of the axis has norm exactly cos r
    n = np.array([math.cos(r), 0, math.sin(r)])  # |n . e3| = sin r  =>  |proj| = cos r
    E = Subspace.span(np.cross(n, [0, 1, 0]), [0, 1, 0])
    assert not B.Cap(E3, r).chi(E).generic_flag


@pytest.mark.parametrize("r", [0.3, math.pi / 3, 1.2])
def test_cap_hitting_probability(r):
    fr = sample_frames(3, 2, 200_000, rng(0))
    chi, _ = B.Cap(E3, r).chi_batch(fr)
    se = math.sqrt(math.sin(r) * (1 - math.sin(r)) / len(chi))
    assert abs(chi.mean() - math.sin(r)) <= 3 * se


def test_cap_radius_validation():
    with pytest.raises(ValueError):
        B.Cap(E3, 2.0)


def test_cone_body_orthant():
    cone = B.ConeBody(np.eye(3))
    mixed = Subspace.span(*np.linalg.svd(np.array([[1.0, 1, -1]]))[2][1:])
    same = Subspace.span(*np.linalg.svd(np.array([[1.0, 1, 1]]))[2][1:])
    assert cone.chi(mixed).chi == 1
    assert cone.chi(same).chi == 0
    # a coordinate plane only touches the boundary of the cone
    assert not cone.chi(Subspace.span([1, 0, 0], [0, 1, 0])).generic_flag


def test_cone_body_validation():
    with pytest.raises(ValueError):
        B.ConeBody(np.array([[1.0, -1.0], [0.0, 0.0]]))  # empty interior
    with pytest.raises(ValueError):
        B.ConeBody(np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]))  # contains a line


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_convexity_bound(seed):
    r = rng(seed)
    G = np.abs(r.normal(size=(3, 4))) + 0.1
    fr = sample_frames(3, 2, 20, r)
    for body in (B.ConeBody(G), B.Cap(r.normal(size=3), float(r.uniform(0.1, 1.4)))):
        chi, _ = body.chi_batch(fr)
        assert set(np.unique(chi)) <= {0, 1}


def test_cone_matches_cap_like_cone():
    """A many-sided cone approximates a cap; chi agrees away from the boundary."""
    r = 0.6
    phi = np.linspace(0, 2 * math.pi, 400, endpoint=False)
    G = np.stack([math.sin(r) * np.cos(phi), math.sin(r) * np.sin(phi), np.full_like(phi, math.cos(r))])
    cone = B.ConeBody(G)
    cap = B.Cap(E3, r)
    fr = sample_frames(3, 2, 300, rng(2))
    gap = np.linalg.norm(fr[:, 2, :], axis=-1) - math.cos(r)
    keep = np.abs(gap) > 1e-3
    assert np.array_equal(cone.chi_batch(fr[keep])[0], cap.chi_batch(fr[keep])[0])


# -- templates ---------------------------------------------------------------

def test_band_examples():
    assert B.euler_band(2, 0.5, Subspace.span([0, 0, 1], [1, 0, 0])).chi == 2
    assert B.euler_band(2, 0.5, Subspace.span([1, 0, 0], [0, 1, 0])).chi == 0
    assert B.euler_band(2, 0.5, Subspace.span([1, 0, 0])).chi == 2


def test_band_degenerate_flagged():
    theta = 0.5
    v = np.array([1.0, 0.0, math.tan(theta)])  # on the boundary cone
    assert not B.euler_band(2, theta, Subspace.span(v)).generic_flag


def test_band_validation():
    with pytest.raises(ValueError):
        B.Band(2, 1.0)


@pytest.mark.parametrize("p, k, want", [(2, 1, 2), (3, 1, 0), (3, 2, 2)])
def test_equator_examples(p, k, want):
    fr = sample_frames(p + 1, p + 1 - k, 5, rng(3))
    for f in fr:
        assert B.euler_equator(p, k, Subspace(f)).chi == want


def test_equator_containment_flagged():
    assert not B.Equator(2).chi(Subspace.span([1, 0, 0], [0, 1, 0])).generic_flag


def test_full_sphere_and_constant():
    fr = sample_frames(3, 2, 4, rng(4))
    assert (B.FullSphere(3).chi_batch(fr)[0] == 0).all()  # great circles
    assert (B.ConstantChi(3, 5).chi_batch(fr)[0] == 5).all()


def test_radial_projection_is_identity_on_cones():
    band = B.Band(2, 0.4)
    assert B.radial_project(band) is band
    pts = rng(5).normal(size=(10, 3))
    assert np.allclose(np.linalg.norm(B.radial_points(pts), axis=1), 1)
    with pytest.raises(TypeError):
        B.radial_project(B.Ellipse())


def test_swapped_body_pulls_back():
    base = B.Band(2, 0.5)  # lives in R^{2,1}; swapped body lives in R^{1,2}
    sw = B.SwappedBody(base, 2)
    fr = sample_frames(3, 2, 100, rng(6))
    moved = B.swap_frames(fr, 2)
    assert np.array_equal(sw.chi_batch(moved)[0], base.chi_batch(fr)[0])


def test_body_dimension_mismatch():
    with pytest.raises(ValueError):
        B.Band(2, 0.5).chi_batch(sample_frames(4, 2, 1, rng()))


# -- planar curves -----------------------------------------------------------

@pytest.mark.parametrize("c, want", [(0.5, 2), (2.0, 0), (-0.99, 2)])
def test_unit_circle_vertical_lines(c, want):
    assert B.unit_circle().line_chi([1.0, 0.0], c).chi == want


def test_tangent_line_flagged():
    assert not B.unit_circle().line_chi([0.0, 1.0], 1.0).generic_flag


def test_support_and_root_counts_agree():
    r = rng(7)
    for curve in (B.Ellipse(1.0, 0.4), B.unit_circle()):
        ang = r.uniform(0, 2 * math.pi, 2000)
        nu = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        offsets = nu * r.uniform(-1.5, 1.5, size=(2000, 1))
        comp = nu[:, :, None]
        a, _ = curve.chi_affine_batch(None, comp, offsets, use_support=True)
        b, _ = curve.chi_affine_batch(None, comp, offsets, use_support=False)
        assert np.array_equal(a, b)


def test_limacon_counts_match_dense_grid():
    curve = B.Limacon(0.8)
    fine = B.Limacon(0.8, n_grid=20_000)
    r = rng(8)
    ang = r.uniform(0, 2 * math.pi, 500)
    nu = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    c = r.uniform(-1.8, 1.8, 500)
    a, ga = B.count_crossings(curve, nu, c)
    b, gb = B.count_crossings(fine, nu, c)
    ok = ga & gb
    assert np.array_equal(a[ok], b[ok])
    assert set(np.unique(a)) <= {0, 2, 4}


def test_flat_ball_chi():
    ball = B.FlatBall(1.0, 2)
    chi, gen = ball.chi_affine_batch(None, None, np.array([[0.5, 0], [0, 1.5], [1.0, 0]]))
    assert chi[:2].tolist() == [1, 0] and not gen[2]


@pytest.mark.parametrize("check", [P.chi_local_constancy, P.chi_brute_force, P.band_genericity],
                         ids=lambda f: f.__name__)
def test_body_properties(check):
    res = check()
    assert res.passed, res.line()
