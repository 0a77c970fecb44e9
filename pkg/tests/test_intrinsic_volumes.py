import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import property_checks as P
from crofton.bodies import Ellipse, Limacon
from crofton.intrinsic_volumes import (
    MissingMuError,
    MuVector,
    coeff_csv,
    crofton_coeffs,
    flat_calibration,
    gen_binom,
    mu1_curve_flat,
    mu_axial_fit,
    mu_ball_euclidean,
    mu_band_riemannian,
    mu_cap,
    mu_sphere,
    mu_template_continued,
    omega,
    rhs,
    sphere_crofton_coeffs,
    template_limit,
    tube_volume_axial,
)

CIRCLE_MU1 = 2.3962804694711846  # frozen from the two-precision quadrature below


@pytest.mark.parametrize("n, want", [(0, 1.0), (1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_omega(n, want):
    assert omega(n) == pytest.approx(want, rel=1e-15)


def test_gen_binom():
    assert gen_binom(-0.5, 2) == pytest.approx(0.375)
    assert gen_binom(5, 2) == 10


@pytest.mark.parametrize("k, n, sigma, want", [
    (1, 2, 1, (1.0,)),
    (1, 3, 1, (1.0, -1 / (2 * math.pi))),
    (2, 4, 1, (1.0, -3 / (2 * math.pi))),
    (1, 3, -1, (1.0, 1 / (2 * math.pi))),
    (1, 3, 0, (1.0, 0.0)),
])
def test_coeff_examples(k, n, sigma, want):
    assert np.allclose(crofton_coeffs(k, n, sigma).c, want, rtol=0, atol=1e-15)


@given(st.integers(1, 10), st.integers(0, 9), st.floats(-4, 4))
def test_leading_coefficient_is_one(k, extra, sigma):
    assert crofton_coeffs(k, k + extra, sigma).c[0] == 1.0


def test_sphere_table():
    for n in range(1, 11):
        for k in range(1, n + 1):
            ours = crofton_coeffs(k, n, 1).c
            classical = [math.pi * omega(k - 1) * c for c in sphere_crofton_coeffs(k, n)]
            assert np.allclose(ours, classical, rtol=0, atol=1e-12)


def test_coeff_csv_format():
    text = coeff_csv([crofton_coeffs(2, 4, 1)])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["k", "n", "sigma", "j", "c_j_real", "c_j_imag"]
    assert float(rows[1]["c_j_real"]) == -3 / (2 * math.pi)  # 17 digits round-trip exactly


def test_coeff_range_checked():
    with pytest.raises(ValueError):
        crofton_coeffs(3, 2, 1)


# -- Euclidean and spherical oracles ------------------------------------------

def test_ball_steiner_values():
    assert mu_ball_euclidean(2, 1, 1.0) == pytest.approx(math.pi, rel=1e-12)
    assert mu_ball_euclidean(3, 3, 2.0) == pytest.approx(omega(3) * 8, rel=1e-12)
    assert mu_ball_euclidean(4, 0, 1.5) == pytest.approx(1.0, rel=1e-10)
    # classical mu_k(B^n) = binom(n, k) omega_n / omega_{n-k}
    for n in range(1, 7):
        for k in range(n + 1):
            want = math.comb(n, k) * omega(n) / omega(n - k)
            assert mu_ball_euclidean(n, k) == pytest.approx(want, rel=1e-8)
    with pytest.raises(ValueError):
        mu_ball_euclidean(7, 1)


def test_flat_calibration_planar_lines():
    assert flat_calibration(2, 1) == pytest.approx(0.5, rel=1e-12)


def test_sphere_intrinsic_volumes():
    assert mu_sphere(1, 1) == pytest.approx(2 * math.pi)
    assert mu_sphere(2, 0) == 2 and mu_sphere(2, 1) == 0
    assert mu_sphere(2, 2) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("r", [0.4, 1.0, 1.4])
def test_cap_closed_forms_match_tube_fits(r):
    assert np.allclose(mu_axial_fit(3, [(0, r)])[:3], mu_cap(2, r).values, atol=1e-10)
    assert np.allclose(mu_axial_fit(4, [(0, r)])[:4], mu_cap(3, r).values, atol=1e-10)


def test_cap_s2_values():
    mu = mu_cap(2, math.pi / 3)
    assert mu[1] == pytest.approx(math.pi * math.sin(math.pi / 3))
    assert mu[2] == pytest.approx(math.pi)  # 2 pi (1 - cos r)


def test_band_examples():
    mu = mu_band_riemannian(2, math.pi / 6)
    assert mu.values == pytest.approx((0.0, math.pi * math.sqrt(3), 2 * math.pi))
    assert mu_band_riemannian(2, 1e-6)[1] == pytest.approx(2 * math.pi, rel=1e-10)
    # d mu_2 / d eps = boundary length = 2 * 2 pi cos eps
    e, h = 0.4, 1e-6
    fd = (mu_band_riemannian(2, e + h)[2] - mu_band_riemannian(2, e - h)[2]) / (2 * h)
    assert fd == pytest.approx(4 * math.pi * math.cos(e), rel=1e-8)


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.7])
def test_band_closed_forms_match_tube_fits(eps):
    iv = [(math.pi / 2 - eps, math.pi / 2 + eps)]
    assert np.allclose(mu_axial_fit(3, iv)[:3], mu_band_riemannian(2, eps).values, atol=1e-10)
    p3 = mu_band_riemannian(3, eps)
    assert p3.provenance[1] == "calibrated"
    closed_mu1 = 6 * eps - 2 * math.sin(eps) * math.cos(eps)
    assert p3[1] == pytest.approx(closed_mu1, abs=1e-10)
    assert np.allclose(mu_axial_fit(4, iv)[[0, 2, 3]], np.array(p3.values)[[0, 2, 3]], atol=1e-10)


def test_tube_volume_of_full_sphere():
    # thickened unit 2-sphere: 4 pi / 3 ((1 + t)^3 - (1 - t)^3)
    t = 0.2
    want = 4 * math.pi / 3 * ((1 + t) ** 3 - (1 - t) ** 3)
    assert tube_volume_axial(3, [(0, math.pi)], t) == pytest.approx(want, rel=1e-10)


def test_missing_mu_reported():
    mu = mu_band_riemannian(3, 0.3, fit_mu1=False)
    with pytest.raises(MissingMuError, match=r"\[1\]"):
        rhs(mu, 1, 1.0)
    assert rhs(mu, 2, 1.0) == pytest.approx(mu[2])


def test_rhs_two_term_s3():
    mu = mu_cap(3, 1.0)
    assert rhs(mu, 1, 1.0) == pytest.approx(mu[1] - mu[3] / (2 * math.pi))


def test_muvector_provenance_length():
    with pytest.raises(ValueError):
        MuVector((1.0, 2.0), ("closed-form",))


# -- continuation ------------------------------------------------------------

def test_template_limits():
    theta = 0.5
    rho = math.atanh(math.tan(theta))
    lim = template_limit(2, theta)
    assert lim[1] == pytest.approx(2 * math.pi * math.cosh(rho))
    assert lim[2] == pytest.approx(4j * math.pi * math.sinh(rho))
    assert lim[1] == pytest.approx(2 * math.pi / math.sqrt(1 - math.tan(theta) ** 2))
    cont = mu_template_continued(2, 1, theta, 0.0)
    assert np.allclose(cont.values, lim.values, atol=1e-12)


def test_template_real_zeta_is_riemannian_band():
    """At zeta = 1/2 + ..., i.e. real zeta, the continuation is the round band of angle eps(zeta)."""
    theta, zeta = 0.5, 2.0
    xi = (2 * zeta - 1) / (2 * zeta + 1)
    eps = math.atan(math.sqrt(xi) * math.tan(theta))
    cont = mu_template_continued(2, 1, theta, zeta)
    assert np.allclose(cont.values, mu_band_riemannian(2, eps).values, atol=1e-12)


def test_equator_template_is_constant():
    for zeta in (1.0, 0.3j, 0.0):
        assert np.allclose(mu_template_continued(2, 0, 0.5, zeta).values, (0.0, 2 * math.pi, 0.0))


def test_template_validation():
    with pytest.raises(ValueError):
        mu_template_continued(2, 2, 0.5, 0.1j)
    with pytest.raises(ValueError):
        mu_template_continued(2, 1, 0.9, 0.1j)


@pytest.mark.parametrize("check", [P.derivative_identities, P.jacobian_identities, P.holomorphy,
                                   P.limit_consistency], ids=lambda f: f.__name__)
def test_continuation_properties(check):
    res = check()
    assert res.passed, res.line()


# -- flat curves -------------------------------------------------------------

def test_circle_mu1_two_precisions():
    lo = mu1_curve_flat(Ellipse(1, 1), "double")
    hi = mu1_curve_flat(Ellipse(1, 1), "mp")
    assert abs(lo - hi) < 1e-8
    assert abs(hi - CIRCLE_MU1 * (1 + 1j)) < 1e-12


def test_swapped_ellipse_conjugates():
    a = mu1_curve_flat(Ellipse(1.0, 0.5))
    b = mu1_curve_flat(Ellipse(0.5, 1.0))
    assert abs(b - 1j * a.conjugate()) < 1e-10


def test_squeezed_ellipse_is_nearly_spacelike():
    v = mu1_curve_flat(Ellipse(1.0, 1e-3))
    assert abs(v.real - 4.0) < 1e-2 and abs(v.imag) < 1e-4


def test_mp_route_needs_mp_speed():
    with pytest.raises(ValueError):
        mu1_curve_flat(Limacon(0.3), "mp")
