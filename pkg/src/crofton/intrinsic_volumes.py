"""Coefficient tables and independent intrinsic-volume oracles.

Oracles come in three flavours, recorded per entry as provenance:
``closed-form`` (elementary integrals), ``continued`` (real-parameter closed forms
continued in zeta along a branch anchor) and ``calibrated`` (Steiner-polynomial
fits of tube volumes computed by quadrature).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate, optimize

from .branched import BranchAnchor, branch_continue


def omega(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n < 0:
        raise ValueError("omega needs n >= 0")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def gen_binom(a: float, j: int) -> float:
    """binom(a, j) = a (a-1) ... (a-j+1) / j!"""
    out = 1.0
    for i in range(j):
        out *= (a - i) / (i + 1)
    return out


@dataclass(frozen=True)
class CoeffTable:
    k: int
    n: int
    sigma: float
    c: tuple

    def rows(self):
        for j, cj in enumerate(self.c):
            cj = complex(cj)
            yield {"k": self.k, "n": self.n, "sigma": self.sigma, "j": j,
                   "c_j_real": cj.real, "c_j_imag": cj.imag}


def crofton_coeffs(k: int, n: int, sigma: float) -> CoeffTable:
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    c = []
    for j in range((n - k) // 2 + 1):
        s_j = 1.0 if j == 0 else sigma**j
        c.append(omega(k - 1) / omega(k + 2 * j - 1) * gen_binom(-k / 2, j) * s_j)
    return CoeffTable(k, n, float(sigma), tuple(c))


def sphere_crofton_coeffs(k: int, n: int) -> list[float]:
    """Classical unit-sphere Crofton weights 1/(pi omega_{k+2j-1}) binom(-k/2, j)."""
    return [gen_binom(-k / 2, j) / (math.pi * omega(k + 2 * j - 1)) for j in range((n - k) // 2 + 1)]


def _fmt(x: float) -> str:
    return repr(float(x)) if x != 0 else "0.0"


def coeff_csv(tables: Sequence[CoeffTable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "n", "sigma", "j", "c_j_real", "c_j_imag"])
    for t in tables:
        for r in t.rows():
            w.writerow([r["k"], r["n"], _fmt(r["sigma"]), r["j"],
                        f"{r['c_j_real'] + 0.0:.17g}", f"{r['c_j_imag'] + 0.0:.17g}"])
    return buf.getvalue()


@dataclass(frozen=True)
class MuVector:
    values: tuple
    provenance: tuple

    def __post_init__(self):
        if len(self.values) != len(self.provenance):
            raise ValueError("one provenance tag per entry")

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> complex:
        return self.values[k]

    def available(self, k: int) -> bool:
        return 0 <= k < len(self.values) and self.values[k] is not None


class MissingMuError(LookupError):
    pass


def rhs(mu: MuVector, k: int, sigma: float, n: int | None = None) -> complex:
    """sum_j c_j mu_{k+2j}."""
    n = mu.n if n is None else n
    table = crofton_coeffs(k, n, sigma)
    missing = [k + 2 * j for j in range(len(table.c)) if not mu.available(k + 2 * j)]
    if missing:
        raise MissingMuError(f"intrinsic volumes unavailable for indices {missing}")
    return complex(sum(c * mu[k + 2 * j] for j, c in enumerate(table.c)))


# ---------------------------------------------------------------------------
# tube volumes and Steiner fits in R^d


def tube_volume_axial(d: int, intervals: Sequence[tuple[float, float]], t: float) -> float:
    """Volume of the t-neighbourhood in R^d of an axially symmetric subset of S^{d-1}.

    The subset is the union of polar-angle ``intervals`` (angle from e_d); t < 1.
    """
    if not 0 < t < 1:
        raise ValueError("tube radius must lie in (0, 1)")
    edges = sorted(a for iv in intervals for a in iv)
    area_sphere = 2 * math.pi ** ((d - 1) / 2) / math.gamma((d - 1) / 2)  # vol S^{d-2}
    shell = ((1 + t) ** d - (1 - t) ** d) / d

    def radial_measure(alpha):
        inside = any(a <= alpha <= b for a, b in intervals)
        if inside:
            return shell
        delta = min(abs(alpha - e) for e in edges)
        s = math.sin(delta)
        if s >= t or math.cos(delta) <= 0:
            return 0.0
        root = math.sqrt(t * t - s * s)
        lo, hi = max(0.0, math.cos(delta) - root), math.cos(delta) + root
        return (hi**d - lo**d) / d

    def integrand(alpha):
        return radial_measure(alpha) * math.sin(alpha) ** (d - 2)

    breaks = sorted({0.0, math.pi, *edges, *[e + s * math.asin(t) for e in edges for s in (-1, 1)]})
    breaks = [b for b in breaks if 0.0 <= b <= math.pi]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a > 0:
            val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
            total += val
    return area_sphere * total


def steiner_fit(volume_fn, d: int, nodes: Sequence[float] | None = None) -> np.ndarray:
    """mu_0..mu_d from V(t) = sum_k mu_k omega_{d-k} t^{d-k}, least squares on ``nodes``."""
    if nodes is None:
        nodes = 0.25 + 0.15 * np.cos(np.pi * (np.arange(2 * d + 3) + 0.5) / (2 * d + 3))
    nodes = np.asarray(nodes, dtype=float)
    V = np.array([volume_fn(t) for t in nodes])
    A = nodes[:, None] ** np.arange(d + 1)[None, :]
    coef, *_ = np.linalg.lstsq(A, V, rcond=None)
    # coef[j] multiplies t^j, i.e. mu_{d-j} omega_j
    return np.array([coef[d - k] / omega(d - k) for k in range(d + 1)])


def mu_axial_fit(d: int, intervals) -> np.ndarray:
    """Intrinsic volumes (in R^d) of an axially symmetric subset of S^{d-1}."""
    return steiner_fit(lambda t: tube_volume_axial(d, intervals, t), d)


def mu_ball_euclidean(n: int, k: int, R: float = 1.0) -> float:
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need n >= 1 and 0 <= k <= n")
    if n > 6:
        raise ValueError("Steiner fit is ill-conditioned beyond n = 6")
    nodes = R * np.linspace(0.1, 1.0, n + 1)
    mu = steiner_fit(lambda t: omega(n) * (R + t) ** n, n, nodes)
    return float(mu[k])


def flat_calibration(n: int, k: int) -> float:
    """Constant fixing Cr_k(ball) = mu_k(ball) for the factorised affine sampler."""
    R = 1.0
    return mu_ball_euclidean(n, k, R) / (math.pi * omega(k - 1) * omega(k) * R**k)


def mu_sphere(m: int, k: int) -> float:
    """mu_k of the unit m-sphere in R^{m+1}."""
    if (m - k) % 2 or k > m:
        return 0.0
    return 2 * math.comb(m + 1, k) * omega(m + 1) / omega(m + 1 - k)


# ---------------------------------------------------------------------------
# Riemannian bodies on S^2 and S^3


def mu_cap(p: int, r: float) -> MuVector:
    """Geodesic cap of radius r in the unit S^p, p in {2, 3}."""
    s, c = math.sin(r), math.cos(r)
    if p == 2:
        vals = (1.0, math.pi * s, 2 * math.pi * (1 - c))
    elif p == 3:
        vals = (1.0, 3 * r + s * c, 2 * math.pi * s * s, 2 * math.pi * (r - s * c))
    else:
        raise ValueError("cap oracle available for p in {2, 3}")
    return MuVector(vals, ("closed-form",) * len(vals))


def _band_closed(p: int, eps):
    """Band closed forms; eps may be complex (entire functions of eps)."""
    if p == 2:
        return (0.0, 2 * math.pi * np.cos(eps), 4 * math.pi * np.sin(eps))
    if p == 3:
        s, c = np.sin(eps), np.cos(eps)
        return (2.0, 6 * eps - 2 * s * c, 4 * math.pi * c * c, 4 * math.pi * (eps + s * c))
    raise ValueError("band oracle available for p in {2, 3}")


def mu_band_riemannian(p: int, eps_width: float, fit_mu1: bool = True) -> MuVector:
    """Band {|dist to equator| <= eps} in the unit S^p.

    For p = 3 the entry mu_1 comes from the tube-volume Steiner fit.
    """
    if not 0 < eps_width < math.pi / 4:
        raise ValueError("band half-width must lie in (0, pi/4)")
    vals = list(_band_closed(p, eps_width))
    prov = ["closed-form"] * len(vals)
    if p == 3:
        if fit_mu1:
            iv = [(math.pi / 2 - eps_width, math.pi / 2 + eps_width)]
            vals[1] = float(mu_axial_fit(4, iv)[1])
            prov[1] = "calibrated"
        else:
            vals[1] = None
            prov[1] = "absent"
    return MuVector(tuple(float(v) if v is not None else None for v in vals), tuple(prov))


# ---------------------------------------------------------------------------
# continuation in zeta


def xi(zeta: complex) -> complex:
    zeta = complex(zeta)
    return (2 * zeta - 1) / (2 * zeta + 1)


def rho_of_theta(theta: float) -> float:
    return math.atanh(math.tan(theta))


def eps_of_theta(theta: float, xi_val: float) -> float:
    return math.atan(math.sqrt(xi_val) * math.tan(theta))


@dataclass(frozen=True)
class ContinuedBand:
    """Branch-continued sin, cos and angle of eps(zeta) = arctan(sqrt(xi) tan theta)."""

    sin_eps: complex
    cos_eps: complex
    eps: complex
    sqrt_xi: complex


def continue_band_angle(theta: float, anchor: BranchAnchor) -> ContinuedBand:
    t = math.tan(theta)
    sqrt_xi = branch_continue(anchor, xi).sqrt()
    sqrt_1px2 = branch_continue(anchor, lambda z: 1 + xi(z) * t * t).sqrt()
    x = sqrt_xi * t
    # arctan x = log((1 + i x)/(1 - i x)) / (2i), with sqrt(xi) continued inside the ratio
    sx = lambda z, t=t: t * _sqrt_near(xi(z), sqrt_xi)
    ratio_log = branch_continue(anchor, lambda z: (1 + 1j * sx(z)) / (1 - 1j * sx(z))).log()
    return ContinuedBand(x / sqrt_1px2, 1 / sqrt_1px2, ratio_log / 2j, sqrt_xi)


def _sqrt_near(w: complex, ref: complex) -> complex:
    """The square root of w on the sheet closest to ``ref`` (used inside continuations)."""
    r = complex(np.sqrt(complex(w)))
    return r if abs(r - ref) <= abs(r + ref) else -r


def mu_template_continued(p: int, s: int, theta: float, zeta_end: complex,
                          anchor: BranchAnchor | None = None) -> MuVector:
    """mu_k^zeta of the radially projected template, continued to ``zeta_end``.

    s = 0 is the totally geodesic equator (zeta independent); s = 1 is the band of
    angle theta.  ``zeta_end = 0`` returns the limit values on S^{p-1,1}.
    """
    if s not in (0, 1):
        raise ValueError("s must be 0 or 1")
    if s == 0:
        vals = tuple(mu_sphere(p - 1, k) for k in range(p + 1))
        return MuVector(vals, ("closed-form",) * (p + 1))
    if not 0 < theta < math.pi / 4:
        raise ValueError("theta must lie in (0, pi/4)")
    if anchor is None:
        anchor = BranchAnchor.to(zeta_end)
    band = continue_band_angle(theta, anchor)
    if p == 2:
        vals = (0.0, 2 * math.pi * band.cos_eps, 4 * math.pi * band.sin_eps)
    elif p == 3:
        sc = band.sin_eps * band.cos_eps
        vals = (2.0, 6 * band.eps - 2 * sc, 4 * math.pi * band.cos_eps**2,
                4 * math.pi * (band.eps + sc))
    else:
        raise ValueError("template oracle available for p in {2, 3}")
    vals = tuple(complex(v) for v in vals)
    return MuVector(vals, ("closed-form",) + ("continued",) * (len(vals) - 1))


def template_limit(p: int, theta: float) -> MuVector:
    """Closed-form values on S^{p-1,1} for p = 2 (band of angle theta)."""
    if p != 2:
        raise ValueError("closed-form limit implemented for p = 2")
    rho = rho_of_theta(theta)
    vals = (0j, complex(2 * math.pi * math.cosh(rho)), 1j * 4 * math.pi * math.sinh(rho))
    return MuVector(vals, ("closed-form",) * 3)


def radial_jacobian(theta: float, zeta: float, p: int) -> float:
    """Volume distortion of S^n -> S_zeta at latitude theta, real zeta > 1/2."""
    x = xi(zeta).real
    t2 = math.tan(theta) ** 2
    return math.sqrt(x) * ((1 + t2) / (1 + x * t2)) ** ((p - 1) / 2 + 1)


# ---------------------------------------------------------------------------
# flat curves


def _lightlike_params(speed2, n_grid: int = 4096) -> list[float]:
    t = np.linspace(0.0, 2 * math.pi, n_grid + 1)
    v = speed2(t)
    roots = []
    for a, b, va, vb in zip(t[:-1], t[1:], v[:-1], v[1:]):
        if va == 0.0:
            roots.append(float(a))
        elif va * vb < 0:
            roots.append(optimize.brentq(lambda x: float(speed2(np.array([x]))[0]), a, b, xtol=1e-15))
    return roots


def mu1_curve_flat(curve, precision: str = "double") -> complex:
    """Integral of sqrt|Q(gamma')| over spacelike arcs plus i times the timelike arcs, in R^{1,1}.

    ``precision="mp"`` repeats the computation with mpmath (root polishing and
    tanh-sinh quadrature at 30 digits) as an independent second route.
    """
    def speed2(t):
        dg = curve.dgamma(t)
        return dg[0] ** 2 - dg[1] ** 2

    roots = _lightlike_params(speed2)
    if not roots:
        roots = [0.0]
    pts = roots + [roots[0] + 2 * math.pi]
    if precision == "double":
        total = 0j
        for a, b in zip(pts[:-1], pts[1:]):
            mid = speed2(np.array([0.5 * (a + b)]))[0]
            val, _ = integrate.quad(lambda x: math.sqrt(abs(speed2(np.array([x]))[0])), a, b,
                                    epsabs=1e-14, epsrel=1e-13, limit=400)
            total += val if mid > 0 else 1j * val
        return complex(total)
    if precision != "mp":
        raise ValueError("precision must be 'double' or 'mp'")
    if curve.speed2_mp is None:
        raise ValueError("curve carries no mpmath speed function")
    f = curve.speed2_mp
    with mpmath.workdps(30):
        mp_roots = [mpmath.findroot(f, mpmath.mpf(r)) for r in roots]
        mp_pts = mp_roots + [mp_roots[0] + 2 * mpmath.pi]
        total = mpmath.mpc(0)
        for a, b in zip(mp_pts[:-1], mp_pts[1:]):
            val = mpmath.quad(lambda x: mpmath.sqrt(abs(f(x))), [a, b])
            total += val if f((a + b) / 2) > 0 else 1j * val
        return complex(total)
