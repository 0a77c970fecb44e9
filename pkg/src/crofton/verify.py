"""Verification checks comparing Monte Carlo Crofton integrals with independent oracles.

Each check takes its sample size and tolerance as arguments so that callers pin
them explicitly; the defaults are the reference settings.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bodies as B
from . import engine as E
from .grassmannian import sample_frames, weights_from_eigs, gram_batch
from .intrinsic_volumes import (
    crofton_coeffs,
    mu1_curve_flat,
    mu_ball_euclidean,
    mu_band_riemannian,
    mu_cap,
    omega,
    sphere_crofton_coeffs,
    template_limit,
    mu_template_continued,
)
from .pseudo_linalg import standard_form

S2 = B.SpaceForm("pseudosphere", 2, 0)
S3 = B.SpaceForm("pseudosphere", 3, 0)
DE_SITTER = B.SpaceForm("pseudosphere", 1, 1)
ANTI_DE_SITTER_SWAP = B.SpaceForm("pseudohyperbolic", 1, 1)
SWEEP_EPS = (0.2, 0.1, 0.05, 0.025)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    target: object = None
    tolerance: str = ""
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: value={_fmt(self.value)} target={_fmt(self.target)} ({self.tolerance})"

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("value", "target"):
            if isinstance(d[key], complex):
                d[key] = [d[key].real, d[key].imag]
        return d


def _fmt(v):
    if isinstance(v, list) and len(v) == 2:
        v = complex(*v)
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}i"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# ---------------------------------------------------------------------------


def check_coefficients(tol: float = 1e-12, n_max: int = 10) -> Check:
    worst, c0_worst = 0.0, 0.0
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            mine = crofton_coeffs(k, n, 1.0).c
            sphere = [math.pi * omega(k - 1) * c for c in sphere_crofton_coeffs(k, n)]
            worst = max(worst, max(abs(a - b) for a, b in zip(mine, sphere)))
            for sigma in (-1.0, 0.0, 1.0, 0.37):
                c0_worst = max(c0_worst, abs(crofton_coeffs(k, n, sigma).c[0] - 1.0))
    err = max(worst, c0_worst)
    return Check("coefficients vs sphere formula, c0 = 1", err <= tol, err, 0.0, f"abs err <= {tol:g}",
                 {"sphere_max_err": worst, "c0_max_err": c0_worst})


NORMALIZATION_CASES = ((2, 0, 1), (1, 1, 1), (2, 1, 1), (2, 1, 2), (3, 1, 2))
NORMALIZATION_ZETAS = (1.0, 1 + 1j, 0.1j)


def check_normalization(N: int = 10**6, n_se: float = 5.0, seed: int = 2024,
                        cases=NORMALIZATION_CASES, zetas=NORMALIZATION_ZETAS) -> Check:
    """Mean weight of m_k^zeta against the uniform measure is 1."""
    rows, ok = [], True
    for idx, (p, q, k) in enumerate(cases):
        space = standard_form((p, q))
        d = p + q
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        frames = sample_frames(d, d - k, N, rng)
        eigs = np.linalg.eigvalsh(gram_batch(frames, space))
        for z in zetas:
            w = weights_from_eigs(eigs, space, k, z)
            mean = complex(w.mean())
            se = max(w.real.std(ddof=1), w.imag.std(ddof=1)) / math.sqrt(N)
            bound = max(n_se * se, 1e-12)
            good = abs(mean.real - 1) <= bound and abs(mean.imag) <= bound
            ok &= good
            rows.append({"p": p, "q": q, "k": k, "zeta": [complex(z).real, complex(z).imag],
                         "mean": [mean.real, mean.imag], "stderr": se, "bound": bound, "passed": good})
    worst = max(max(abs(r["mean"][0] - 1), abs(r["mean"][1])) / r["bound"] for r in rows)
    return Check("normalization of m_k^zeta", ok, f"{len(rows)} cases", 1.0,
                 f"within {n_se:g} stderr (worst {worst * n_se:.2f})", {"cases": rows})


def check_cap_s2(N: int = 10**6, n_se: float = 3.0, rel: float = 0.01, seed: int = 11,
                 radius: float = math.pi / 3) -> Check:
    est = E.estimate_sphere(B.Cap(np.array([0.0, 0, 1]), radius), S2, 1, 1.0, N, seed)
    target = math.pi * math.sin(radius)
    dev = abs(est.value - target)
    ok = dev <= n_se * est.stderr and dev <= rel * target
    return Check("S^2 cap k=1", ok, est.value, target, f"{n_se:g} stderr and {rel * 100:g}%",
                 {"stderr": est.stderr, "rhs": E.rhs_prediction(mu_cap(2, radius), S2, 1)})


def check_band_s2(N: int = 10**6, n_se: float = 3.0, seed: int = 12, width: float = math.pi / 6):
    out = []
    mu = mu_band_riemannian(2, width)
    for k in (1, 2):
        est = E.estimate_sphere(B.Band(2, width), S2, k, 1.0, N, seed + k)
        target = E.rhs_prediction(mu, S2, k).real
        dev = abs(est.value - target)
        out.append(Check(f"S^2 band k={k}", dev <= n_se * est.stderr, est.value, target,
                         f"{n_se:g} stderr", {"stderr": est.stderr}))
    return out


def desitter_sweep(k: int, N: int = 4 * 10**6, eps=SWEEP_EPS, seed: int = 7, theta: float = 0.5,
                   method: str = E.DEFAULT_METHOD):
    return E.epsilon_sweep(B.Band(2, theta), DE_SITTER, k, eps, N, seed, method=method)


def check_desitter(k: int, N: int = 4 * 10**6, rel: float = 0.02, n_se: float = 2.0,
                   eps=SWEEP_EPS, seed: int = 7, theta: float = 0.5) -> Check:
    sweep = desitter_sweep(k, N, eps, seed, theta)
    limit = template_limit(2, theta)
    target = limit[k]
    rhs = E.rhs_prediction(limit, DE_SITTER, k)
    val = sweep.extrapolated
    rel_err = abs(val - target) / abs(target)
    if k == 1:
        off, off_err, part = val.imag, sweep.error_im, "imaginary"
    else:
        off, off_err, part = val.real, sweep.error_re, "real"
    ok = rel_err <= rel and abs(off) <= n_se * off_err
    return Check(f"de Sitter band k={k} sweep", ok, val, target,
                 f"{rel * 100:g}% rel, {part} part within {n_se:g} errors of 0",
                 {"rel_err": rel_err, "off_part": off, "off_error": off_err,
                  "stderr_re": sweep.stderr_re, "stderr_im": sweep.stderr_im,
                  "order_fitted": sweep.order_fitted, "method": sweep.method, "rhs": rhs,
                  "template_continued": mu_template_continued(2, 1, theta, 0.0)[k],
                  "per_eps": [e.to_record() for e in sweep.estimates]})


def check_swap(N: int = 10**6, n_se: float = 2.0, eps=(0.1, 0.05), seed: int = 31,
               theta: float = 0.5) -> list[Check]:
    """H-side estimates on j(A) equal i^k conj(S-side), paired and independent streams."""
    A = B.Band(2, theta)
    jA = B.SwappedBody(A, 2)
    zetas = [1j * e for e in eps]
    out = []
    for k in (1, 2):
        S, _ = E.estimate_sphere_multi(A, DE_SITTER, k, zetas, N, seed)
        Hp, _ = E.estimate_sphere_multi(jA, ANTI_DE_SITTER_SWAP, k, zetas, N, seed, paired_swap=2)
        Hi, _ = E.estimate_sphere_multi(jA, ANTI_DE_SITTER_SWAP, k, zetas, N, seed + 1)
        for s, hp, hi in zip(S, Hp, Hi):
            target = (1j) ** k * s.value.conjugate()
            dev_p = abs(hp.value - target)
            ok_p = dev_p <= n_se * hp.stderr
            se_i = math.hypot(hi.stderr, s.stderr)
            dev_i = abs(hi.value - target)
            ok_i = dev_i <= n_se * se_i
            out.append(Check(f"swap k={k} eps={s.epsilon:g} paired", ok_p, hp.value, target,
                             f"{n_se:g} stderr", {"stderr": hp.stderr, "dev": dev_p}))
            out.append(Check(f"swap k={k} eps={s.epsilon:g} independent", ok_i, hi.value, target,
                             f"{n_se:g} combined stderr", {"stderr": se_i, "dev": dev_i}))
    return out


def check_flat_r2(N: int = 10**6, rel: float = 0.01, seed: int = 41) -> list[Check]:
    est = E.estimate_flat(B.Ellipse(1.0, 1.0), standard_form((2, 0)), 1, 0.0, N, seed)
    target = 2 * math.pi
    out = [Check("flat R^2 unit circle k=1", abs(est.value - target) <= rel * target, est.value,
                 target, f"{rel * 100:g}%", {"stderr": est.stderr})]
    est = E.estimate_flat(B.FlatBall(1.0, 2), standard_form((2, 0)), 1, 0.0, N, seed + 1)
    target = mu_ball_euclidean(2, 1, 1.0)
    out.append(Check("flat R^2 disk k=1", abs(est.value - target) <= rel * target, est.value,
                     target, f"{rel * 100:g}%", {"stderr": est.stderr}))
    return out


def flat_r11_sweep(N: int = 32 * 10**6, eps=SWEEP_EPS, seed: int = 7, method: str = E.DEFAULT_METHOD):
    return E.epsilon_sweep(B.Ellipse(1.0, 1.0), standard_form((1, 1)), 1, eps, N, seed, method=method)


def check_flat_r11(N: int = 32 * 10**6, rel: float = 0.02, n_se: float = 2.0, eps=SWEEP_EPS,
                   seed: int = 7, oracle_agreement: float = 1e-8) -> list[Check]:
    circle = B.Ellipse(1.0, 1.0)
    lo, hi = mu1_curve_flat(circle, "double"), mu1_curve_flat(circle, "mp")
    out = [Check("R^{1,1} circle quadrature, two precisions", abs(lo - hi) <= oracle_agreement, lo, hi,
                 f"agree to {oracle_agreement:g}")]
    sweep = flat_r11_sweep(N, eps, seed)
    val = sweep.extrapolated
    rel_err = abs(val - hi) / abs(hi)
    diff = val.real - val.imag
    ok = rel_err <= rel and abs(diff) <= n_se * sweep.error_re_minus_im
    out.append(Check("R^{1,1} circle k=1 sweep", ok, val, hi,
                     f"{rel * 100:g}% rel, re = im within {n_se:g} errors",
                     {"rel_err": rel_err, "re_minus_im": diff, "error_re_minus_im": sweep.error_re_minus_im,
                      "stderr_re": sweep.stderr_re, "stderr_im": sweep.stderr_im,
                      "per_eps": [e.to_record() for e in sweep.estimates]}))
    return out


def check_cap_s3(N: int = 10**6, rel: float = 0.02, seed: int = 51, radius: float = 1.0) -> Check:
    est = E.estimate_sphere(B.Cap(np.array([0.0, 0, 0, 1]), radius), S3, 1, 1.0, N, seed)
    mu = mu_cap(3, radius)
    target = E.rhs_prediction(mu, S3, 1).real
    return Check("S^3 cap k=1 (two-term)", abs(est.value - target) <= rel * abs(target), est.value,
                 target, f"{rel * 100:g}%", {"stderr": est.stderr, "mu1": mu[1], "mu3": mu[3]})


SUITES = {
    "coeffs": [("check_coefficients", {})],
    "normalization": [("check_normalization", {})],
    "riemannian": [("check_cap_s2", {}), ("check_band_s2", {}), ("check_cap_s3", {})],
    "lorentzian": [("check_desitter", {"k": 1}), ("check_desitter", {"k": 2}), ("check_swap", {})],
    "flat": [("check_flat_r2", {}), ("check_flat_r11", {})],
}


def run_suite(name: str, overrides: dict | None = None) -> list[Check]:
    """Run a named suite; ``overrides`` maps check-function names to keyword arguments."""
    if name != "all" and name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join([*SUITES, 'all'])}")
    overrides = overrides or {}
    unknown = set(overrides) - {fn for entries in SUITES.values() for fn, _ in entries}
    if unknown:
        raise KeyError(f"tolerance overrides name unknown checks: {', '.join(sorted(unknown))}")
    names = list(SUITES) if name == "all" else [name]
    out = []
    for suite in names:
        for fn, kwargs in SUITES[suite]:
            res = globals()[fn](**kwargs, **overrides.get(fn, {}))
            out.extend(res if isinstance(res, list) else [res])
    return out
