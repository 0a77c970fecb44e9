"""Monte Carlo Crofton integrals with complex weights.

Sampling is split into fixed-size chunks; chunk ``c`` draws from the substream
``SeedSequence([seed, c])``, so results do not depend on how chunks are spread
over workers.  Every chunk returns first and second moments of the per-draw
contributions for all requested zeta values at once (common random numbers), and
chunks are merged in chunk order with ``math.fsum``.

Optional stratified thinning on the nullity gap: raw draws whose Gram matrix is
far from degenerate are kept with probability ``thin`` and reweighted by
1/thin (Horvitz-Thompson), which leaves the estimator unbiased while spending
the evaluated samples where the weight is large.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import bodies as B
from .grassmannian import (
    flat_weights_from_eigs,
    gram_batch,
    sample_affine_batch,
    sample_frames,
    weights_from_eigs,
)
from .intrinsic_volumes import MuVector, flat_calibration, omega, rhs
from .pseudo_linalg import QuadraticSpace, in_u_domain, standard_form

DEFAULT_CHUNK = 1 << 16
PILOT_KEY = 2**32 - 1
PILOT_DRAWS = 1 << 15
SINGULAR_DET_TOL = 1e-14
WORKERS_ENV = "CROFTON_WORKERS"


@dataclass(frozen=True)
class Stratification:
    n_strata: int = 8
    boost: float = 4.0

    @property
    def thin(self) -> float:
        return 1.0 / self.boost


@dataclass(frozen=True)
class CroftonEstimate:
    value: complex
    stderr: float
    samples: int
    epsilon: float | None
    rejected: int
    degenerate_flagged: int
    zeta: complex | None = None
    stderr_re: float = 0.0
    stderr_im: float = 0.0
    raw_draws: int = 0

    def to_record(self) -> dict:
        return {"zeta_re": None if self.zeta is None else self.zeta.real,
                "zeta_im": None if self.zeta is None else self.zeta.imag,
                "epsilon": self.epsilon, "N": self.samples, "raw_draws": self.raw_draws,
                "value_re": self.value.real, "value_im": self.value.imag,
                "stderr": self.stderr, "stderr_re": self.stderr_re, "stderr_im": self.stderr_im,
                "rejected": self.rejected, "flagged": self.degenerate_flagged}


@dataclass(frozen=True)
class SweepResult:
    estimates: tuple
    extrapolated: complex
    extrapolation_error: float
    order_used: tuple  # (real part, imaginary part)
    stderr_re: float
    stderr_im: float
    order_fitted: tuple | None = None
    monotone: bool = True
    method: str = "polynomial"
    error_re: float = 0.0
    error_im: float = 0.0
    error_re_minus_im: float = 0.0

    def csv_rows(self):
        for e in self.estimates:
            yield (e.epsilon, e.value.real, e.value.imag, e.stderr_re, e.stderr_im)


# ---------------------------------------------------------------------------
# chunk kernel


@dataclass(frozen=True)
class _Task:
    kind: str  # "sphere" or "flat"
    body: object
    signature: tuple
    k: int
    zetas: tuple  # zeta values (sphere) or epsilons (flat)
    chunk: int
    seed: int
    edges: tuple | None = None
    thin: float = 1.0
    window: float = 0.0
    swap_q: int | None = None  # apply the swap j to every drawn frame


def _draw(task: _Task, space: QuadraticSpace, n: int, rng):
    d = space.dim
    if task.kind == "sphere":
        frames = sample_frames(d, d - task.k, n, rng)
        if task.swap_q is not None:
            frames = B.swap_frames(frames, task.swap_q)
        return frames, None, None
    direction, complement, offsets, _ = sample_affine_batch(space, task.k, task.window, n, rng)
    return direction, complement, offsets


def _chunk_moments(task: _Task, index: int, n_draws: int):
    """Sums over one chunk: per-zeta first moments and cross second moments."""
    space = standard_form(task.signature)
    rng = np.random.default_rng(np.random.SeedSequence([task.seed, index]))
    frames, complement, offsets = _draw(task, space, n_draws, rng)
    eigs = np.linalg.eigvalsh(gram_batch(frames, space))
    # thinning uses a separate uniform per draw, drawn regardless of the stratum
    u = rng.random(n_draws)
    if task.edges is not None:
        gap = np.min(np.abs(eigs), axis=-1)
        low = gap <= task.edges[0]
        keep = low | (u < task.thin)
        inv_p = np.where(low, 1.0, 1.0 / task.thin)[keep]
    else:
        keep = np.ones(n_draws, bool)
        inv_p = np.ones(n_draws)
    frames, eigs = frames[keep], eigs[keep]
    if task.kind == "sphere":
        chi, generic = task.body.chi_batch(frames)
    else:
        chi, generic = task.body.chi_affine_batch(frames, complement[keep], offsets[keep])
    coef = np.where(generic, chi, 0) * inv_p
    rejected = 0
    L = len(task.zetas)
    Y = np.zeros((L, int(keep.sum())), dtype=complex)
    for a, z in enumerate(task.zetas):
        if task.kind == "sphere":
            z = complex(z)
            if z.imag == 0:
                det = np.prod(eigs + 2 * z.real, axis=-1)
                bad = np.abs(det) < SINGULAR_DET_TOL
                rejected = max(rejected, int(bad.sum()))
            else:
                bad = None
            w = weights_from_eigs(eigs, space, task.k, z)
            if bad is not None:
                w = np.where(bad, 0.0, w)
        else:
            w = flat_weights_from_eigs(eigs, space, task.k, float(z))
        Y[a] = coef * w
    nz = coef != 0
    Yn = Y[:, nz]
    return {
        "raw": n_draws,
        "evaluated": int(keep.sum()),
        "rejected": rejected,
        "flagged": int((~generic).sum()),
        "s_re": Yn.real.sum(axis=1),
        "s_im": Yn.imag.sum(axis=1),
        "m_re": Yn.real @ Yn.real.T,
        "m_im": Yn.imag @ Yn.imag.T,
        "m_ri": Yn.real @ Yn.imag.T,
    }


def _run_chunk(args):
    task, index, n = args
    return _chunk_moments(task, index, n)


def _workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def _pilot_edges(task: _Task, strat: Stratification):
    space = standard_form(task.signature)
    rng = np.random.default_rng(np.random.SeedSequence([task.seed, PILOT_KEY]))
    frames, _, _ = _draw(task, space, PILOT_DRAWS, rng)
    gap = np.min(np.abs(np.linalg.eigvalsh(gram_batch(frames, space))), axis=-1)
    return tuple(np.quantile(gap, np.arange(1, strat.n_strata) / strat.n_strata))


@dataclass
class _Moments:
    raw: int
    evaluated: int
    rejected: int
    flagged: int
    mean: np.ndarray  # complex, per zeta
    cov_re: np.ndarray  # covariance of the mean, real parts
    cov_im: np.ndarray
    cov_ri: np.ndarray  # cov(mean_re[a], mean_im[b])


def _accumulate(task: _Task, N: int, workers: int | None) -> _Moments:
    """Draw chunks until N samples have been evaluated."""
    expected_keep = 1.0
    if task.edges is not None:
        expected_keep = 1.0 / len_strata(task) + (1 - 1.0 / len_strata(task)) * task.thin
    raw_needed = int(math.ceil(N / expected_keep))
    n_chunks = max(1, math.ceil(raw_needed / task.chunk))
    sizes = [task.chunk] * (n_chunks - 1) + [raw_needed - task.chunk * (n_chunks - 1)]
    jobs = [(task, i, s) for i, s in enumerate(sizes)]
    w = _workers(workers)
    if w == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=w) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    L = len(task.zetas)
    R = sum(p["raw"] for p in parts)
    s_re = np.array([math.fsum(p["s_re"][a] for p in parts) for a in range(L)])
    s_im = np.array([math.fsum(p["s_im"][a] for p in parts) for a in range(L)])
    m_re = np.array([[math.fsum(p["m_re"][a, b] for p in parts) for b in range(L)] for a in range(L)])
    m_im = np.array([[math.fsum(p["m_im"][a, b] for p in parts) for b in range(L)] for a in range(L)])
    m_ri = np.array([[math.fsum(p["m_ri"][a, b] for p in parts) for b in range(L)] for a in range(L)])
    mean_re, mean_im = s_re / R, s_im / R
    cov_re = (m_re / R - np.outer(mean_re, mean_re)) / (R - 1)
    cov_im = (m_im / R - np.outer(mean_im, mean_im)) / (R - 1)
    cov_ri = (m_ri / R - np.outer(mean_re, mean_im)) / (R - 1)
    return _Moments(R, sum(p["evaluated"] for p in parts), sum(p["rejected"] for p in parts),
                    sum(p["flagged"] for p in parts), mean_re + 1j * mean_im, cov_re, cov_im, cov_ri)


def len_strata(task: _Task) -> int:
    return len(task.edges) + 1


def _estimates(mom: _Moments, prefactor: complex, zetas, epsilons) -> list[CroftonEstimate]:
    out = []
    for a, (z, e) in enumerate(zip(zetas, epsilons)):
        val = prefactor * mom.mean[a]
        # the prefactor is a pure phase times a positive scale; rotate the componentwise errors
        se_re, se_im = _rotated_se(prefactor, mom.cov_re[a, a], mom.cov_im[a, a])
        out.append(CroftonEstimate(complex(val), max(se_re, se_im), mom.evaluated, e, mom.rejected,
                                   mom.flagged, z, se_re, se_im, mom.raw))
    return out


def _rotated_se(prefactor: complex, var_re: float, var_im: float) -> tuple[float, float]:
    # re/im covariance between components is not tracked; rotations by multiples of
    # pi/2 (the only phases that occur) just permute the two variances
    c, s = abs(prefactor.real), abs(prefactor.imag)
    scale = abs(prefactor)
    if scale == 0:
        return 0.0, 0.0
    c, s = c / scale, s / scale
    v_re = c * c * var_re + s * s * var_im
    v_im = s * s * var_re + c * c * var_im
    return scale * math.sqrt(max(v_re, 0.0)), scale * math.sqrt(max(v_im, 0.0))


def sphere_prefactor(k: int, sigma: int) -> complex:
    """pi omega_{k-1} sqrt(1/sigma)^k with sqrt(-1) = i."""
    if sigma == 1:
        return complex(math.pi * omega(k - 1))
    if sigma == -1:
        return math.pi * omega(k - 1) * (1j) ** k
    raise ValueError("sphere prefactor needs sigma = +-1")


def _check_body_dim(body, d: int):
    if getattr(body, "d", d) != d:
        raise ValueError(f"body lives in R^{body.d}, space form in R^{d}")


# ---------------------------------------------------------------------------
# public API


def estimate_sphere_multi(body, space_form: B.SpaceForm, k: int, zetas, N: int, seed: int,
                          workers: int | None = None, stratify: Stratification | None = None,
                          chunk: int = DEFAULT_CHUNK, paired_swap: int | None = None):
    """Estimates for several zeta values on one common stream of subspaces."""
    if space_form.kind == "flat":
        raise ValueError("use estimate_flat for flat space forms")
    if not 1 <= k <= space_form.n:
        raise ValueError("need 1 <= k <= n")
    if not isinstance(body, B.ConeBodyBase):
        raise TypeError(f"unsupported body {type(body).__name__}")
    zetas = tuple(complex(z) for z in zetas)
    for z in zetas:
        if not in_u_domain(z):
            raise ValueError(f"zeta={z} lies outside the domain Re>1/2 or Im>0")
    sig = (space_form.ambient.p, space_form.ambient.q)
    _check_body_dim(body, sum(sig))
    task = _Task("sphere", body, sig, k, zetas, chunk, int(seed), swap_q=paired_swap)
    if stratify is not None:
        task = _with_edges(task, stratify)
    mom = _accumulate(task, N, workers)
    eps = [z.imag if z.real == 0 else None for z in zetas]
    return _estimates(mom, sphere_prefactor(k, space_form.sigma), zetas, eps), mom


def _with_edges(task: _Task, strat: Stratification) -> _Task:
    edges = _pilot_edges(task, strat)
    return _Task(task.kind, task.body, task.signature, task.k, task.zetas, task.chunk, task.seed,
                 edges, strat.thin, task.window, task.swap_q)


def estimate_sphere(body, space_form: B.SpaceForm, k: int, zeta: complex, N: int, seed: int,
                    workers: int | None = None, stratify: Stratification | None = None,
                    paired_swap: int | None = None) -> CroftonEstimate:
    est, _ = estimate_sphere_multi(body, space_form, k, [zeta], N, seed, workers, stratify,
                                   paired_swap=paired_swap)
    return est[0]


def default_window(body) -> float:
    return 1.5 * body.circumradius


def estimate_flat_multi(body, space: QuadraticSpace, k: int, epsilons, N: int, seed: int,
                        window_R: float | None = None, workers: int | None = None,
                        stratify: Stratification | None = None, chunk: int = DEFAULT_CHUNK):
    if not 1 <= k <= space.dim - 1:
        raise ValueError("need 1 <= k <= dim - 1")
    if window_R is None:
        window_R = default_window(body)
    if window_R <= body.circumradius:
        raise ValueError(f"window radius {window_R} does not enclose the body "
                         f"(circumradius {body.circumradius}); enlarge it")
    epsilons = tuple(float(e) for e in epsilons)
    sig = (space.p, space.q)
    task = _Task("flat", body, sig, k, epsilons, chunk, int(seed), window=float(window_R))
    if stratify is not None:
        task = _with_edges(task, stratify)
    mom = _accumulate(task, N, workers)
    lebesgue = math.pi ** (k / 2) / math.gamma(k / 2 + 1) * window_R**k
    pref = math.pi * omega(k - 1) * flat_calibration(space.dim, k) * lebesgue
    return _estimates(mom, complex(pref), [1j * e for e in epsilons], epsilons), mom


def estimate_flat(body, space: QuadraticSpace, k: int, epsilon: float, N: int, seed: int,
                  window_R: float | None = None, workers: int | None = None,
                  stratify: Stratification | None = None) -> CroftonEstimate:
    est, _ = estimate_flat_multi(body, space, k, [epsilon], N, seed, window_R, workers, stratify)
    return est[0]


# ---------------------------------------------------------------------------
# extrapolation


def _fit_order(eps, vals, lo=0.05, hi=6.0):
    """Order p with (v1 - v2)/(v2 - v3) = (e1^p - e2^p)/(e2^p - e3^p)."""
    e1, e2, e3 = eps
    v1, v2, v3 = vals
    if v2 == v3:
        return None
    r = (v1 - v2) / (v2 - v3)

    def g(p):
        return (e1**p - e2**p) / (e2**p - e3**p) - r

    try:
        return optimize.brentq(g, lo, hi)
    except ValueError:
        return None


def richardson_weights(eps_pair, order: float) -> np.ndarray:
    """Weights (w_prev, w_last) with w.v = value extrapolated to eps = 0."""
    e_prev, e_last = eps_pair
    r = (e_prev / e_last) ** order
    return np.array([-1.0 / (r - 1), r / (r - 1)])


def polynomial_weights(eps) -> np.ndarray:
    """Weights of the interpolating polynomial in eps evaluated at eps = 0."""
    eps = np.asarray(eps, dtype=float)
    w = np.ones(len(eps))
    for i in range(len(eps)):
        for j in range(len(eps)):
            if i != j:
                w[i] *= eps[j] / (eps[j] - eps[i])
    return w


@dataclass(frozen=True)
class ComponentFit:
    value: float
    stderr: float
    truncation: float
    order_used: float
    order_fitted: float | None


DEFAULT_METHOD = "polynomial"


def extrapolate_component(eps, vals, cov, method: str = DEFAULT_METHOD, order_bounds=(0.5, 2.0),
                          default_order: float = 1.0) -> ComponentFit:
    """Extrapolate one real component of a common-stream sweep to eps = 0.

    ``fit``: single Richardson stage on the last two points with the order fitted
    from the last three (used only if inside ``order_bounds`` and both successive
    differences exceed 3 standard errors, otherwise ``default_order``).
    ``polynomial``: full Richardson table (orders 1, 2, ...) through all points.
    The truncation estimate is the change from the previous stage.
    """
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    L = len(eps)
    if L < 3 or np.any(np.diff(eps) >= 0):
        raise ValueError("epsilon list must be strictly decreasing with at least 3 entries")

    def diff_se(a, b):
        return math.sqrt(max(cov[a, a] + cov[b, b] - 2 * cov[a, b], 0.0))

    fitted = _fit_order(eps[L - 3:], vals[L - 3:])
    if method == "fit":
        resolved = (abs(vals[L - 3] - vals[L - 2]) > 3 * diff_se(L - 3, L - 2)
                    and abs(vals[L - 2] - vals[L - 1]) > 3 * diff_se(L - 2, L - 1))
        order = default_order
        if fitted is not None and order_bounds[0] <= fitted <= order_bounds[1] and resolved:
            order = fitted
        w = np.zeros(L)
        w[L - 2:] = richardson_weights(eps[L - 2:], order)
        w_prev = np.zeros(L)
        w_prev[L - 3:L - 1] = richardson_weights(eps[L - 3:L - 1], order)
    elif method == "polynomial":
        order = float(L - 1)
        w = polynomial_weights(eps)
        w_prev = np.zeros(L)
        w_prev[1:] = polynomial_weights(eps[1:])
    else:
        raise ValueError(f"unknown extrapolation method {method!r}")
    value = float(w @ vals)
    stderr = math.sqrt(max(float(w @ cov @ w), 0.0))
    trunc = abs(value - float(w_prev @ vals))
    if method == "fit" and order != default_order:
        # with a fitted order both stages agree by construction; compare with the default order
        w_def = np.zeros(L)
        w_def[L - 2:] = richardson_weights(eps[L - 2:], default_order)
        trunc = max(trunc, abs(value - float(w_def @ vals)))
    return ComponentFit(value, stderr, trunc, float(order), fitted)


def _rotate(prefactor: complex, mom: _Moments):
    """Parts and covariances of prefactor * raw means (prefactor real or imaginary).

    Returns (re, cov_re, im, cov_im, cov_ri) of the rotated means.
    """
    pr, pi_ = prefactor.real, prefactor.imag
    if pi_ == 0:
        return (pr * mom.mean.real, pr**2 * mom.cov_re, pr * mom.mean.imag, pr**2 * mom.cov_im,
                pr**2 * mom.cov_ri)
    if pr == 0:
        return (-pi_ * mom.mean.imag, pi_**2 * mom.cov_im, pi_ * mom.mean.real, pi_**2 * mom.cov_re,
                -pi_**2 * mom.cov_ri.T)
    raise ValueError("prefactor must be real or purely imaginary")


def sweep_from_moments(estimates, mom: _Moments, prefactor: complex, method: str = DEFAULT_METHOD,
                       **kw) -> SweepResult:
    eps = [e.epsilon for e in estimates]
    re, cov_re, im, cov_im, cov_ri = _rotate(complex(prefactor), mom)
    fr = extrapolate_component(eps, re, cov_re, method, **kw)
    fi = extrapolate_component(eps, im, cov_im, method, **kw)
    # re - im shares the samples; its error needs the cross covariance
    cov_d = cov_re + cov_im - cov_ri - cov_ri.T
    fd = extrapolate_component(eps, re - im, cov_d, method, **kw)
    extrap = complex(fr.value, fi.value)
    err_re = math.hypot(fr.stderr, fr.truncation)
    err_im = math.hypot(fi.stderr, fi.truncation)
    vals = np.array([e.value for e in estimates])
    dev = np.abs(vals - extrap)
    slack = 2 * np.array([e.stderr for e in estimates[1:]])
    monotone = bool(np.all(np.diff(dev) <= slack))
    scale = 1.0 if monotone else 2.0
    return SweepResult(tuple(estimates), extrap, scale * max(err_re, err_im),
                       (fr.order_used, fi.order_used), fr.stderr, fi.stderr,
                       (fr.order_fitted, fi.order_fitted), monotone, method,
                       scale * err_re, scale * err_im, scale * math.hypot(fd.stderr, fd.truncation))


def sweep_moments(body, setup, k: int, eps_list, N: int, seed: int, workers: int | None = None,
                  stratify: Stratification | None = Stratification(), window_R: float | None = None,
                  paired_swap: int | None = None):
    """Per-epsilon estimates, their joint moments and the prefactor, on one common stream."""
    eps_list = [float(e) for e in eps_list]
    if isinstance(setup, B.SpaceForm) and setup.kind != "flat":
        est, mom = estimate_sphere_multi(body, setup, k, [1j * e for e in eps_list], N, seed,
                                         workers, stratify, paired_swap=paired_swap)
        return est, mom, sphere_prefactor(k, setup.sigma)
    space = setup.space() if isinstance(setup, B.SpaceForm) else setup
    window_R = window_R or default_window(body)
    est, mom = estimate_flat_multi(body, space, k, eps_list, N, seed, window_R, workers, stratify)
    lebesgue = math.pi ** (k / 2) / math.gamma(k / 2 + 1) * window_R**k
    return est, mom, complex(math.pi * omega(k - 1) * flat_calibration(space.dim, k) * lebesgue)


def epsilon_sweep(body, setup, k: int, eps_list, N: int, seed: int, workers: int | None = None,
                  stratify: Stratification | None = Stratification(), window_R: float | None = None,
                  paired_swap: int | None = None, method: str = DEFAULT_METHOD) -> SweepResult:
    """Run all epsilons on one stream and Richardson-extrapolate to epsilon = 0.

    ``setup`` is a SpaceForm (zeta = i*eps) or a flat QuadraticSpace.
    """
    if len(eps_list) < 3 or np.any(np.diff(np.asarray(eps_list, dtype=float)) >= 0):
        raise ValueError("epsilon list must be strictly decreasing with at least 3 entries")
    est, mom, pref = sweep_moments(body, setup, k, eps_list, N, seed, workers, stratify,
                                   window_R, paired_swap)
    return sweep_from_moments(est, mom, pref, method)


def rhs_prediction(mu: MuVector, space_form: B.SpaceForm, k: int) -> complex:
    """sum_j c_j mu_{k+2j} with the curvature of ``space_form``."""
    return rhs(mu, k, space_form.sigma, space_form.n)
