"""Space forms, the body catalog, and exact Euler-characteristic rules.

Every supported body on a pseudosphere is the intersection of a closed cone in
the ambient space with the quadric, so chi(A cap E) is read off from the cone in
the radial picture: E cap A retracts onto a round sphere or a point set whose
Euler characteristic is known in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .grassmannian import Subspace
from .pseudo_linalg import DEFAULT_EIG_TOL, QuadraticSpace, Signature, signature_counts, standard_form

TANGENCY_TOL = 1e-9


@dataclass(frozen=True)
class SpaceForm:
    """S^{p,q} = {Q=1} in R^{p+1,q}, H^{p,q} = {Q=-1} in R^{p,q+1}, or flat R^{p,q}."""

    kind: str
    p: int
    q: int

    def __post_init__(self):
        if self.kind not in ("pseudosphere", "pseudohyperbolic", "flat"):
            raise ValueError(f"unknown space form kind {self.kind!r}")
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError("invalid signature")

    @property
    def ambient(self) -> Signature:
        if self.kind == "pseudosphere":
            return Signature(self.p + 1, self.q)
        if self.kind == "pseudohyperbolic":
            return Signature(self.p, self.q + 1)
        return Signature(self.p, self.q)

    @property
    def sigma(self) -> int:
        return {"pseudosphere": 1, "pseudohyperbolic": -1, "flat": 0}[self.kind]

    @property
    def n(self) -> int:
        return self.p + self.q

    def space(self) -> QuadraticSpace:
        return standard_form(self.ambient)


@dataclass(frozen=True)
class ChiValue:
    chi: int
    generic_flag: bool = True


def _as_batch(E) -> np.ndarray:
    F = E.frame if isinstance(E, Subspace) else np.asarray(E, dtype=float)
    return F[None] if F.ndim == 2 else F


class ConeBodyBase:
    """Bodies on a (pseudo)sphere given by a cone in R^d."""

    d: int

    def chi_batch(self, frames: np.ndarray):  # pragma: no cover - interface
        raise NotImplementedError

    def chi(self, E) -> ChiValue:
        c, g = self.chi_batch(_as_batch(E))
        return ChiValue(int(c[0]), bool(g[0]))

    def _check(self, frames):
        if frames.shape[1] != self.d:
            raise ValueError(f"frames live in R^{frames.shape[1]}, body in R^{self.d}")


@dataclass(frozen=True)
class Cap(ConeBodyBase):
    axis: np.ndarray = field(repr=False)
    radius: float = 0.5

    def __post_init__(self):
        u = np.asarray(self.axis, dtype=float)
        if not 0 < self.radius < math.pi / 2:
            raise ValueError("cap radius must lie in (0, pi/2)")
        object.__setattr__(self, "axis", u / np.linalg.norm(u))

    @property
    def d(self) -> int:
        return self.axis.size

    def chi_batch(self, frames):
        self._check(frames)
        proj = np.linalg.norm(np.einsum("nij,i->nj", frames, self.axis), axis=-1)
        gap = proj - math.cos(self.radius)
        return (gap >= 0).astype(int), np.abs(gap) > TANGENCY_TOL


@dataclass(frozen=True)
class Equator(ConeBodyBase):
    """The great (p-1)-sphere {x_{p+1} = 0} in R^{p+1}."""

    p: int

    @property
    def d(self) -> int:
        return self.p + 1

    def chi_batch(self, frames):
        self._check(frames)
        m = frames.shape[2]
        chi = 1 + (-1) ** (m - 2)  # E cap hyperplane is an (m-2)-sphere
        # E nearly inside the hyperplane: last row of the frame almost vanishes
        generic = np.linalg.norm(frames[:, -1, :], axis=-1) > TANGENCY_TOL
        return np.full(frames.shape[0], chi, dtype=int), generic


@dataclass(frozen=True)
class Band(ConeBodyBase):
    """{x_{p+1}^2 <= tan^2(theta) * (x_1^2 + ... + x_p^2)} in R^{p+1}."""

    p: int
    theta: float
    eig_tol: float = DEFAULT_EIG_TOL

    def __post_init__(self):
        if not 0 < self.theta < math.pi / 4:
            raise ValueError("band angle must lie in (0, pi/4)")
        if self.p < 1:
            raise ValueError("p must be positive")

    @property
    def d(self) -> int:
        return self.p + 1

    def form_diag(self) -> np.ndarray:
        t2 = math.tan(self.theta) ** 2
        return np.concatenate([np.full(self.p, -t2), [1.0]])

    def chi_batch(self, frames):
        self._check(frames)
        D = self.form_diag()
        M = np.einsum("nji,j,njk->nik", frames, D, frames)
        _, neg, null = signature_counts(np.linalg.eigvalsh(M), self.eig_tol, float(np.abs(D).max()))
        chi = np.where(neg == 0, 0, np.where(neg % 2 == 1, 2, 0))  # 1 + (-1)^(b-1)
        return chi.astype(int), null == 0


@dataclass(frozen=True)
class FullSphere(ConeBodyBase):
    d: int

    def chi_batch(self, frames):
        self._check(frames)
        m = frames.shape[2]
        return np.full(frames.shape[0], 1 + (-1) ** (m - 1), dtype=int), np.ones(frames.shape[0], bool)


@dataclass(frozen=True)
class ConstantChi(ConeBodyBase):
    """chi(A cap E) = value for every E; turns an estimate into the total mass of the measure."""

    d: int
    value: int = 1

    def chi_batch(self, frames):
        self._check(frames)
        n = frames.shape[0]
        return np.full(n, self.value, dtype=int), np.ones(n, bool)


@dataclass(frozen=True)
class ConeBody(ConeBodyBase):
    """Radial image of the pointed cone {G @ lam : lam >= 0} with nonempty interior."""

    generators: np.ndarray = field(repr=False)
    certificate: np.ndarray = field(init=False, repr=False)
    margin_tol: float = 1e-9

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.generators, dtype=float))
        d, g = G.shape
        if np.linalg.matrix_rank(G) < d:
            raise ValueError("cone has empty interior")
        # pointedness: find c with G^T c >= 1
        res = linprog(np.zeros(d), A_ub=-G.T, b_ub=-np.ones(g), bounds=[(None, None)] * d)
        if res.status != 0:
            raise ValueError("cone is not pointed")
        object.__setattr__(self, "generators", G)
        object.__setattr__(self, "certificate", res.x)

    @property
    def d(self) -> int:
        return self.generators.shape[0]

    def _margin(self, frame: np.ndarray) -> float:
        """max t with lam >= t, sum lam = 1, G lam in E."""
        G = self.generators
        g = G.shape[1]
        Qf, _ = np.linalg.qr(frame, mode="complete")
        N = Qf[:, frame.shape[1]:]
        A_eq = np.vstack([np.hstack([N.T @ G, np.zeros((N.shape[1], 1))]),
                          np.hstack([np.ones((1, g)), np.zeros((1, 1))])])
        b_eq = np.concatenate([np.zeros(N.shape[1]), [1.0]])
        A_ub = np.hstack([-np.eye(g), np.ones((g, 1))])
        c = np.zeros(g + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(g), A_eq=A_eq, b_eq=b_eq,
                      bounds=[(None, None)] * (g + 1))
        if res.status == 2:
            return -math.inf
        return float(-res.fun)

    def chi_batch(self, frames):
        self._check(frames)
        margins = np.array([self._margin(F) for F in frames])
        return (margins > 0).astype(int), np.abs(margins) > self.margin_tol


@dataclass(frozen=True)
class SwappedBody(ConeBodyBase):
    """j(A) in R^{p,q} for a body A in R^{q,p}, with j(x, y) = (y, x)."""

    base: ConeBodyBase
    q_of_base: int  # number of positive directions of the base space

    @property
    def d(self) -> int:
        return self.base.d

    def perm(self) -> np.ndarray:
        qb = self.q_of_base
        return np.concatenate([np.arange(qb, self.d), np.arange(qb)])

    def pull_back(self, frames: np.ndarray) -> np.ndarray:
        """Frames of j^{-1}(E)."""
        out = np.empty_like(frames)
        out[:, self.perm(), :] = frames
        return out

    def chi_batch(self, frames):
        self._check(frames)
        return self.base.chi_batch(self.pull_back(frames))


def swap_frames(frames: np.ndarray, q_of_base: int) -> np.ndarray:
    """j(E) for frames of E in R^{q,p}; inverse of SwappedBody.pull_back."""
    d = frames.shape[1]
    perm = np.concatenate([np.arange(q_of_base, d), np.arange(q_of_base)])
    return frames[:, perm, :]


def euler_convex(body, E) -> ChiValue:
    if not isinstance(body, (Cap, ConeBody)):
        raise TypeError("euler_convex handles caps and cone bodies")
    return body.chi(E)


def euler_band(p: int, theta: float, E) -> ChiValue:
    return Band(p, theta).chi(E)


def euler_equator(p: int, k: int, E) -> ChiValue:
    F = _as_batch(E)
    if F.shape[2] != p + 1 - k:
        raise ValueError("dim E must be p + 1 - k")
    return Equator(p).chi(E)


def radial_project(body):
    """Cone bodies are radial: the round-sphere body is the same cone."""
    if not isinstance(body, ConeBodyBase):
        raise TypeError("only cone bodies have a radial picture")
    return body


def radial_points(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# flat bodies


@dataclass(frozen=True)
class FlatBall:
    radius: float
    d: int

    @property
    def circumradius(self) -> float:
        return self.radius

    def chi_affine_batch(self, direction, complement, offsets):
        dist = np.linalg.norm(offsets, axis=-1)
        return (dist < self.radius).astype(int), np.abs(dist - self.radius) > TANGENCY_TOL


class PlanarCurve:
    """Closed curve t -> gamma(t), t in [0, 2 pi), in R^2 or R^{1,1}.

    Subclasses supply ``gamma`` and ``dgamma`` (vectorised over t, shape (2, n)).
    A convex curve may also supply its support function, which gives an exact
    intersection count used to cross-check the root finder.
    """

    n_grid: int = 512
    d: int = 2
    circumradius: float = 1.0

    def gamma(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def dgamma(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    support = None
    speed2_mp = None

    def chi_affine_batch(self, direction, complement, offsets, use_support: bool = True):
        nu = complement[:, :, 0]
        c = np.einsum("ni,ni->n", nu, offsets)
        if use_support and self.support is not None:
            hi, lo = self.support(nu), -self.support(-nu)
            gap = np.minimum(hi - c, c - lo)
            return np.where(gap > 0, 2, 0), np.abs(gap) > TANGENCY_TOL
        return count_crossings(self, nu, c)

    def line_chi(self, normal, c) -> ChiValue:
        chi, ok = count_crossings(self, np.atleast_2d(normal), np.atleast_1d(c))
        return ChiValue(int(chi[0]), bool(ok[0]))


def count_crossings(curve: PlanarCurve, nu: np.ndarray, c: np.ndarray, tol: float = 1e-9):
    """Roots of <nu, gamma(t)> - c on the periodic grid, with extremum refinement."""
    t = np.linspace(0.0, 2 * math.pi, curve.n_grid, endpoint=False)
    pts = curve.gamma(t)  # (2, n_grid)
    h = nu @ pts - c[:, None]
    s = np.sign(h)
    chi = np.sum(s != np.roll(s, -1, axis=1), axis=1)
    generic = np.ones(len(c), bool)
    # local extrema of h close to zero may hide a tangency or a missed root pair
    dh = np.roll(h, -1, axis=1) - h
    ext = (np.sign(dh) != np.sign(np.roll(dh, 1, axis=1)))
    step = t[1] - t[0]
    near = ext & (np.abs(h) < 8 * np.max(np.abs(dh), axis=1, keepdims=True))
    n = curve.n_grid
    for i, j in zip(*np.nonzero(near)):
        f = lambda x, i=i: float(nu[i] @ curve.gamma(np.array([x]))[:, 0] - c[i])
        is_min = dh[i, j] > 0
        sgn = 1.0 if is_min else -1.0
        res = minimize_scalar(lambda x: sgn * f(x), bounds=(t[j] - 2 * step, t[j] + 2 * step),
                              method="bounded", options={"xatol": 1e-13})
        v = f(res.x)
        if abs(v) < tol:
            generic[i] = False
            continue
        neighbours = s[i, [(j - 2) % n, (j - 1) % n, j, (j + 1) % n, (j + 2) % n]]
        if np.all(neighbours == neighbours[0]) and np.sign(v) != neighbours[0]:
            chi[i] += 2  # root pair between grid points
    return chi.astype(int), generic


class Ellipse(PlanarCurve):
    def __init__(self, a: float = 1.0, b: float = 1.0, n_grid: int = 512):
        if a <= 0 or b <= 0:
            raise ValueError("semi-axes must be positive")
        self.a, self.b, self.n_grid = float(a), float(b), n_grid
        self.circumradius = max(self.a, self.b)

    def __repr__(self):
        return f"Ellipse(a={self.a}, b={self.b})"

    def gamma(self, t):
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)])

    def dgamma(self, t):
        return np.stack([-self.a * np.sin(t), self.b * np.cos(t)])

    def support(self, nu):
        return np.sqrt((self.a * nu[..., 0]) ** 2 + (self.b * nu[..., 1]) ** 2)

    def speed2_mp(self, t):
        """Q(gamma'(t)) in R^{1,1} at mpmath precision."""
        import mpmath
        return (self.a * mpmath.sin(t)) ** 2 - (self.b * mpmath.cos(t)) ** 2


class Limacon(PlanarCurve):
    """r = 1 + c cos t (nonconvex for c > 1/2), a test curve without a support function."""

    def __init__(self, c: float = 0.8, n_grid: int = 512):
        if not 0 <= c < 1:
            raise ValueError("need 0 <= c < 1 for an embedded curve")
        self.c, self.n_grid = float(c), n_grid
        self.circumradius = 1.0 + self.c

    def gamma(self, t):
        r = 1 + self.c * np.cos(t)
        return np.stack([r * np.cos(t), r * np.sin(t)])

    def dgamma(self, t):
        r = 1 + self.c * np.cos(t)
        dr = -self.c * np.sin(t)
        return np.stack([dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)])


def ellipse(a: float = 1.0, b: float = 1.0, n_grid: int = 512) -> Ellipse:
    return Ellipse(a, b, n_grid)


def unit_circle(n_grid: int = 512) -> Ellipse:
    return Ellipse(1.0, 1.0, n_grid)
