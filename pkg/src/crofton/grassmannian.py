"""Grassmannian sampling and the complex Crofton densities.

Spherical case: for E in Gr_m(V), m = n + 1 - k, the density of m_k^zeta against
the O(P0)-invariant probability measure is

    (2z+1)^{p m/2} (2z-1)^{q m/2} det(X0(E) + 2z I)^{-(n+1)/2},

with X0(E) the Gram matrix of Q on an orthonormal frame of E.  Flat case: the
regularised density of the affine measure depends only on the direction F and is

    exp(i pi q (p+q+1-k) / 2) * det(X0'(F) + 2i eps I)^{-(p+q+1)/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .branched import (
    BranchAnchor,
    SingularMatrixError,
    branch_continue,
    log_shifted_eigs,
    siegel_det_pow,
)
from .pseudo_linalg import QuadraticSpace, in_u_domain

SINGULAR_DET_TOL = 1e-14


class NonGenericIntersection(ArithmeticError):
    pass


@dataclass(frozen=True)
class Subspace:
    frame: np.ndarray = field(repr=False)

    def __post_init__(self):
        frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if frame.shape[0] < frame.shape[1]:
            raise ValueError("frame must be d x m with m <= d")
        if not np.allclose(frame.T @ frame, np.eye(frame.shape[1]), atol=1e-10):
            raise ValueError("frame columns are not orthonormal")
        object.__setattr__(self, "frame", frame)

    @property
    def d(self) -> int:
        return self.frame.shape[0]

    @property
    def m(self) -> int:
        return self.frame.shape[1]

    @classmethod
    def span(cls, *vectors) -> "Subspace":
        A = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
        Qm, R = np.linalg.qr(A)
        if np.min(np.abs(np.diag(R))) < 1e-12:
            raise ValueError("vectors are linearly dependent")
        return cls(Qm)

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T


@dataclass(frozen=True)
class AffineSubspace:
    direction: Subspace
    offset: np.ndarray = field(repr=False)

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float)
        if np.linalg.norm(self.direction.frame.T @ offset) > 1e-10 * max(1.0, np.linalg.norm(offset)):
            raise ValueError("offset must be orthogonal to the direction")
        object.__setattr__(self, "offset", offset)


@dataclass(frozen=True)
class DensityWeight:
    value: complex
    zeta: complex
    k: int
    log_components: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# sampling


def sample_frames(d: int, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n orthonormal d x m frames whose spans are O(d)-uniform."""
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    G = rng.standard_normal((n, d, m))
    frames, R = np.linalg.qr(G)
    # rank deficiency has probability zero; redraw the offending samples anyway
    bad = np.min(np.abs(np.diagonal(R, axis1=-2, axis2=-1)), axis=-1) < 1e-12
    while np.any(bad):
        frames[bad] = np.linalg.qr(rng.standard_normal((int(bad.sum()), d, m)))[0]
        bad[:] = False
    return frames


def sample_linear(d: int, m: int, rng: np.random.Generator) -> Subspace:
    return Subspace(sample_frames(d, m, 1, rng)[0])


def sample_ball(k: int, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, k))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * (radius * rng.random((n, 1)) ** (1.0 / k))


def ball_volume(k: int, radius: float = 1.0) -> float:
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1) * radius**k


def sample_affine_batch(space: QuadraticSpace, k: int, window_radius: float, n: int,
                        rng: np.random.Generator):
    """Directions (n, d, d-k), complement frames (n, d, k), offsets (n, d), Lebesgue factor."""
    d = space.dim
    if not 1 <= k <= d - 1:
        raise ValueError("codimension must satisfy 1 <= k <= dim - 1")
    if window_radius <= 0:
        raise ValueError("window radius must be positive")
    full = sample_frames(d, d, n, rng)
    direction, complement = full[:, :, : d - k], full[:, :, d - k:]
    coords = sample_ball(k, window_radius, n, rng)
    offsets = np.einsum("nij,nj->ni", complement, coords)
    return direction, complement, offsets, ball_volume(k, window_radius)


def sample_affine(space: QuadraticSpace, k: int, window_radius: float, rng: np.random.Generator):
    direction, _, offsets, factor = sample_affine_batch(space, k, window_radius, 1, rng)
    return AffineSubspace(Subspace(direction[0]), offsets[0]), factor


# ---------------------------------------------------------------------------
# Gram matrices and densities


def gram_batch(frames: np.ndarray, space: QuadraticSpace) -> np.ndarray:
    """X0 = F^T Q F for a stack of frames."""
    return np.einsum("nji,j,njk->nik", frames, space.diag, frames)


def gram_zeta(E: Subspace, space: QuadraticSpace, zeta: complex) -> np.ndarray:
    F = E.frame
    return F.T @ (space.Q + 2 * complex(zeta) * space.P0) @ F


def nullity_gap(E: Subspace, space: QuadraticSpace) -> float:
    return float(np.min(np.abs(np.linalg.eigvalsh(E.frame.T @ space.Q @ E.frame))))


def _check_codim(space: QuadraticSpace, m: int, k: int):
    if m != space.dim - k:
        raise ValueError(f"subspace dimension {m} != dim V - k = {space.dim - k}")


def prefactor_log(space: QuadraticSpace, m: int, zeta: complex) -> complex:
    """log of (2z+1)^{p m/2} (2z-1)^{q m/2}, principal logs (valid on U)."""
    zeta = complex(zeta)
    out = 0j
    if space.p:
        out += space.p * m / 2 * np.log(2 * zeta + 1)
    if space.q:
        out += space.q * m / 2 * np.log(2 * zeta - 1)
    return complex(out)


def weight_m_zeta(E: Subspace, space: QuadraticSpace, k: int, zeta: complex,
                  anchor: BranchAnchor | None = None) -> DensityWeight:
    """Density of m_k^zeta at E, every power continued along ``anchor`` from zeta = 1."""
    zeta = complex(zeta)
    if not in_u_domain(zeta):
        raise ValueError(f"zeta={zeta} outside U")
    _check_codim(space, E.m, k)
    if anchor is None:
        anchor = BranchAnchor.to(zeta)
    if abs(anchor.end - zeta) > 1e-14:
        raise ValueError("anchor must end at zeta")
    m, n1 = E.m, space.dim
    mu = np.linalg.eigvalsh(E.frame.T @ space.Q @ E.frame)
    shifted = mu + 2 * zeta
    if zeta.imag == 0 and abs(np.prod(shifted)) < SINGULAR_DET_TOL:
        raise SingularMatrixError("Gram determinant below tolerance")
    logs = {}
    if space.p:
        logs["2z+1"] = branch_continue(anchor, lambda z: 2 * z + 1).log()
    if space.q:
        logs["2z-1"] = branch_continue(anchor, lambda z: 2 * z - 1).log()
    logs["eig"] = [branch_continue(anchor, lambda z, u=u: u + 2 * z).log() for u in mu]
    total = (space.p * m / 2) * logs.get("2z+1", 0) + (space.q * m / 2) * logs.get("2z-1", 0)
    total -= (n1 / 2) * sum(logs["eig"])
    return DensityWeight(complex(np.exp(total)), zeta, k, logs)


def weights_from_eigs(eigs: np.ndarray, space: QuadraticSpace, k: int, zeta: complex) -> np.ndarray:
    """Vectorised density values from Gram eigenvalues (shape (..., m))."""
    zeta = complex(zeta)
    m = eigs.shape[-1]
    log_w = prefactor_log(space, m, zeta) - (space.dim / 2) * log_shifted_eigs(eigs, 2 * zeta)
    return np.exp(log_w)


def flat_phase(space: QuadraticSpace, k: int) -> complex:
    """Constant phase of the flat density written against the full Gram matrix."""
    p, q = space.p, space.q
    return complex(np.exp(0.5j * math.pi * q * (p + q + 1 - k)))


def flat_weights_from_eigs(eigs: np.ndarray, space: QuadraticSpace, k: int, epsilon: float) -> np.ndarray:
    if epsilon < 0 or (epsilon == 0 and space.q):
        raise ValueError("epsilon must be positive (zero only for definite forms)")
    lam = -(space.dim + 1) / 2
    return flat_phase(space, k) * np.exp(lam * log_shifted_eigs(eigs, 2j * epsilon))


def weight_flat(F: AffineSubspace, space: QuadraticSpace, k: int, epsilon: float) -> DensityWeight:
    """Regularised density of the flat Crofton measure; depends on the direction only."""
    Fd = F.direction.frame
    _check_codim(space, Fd.shape[1], k)
    if epsilon < 0 or (epsilon == 0 and space.q):
        raise ValueError("epsilon must be positive (zero only for definite forms)")
    X0 = Fd.T @ space.Q @ Fd
    lam = -(space.dim + 1) / 2
    core = siegel_det_pow(X0 + 2j * epsilon * np.eye(X0.shape[0]), lam)
    phase = flat_phase(space, k)
    return DensityWeight(phase * core, 1j * epsilon, k, {"phase": phase, "det_pow": core})


# ---------------------------------------------------------------------------
# intersections


def intersect(E: Subspace, U, in_U_coords: bool = True, tol: float = 1e-9) -> Subspace:
    """E intersected with the coordinate subspace spanned by the indices ``U``."""
    U = tuple(int(i) for i in U)
    d = E.d
    out_rows = [i for i in range(d) if i not in U]
    expected = E.m + len(U) - d
    if expected < 1:
        raise NonGenericIntersection("dimension count leaves an empty intersection")
    A = E.frame[out_rows, :]
    _, s, Vt = np.linalg.svd(A)
    rank_needed = E.m - expected
    if rank_needed and s[rank_needed - 1] < tol:
        raise NonGenericIntersection("intersection is not transversal")
    null = Vt[rank_needed:].T
    vecs = E.frame @ null
    vecs, _ = np.linalg.qr(vecs)
    if in_U_coords:
        vecs = vecs[list(U), :]
        vecs, _ = np.linalg.qr(vecs)
    return Subspace(vecs)


def intersect_batch(frames: np.ndarray, U, tol: float = 1e-9):
    """Batched coordinate-subspace intersection; returns (frames in U coords, ok mask)."""
    U = list(U)
    n, d, m = frames.shape
    out_rows = [i for i in range(d) if i not in U]
    expected = m + len(U) - d
    rank_needed = m - expected
    A = frames[:, out_rows, :]
    _, s, Vt = np.linalg.svd(A)
    ok = s[:, rank_needed - 1] >= tol if rank_needed else np.ones(n, bool)
    null = np.swapaxes(Vt[:, rank_needed:, :], 1, 2)
    vecs = np.einsum("nij,njk->nik", frames, null)[:, U, :]
    vecs, _ = np.linalg.qr(vecs)
    return vecs, ok
