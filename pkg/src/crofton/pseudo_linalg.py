"""Quadratic spaces of signature (p, q) and the complex family Q + 2*zeta*P0."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_EIG_TOL = 1e-9


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"signature counts must be nonnegative, got ({self.p}, {self.q})")
        if self.p + self.q < 1:
            raise ValueError("signature must have positive dimension")

    @property
    def dim(self) -> int:
        return self.p + self.q

    def swapped(self) -> "Signature":
        return Signature(self.q, self.p)


@dataclass(frozen=True)
class QuadraticSpace:
    """R^{p,q} in its standard diagonal basis with the compatible Euclidean form P0 = I."""

    signature: Signature
    Q: np.ndarray = field(repr=False, compare=False)
    P0: np.ndarray = field(repr=False, compare=False)

    @property
    def p(self) -> int:
        return self.signature.p

    @property
    def q(self) -> int:
        return self.signature.q

    @property
    def dim(self) -> int:
        return self.signature.dim

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.Q)


@dataclass(frozen=True)
class ComplexForm:
    zeta: complex
    matrix: np.ndarray = field(repr=False, compare=False)


def in_u_domain(zeta: complex, tol: float = 0.0) -> bool:
    """Membership in {Re zeta > 1/2} union {Im zeta > 0}."""
    zeta = complex(zeta)
    return zeta.real > 0.5 + tol or zeta.imag > tol


def standard_form(sig: Signature | tuple[int, int]) -> QuadraticSpace:
    if not isinstance(sig, Signature):
        sig = Signature(*sig)
    diag = np.concatenate([np.ones(sig.p), -np.ones(sig.q)])
    return QuadraticSpace(sig, np.diag(diag), np.eye(sig.dim))


def form_zeta(space: QuadraticSpace, zeta: complex, allow_boundary: bool = False) -> ComplexForm:
    """Q + 2 zeta P0; closure points (e.g. zeta = 0, giving Q) only with ``allow_boundary``."""
    zeta = complex(zeta)
    in_closure = zeta.real >= 0.5 or zeta.imag >= 0
    if not (in_u_domain(zeta) or (allow_boundary and in_closure)):
        raise ValueError(f"zeta={zeta} lies outside the domain Re>1/2 or Im>0")
    diag = space.diag + 2.0 * zeta
    # entries are 2*zeta +- 1, nonzero on the domain
    if np.min(np.abs(diag)) == 0.0:
        raise ArithmeticError("degenerate complex form")
    return ComplexForm(zeta, np.diag(diag.astype(complex)))


def signature_of(M, tol: float | None = None, relative: bool = True) -> tuple[int, int, int]:
    """Count (positive, negative, null) eigenvalues of a real symmetric matrix.

    With ``relative=True`` the tolerance is scaled by the spectral norm of ``M``.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.max(np.abs(M)), 1.0) if M.size else 1.0
    if not np.allclose(M, M.T, atol=1e-12 * scale, rtol=0.0):
        raise ValueError("matrix is not symmetric")
    if tol is None:
        tol = DEFAULT_EIG_TOL
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    eig = np.linalg.eigvalsh(M)
    thresh = tol * (np.max(np.abs(eig)) if relative and eig.size else 1.0)
    pos = int(np.sum(eig > thresh))
    neg = int(np.sum(eig < -thresh))
    return pos, neg, M.shape[0] - pos - neg


def signature_counts(eig: np.ndarray, tol: float = DEFAULT_EIG_TOL, scale: float | None = None):
    """Vectorised signature counts over the last axis of an eigenvalue array.

    The null threshold is ``tol * scale``; without ``scale`` it is relative to the
    largest eigenvalue of each row, which cannot detect a null 1 x 1 restriction.
    """
    eig = np.asarray(eig)
    if scale is None:
        scale = np.max(np.abs(eig), axis=-1, keepdims=True)
        scale = np.where(scale > 0, scale, 1.0)
    thresh = tol * scale
    pos = np.sum(eig > thresh, axis=-1)
    neg = np.sum(eig < -thresh, axis=-1)
    return pos, neg, eig.shape[-1] - pos - neg
