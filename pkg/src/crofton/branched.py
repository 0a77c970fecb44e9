"""Branch-tracked complex powers.

Fractional powers of determinants and scalars are fixed by continuation from
the real base point ``zeta = 1`` through the domain

    U = {Re zeta > 1/2} union {Im zeta > 0},

where every tracked quantity is positive.  On the closed Siegel half-space the
determinant power uses eigenvalue logarithms with arguments in [0, pi].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .pseudo_linalg import DEFAULT_EIG_TOL, in_u_domain, signature_of

DEFAULT_MAX_STEP_ARG = math.pi / 8


class SingularMatrixError(ArithmeticError):
    pass


class BranchAmbiguityError(ArithmeticError):
    """The tracked function (nearly) vanishes on the path; reroute inside U."""


# ---------------------------------------------------------------------------
# determinant powers


def siegel_det_pow(Z, lam: complex, tol: float = 1e-9, det_tol: float = 1e-300) -> complex:
    """det(Z)**lam for Z = X + iY with Y positive semidefinite, Z nondegenerate.

    Normalised so that det(I + i*eps*I)**lam -> 1; for real nondegenerate X the
    value is the boundary value f_lam(X).
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if not np.allclose(Z, Z.T, atol=1e-12 * max(1.0, np.max(np.abs(Z)))):
        raise ValueError("Z must be complex symmetric")
    mu = np.linalg.eigvals(Z)
    absmu = np.abs(mu)
    if np.prod(absmu) <= det_tol or np.min(absmu) <= tol * max(1.0, np.max(absmu)):
        raise SingularMatrixError("determinant below tolerance")
    args = np.angle(mu)
    bad = args < -tol
    near_neg_real = args <= -math.pi + tol
    if np.any(bad & ~near_neg_real):
        raise ValueError("eigenvalue outside the closed upper half plane: Im Z is not PSD")
    args = np.where(near_neg_real, math.pi, np.where(args < 0, 0.0, args))
    logdet = np.sum(np.log(absmu)) + 1j * np.sum(args)
    return complex(np.exp(complex(lam) * logdet))


def f_lambda(X, lam: complex, tol: float = DEFAULT_EIG_TOL) -> complex:
    """exp(i*pi*h*lam) * |det X|**lam, h the number of negative eigenvalues."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    pos, neg, null = signature_of(X, tol)
    if null:
        raise SingularMatrixError("f_lambda is not defined pointwise on degenerate matrices")
    logabs = float(np.sum(np.log(np.abs(np.linalg.eigvalsh(X)))))
    lam = complex(lam)
    return complex(np.exp(lam * logabs + 1j * math.pi * neg * lam))


def log_shifted_eigs(eigs: np.ndarray, shift: complex) -> np.ndarray:
    """Sum_j Log(mu_j + shift) over the last axis, principal branch.

    The principal branch is the continued one whenever every mu_j + shift stays
    off the closed negative real axis along the continuation path; this holds for
    mu_j in [-1, 1] and shift = 2*zeta with zeta in U.
    """
    return np.sum(np.log(eigs + complex(shift)), axis=-1)


# ---------------------------------------------------------------------------
# Muro's pole-order recursion


def _admissible_pole(s: float) -> str:
    s = float(s)
    if s <= -1 and float(s).is_integer():
        return "integer"
    if s <= -1.5 and float(2 * s).is_integer():
        return "half"
    raise ValueError(f"s={s} is not in the pole set {{-m, -(2m+1)/2 : m >= 1}}")


def muro_sign(s: float) -> int:
    kind = _admissible_pole(s)
    if kind == "integer" and int(s) % 2 == 0:
        return -1
    return 1


def muro_d_vectors(a: Sequence[complex], s: float, depth: int) -> list[np.ndarray]:
    """d^(0), ..., d^(depth) for the coefficient vector ``a`` of length r + 1."""
    a = np.asarray(a, dtype=complex)
    eps = muro_sign(s)
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    out = [a.copy()]
    if depth >= 1:
        out.append(a[:-1] + eps * a[1:])
    for m in range(2, depth + 1):
        prev = out[m - 2]
        sign = 1 if m % 2 == 0 else -1
        out.append(prev[:-2] + sign * prev[2:] if len(prev) > 2 else np.zeros(0, complex))
    return out


def pole_order(a: Sequence[complex], s: float, tol: float = 1e-12) -> int:
    """Order of the pole at ``s`` of sum_h a_h |det X|^lam_{r-h}."""
    a = np.asarray(a, dtype=complex)
    kind = _admissible_pole(s)
    r = len(a) - 1
    d = muro_d_vectors(a, s, r + 1)

    def vanishes(m):
        return m > r + 1 or not np.any(np.abs(d[m]) > tol)

    p = 0
    if kind == "half":
        while not vanishes(2 * p + 2):
            p += 1
    else:
        while not vanishes(2 * p + 1):
            p += 1
    return p


def analyticity_check(lambda_s: float, j: int, r: int) -> float:
    """max |d^(m)_h(a^(j)(s))| for a_h(lam) = exp(i*pi*h*lam).

    m = 2j + 2 at half-integers and 2j + 1 at integers; the result should vanish.
    """
    kind = _admissible_pole(lambda_s)
    h = np.arange(r + 1)
    a_j = (1j * math.pi * h) ** j * np.exp(1j * math.pi * h * lambda_s)
    m = 2 * j + 2 if kind == "half" else 2 * j + 1
    if m > r + 1:
        return 0.0
    d = muro_d_vectors(a_j, lambda_s, m)[m]
    return float(np.max(np.abs(d))) if d.size else 0.0


# ---------------------------------------------------------------------------
# continuation along anchor paths


@dataclass(frozen=True)
class BranchedScalar:
    value: complex
    total_arg: float

    def power(self, lam: complex) -> complex:
        lam = complex(lam)
        return complex(cmath.exp(lam * complex(math.log(abs(self.value)), self.total_arg)))

    def log(self) -> complex:
        return complex(math.log(abs(self.value)), self.total_arg)

    def sqrt(self) -> complex:
        return self.power(0.5)


def _segment_inside(a: complex, b: complex) -> bool:
    # each open half-plane of U is convex
    return (a.real > 0.5 and b.real > 0.5) or (a.imag > 0 and b.imag > 0)


@dataclass(frozen=True)
class BranchAnchor:
    """Polyline in U starting at zeta = 1.

    With ``open_end`` the final vertex may sit on the boundary of U (e.g. zeta = 0)
    and is reached as a limit from inside.
    """

    path: tuple[complex, ...]
    max_step_arg: float = DEFAULT_MAX_STEP_ARG
    open_end: bool = False

    def __post_init__(self):
        path = tuple(complex(z) for z in self.path)
        object.__setattr__(self, "path", path)
        if not path or path[0] != 1:
            raise ValueError("anchor path must start at zeta = 1")
        if self.max_step_arg <= 0:
            raise ValueError("max_step_arg must be positive")
        last = len(path) - 1
        for i, z in enumerate(path):
            if i == last and self.open_end:
                continue
            if not in_u_domain(z):
                raise ValueError(f"anchor vertex {z} lies outside U")
        for i in range(last):
            a, b = path[i], path[i + 1]
            if i + 1 == last and self.open_end and not in_u_domain(b):
                # interior of the segment must stay in one open half-plane
                if not (a.imag > 0 and b.imag >= 0) and not (a.real > 0.5 and b.real >= 0.5):
                    raise ValueError("final open segment leaves U")
                continue
            if not _segment_inside(a, b):
                raise ValueError(f"anchor segment {a} -> {b} leaves U")

    @classmethod
    def to(cls, end: complex, max_step_arg: float = DEFAULT_MAX_STEP_ARG) -> "BranchAnchor":
        """Default path 1 -> 1+i -> end (a straight segment when Re end > 1/2)."""
        end = complex(end)
        open_end = not in_u_domain(end)
        if open_end and end.imag < 0:
            raise ValueError(f"{end} is not in the closure of U reachable from above")
        if end.real > 0.5:
            path = (1.0 + 0j, end) if end != 1 else (1.0 + 0j,)
        else:
            path = (1.0 + 0j, 1.0 + 1.0j, end)
        return cls(path, max_step_arg, open_end)

    @property
    def end(self) -> complex:
        return self.path[-1]


def branch_continue(anchor: BranchAnchor, f: Callable[[complex], complex],
                    min_abs: float = 1e-12, min_step: float = 1e-9) -> BranchedScalar:
    """Continue arg f along the anchor path, accumulating principal increments."""
    z0 = anchor.path[0]
    v = complex(f(z0))
    if abs(v) <= min_abs:
        raise BranchAmbiguityError(f"function vanishes at the base point {z0}")
    total = cmath.phase(v)
    for a, b in zip(anchor.path[:-1], anchor.path[1:]):
        t, h = 0.0, 1.0 / 16
        while t < 1.0:
            h = min(h, 1.0 - t)
            t_new = t + h
            z_new = a + (b - a) * t_new
            z_mid = a + (b - a) * (t + 0.5 * h)
            v_new = complex(f(z_new))
            v_mid = complex(f(z_mid))
            if min(abs(v_new), abs(v_mid)) <= min_abs:
                raise BranchAmbiguityError(f"function vanishes near zeta={z_new}")
            d_full = cmath.phase(v_new / v)
            d_half = cmath.phase(v_mid / v) + cmath.phase(v_new / v_mid)
            if abs(d_full) >= anchor.max_step_arg or abs(d_full - d_half) > 1e-9:
                h *= 0.5
                if h < min_step:
                    raise BranchAmbiguityError(f"cannot resolve the argument near zeta={z_new}")
                continue
            total += d_full
            v, t = v_new, t_new
            h *= 2.0
    return BranchedScalar(v, total)


def continued_power(anchor: BranchAnchor, f: Callable[[complex], complex], lam: complex) -> complex:
    return branch_continue(anchor, f).power(lam)
