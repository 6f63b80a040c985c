"""
Real symplectic matrices, quadratic Hamiltonians and Heisenberg vectors.

Phase-space points are columns ``(p; x)`` and a group element is the block
matrix ``M = [[A, B], [C, D]]`` with ``p' = A q + B y``, ``x' = C q + D y``.
The symplectic form is ``J = [[0, E], [-E, 0]]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (DimensionError, NotSymplecticError, SingularMatrixError,
                     SymmetryError)

__all__ = [
    "SymplecticMatrix", "QuadraticHamiltonian", "HeisenbergVector",
    "symplectic_form", "is_symplectic", "compose", "inverse",
    "generator_shear", "generator_fourier", "generator_gl",
    "hamiltonian_generator", "hamiltonian_flow", "heisenberg_transform",
    "symmetrize",
]

SYMMETRY_TOL = 1e-8
MEMBERSHIP_TOL = 1e-10


def symmetrize(X, name="matrix"):
    """Return ``(X + X^T)/2`` after checking the asymmetry is below 1e-8."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {X.shape}")
    scale = max(1.0, float(np.max(np.abs(X)))) if X.size else 1.0
    if X.size and np.max(np.abs(X - X.T)) > SYMMETRY_TOL * scale:
        raise SymmetryError(f"{name} is not symmetric")
    return 0.5 * (X + X.T)


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def symplectic_form(n):
    E = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, E], [-E, Z]])


def is_symplectic(M, tol=MEMBERSHIP_TOL):
    """
    Membership test for Sp(2n, R).

    Returns
    -------
    ok : bool
        ``residual <= tol``
    residual : float
        Frobenius norm of ``M^T J M - J``.
    """
    M = np.asarray(getattr(M, "matrix", M), dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise DimensionError(f"expected a square matrix of even size, got {M.shape}")
    J = symplectic_form(M.shape[0] // 2)
    residual = float(np.linalg.norm(M.T @ J @ M - J))
    return residual <= tol, residual


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """
    Element of Sp(2n, R) stored as the full ``2n x 2n`` array.

    Construction checks ``M^T J M = J``; the tolerance is 1e-10 scaled by
    ``max(1, |M|_F^2)`` so that long products of well-conditioned generators
    are not rejected for rounding alone.
    """
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        ok, residual = is_symplectic(M, tol=np.inf)
        scale = max(1.0, float(np.linalg.norm(M)) ** 2)
        if residual > MEMBERSHIP_TOL * scale:
            raise NotSymplecticError(f"matrix is not symplectic (residual {residual:.3e})")
        object.__setattr__(self, "matrix", _readonly(M))

    @classmethod
    def from_blocks(cls, A, B, C, D):
        return cls(np.block([[np.asarray(A, float), np.asarray(B, float)],
                             [np.asarray(C, float), np.asarray(D, float)]]))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(2 * n))

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    @property
    def A(self):
        return self.matrix[:self.n, :self.n]

    @property
    def B(self):
        return self.matrix[:self.n, self.n:]

    @property
    def C(self):
        return self.matrix[self.n:, :self.n]

    @property
    def D(self):
        return self.matrix[self.n:, self.n:]

    def __matmul__(self, other):
        return compose(self, other)

    def inverse(self):
        return inverse(self)

    def residual(self):
        return is_symplectic(self.matrix)[1]

    def allclose(self, other, atol=1e-10):
        return np.allclose(self.matrix, np.asarray(getattr(other, "matrix", other)), atol=atol, rtol=0)

    def to_dict(self):
        return {"n": self.n, "A": self.A.tolist(), "B": self.B.tolist(),
                "C": self.C.tolist(), "D": self.D.tolist()}

    @classmethod
    def from_dict(cls, d):
        M = cls.from_blocks(d["A"], d["B"], d["C"], d["D"])
        if "n" in d and int(d["n"]) != M.n:
            raise DimensionError(f"declared n={d['n']} does not match blocks (n={M.n})")
        return M

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"SymplecticMatrix(n={self.n}, matrix={self.matrix.tolist()!r})"


def compose(M1, M2):
    """Group product ``M1 M2``."""
    if M1.n != M2.n:
        raise DimensionError(f"cannot compose n={M1.n} with n={M2.n}")
    return SymplecticMatrix(M1.matrix @ M2.matrix)


def inverse(M):
    """Group inverse via ``M^{-1} = -J M^T J``."""
    J = symplectic_form(M.n)
    return SymplecticMatrix(-J @ M.matrix.T @ J)


def generator_shear(B):
    """``[[E, B], [0, E]]``; acts on functions by multiplication by exp((i/2) x^T B x)."""
    B = symmetrize(np.asarray(B, dtype=float), "B")
    n = B.shape[0]
    return SymplecticMatrix.from_blocks(np.eye(n), B, np.zeros((n, n)), np.eye(n))


def generator_fourier(n):
    """``[[0, E], [-E, 0]]``; acts on functions as a Fourier transform."""
    return SymplecticMatrix(symplectic_form(n))


def generator_gl(A):
    """``[[A, 0], [0, (A^T)^{-1}]]`` for invertible ``A``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got {A.shape}")
    if np.linalg.cond(A) > 1e12:
        raise SingularMatrixError("A is singular")
    n = A.shape[0]
    Z = np.zeros((n, n))
    return SymplecticMatrix.from_blocks(A, Z, Z, np.linalg.inv(A.T))


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """
    Quadratic Hamiltonian with coefficient matrices ``a`` (symmetric),
    ``b`` (arbitrary) and ``c`` (symmetric).

    The classical function is ``H(x, p) = x^T a x / 2 - x^T b p + p^T c p / 2``
    and the quantum operator (h = 1) is

        x^T a x / 2 + i sum b_jk x_j d_k + (i/2) tr b - (1/2) sum c_jk d_j d_k,

    so ``a = c = E`` is the harmonic oscillator and ``c = E`` alone the free
    particle.
    """
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = symmetrize(np.asarray(self.a, dtype=float), "a")
        c = symmetrize(np.asarray(self.c, dtype=float), "c")
        b = np.asarray(self.b, dtype=float)
        if not (a.shape == b.shape == c.shape):
            raise DimensionError("a, b, c must share one square shape")
        for name, val in (("a", a), ("b", b), ("c", c)):
            object.__setattr__(self, name, _readonly(val))

    @property
    def n(self):
        return self.a.shape[0]

    @classmethod
    def oscillator(cls, n, omega=1.0):
        E = np.eye(n)
        return cls(omega * E, np.zeros((n, n)), omega * E)

    @classmethod
    def free(cls, n):
        return cls(np.zeros((n, n)), np.zeros((n, n)), np.eye(n))

    def to_dict(self):
        return {"a": self.a.tolist(), "b": self.b.tolist(), "c": self.c.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["a"], d["b"], d["c"])


@dataclass(frozen=True, eq=False)
class HeisenbergVector:
    """Coefficients of the first-order operator ``v.x + i w.grad``."""
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v))
        w = np.atleast_1d(np.asarray(self.w))
        if v.shape != w.shape or v.ndim != 1:
            raise DimensionError("v and w must be vectors of equal length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("HeisenbergVector entries must be finite")
        object.__setattr__(self, "v", _readonly(v))
        object.__setattr__(self, "w", _readonly(w))

    @property
    def n(self):
        return self.v.shape[0]

    def stacked(self):
        return np.concatenate([self.v, self.w])


def hamiltonian_generator(H):
    """
    Lie-algebra matrix ``X = [[b, -a], [c, -b^T]]`` of ``H``.

    ``X`` is the matrix for which the commutator of ``-i H_op`` with
    ``v.x + i w.grad`` is the operator with coefficients ``X (v; w)``.
    """
    return np.block([[H.b, -H.a], [H.c, -H.b.T]])


def hamiltonian_flow(H, t):
    """Linear symplectic map of the classical flow of ``H`` at time ``t``."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return SymplecticMatrix(expm(t * hamiltonian_generator(H)))


def heisenberg_transform(M, h):
    """Coefficients ``M (v; w)`` of the conjugated Heisenberg operator."""
    if M.n != h.n:
        raise DimensionError(f"n mismatch: {M.n} vs {h.n}")
    out = M.matrix @ h.stacked()
    return HeisenbergVector(out[:M.n], out[M.n:])
