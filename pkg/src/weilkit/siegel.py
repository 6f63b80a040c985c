"""
Siegel upper half-plane, the real boundary chart, and the metaplectic cover.

A metaplectic element is a symplectic matrix together with the value ``eps0``
of a continuous square root of ``det(C Z + D)`` at the base point ``Z = iE``.
The value at any other ``Z`` is obtained by continuation along the segment
from ``iE`` (the half-plane is convex and the determinant never vanishes on
it).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (BoundaryCausticError, ContinuationError, DimensionError,
                     NearSingularCocycleError, NotInSiegelError)
from .symplectic import (SymplecticMatrix, generator_fourier, generator_gl,
                         generator_shear, hamiltonian_flow, symmetrize)

__all__ = [
    "SiegelPoint", "BoundaryChartPoint", "MetaplecticElement", "MaslovPhase",
    "siegel_action", "cocycle_det", "continue_sqrt", "sqrtdet_re_positive",
    "branch_continue", "mp_identity", "mp_center", "mp_mul", "mp_inv",
    "mp_shear", "mp_fourier", "mp_gl", "mp_flow", "maslov_boundary_phase",
]

PD_TOL = 1e-12
MAX_DEPTH = 40


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _as_matrix(Z):
    return np.asarray(getattr(Z, "Z", Z), dtype=complex)


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """Complex symmetric ``Z`` with ``Im Z`` positive definite."""
    Z: np.ndarray

    def __post_init__(self):
        Z = symmetrize(np.atleast_2d(np.asarray(self.Z, dtype=complex)), "Z")
        lam = self.min_imag_eig_of(Z)
        if not lam > PD_TOL:
            raise NotInSiegelError(f"Im Z is not positive definite (min eigenvalue {lam:.3e})")
        object.__setattr__(self, "Z", _readonly(Z))

    @staticmethod
    def min_imag_eig_of(Z):
        return float(np.linalg.eigvalsh(Z.imag)[0])

    @classmethod
    def i_identity(cls, n, scale=1.0):
        return cls(1j * scale * np.eye(n))

    @property
    def n(self):
        return self.Z.shape[0]

    @property
    def min_imag_eig(self):
        return self.min_imag_eig_of(self.Z)

    def to_dict(self):
        return {"n": self.n, "re": self.Z.real.tolist(), "im": self.Z.imag.tolist()}

    @classmethod
    def from_dict(cls, d):
        p = cls(np.asarray(d["re"], float) + 1j * np.asarray(d["im"], float))
        if "n" in d and int(d["n"]) != p.n:
            raise DimensionError(f"declared n={d['n']} does not match matrix size {p.n}")
        return p

    def __repr__(self):
        return f"SiegelPoint(Z={self.Z.tolist()!r})"


@dataclass(frozen=True, eq=False)
class BoundaryChartPoint:
    """Real symmetric ``a`` parameterizing the chart of boundary Gaussians."""
    a: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a))
        if np.iscomplexobj(a):
            if np.max(np.abs(a.imag), initial=0.0) > 0:
                raise ValueError("boundary chart points are real")
            a = a.real
        object.__setattr__(self, "a", _readonly(symmetrize(a.astype(float), "a")))

    @property
    def n(self):
        return self.a.shape[0]

    def to_dict(self):
        return {"n": self.n, "a": self.a.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["a"])


def siegel_action(g, Z):
    """Fractional linear action ``Z -> (A Z + B)(C Z + D)^{-1}``."""
    Zm = _as_matrix(Z)
    if Zm.shape != (g.n, g.n):
        raise DimensionError(f"Z has shape {Zm.shape}, expected n={g.n}")
    den = g.C @ Zm + g.D
    if np.linalg.cond(den) > 1e12:
        raise NearSingularCocycleError("C Z + D is numerically singular")
    W = np.linalg.solve(den.T, (g.A @ Zm + g.B).T).T
    return SiegelPoint(0.5 * (W + W.T))


def cocycle_det(g, Z):
    """``det(C Z + D)`` for a matrix or SiegelPoint ``Z``."""
    return complex(np.linalg.det(g.C @ _as_matrix(Z) + g.D))


def sqrtdet_re_positive(Q):
    """
    Square root of ``det Q`` for complex symmetric ``Q`` with ``Re Q > 0``.

    Every eigenvalue of such a matrix has positive real part, so the product
    of principal square roots of the eigenvalues is the branch that is
    continuous on the whole cone and positive on real positive definite ``Q``.
    """
    lam = np.linalg.eigvals(np.atleast_2d(np.asarray(Q, dtype=complex)))
    return complex(np.prod(np.sqrt(lam)))


def continue_sqrt(det_fn, start_value, s0=0.0, s1=1.0, initial_pieces=8, max_depth=MAX_DEPTH):
    """
    Continue a square root of a non-vanishing function along ``[s0, s1]``.

    Parameters
    ----------
    det_fn : callable
        ``s -> complex``, continuous and non-zero on the interval.
    start_value : complex
        Chosen square root of ``det_fn(s0)``.

    Each accepted step has ``|arg(d1/d0)| < pi/2`` and its midpoint agrees
    with the endpoints (no unresolved winding); otherwise the step is
    bisected, up to ``max_depth`` times.
    """
    knots = np.linspace(s0, s1, initial_pieces + 1)
    eps = complex(start_value)
    d_prev = complex(det_fn(s0))
    if d_prev == 0:
        raise ContinuationError("function vanishes at the start of the path")

    def advance(a, b, d_a, eps_a, depth):
        d_b = complex(det_fn(b))
        if d_b == 0:
            raise ContinuationError(f"function vanishes at s={b}")
        step = np.angle(d_b / d_a)
        if abs(step) < np.pi / 2:
            m = 0.5 * (a + b)
            d_m = complex(det_fn(m))
            if d_m != 0:
                split = np.angle(d_m / d_a) + np.angle(d_b / d_m)
                if abs(split - step) < 1e-6 and abs(np.angle(d_m / d_a)) < np.pi / 4 \
                        and abs(np.angle(d_b / d_m)) < np.pi / 4:
                    return d_b, eps_a * np.sqrt(d_b / d_a)
        if depth >= max_depth:
            raise ContinuationError(f"phase step not resolved after {max_depth} bisections")
        m = 0.5 * (a + b)
        d_m, eps_m = advance(a, m, d_a, eps_a, depth + 1)
        return advance(m, b, d_m, eps_m, depth + 1)

    for a, b in zip(knots[:-1], knots[1:]):
        d_prev, eps = advance(a, b, d_prev, eps, 0)
    return eps


@dataclass(frozen=True, eq=False)
class MetaplecticElement:
    """
    Pair ``(g, eps0)`` with ``eps0**2 = det(C iE + D)``.

    ``eps0`` selects one of the two continuous branches of
    ``Z -> sqrt(det(C Z + D))`` on the Siegel half-plane.
    """
    g: SymplecticMatrix
    eps0: complex

    def __post_init__(self):
        eps0 = complex(self.eps0)
        if eps0 == 0:
            raise ValueError("eps0 must be non-zero")
        d = cocycle_det(self.g, 1j * np.eye(self.g.n))
        if abs(eps0 * eps0 - d) > 1e-10 * abs(d):
            raise ValueError(f"eps0**2={eps0 * eps0} does not match det(C iE + D)={d}")
        object.__setattr__(self, "eps0", eps0)

    @classmethod
    def lift(cls, g, sign=1):
        """Lift with ``eps0 = sign * principal sqrt(det(C iE + D))``."""
        return cls(g, sign * np.sqrt(cocycle_det(g, 1j * np.eye(g.n))))

    @property
    def n(self):
        return self.g.n

    def __matmul__(self, other):
        return mp_mul(self, other)

    def eps(self, Z):
        return branch_continue(self, Z)

    def to_dict(self):
        d = self.g.to_dict()
        d["eps0"] = [self.eps0.real, self.eps0.imag]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(SymplecticMatrix.from_dict(d), complex(d["eps0"][0], d["eps0"][1]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"MetaplecticElement(g={self.g!r}, eps0={self.eps0!r})"


def branch_continue(m, Z):
    """Value at ``Z`` of the branch of ``sqrt(det(C Z + D))`` selected by ``m``."""
    Zm = _as_matrix(Z)
    n = m.n
    base = 1j * np.eye(n)
    if np.array_equal(Zm, base):
        return m.eps0
    g = m.g
    # det along the straight segment iE -> Z
    return continue_sqrt(lambda s: np.linalg.det(g.C @ (base + s * (Zm - base)) + g.D), m.eps0)


def mp_identity(n):
    return MetaplecticElement(SymplecticMatrix.identity(n), 1.0)


def mp_center(n):
    """Non-trivial lift of the identity, ``(I, -1)``."""
    return MetaplecticElement(SymplecticMatrix.identity(n), -1.0)


def mp_mul(m1, m2):
    """Product in Mp: ``eps0 = eps_1(g2 . iE) * eps0_2``."""
    if m1.n != m2.n:
        raise DimensionError(f"n mismatch: {m1.n} vs {m2.n}")
    g = m1.g @ m2.g
    base = SiegelPoint.i_identity(m1.n)
    eps0 = branch_continue(m1, siegel_action(m2.g, base)) * m2.eps0
    return MetaplecticElement(g, eps0)


def mp_inv(m):
    """Inverse in Mp: ``eps0 = 1 / eps_m(g^{-1} . iE)``."""
    ginv = m.g.inverse()
    base = SiegelPoint.i_identity(m.n)
    return MetaplecticElement(ginv, 1.0 / branch_continue(m, siegel_action(ginv, base)))


def mp_shear(B, sign=1):
    return MetaplecticElement(generator_shear(B), float(sign))


def mp_fourier(n):
    """
    Lift of ``[[0, E], [-E, 0]]`` with ``eps0 = exp(-i pi n / 4)``, the value
    reached by running the oscillator flow backwards for time ``pi/2``.
    """
    return MetaplecticElement(generator_fourier(n), np.exp(-0.25j * np.pi * n))


def mp_gl(A, sign=1):
    """Lift of ``diag(A, A^{-T})`` with ``eps0 = sign / sqrt(det A)`` (principal)."""
    g = generator_gl(A)
    return MetaplecticElement(g, sign / np.sqrt(complex(np.linalg.det(np.asarray(A, float)))))


def mp_flow(H, t):
    """
    Metaplectic lift of the flow of ``H`` continued in time from the identity.

    This is the element realized by the quantum evolution ``exp(-i t H_op)``.
    """
    n = H.n
    base = 1j * np.eye(n)

    def det_at(s):
        g = hamiltonian_flow(H, s * t)
        return np.linalg.det(g.C @ base + g.D)

    steps = max(8, int(np.ceil(abs(t) * 4 * max(1.0, _generator_scale(H)))))
    eps0 = continue_sqrt(det_at, 1.0, initial_pieces=steps)
    return MetaplecticElement(hamiltonian_flow(H, t), eps0)


def _generator_scale(H):
    return float(max(np.max(np.abs(H.a)), np.max(np.abs(H.b)), np.max(np.abs(H.c)), 1e-12))


class MaslovPhase(NamedTuple):
    modulus: float
    k: int
    snap_residual: float
    phase: float


def maslov_boundary_phase(m, a, ys=(1e-2, 1e-3, 1e-4)):
    """
    Boundary limit of ``1/sqrt(det(C Z + D))`` as ``Z -> a`` from inside.

    ``1/branch_continue(m, a + i y E)`` is evaluated at each ``y`` in ``ys``
    and extrapolated to ``y = 0`` with the interpolating polynomial. Since
    ``det(C a + D)`` is real, the limit is ``|det|^{-1/2} exp(i pi k / 2)``.

    Returns
    -------
    MaslovPhase
        ``modulus``, ``k`` in ``{0, 1, 2, 3}``, the distance in radians from
        the extrapolated phase to ``k pi / 2``, and the raw phase.
    """
    a = np.asarray(getattr(a, "a", a), dtype=float)
    g = m.g
    d = float(np.linalg.det(g.C @ a + g.D))
    if abs(d) <= 1e-8:
        raise BoundaryCausticError(f"det(C a + D) = {d:.3e}; the chart breaks down at a")
    ys = np.asarray(ys, dtype=float)
    vals = np.array([1.0 / branch_continue(m, a + 1j * y * np.eye(m.n)) for y in ys])
    # Lagrange extrapolation to y = 0
    limit = 0.0j
    for i, yi in enumerate(ys):
        w = np.prod([yj / (yj - yi) for j, yj in enumerate(ys) if j != i])
        limit += w * vals[i]
    phase = float(np.angle(limit))
    k = int(np.round(phase / (np.pi / 2))) % 4
    snap = abs(np.angle(np.exp(1j * (phase - k * np.pi / 2))))
    return MaslovPhase(float(abs(limit)), k, float(snap), phase)
