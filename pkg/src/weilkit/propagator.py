"""
Exact kernels of quadratic-Hamiltonian propagators and a splitting oracle.

For a flow with blocks ``A, B, C, D`` and ``det C != 0`` the propagator
``exp(-i t H)`` has kernel

    K(x, y) = amp * exp(i (x^T A C^{-1} x / 2 - y^T C^{-1} x + y^T C^{-1} D y / 2)),

with ``amp^2 (2 pi i)^n det C = 1``. :func:`reference_integrator` solves the
same Schrodinger equation by Strang splitting and is used only as an
independent check.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import pi

import numpy as np
from scipy.linalg import expm

from .errors import IntegratorError, SingularFocalPointError
from .grid import _centered_index, _interp_matrix, resample_linear
from .siegel import mp_flow, sqrtdet_re_positive
from .symplectic import SymplecticMatrix, hamiltonian_flow

__all__ = ["PropagatorKernel", "build_kernel", "kernel_evaluate", "propagate_grid",
           "reference_integrator"]

FOCAL_TOL = 1e-8
DRIFT_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class PropagatorKernel:
    """
    Kernel data at time ``t``.

    ``quad`` holds ``(A C^{-1}, C^{-1}, C^{-1} D)``. ``focal_crossings`` counts
    sign changes of ``det C`` on ``(0, t)``; when it is positive the branch of
    ``amp`` was carried past those times by the metaplectic continuation
    rather than by the kernel formula itself.
    """
    t: float
    flow: SymplecticMatrix
    amp: complex
    quad: tuple
    focal_crossings: int = 0

    @property
    def n(self):
        return self.flow.n

    def to_dict(self):
        return {"t": self.t, "flow": self.flow.to_dict(),
                "amp": [self.amp.real, self.amp.imag],
                "focal_crossings": self.focal_crossings}

    def to_json(self):
        return json.dumps(self.to_dict())


def _count_focal_crossings(H, t, samples=512):
    if t == 0:
        return 0
    ts = np.linspace(0, t, samples + 1)[1:]
    dets = np.array([np.linalg.det(hamiltonian_flow(H, s).C) for s in ts])
    signs = np.sign(dets[np.abs(dets) > FOCAL_TOL])
    return int(np.count_nonzero(np.diff(signs)))


def build_kernel(H, t):
    """
    Kernel of ``exp(-i t H)``.

    The branch of ``amp`` is taken from the metaplectic flow element ``m``
    (continued in ``t`` from the identity):
    ``amp = eps_m(iE)^{-1} (2 pi)^{-n/2} sqrt det(E - i C^{-1} D)``, which for
    small ``t`` reduces to the free-flow value ``(2 pi i t)^{-n/2} det(c)^{-1/2}``.

    Raises
    ------
    SingularFocalPointError
        If ``|det C(t)| <= 1e-8``.
    """
    t = float(t)
    m = mp_flow(H, t)
    g = m.g
    n = g.n
    detC = np.linalg.det(g.C)
    if abs(detC) <= FOCAL_TOL:
        raise SingularFocalPointError(f"det C(t) = {detC:.3e} at t = {t}", t=t)
    Cinv = np.linalg.inv(g.C)
    CinvD = Cinv @ g.D
    amp = (sqrtdet_re_positive(np.eye(n) - 1j * CinvD) / m.eps0 / (2 * pi) ** (n / 2))
    quad = tuple(_sym(q) if i != 1 else q for i, q in enumerate((g.A @ Cinv, Cinv, CinvD)))
    return PropagatorKernel(t, g, complex(amp), quad, _count_focal_crossings(H, t))


def _sym(Q):
    return 0.5 * (Q + Q.T)


def kernel_evaluate(K, x, y):
    """``K(x, y)`` for points (or broadcastable arrays of points) ``x, y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if K.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if K.n == 1 and (y.ndim == 0 or y.shape[-1] != 1):
        y = y[..., None]
    P, Q, R = K.quad
    S = (0.5 * np.einsum("...j,jk,...k->...", x, P, x)
         - np.einsum("...j,jk,...k->...", y, Q, x)
         + 0.5 * np.einsum("...j,jk,...k->...", y, R, y))
    return K.amp * np.exp(1j * S)


def propagate_grid(K, f, chunk=2048):
    """
    Apply the kernel to ``f`` by direct quadrature on the grid of ``f``.

    For n = 2 the exponential sum is contracted one axis at a time; otherwise
    it is summed in chunks of output points. Cost grows like ``N^{2n}``, so
    this is an oracle for small grids rather than a production path.
    """
    P, Q, R = K.quad
    pts = f.points.reshape(-1, f.n)
    g = f.samples.reshape(-1) * np.exp(0.5j * np.einsum("pj,jk,pk->p", pts, R, pts))
    g = g * (f.h ** f.n) * K.amp
    if f.n == 2:
        out = _contract_2d(g.reshape(f.N, f.N), f.axis, Q, pts)
        out = out * np.exp(0.5j * np.einsum("pj,jk,pk->p", pts, P, pts))
        return f.with_samples(out.reshape(f.samples.shape))
    out = np.empty(pts.shape[0], dtype=complex)
    for s in range(0, pts.shape[0], chunk):
        xs = pts[s:s + chunk]
        phase = np.exp(-1j * (pts @ Q @ xs.T))
        out[s:s + chunk] = (g @ phase) * np.exp(0.5j * np.einsum("pj,jk,pk->p", xs, P, xs))
    return f.with_samples(out.reshape(f.samples.shape))


def _contract_2d(g, axis, Q, xs):
    """``sum_y g(y) exp(-i y^T Q x)`` for every output ``x``, one axis at a time."""
    omega = xs @ Q.T
    inner = g @ np.exp(-1j * np.outer(axis, omega[:, 1]))
    return np.sum(np.exp(-1j * np.outer(axis, omega[:, 0])) * inner, axis=0)


def reference_integrator(H, t, f, steps):
    """
    Strang-splitting solution of ``i d psi/dt = H psi`` up to time ``t``.

    Each step is ``B(tau/2) A(tau/2) K(tau) A(tau/2) B(tau/2)``: ``A`` multiplies
    by ``exp(-i tau x^T a x / 2)``, ``K`` is ``exp(-i tau xi^T c xi / 2)`` in
    Fourier space and ``B`` is the exact transport
    ``f -> exp(tau tr b / 2) f(exp(tau b^T) x)``.

    Raises
    ------
    IntegratorError
        If the norm drifts by more than 1e-3 (typically mass pushed out of the
        box by the transport stage).
    """
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be at least 1")
    n, N = f.n, f.N
    tau = float(t) / steps
    x = f.points
    quad_a = np.einsum("...j,jk,...k->...", x, H.a, x)
    phase_a = np.exp(-0.25j * tau * quad_a)
    k1 = 2 * pi * np.fft.fftfreq(N, d=f.h)
    ks = np.stack(np.meshgrid(*([k1] * n), indexing="ij"), axis=-1)
    phase_c = np.exp(-0.5j * tau * np.einsum("...j,jk,...k->...", ks, H.c, ks))
    transport = _transport(H.b, 0.5 * tau, f)
    axes = tuple(range(n))
    psi = f.samples
    norm0 = f.norm()
    for _ in range(steps):
        psi = transport(psi)
        psi = psi * phase_a
        psi = np.fft.ifftn(np.fft.fftn(psi, axes=axes) * phase_c, axes=axes)
        psi = psi * phase_a
        psi = transport(psi)
    out = f.with_samples(psi)
    if norm0 > 0 and abs(out.norm() / norm0 - 1) > DRIFT_TOL:
        raise IntegratorError(f"norm drift {abs(out.norm() / norm0 - 1):.2e} exceeds {DRIFT_TOL}")
    return out


def _transport(b, tau, f):
    b = np.asarray(b, dtype=float)
    if not np.any(b):
        return lambda psi: psi
    T = expm(tau * b.T)
    scale = np.exp(0.5 * tau * np.trace(b))
    if f.n == 1:
        mat = _interp_matrix(f.N, T[0, 0] * _centered_index(f.N)) * scale
        return lambda psi: mat @ psi
    return lambda psi: resample_linear(f.with_samples(psi), T, f.R).samples * scale
