"""
Discretized Weil representation on uniform cell-centred box grids.

A :class:`GridFunction` samples a function on ``x_j = -R + (j + 1/2) h`` with
``h = 2R/N`` along each of ``n`` axes. The Fourier transform maps such a grid
to its dual grid (half-width ``pi N / (2R)``) and the dual of the dual is the
original grid, which is what lets the four-factor evolution operator land
back on the input grid.
"""
from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass
from math import pi

import numpy as np
import scipy.linalg

from .errors import (DimensionError, FactorizationError, SingularCError,
                     TruncationWarning)
from .siegel import mp_flow, mp_inv, mp_mul, sqrtdet_re_positive
from .symplectic import QuadraticHamiltonian, heisenberg_transform

__all__ = [
    "GridFunction", "DEFAULT_GRID", "fourier", "dual_half_width", "resample_linear",
    "spectral_derivative", "apply_heisenberg", "hamiltonian_apply",
    "evolution_apply", "evolution_apply_general", "factorize", "gaussian_resolvable",
    "conjugation_residual",
    "hermite_state", "sample_gaussian", "save_grid", "load_grid",
]

DEFAULT_GRID = {1: (12.0, 1024), 2: (8.0, 256), 3: (6.0, 64)}
DECAY_TOL = 1e-6
DET_C_TOL = 1e-8
ROTATION_ANGLES = (pi / 4, pi / 3, pi / 5)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples of a function on an ``N^n`` cell-centred grid over ``[-R, R]^n``."""
    n: int
    R: float
    N: int
    samples: np.ndarray

    def __post_init__(self):
        n, N, R = int(self.n), int(self.N), float(self.R)
        if not 1 <= n <= 3:
            raise DimensionError(f"n must be 1, 2 or 3, got {n}")
        if N <= 0 or N % 2:
            raise DimensionError(f"N must be a positive even integer, got {N}")
        if not R > 0:
            raise ValueError("R must be positive")
        s = np.array(self.samples, dtype=complex)
        if s.shape != (N,) * n:
            raise DimensionError(f"samples have shape {s.shape}, expected {(N,) * n}")
        s.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "samples", s)

    @property
    def h(self):
        return 2 * self.R / self.N

    @property
    def axis(self):
        return -self.R + (np.arange(self.N) + 0.5) * self.h

    @property
    def points(self):
        """Coordinates with shape ``(N, ..., N, n)``."""
        grids = np.meshgrid(*([self.axis] * self.n), indexing="ij")
        return np.stack(grids, axis=-1)

    def with_samples(self, samples):
        return GridFunction(self.n, self.R, self.N, samples)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.h ** self.n))

    def inner(self, other):
        """Discrete ``int conj(self) other dx``."""
        self._check_same_grid(other)
        return complex(np.vdot(self.samples, other.samples) * self.h ** self.n)

    def truncation_ratio(self):
        """max |samples| on the outermost shell divided by max |samples|."""
        a = np.abs(self.samples)
        top = a.max()
        if top == 0:
            return 0.0
        shell = np.zeros_like(a, dtype=bool)
        for ax in range(self.n):
            idx = [slice(None)] * self.n
            idx[ax] = 0
            shell[tuple(idx)] = True
            idx[ax] = -1
            shell[tuple(idx)] = True
        return float(a[shell].max() / top)

    def decays(self, tol=DECAY_TOL):
        return self.truncation_ratio() < tol

    def parity_residual(self, parity):
        """``|f(-x) - parity f(x)| / |f|`` in the discrete norm."""
        flipped = self.samples[(slice(None, None, -1),) * self.n]
        return float(np.linalg.norm(flipped - parity * self.samples) /
                     max(np.linalg.norm(self.samples), 1e-300))

    def _check_same_grid(self, other):
        if (self.n, self.N) != (other.n, other.N) or not np.isclose(self.R, other.R, rtol=1e-12):
            raise DimensionError("grid functions live on different grids")

    def __add__(self, other):
        self._check_same_grid(other)
        return self.with_samples(self.samples + other.samples)

    def __sub__(self, other):
        self._check_same_grid(other)
        return self.with_samples(self.samples - other.samples)

    def __mul__(self, scalar):
        return self.with_samples(self.samples * scalar)

    __rmul__ = __mul__

    def evaluate(self, x):
        """Trigonometric interpolation at arbitrary points (n = 1 only)."""
        if self.n != 1:
            raise DimensionError("pointwise evaluation is only provided for n = 1")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _interp_along(self.samples, 0, x / self.h)


def dual_half_width(R, N):
    return pi * N / (2 * R)


def _centered_index(N):
    return np.arange(N) - N / 2 + 0.5


def fourier(f, sign=1):
    """
    Unitary DFT with the continuum normalization ``(2 pi)^{-n/2} int e^{-/+ i x xi}``.

    ``sign=+1`` uses ``e^{-i x xi}``, ``sign=-1`` its inverse. The result lives on
    the dual grid with half-width ``pi N / (2R)``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    N = f.N
    c = 0.5 - N / 2
    j = np.arange(N)
    pre = np.exp(-sign * 2j * pi * c * j / N)
    # continuum normalization: sqrt(h / dxi) on top of the unitary 1/sqrt(N)
    scale = np.sqrt(f.h / (pi / f.R) / N)
    post = np.exp(-sign * 2j * pi * (c * j + c * c) / N) * scale
    out = f.samples
    for ax in range(f.n):
        shape = [1] * f.n
        shape[ax] = N
        out = out * pre.reshape(shape)
        out = np.fft.fft(out, axis=ax) if sign == 1 else np.fft.ifft(out, axis=ax) * N
        out = out * post.reshape(shape)
    return GridFunction(f.n, dual_half_width(f.R, N), N, out)


def _interp_matrix(N, q):
    """
    Matrix evaluating the trigonometric interpolant of cell-centred samples at
    index coordinates ``q`` (``x = q h``). The Nyquist pair is split evenly so
    the interpolant respects parity; rows for ``|q| > N/2`` are zero.
    """
    k = np.arange(-N // 2, N // 2 + 1)
    w = np.ones(k.size)
    w[0] = w[-1] = 0.5
    u = _centered_index(N)
    # coefficient map a_k = (1/N) sum_j f_j exp(-2 pi i k u_j / N)
    analysis = np.exp(-2j * pi * np.outer(k, u) / N) / N
    synthesis = np.exp(2j * pi * np.outer(q, k) / N) * w
    T = synthesis @ analysis
    T[np.abs(q) > N / 2] = 0
    return T


def _trig_coeffs(arr):
    """Interpolation coefficients ``a_k``, ``k = -N/2..N/2``, along the last axis."""
    N = arr.shape[-1]
    c = 0.5 - N / 2
    k = np.arange(-N // 2, N // 2 + 1)
    fk = np.fft.fft(arr, axis=-1)[..., k % N]
    return fk * np.exp(-2j * pi * k * c / N) / N


def _interp_along(arr, axis, q):
    """Trigonometric interpolant along ``axis`` evaluated at index coordinates ``q``."""
    N = arr.shape[axis]
    k = np.arange(-N // 2, N // 2 + 1)
    w = np.ones(k.size)
    w[0] = w[-1] = 0.5
    a = _trig_coeffs(np.moveaxis(arr, axis, -1))
    synthesis = np.exp(2j * pi * np.outer(q, k) / N) * w
    synthesis[np.abs(q) > N / 2] = 0
    return np.moveaxis(a @ synthesis.T, -1, axis)


def _shift_along(arr, axis, delta):
    """
    Evaluate the per-line trigonometric interpolant at ``u + delta`` (index
    units). ``delta`` broadcasts against ``arr`` with the ``axis`` dimension
    squeezed to length 1. Samples whose source point leaves the box are zeroed.
    """
    N = arr.shape[axis]
    c = 0.5 - N / 2
    k = np.fft.fftfreq(N, d=1.0 / N)
    coeff = np.fft.fft(np.moveaxis(arr, axis, -1), axis=-1) / N
    # a_k = exp(-2 pi i k c / N) fft_k / N; the Nyquist bin holds k = -N/2
    kk = k.copy()
    a = coeff * np.exp(-2j * pi * kk * c / N)
    a_nyq_neg = a[..., N // 2]
    a_nyq_pos = coeff[..., N // 2] * np.exp(-2j * pi * (N / 2) * c / N)
    d = np.moveaxis(np.asarray(delta, dtype=float), axis, -1)
    phase = np.exp(2j * pi * kk * d / N) * np.exp(2j * pi * kk * c / N)
    b = a * phase
    nyq = 0.5 * (a_nyq_neg * np.exp(2j * pi * (-N / 2) * (d[..., 0] + c) / N)
                 + a_nyq_pos * np.exp(2j * pi * (N / 2) * (d[..., 0] + c) / N))
    b[..., N // 2] = nyq
    out = np.fft.ifft(b, axis=-1) * N
    src = _centered_index(N) + d
    out = np.where(np.abs(src) > N / 2, 0.0, out)
    return np.moveaxis(out, -1, axis)


def resample_linear(f, T, R_out):
    """
    Samples of ``eta -> f(T eta)`` on the grid of half-width ``R_out`` (same ``N``).

    Bandlimited (trigonometric) interpolation throughout. For ``n > 1`` the
    index-space map is factored as ``P L U1 Delta`` (pivoted LU); the axis
    permutation is exact, the unit-triangular factors are applied as per-line
    Fourier shifts and ``Delta`` as a per-axis rescale. Points whose source
    falls outside the input box are set to zero.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    n, N = f.n, f.N
    h_in, h_out = f.h, 2 * R_out / N
    S = T * (h_out / h_in)
    if n == 1:
        q = S[0, 0] * _centered_index(N)
        return GridFunction(1, R_out, N, _interp_along(f.samples, 0, q))
    P, L, U = scipy.linalg.lu(S)
    diag = np.diag(U).copy()
    if np.any(np.abs(diag) < 1e-14):
        raise FactorizationError("resampling map is singular")
    U1 = U / diag[None, :]
    u = _centered_index(N)
    arr = f.samples
    # f(P u): (P u)_i = u_{pi(i)} with P[i, pi(i)] = 1
    pi_map = np.argmax(P, axis=1)
    arr = np.transpose(arr, np.argsort(pi_map))

    def coord(j):
        shape = [1] * n
        shape[j] = N
        return u.reshape(shape)

    for i in range(1, n):
        delta = sum(L[i, j] * coord(j) for j in range(i))
        arr = _shift_along(arr, i, np.broadcast_to(delta, _squeezed(arr.shape, i)))
    for i in range(n - 2, -1, -1):
        delta = sum(U1[i, j] * coord(j) for j in range(i + 1, n))
        arr = _shift_along(arr, i, np.broadcast_to(delta, _squeezed(arr.shape, i)))
    for i in range(n):
        arr = _interp_along(arr, i, diag[i] * u)
    return GridFunction(n, R_out, N, arr)


def _squeezed(shape, axis):
    s = list(shape)
    s[axis] = 1
    return tuple(s)


def spectral_derivative(f, axis, order=1):
    """Fourier-spectral ``d^order f / d x_axis^order``."""
    N = f.N
    k = 2 * pi * np.fft.fftfreq(N, d=f.h)
    mult = (1j * k) ** order
    if order % 2:
        mult[N // 2] = 0
    shape = [1] * f.n
    shape[axis] = N
    fk = np.fft.fft(f.samples, axis=axis) * mult.reshape(shape)
    return f.with_samples(np.fft.ifft(fk, axis=axis))


def apply_heisenberg(f, h):
    """``(v . x) f + i sum_j w_j d_j f``."""
    if h.n != f.n:
        raise DimensionError("HeisenbergVector and grid disagree on n")
    x = f.points
    out = (x @ np.asarray(h.v, dtype=complex)) * f.samples
    for j in range(f.n):
        if h.w[j] != 0:
            out = out + 1j * h.w[j] * spectral_derivative(f, j).samples
    return f.with_samples(out)


def hamiltonian_apply(H, f):
    """
    Quantum operator of ``H`` on a grid function:
    ``x^T a x / 2 + i sum b_jk x_j d_k + (i/2) tr b - (1/2) sum c_jk d_j d_k``.
    """
    x = f.points
    out = 0.5 * np.einsum("...j,jk,...k->...", x, H.a, x) * f.samples
    out = out + 0.5j * np.trace(H.b) * f.samples
    grads = [spectral_derivative(f, k).samples for k in range(f.n)]
    for j in range(f.n):
        for k in range(f.n):
            if H.b[j, k] != 0:
                out = out + 1j * H.b[j, k] * x[..., j] * grads[k]
            if H.c[j, k] != 0:
                djk = spectral_derivative(f.with_samples(grads[k]), j).samples
                out = out - 0.5 * H.c[j, k] * djk
    return f.with_samples(out)


def _quad(x, Q):
    return np.einsum("...j,jk,...k->...", x, Q, x)


def evolution_apply(m, f, anchor="analytic"):
    """
    Evolution operator of ``m`` for ``det C != 0`` as the composition of
    four unitary factors: chirp ``exp((i/2) y^T C^{-1} D y)``, change of
    variables by ``C^T`` onto the dual grid, Fourier transform back to the
    original grid, chirp ``exp((i/2) x^T A C^{-1} x)``.

    The overall unit constant is fixed by the branch ``eps0`` of ``m``:
    ``anchor="analytic"`` uses the closed-form value of the raw composite on
    ``psi_{iE}``, ``anchor="reference"`` measures it numerically by applying
    the raw composite to sampled ``psi_{iE}`` and matching the exact image.
    """
    g = m.g
    n = f.n
    if g.n != n:
        raise DimensionError("element and grid disagree on n")
    C, D, A = g.C, g.D, g.A
    detC = float(np.linalg.det(C))
    if abs(detC) <= DET_C_TOL:
        raise SingularCError(f"|det C| = {abs(detC):.3e}; use evolution_apply_general")
    Cinv = np.linalg.inv(C)
    raw = _four_factor(f, Cinv @ D, C.T, A @ Cinv, detC)
    if anchor == "analytic":
        kappa = sqrtdet_re_positive(np.eye(n) - 1j * (Cinv @ D)) * np.sqrt(abs(detC)) / m.eps0
        kappa /= abs(kappa)
    elif anchor == "reference":
        ref = f.with_samples(np.exp(-0.5 * np.sum(f.points ** 2, axis=-1)))
        got = _four_factor(ref, Cinv @ D, C.T, A @ Cinv, detC)
        from .gaussian import GaussianState, mp_act
        target = sample_gaussian(mp_act(m, GaussianState(1.0, 1j * np.eye(n))), f.R, f.N)
        z = np.vdot(got.samples, target.samples)
        kappa = z / abs(z)
    else:
        raise ValueError(f"unknown anchor {anchor!r}")
    return raw.with_samples(raw.samples * kappa)


def _four_factor(f, CinvD, CT, ACinv, detC):
    y = f.points
    chi = f.with_samples(f.samples * np.exp(0.5j * _quad(y, CinvD)))
    rho = resample_linear(chi, CT, dual_half_width(f.R, f.N))
    rho = rho.with_samples(rho.samples * np.sqrt(abs(detC)))
    out = fourier(rho, +1)
    out = GridFunction(f.n, f.R, f.N, out.samples)
    return out.with_samples(out.samples * np.exp(0.5j * _quad(f.points, ACinv)))


def _rotation(n, theta):
    return mp_flow(QuadraticHamiltonian.oscillator(n), theta)


def factorize(m):
    """
    Split ``m = m1 r`` with ``r`` the oscillator flow at an angle from
    ``{pi/4, pi/3, pi/5}`` chosen to keep both factors' ``|det C|`` largest.

    Raises
    ------
    FactorizationError
        If no angle gives both factors ``|det C| > 1e-8``.
    """
    best = None
    for theta in ROTATION_ANGLES:
        r = _rotation(m.n, theta)
        m1 = mp_mul(m, mp_inv(r))
        score = min(abs(np.linalg.det(m1.g.C)), abs(np.linalg.det(r.g.C)))
        if best is None or score > best[0]:
            best = (score, m1, r)
    score, m1, r = best
    if score <= DET_C_TOL:
        raise FactorizationError("no rotation angle gives a non-degenerate factorization")
    return m1, r


def evolution_apply_general(m, f):
    """
    Evolution operator for any metaplectic element, through
    :func:`factorize`; each factor goes through :func:`evolution_apply`.
    """
    m1, r = factorize(m)
    return evolution_apply(m1, evolution_apply(r, f))


def gaussian_resolvable(m, Z, R, N, digits=9.0):
    """
    Whether the grid evolution of ``psi_Z`` under ``m`` is resolved to about
    ``10^-digits``.

    Every Gaussian met along the way (input, chirped input, its image on the
    dual grid, output of each factor) must decay to ``10^-digits`` inside its
    box, and every Gaussian that is resampled must be bandlimited to the
    grid's Nyquist frequency at the same level.
    """
    from .siegel import siegel_action

    Z = np.asarray(getattr(Z, "Z", Z), dtype=complex)
    lam = digits * np.log(10.0) * 2
    R_dual = dual_half_width(R, N)

    def decays(W, width):
        return np.min(np.linalg.eigvalsh(W.imag)) * width ** 2 >= lam

    def bandlimited(W, nyquist):
        return np.min(np.linalg.eigvalsh((-np.linalg.inv(W)).imag)) * nyquist ** 2 >= lam

    try:
        cur = Z
        for factor in reversed(factorize(m)):
            g = factor.g
            Cinv = np.linalg.inv(g.C)
            W1 = cur + Cinv @ g.D
            W2 = g.C @ W1 @ g.C.T
            if not (decays(cur, R) and bandlimited(W1, R_dual) and decays(W2, R_dual)):
                return False
            cur = siegel_action(g, cur).Z
        return bool(decays(cur, R) and bandlimited(cur, R_dual))
    except (np.linalg.LinAlgError, ValueError):
        return False


def conjugation_residual(m, h, f):
    """``|U (h f) - (g h)(U f)| / |f|``."""
    lhs = evolution_apply_general(m, apply_heisenberg(f, h))
    rhs = apply_heisenberg(evolution_apply_general(m, f), heisenberg_transform(m.g, h))
    return (lhs - rhs).norm() / f.norm()


def _hermite_1d_table(x, kmax):
    """Normalized Hermite functions h_0..h_kmax at x by the three-term recurrence."""
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = pi ** -0.25 * np.exp(-0.5 * x * x)
    if kmax >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, kmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_state(alpha, R=None, N=None):
    """Normalized Hermite function with multi-index ``alpha`` (``|alpha| <= 12``)."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    n = len(alpha)
    if sum(alpha) > 12:
        raise ValueError("total degree above 12 is not supported")
    R0, N0 = DEFAULT_GRID[n]
    R = R0 if R is None else R
    N = N0 if N is None else N
    ax = -R + (np.arange(N) + 0.5) * (2 * R / N)
    table = _hermite_1d_table(ax, max(alpha))
    vals = np.ones((N,) * n)
    for j, k in enumerate(alpha):
        shape = [1] * n
        shape[j] = N
        vals = vals * table[k].reshape(shape)
    return GridFunction(n, R, N, vals)


def sample_gaussian(s, R=None, N=None):
    """Samples of a GaussianState (or anything with ``evaluate``) on the default grid."""
    n = s.n
    R0, N0 = DEFAULT_GRID[n]
    R = R0 if R is None else R
    N = N0 if N is None else N
    proto = GridFunction(n, R, N, np.zeros((N,) * n))
    vals = s.evaluate(proto.points)
    out = proto.with_samples(vals)
    if not out.decays():
        warnings.warn(f"sampled state does not decay at the box edge "
                      f"(ratio {out.truncation_ratio():.2e})", TruncationWarning, stacklevel=2)
    return out


def save_grid(f, path):
    """
    Write ``path`` (JSON header) and, for ``N > 64``, a sibling ``.bin``
    holding little-endian float64 interleaved re/im samples.
    """
    path = os.fspath(path)
    header = {"n": f.n, "R": f.R, "N": f.N}
    if f.N <= 64:
        header["samples"] = np.stack([f.samples.real, f.samples.imag], axis=-1).tolist()
    else:
        bin_path = os.path.splitext(path)[0] + ".bin"
        inter = np.empty(f.samples.shape + (2,), dtype="<f8")
        inter[..., 0] = f.samples.real
        inter[..., 1] = f.samples.imag
        inter.tofile(bin_path)
        header["payload"] = os.path.basename(bin_path)
    with open(path, "w") as fh:
        json.dump(header, fh)


def load_grid(path):
    path = os.fspath(path)
    with open(path) as fh:
        header = json.load(fh)
    n, R, N = int(header["n"]), float(header["R"]), int(header["N"])
    if "samples" in header:
        arr = np.asarray(header["samples"], dtype=float)
    else:
        bin_path = os.path.join(os.path.dirname(path), header["payload"])
        arr = np.fromfile(bin_path, dtype="<f8")
        arr = arr.reshape((N,) * n + (2,))
    if arr.shape != (N,) * n + (2,):
        raise DimensionError(f"payload shape {arr.shape} does not match header")
    return GridFunction(n, R, N, arr[..., 0] + 1j * arr[..., 1])
