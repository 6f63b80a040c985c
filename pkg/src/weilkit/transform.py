"""
Gaussian transforms of test functions and checks of their structure.

The even transform of a source ``psi`` is ``u(Z) = int conj(psi) psi_Z dx``
with ``psi_Z = exp((i/2) x^T Z x)``; the odd transform inserts ``x_l``. On
the boundary chart ``Z`` is replaced by a real symmetric ``a``.

Derivatives in ``Z`` use one convention throughout: for ``j != k`` the
symbol ``d/dZ_jk`` is half the derivative along the direction that moves
``Z_jk`` and ``Z_kj`` together, so that ``du = sum_jk du/dZ_jk dZ_jk``.
"""
from __future__ import annotations

import csv
import io
import threading
import warnings
from dataclasses import dataclass, field
from itertools import product
from math import pi

import numpy as np

from .errors import DimensionError, StepError, TailError, TruncationWarning
from .gaussian import GaussianState, PolyGaussian
from .grid import GridFunction, evolution_apply_general
from .siegel import (BoundaryChartPoint, SiegelPoint, branch_continue, mp_inv,
                     siegel_action)

__all__ = [
    "TransformSampler", "transform_point", "transform_odd", "boundary_transform",
    "boundary_transform_odd", "boundary_limit", "equivariance_check_even",
    "equivariance_check_odd", "z_derivative", "pde_residual_even", "pde_residual_odd",
    "pde_residual_boundary", "pde_convergence_ratio", "cauchy_riemann_residual",
    "GrowthReport", "growth_probe", "fit_growth", "boundary_path", "radial_path",
    "siegel_norm_n1", "NormResult", "check_report",
]

PARITY_TOL = 1e-10


def _as_source(psi):
    if isinstance(psi, (GridFunction, PolyGaussian)):
        return psi
    if isinstance(psi, GaussianState):
        return PolyGaussian.from_state(psi)
    if isinstance(psi, (list, tuple)) and psi and all(isinstance(s, GaussianState) for s in psi):
        out = PolyGaussian.from_state(psi[0])
        for s in psi[1:]:
            out = out + PolyGaussian.from_state(s)
        return out
    raise TypeError(f"unsupported transform source {type(psi).__name__}")


def _matrix(Z):
    if isinstance(Z, SiegelPoint):
        return Z.Z
    if isinstance(Z, BoundaryChartPoint):
        return Z.a.astype(complex)
    return np.atleast_2d(np.asarray(Z, dtype=complex))


class TransformSampler:
    """
    Callable ``Z -> u(Z)`` for one source, with a value cache.

    Parameters
    ----------
    source : GridFunction, GaussianState, list of GaussianState or PolyGaussian
        Grid sources are integrated by the grid Riemann sum; Gaussian-type
        sources use closed-form Gaussian moments.

    Attributes
    ----------
    parity : str
        ``"even"``, ``"odd"`` or ``"mixed"``.
    truncated : bool
        True when a grid source fails the decay diagnostic; a
        TruncationWarning is issued once at construction.
    """

    def __init__(self, source):
        self.source = _as_source(source)
        self.n = self.source.n
        self._cache = {}
        self._lock = threading.Lock()
        if isinstance(self.source, GridFunction):
            self.truncated = not self.source.decays()
            if self.truncated:
                warnings.warn("grid source does not decay at the box edge "
                              f"(ratio {self.source.truncation_ratio():.2e})",
                              TruncationWarning, stacklevel=2)
            if self.source.parity_residual(1) < PARITY_TOL:
                self.parity = "even"
            elif self.source.parity_residual(-1) < PARITY_TOL:
                self.parity = "odd"
            else:
                self.parity = "mixed"
            self._x = self.source.points.reshape(-1, self.n)
            self._conj = np.conj(self.source.samples).reshape(-1)
            self._w = self.source.h ** self.n
        else:
            self.truncated = False
            self.parity = {1: "even", -1: "odd", 0: "mixed"}[self.source.parity]

    def _cached(self, kind, W, fn):
        key = (kind, W.tobytes())
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        val = fn(W)
        with self._lock:
            self._cache.setdefault(key, val)
        return val

    def _grid_weights(self, W):
        q = np.einsum("pj,jk,pk->p", self._x, W, self._x)
        return self._conj * np.exp(0.5j * q) * self._w

    def _even(self, W):
        if isinstance(self.source, GridFunction):
            return complex(np.sum(self._grid_weights(W)))
        return complex(self.source.transform(W))

    def _odd(self, W):
        if isinstance(self.source, GridFunction):
            return self._grid_weights(W) @ self._x
        return np.asarray(self.source.transform_odd(W), dtype=complex)

    def __call__(self, Z):
        W = _matrix(Z)
        self._check_n(W)
        return self._cached("even", W, self._even)

    def odd(self, Z):
        W = _matrix(Z)
        self._check_n(W)
        return self._cached("odd", W, self._odd).copy()

    def _check_n(self, W):
        if W.shape != (self.n, self.n):
            raise DimensionError(f"point of size {W.shape[0]} for an n={self.n} source")

    def odd_component(self, l):
        """Scalar callable ``Z -> u_l(Z)``."""
        return lambda Z: self.odd(Z)[l]

    def values_n1(self, z):
        """Vectorized ``u(z)`` for n = 1 Gaussian-type sources and complex arrays ``z``."""
        if self.n != 1 or isinstance(self.source, GridFunction):
            raise TypeError("vectorized evaluation needs an n = 1 Gaussian-type source")
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape, dtype=complex)
        for P, Zt in self.source.terms:
            W = z - np.conj(Zt.Z[0, 0])
            q = -1j * W
            root = np.sqrt(q)
            base = np.sqrt(2 * pi) / root
            for (k,), c in P.items():
                if k % 2:
                    continue
                # int x^k exp(-q x^2 / 2) = base * (k-1)!! q^{-k/2}
                dfact = float(np.prod(np.arange(k - 1, 0, -2))) if k else 1.0
                total += np.conj(c) * base * dfact * root ** (-k)
        return total


def transform_point(psi, Z):
    """Even Gaussian transform ``u(Z)``."""
    s = psi if isinstance(psi, TransformSampler) else TransformSampler(psi)
    return s(Z)


def transform_odd(psi, Z):
    """Odd Gaussian transform: the vector ``u_l(Z)``."""
    s = psi if isinstance(psi, TransformSampler) else TransformSampler(psi)
    return s.odd(Z)


def _real_chart(a):
    a = a if isinstance(a, BoundaryChartPoint) else BoundaryChartPoint(a)
    return a.a.astype(complex)


def boundary_transform(psi, a):
    """Transform on the real chart, ``int conj(psi) exp((i/2) x^T a x) dx``."""
    s = psi if isinstance(psi, TransformSampler) else TransformSampler(psi)
    return s(_real_chart(a))


def boundary_transform_odd(psi, a):
    s = psi if isinstance(psi, TransformSampler) else TransformSampler(psi)
    return s.odd(_real_chart(a))


def boundary_limit(psi, a, ys=(4e-3, 2e-3, 1e-3), odd=False):
    """
    Limit of the interior transform at ``a + i y E`` as ``y -> 0``, by
    polynomial extrapolation through the given ``y`` values.
    """
    s = psi if isinstance(psi, TransformSampler) else TransformSampler(psi)
    a = _real_chart(a)
    E = np.eye(a.shape[0])
    f = s.odd if odd else s
    vals = np.array([f(a + 1j * y * E) for y in ys])
    ys = np.asarray(ys, dtype=float)
    # Lagrange weights at 0
    w = np.array([np.prod([-ys[k] / (ys[j] - ys[k]) for k in range(len(ys)) if k != j])
                  for j in range(len(ys))])
    return np.tensordot(w, vals, axes=1)


def _psi_z_norm(Z):
    Y = Z.imag
    return (pi ** Z.shape[0] / np.linalg.det(Y)) ** 0.25


def _source_norm(src):
    return src.norm()


def _apply_inverse(m, src):
    inv = mp_inv(m)
    if isinstance(src, GridFunction):
        return evolution_apply_general(inv, src)
    return src.mp_act(inv)


def equivariance_check_even(m, psi, Z):
    """
    Relative defect of ``u_{m^{-1} psi}(Z) = eps_m(Z)^{-1} u_psi(g Z)``.

    The defect is divided by ``|psi| |psi_Z|``, the Cauchy-Schwarz bound on
    the left side.
    """
    src = _as_source(psi)
    Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    lhs = TransformSampler(_apply_inverse(m, src))(Z)
    rhs = TransformSampler(src)(siegel_action(m.g, Z)) / branch_continue(m, Z)
    return abs(lhs - rhs) / (_source_norm(src) * _psi_z_norm(Z.Z))


def equivariance_check_odd(m, psi, Z):
    """
    Relative defect of ``sum_l (C Z + D)_kl v_l(Z) = eps_m(Z)^{-1} u_k(g Z)``
    with ``v`` the odd transform of ``m^{-1} psi``.

    Scaled by ``|C Z + D| |psi| |x psi_Z|``.
    """
    src = _as_source(psi)
    Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    v = TransformSampler(_apply_inverse(m, src)).odd(Z)
    K = m.g.C @ Z.Z + m.g.D
    lhs = K @ v
    rhs = TransformSampler(src).odd(siegel_action(m.g, Z)) / branch_continue(m, Z)
    cov = np.linalg.inv(2 * Z.Z.imag)
    scale = (np.linalg.norm(K, 2) * _source_norm(src) * _psi_z_norm(Z.Z)
             * np.sqrt(np.max(np.diag(cov))))
    return float(np.max(np.abs(lhs - rhs)) / scale)


def _direction(n, j, k):
    E = np.zeros((n, n))
    E[j, k] = E[k, j] = 1.0
    return E


def _dfactor(j, k):
    return 1.0 if j == k else 0.5


def z_derivative(u, Z, j, k, step):
    """Central-difference ``du/dZ_jk`` along the real direction (shared convention)."""
    Z = _matrix(Z)
    E = _direction(Z.shape[0], j, k)
    return _dfactor(j, k) * (u(Z + step * E) - u(Z - step * E)) / (2 * step)


def _second(u, Z, jl, km, step):
    n = Z.shape[0]
    E1 = _direction(n, *jl)
    E2 = _direction(n, *km)
    h = step
    val = (u(Z + h * E1 + h * E2) - u(Z + h * E1 - h * E2)
           - u(Z - h * E1 + h * E2) + u(Z - h * E1 - h * E2)) / (4 * h * h)
    return _dfactor(*jl) * _dfactor(*km) * val


def _check_step(Z, step, interior):
    if not step > 0:
        raise StepError("step must be positive")
    if interior:
        margin = float(np.min(np.linalg.eigvalsh(Z.imag)))
        if margin <= 2 * step:
            raise StepError(f"step {step} too large for Im Z margin {margin:.3e}")


def _even_defect(u, Z, step):
    n = Z.shape[0]
    out = []
    for j, k, l, m in product(range(n), repeat=4):
        d = _second(u, Z, (j, l), (k, m), step) - _second(u, Z, (j, m), (k, l), step)
        out.append(d)
    return np.array(out) if out else np.zeros(1)


def _odd_defect(u, Z, step):
    n = Z.shape[0]
    out = []
    for j, k, l in product(range(n), repeat=3):
        d = (z_derivative(lambda W: u(W)[l], Z, j, k, step)
             - z_derivative(lambda W: u(W)[k], Z, j, l, step))
        out.append(d)
    return np.array(out)


def _residual(defect, u, Z, step, richardson):
    d1 = defect(u, Z, step)
    if not richardson:
        return float(np.max(np.abs(d1)))
    d2 = defect(u, Z, step / 2)
    return float(np.max(np.abs((4 * d2 - d1) / 3)))


def pde_residual_even(u, Z, step=0.02, richardson=True):
    """
    ``max |d_jl d_km u - d_jm d_kl u|`` over index quadruples at an interior
    point, with Richardson extrapolation over ``step`` and ``step/2``.
    """
    Z = _matrix(Z)
    _check_step(Z, step, interior=True)
    return _residual(_even_defect, u, Z, step, richardson)


def pde_residual_odd(u_vec, Z, step=0.02, richardson=True):
    """``max |d_jk u_l - d_jl u_k|`` for a vector-valued sampler ``u_vec``."""
    Z = _matrix(Z)
    _check_step(Z, step, interior=True)
    return _residual(_odd_defect, u_vec, Z, step, richardson)


def pde_residual_boundary(u, a, step=0.005, parity="even", richardson=True):
    """Same systems on the real chart; ``u`` maps real symmetric matrices to values."""
    a = _real_chart(a)
    _check_step(a, step, interior=False)
    defect = _even_defect if parity == "even" else _odd_defect
    return _residual(defect, u, a, step, richardson)


def pde_convergence_ratio(u, Z, step=0.02, parity="even", interior=True):
    """Ratio of raw finite-difference defects at ``step`` and ``step/2`` (about 4 for O(h^2))."""
    Z = _matrix(Z)
    _check_step(Z, step, interior=interior)
    defect = _even_defect if parity == "even" else _odd_defect
    d1 = np.max(np.abs(defect(u, Z, step)))
    d2 = np.max(np.abs(defect(u, Z, step / 2)))
    return float(d1 / d2)


def cauchy_riemann_residual(u, Z, step=1e-3):
    """
    ``max_jk |du/d(Re Z_jk) - (1/i) du/d(Im Z_jk)|`` with Richardson-extrapolated
    central differences; zero for holomorphic ``u``.
    """
    Z = _matrix(Z)
    _check_step(Z, step, interior=True)
    n = Z.shape[0]

    def defect(h):
        out = []
        for j in range(n):
            for k in range(j, n):
                E = _direction(n, j, k)
                d_re = (u(Z + h * E) - u(Z - h * E)) / (2 * h)
                d_im = (u(Z + 1j * h * E) - u(Z - 1j * h * E)) / (2 * h)
                out.append(d_re - d_im / 1j)
        return np.array(out)

    d1, d2 = defect(step), defect(step / 2)
    return float(np.max(np.abs((4 * d2 - d1) / 3)))


@dataclass
class GrowthReport:
    """Values of ``|u|`` against ``C (1 + |Z|)^M (1 + 1/det Im Z)^N`` along a path."""
    C: float
    M: float
    N: float
    rows: list = field(default_factory=list)

    @property
    def respected(self):
        return all(r["ok"] for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "abs_Z", "det_im_Z", "abs_u", "bound", "ok"])
        for i, r in enumerate(self.rows):
            w.writerow([i, repr(r["abs_Z"]), repr(r["det_im_Z"]), repr(r["abs_u"]),
                        repr(r["bound"]), int(r["ok"])])
        return buf.getvalue()

    def to_dict(self):
        return {"C": self.C, "M": self.M, "N": self.N, "respected": self.respected,
                "rows": self.rows}


def _growth_terms(Z):
    return float(np.linalg.norm(Z, 2)), float(np.linalg.det(Z.imag))


def growth_probe(u, path, C, M, N):
    """
    Tabulate ``|u(Z)|`` and the polynomial growth bound along ``path``.

    A diagnostic: a respected bound on finitely many points proves nothing,
    but a violated one shows the constants are too small.
    """
    rep = GrowthReport(float(C), float(M), float(N))
    for Z in path:
        Zm = _matrix(Z)
        if np.min(np.linalg.eigvalsh(Zm.imag)) <= 0:
            raise ValueError("growth paths must stay in the interior")
        nz, dy = _growth_terms(Zm)
        val = abs(u(Zm))
        bound = C * (1 + nz) ** M * (1 + 1 / dy) ** N
        rep.rows.append({"abs_Z": nz, "det_im_Z": dy, "abs_u": float(val),
                         "bound": float(bound), "ok": bool(val <= bound)})
    return rep


def boundary_path(a, ys=None):
    """``a + i y E`` for ``y`` decreasing geometrically towards 0."""
    a = _real_chart(a).real
    ys = np.geomspace(1.0, 1e-4, 25) if ys is None else ys
    return [a + 1j * y * np.eye(a.shape[0]) for y in ys]


def radial_path(Z0, rs=None):
    """``Z0 + r D`` for a real symmetric direction ``D`` built from ``Z0`` (``r`` growing)."""
    Z0 = _matrix(Z0)
    rs = np.geomspace(1.0, 1e4, 25) if rs is None else rs
    D = Z0.real if np.linalg.norm(Z0.real) > 0 else np.eye(Z0.shape[0])
    D = D / np.linalg.norm(D, 2)
    return [Z0 + r * D for r in rs]


def fit_growth(u, paths, max_exponent=4, slack=1.05):
    """
    Smallest integer exponents ``(M, N)`` (ordered by ``M + N``) for which
    ``|u| / ((1 + |Z|)^M (1 + 1/det Im Z)^N)`` does not increase over the last
    quarter of every path; ``C`` is ``slack`` times the largest ratio seen.

    Returns ``(C, M, N)``.
    """
    data = []
    for path in paths:
        rows = []
        for Z in path:
            Zm = _matrix(Z)
            nz, dy = _growth_terms(Zm)
            rows.append((abs(u(Zm)), nz, dy))
        data.append(np.array(rows))
    candidates = sorted(product(range(max_exponent + 1), repeat=2), key=lambda p: (sum(p), p))
    for M, N in candidates:
        ratios = [d[:, 0] / ((1 + d[:, 1]) ** M * (1 + 1 / d[:, 2]) ** N) for d in data]
        if all(_tail_flat(r) for r in ratios):
            C = slack * max(float(np.max(r)) for r in ratios)
            return max(C, 1e-300), M, N
    raise ValueError("no polynomial bound with exponents up to max_exponent fits these paths")


def _tail_flat(r):
    tail = r[-max(3, len(r) // 4):]
    return bool(np.all(np.diff(tail) <= 1e-12 * max(1.0, float(np.max(tail)))))


@dataclass
class NormResult:
    """Regularized invariant integral of ``|u|^2`` over the upper half-plane (n = 1)."""
    value: float
    y0_values: tuple
    y0_estimates: tuple
    x_tail: float


def _gl_nodes(a, b, panels, order=20):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel()
    wt = (0.5 * (hi - lo) * w).ravel()
    return x, wt


def siegel_norm_n1(u, X=400.0, y0=1e-3, Y=1e3, x_panels=80, y_panels=60):
    """
    Invariant integral ``int |u(x + i y)|^2 y^{-3/2} dx dy`` for n = 1.

    The integral diverges at ``y = 0`` for every non-zero source because
    ``|u|^2`` tends to the boundary value ``|u(x)|^2``. It is regularized as
    a Hadamard finite part in ``y`` at each ``x``: the truncated integral over
    ``[y0, inf)`` minus ``2 |u(x)|^2 / sqrt(y0)`` is extrapolated to
    ``y0 -> 0`` from ``y0, y0/2, y0/4`` (model ``F + alpha sqrt(y0) + beta y0^{3/2}``).
    The ``y > Y`` tail uses ``|u|^2 ~ c / y``; the ``|x| > X`` tail uses the
    fitted decay ``K |x|^{-3/2} + K2 |x|^{-5/2}``.

    Raises
    ------
    TailError
        If either extrapolation is inconsistent (non-finite, or the
        ``y0``-sequence does not contract).
    """
    if u.n != 1:
        raise DimensionError("the invariant norm is implemented for n = 1 only")
    t_nodes, t_w = _gl_nodes(-np.arcsinh(X), np.arcsinh(X), x_panels)
    xs = np.sinh(t_nodes)
    wx = t_w * np.cosh(t_nodes)
    y0s = (y0, y0 / 2, y0 / 4)

    def finite_part_columns(x):
        g0 = np.abs(u.values_n1(x.astype(complex))) ** 2
        ests = []
        for yy in y0s:
            s, ws = _gl_nodes(np.log(yy), np.log(Y), y_panels)
            ygrid = np.exp(s)
            vals = np.abs(u.values_n1(x[:, None] + 1j * ygrid[None, :])) ** 2
            body = (vals * ygrid ** -0.5) @ ws
            c = vals[:, -1] * Y
            tail = (2.0 / 3.0) * c * Y ** -1.5
            ests.append(body + tail - 2 * g0 / np.sqrt(yy))
        ests = np.array(ests)
        basis = np.array([[1.0, np.sqrt(yy), yy ** 1.5] for yy in y0s])
        coef = np.linalg.solve(basis, ests)
        return coef[0], ests

    phi, ests = finite_part_columns(xs)
    body = phi @ wx
    per_y0 = tuple(float(e @ wx) for e in ests)
    # x-tail from the decay model fitted at X and X/2 (both signs)
    xt = np.array([X / 2, X, -X / 2, -X])
    pt, _ = finite_part_columns(xt)
    tail = 0.0
    for sgn, (p_half, p_full) in ((1, (pt[0], pt[1])), (-1, (pt[2], pt[3]))):
        A = np.array([[(X / 2) ** -1.5, (X / 2) ** -2.5], [X ** -1.5, X ** -2.5]])
        K, K2 = np.linalg.solve(A, np.array([p_half, p_full]))
        tail += 2 * K * X ** -0.5 + (2.0 / 3.0) * K2 * X ** -1.5
    value = float(body + tail)
    diffs = np.abs(np.diff(per_y0))
    if not np.all(np.isfinite(per_y0)) or not np.isfinite(value):
        raise TailError("non-finite value in the finite-part extrapolation")
    if diffs[1] >= diffs[0]:
        raise TailError("y0-sequence does not contract; refine y0 or the quadrature")
    return NormResult(value, y0s, per_y0, float(tail))


def check_report(name, residual, tolerance, **params):
    """Uniform JSON-ready record for a single residual check."""
    residual = float(residual)
    return {"check": name, "residual": residual, "tolerance": float(tolerance),
            "pass": bool(np.isfinite(residual) and residual < tolerance), "params": params}
