"""
Gaussian states ``lambda * exp((i/2) x^T Z x)`` and their metaplectic action.

Besides plain Gaussian states this module carries :class:`PolyGaussian`, a
finite sum of polynomial-times-Gaussian terms. Hermite functions are of this
form, the metaplectic action maps the class to itself (polynomials are pushed
through as products of Heisenberg operators), and Gaussian transforms of it
are closed-form Gaussian moments.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import factorial, pi, sqrt

import numpy as np
from numpy.polynomial.hermite import herm2poly

from .errors import DimensionError
from .siegel import SiegelPoint, branch_continue, siegel_action, sqrtdet_re_positive

__all__ = [
    "GaussianState", "ZeroState", "ZERO", "evaluate", "mp_act", "inner_product",
    "annihilation_residual", "gaussian_integral", "PolyGaussian",
]


@dataclass(frozen=True, eq=False)
class GaussianState:
    """``x -> amplitude * exp((i/2) x^T Z x)`` with non-zero amplitude."""
    amplitude: complex
    Z: SiegelPoint

    def __post_init__(self):
        lam = complex(self.amplitude)
        if lam == 0:
            raise ValueError("amplitude must be non-zero; use ZERO for the zero state")
        Z = self.Z if isinstance(self.Z, SiegelPoint) else SiegelPoint(self.Z)
        object.__setattr__(self, "amplitude", lam)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self):
        return self.Z.n

    def evaluate(self, x):
        return evaluate(self, x)

    def norm(self):
        return sqrt(inner_product(self, self).real)

    def to_dict(self):
        return {"lambda": [self.amplitude.real, self.amplitude.imag], "Z": self.Z.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(complex(*d["lambda"]), SiegelPoint.from_dict(d["Z"]))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


class _ZeroState:
    """The zero function; kept apart so GaussianState never has amplitude 0."""
    amplitude = 0j

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] if x.ndim > 1 else (), dtype=complex)

    def __repr__(self):
        return "ZERO"


ZERO = ZeroState = _ZeroState()


def _quad_form(Z, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    return np.einsum("...j,jk,...k->...", x, Z, x)


def evaluate(s, x):
    """``s(x)``; ``x`` has shape ``(n,)`` or ``(..., n)``."""
    if s is ZERO:
        return ZERO.evaluate(x)
    return s.amplitude * np.exp(0.5j * _quad_form(s.Z.Z, x))


def mp_act(m, s):
    """Exact action on Gaussians: ``Z -> g.Z`` and ``lambda -> lambda / eps_m(Z)``."""
    if s is ZERO:
        return ZERO
    if m.n != s.n:
        raise DimensionError(f"n mismatch: {m.n} vs {s.n}")
    return GaussianState(s.amplitude / branch_continue(m, s.Z), siegel_action(m.g, s.Z))


def gaussian_integral(W, poly=None):
    """
    ``int P(x) exp((i/2) x^T W x) dx`` over R^n for ``Im W > 0``.

    ``poly`` maps exponent tuples to coefficients (default: the constant 1).
    The prefactor ``(2 pi)^{n/2} det(-i W)^{-1/2}`` uses the branch that is
    positive for purely imaginary ``W``; moments come from the Isserlis
    recursion with covariance ``(-i W)^{-1}``.
    """
    W = np.asarray(W, dtype=complex)
    n = W.shape[0]
    Q = -1j * W
    base = (2 * pi) ** (n / 2) / sqrtdet_re_positive(Q)
    if poly is None:
        return base
    S = np.linalg.inv(Q)
    moments = _moment_table(S)
    return base * sum(c * moments(alpha) for alpha, c in poly.items())


def _moment_table(S):
    """Normalized moments ``E[x^alpha]`` of a centred Gaussian with covariance ``S``."""
    n = S.shape[0]
    cache = {}

    def m(alpha):
        if any(a < 0 for a in alpha):
            return 0.0
        if sum(alpha) % 2:
            return 0.0
        if not any(alpha):
            return 1.0
        if alpha in cache:
            return cache[alpha]
        i = next(j for j, a in enumerate(alpha) if a > 0)
        rest = list(alpha)
        rest[i] -= 1
        total = 0.0
        for k in range(n):
            if rest[k] > 0:
                r2 = list(rest)
                r2[k] -= 1
                total += S[i, k] * rest[k] * m(tuple(r2))
        cache[alpha] = total
        return total

    return m


def inner_product(s1, s2):
    """``int conj(s1) s2 dx`` in closed form."""
    if s1 is ZERO or s2 is ZERO:
        return 0j
    W = s2.Z.Z - s1.Z.Z.conj()
    return np.conj(s1.amplitude) * s2.amplitude * gaussian_integral(W)


def annihilation_residual(s, v, w, samples):
    """
    ``max |sum_j (v_j x_j + w_j i d_j) s(x)|`` over the sample points.

    Uses ``i d_j s = -(Z x)_j s``, so the operator acts as multiplication by
    ``(v - Z w) . x``.
    """
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if x.shape[-1] != s.n:
        x = x.reshape(-1, s.n)
    coeff = v - s.Z.Z @ w
    vals = (x @ coeff) * evaluate(s, x)
    return float(np.max(np.abs(vals)))


# polynomial helpers: dict {exponent tuple: coefficient}

def _poly_add(P, Q, scale=1.0):
    out = dict(P)
    for k, c in Q.items():
        out[k] = out.get(k, 0) + scale * c
    return {k: c for k, c in out.items() if c != 0}


def _poly_mul_linear(P, coeff):
    """``(coeff . x) P``"""
    out = {}
    for alpha, c in P.items():
        for j, cj in enumerate(coeff):
            if cj == 0:
                continue
            beta = list(alpha)
            beta[j] += 1
            beta = tuple(beta)
            out[beta] = out.get(beta, 0) + cj * c
    return out


def _poly_grad_dot(P, w):
    """``w . grad P``"""
    out = {}
    for alpha, c in P.items():
        for j, wj in enumerate(w):
            if wj == 0 or alpha[j] == 0:
                continue
            beta = list(alpha)
            beta[j] -= 1
            beta = tuple(beta)
            out[beta] = out.get(beta, 0) + wj * alpha[j] * c
    return out


def _poly_eval(P, x):
    val = 0
    for alpha, c in P.items():
        term = c
        for j, a in enumerate(alpha):
            if a:
                term = term * x[..., j] ** a
        val = val + term
    return val


@lru_cache(maxsize=64)
def _hermite_1d(k):
    """Coefficients (ascending powers) of the L2-normalized Hermite polynomial."""
    coef = herm2poly([0] * k + [1])
    return tuple(coef / sqrt(2.0 ** k * factorial(k) * sqrt(pi)))


class PolyGaussian:
    """
    Finite sum ``sum_t P_t(x) exp((i/2) x^T Z_t x)``.

    Parameters
    ----------
    terms : list of (dict, SiegelPoint)
        Polynomial coefficients keyed by exponent tuples, and the Gaussian
        exponent of each term.
    """

    def __init__(self, terms):
        clean = []
        for poly, Z in terms:
            Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
            poly = {tuple(int(a) for a in k): complex(c) for k, c in poly.items() if c != 0}
            if poly:
                clean.append((poly, Z))
        if not clean:
            raise ValueError("PolyGaussian needs at least one non-zero term")
        ns = {Z.n for _, Z in clean}
        if len(ns) != 1:
            raise DimensionError("all terms must share n")
        self.terms = tuple(clean)
        self.n = ns.pop()

    @classmethod
    def from_state(cls, s):
        return cls([({(0,) * s.n: s.amplitude}, s.Z)])

    @classmethod
    def hermite(cls, alpha):
        """Normalized Hermite function ``prod_j h_{alpha_j}(x_j)``."""
        alpha = tuple(int(a) for a in np.atleast_1d(alpha))
        n = len(alpha)
        poly = {(0,) * n: 1.0}
        for j, k in enumerate(alpha):
            c1 = _hermite_1d(k)
            new = {}
            for beta, c in poly.items():
                for p, cp in enumerate(c1):
                    if cp == 0:
                        continue
                    b2 = list(beta)
                    b2[j] += p
                    b2 = tuple(b2)
                    new[b2] = new.get(b2, 0) + c * cp
            poly = new
        return cls([(poly, SiegelPoint.i_identity(n))])

    def __add__(self, other):
        return PolyGaussian(list(self.terms) + list(other.terms))

    def __mul__(self, scalar):
        return PolyGaussian([({k: scalar * c for k, c in P.items()}, Z) for P, Z in self.terms])

    __rmul__ = __mul__

    @property
    def degree(self):
        return max(sum(k) for P, _ in self.terms for k in P)

    @property
    def parity(self):
        """``+1`` (even), ``-1`` (odd) or ``0`` (mixed)."""
        pars = {sum(k) % 2 for P, _ in self.terms for k in P}
        if pars == {0}:
            return 1
        if pars == {1}:
            return -1
        return 0

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        out = 0
        for P, Z in self.terms:
            out = out + _poly_eval(P, x) * np.exp(0.5j * _quad_form(Z.Z, x))
        return out

    def apply_heisenberg(self, v, w):
        """Exact image under ``sum_j (v_j x_j + w_j i d_j)``."""
        v = np.asarray(v, dtype=complex)
        w = np.asarray(w, dtype=complex)
        out = []
        for P, Z in self.terms:
            lin = v - Z.Z @ w
            out.append((_poly_add(_poly_mul_linear(P, lin), _poly_grad_dot(P, 1j * w)), Z))
        out = [t for t in out if t[0]]
        return PolyGaussian(out) if out else ZERO

    def transform(self, W):
        """``int conj(self(x)) exp((i/2) x^T W x) dx`` for ``Im W > 0``, or real W."""
        W = np.asarray(W, dtype=complex)
        total = 0j
        for P, Z in self.terms:
            conjP = {k: np.conj(c) for k, c in P.items()}
            total += gaussian_integral(W - Z.Z.conj(), conjP)
        return total

    def transform_odd(self, W):
        """Vector of ``int conj(self(x)) x_l exp((i/2) x^T W x) dx``."""
        W = np.asarray(W, dtype=complex)
        out = np.zeros(self.n, dtype=complex)
        for P, Z in self.terms:
            conjP = {k: np.conj(c) for k, c in P.items()}
            for l in range(self.n):
                e = np.zeros(self.n)
                e[l] = 1.0
                out[l] += gaussian_integral(W - Z.Z.conj(), _poly_mul_linear(conjP, e))
        return out

    def inner(self, other):
        """``int conj(self) other dx``."""
        total = 0j
        for P, Z1 in self.terms:
            for Q, Z2 in other.terms:
                prod_poly = {}
                for a, ca in P.items():
                    for b, cb in Q.items():
                        k = tuple(i + j for i, j in zip(a, b))
                        prod_poly[k] = prod_poly.get(k, 0) + np.conj(ca) * cb
                total += gaussian_integral(Z2.Z - Z1.Z.conj(), prod_poly)
        return total

    def norm(self):
        return sqrt(max(self.inner(self).real, 0.0))

    def mp_act(self, m):
        """
        Exact metaplectic image.

        ``x^alpha psi_Z`` is mapped to ``prod_k V_k^{alpha_k}`` applied to
        ``psi_Z / eps_m(Z)`` at ``g.Z``, where ``V_k`` is the Heisenberg
        operator with coefficients ``M (e_k; 0) = (A e_k; C e_k)``.
        """
        g = m.g
        out = []
        for P, Z in self.terms:
            Zp = siegel_action(g, Z)
            lam = 1.0 / branch_continue(m, Z)
            acc = {}
            for alpha, c in P.items():
                cur = {(0,) * self.n: lam * c}
                for k, a in enumerate(alpha):
                    v, w = g.A[:, k], g.C[:, k]
                    lin = v - Zp.Z @ w
                    for _ in range(a):
                        cur = _poly_add(_poly_mul_linear(cur, lin), _poly_grad_dot(cur, 1j * w))
                acc = _poly_add(acc, cur)
            if acc:
                out.append((acc, Zp))
        return PolyGaussian(out)

    def __repr__(self):
        return f"PolyGaussian(n={self.n}, terms={len(self.terms)}, degree={self.degree})"


def hermite_multi_indices(n, max_degree, parity=None):
    """All multi-indices of length ``n`` with total degree at most ``max_degree``."""
    out = []
    for alpha in product(range(max_degree + 1), repeat=n):
        d = sum(alpha)
        if d > max_degree:
            continue
        if parity == 1 and d % 2:
            continue
        if parity == -1 and not d % 2:
            continue
        out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), a))
