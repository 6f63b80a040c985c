import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from weilkit.errors import DimensionError
from weilkit.gaussian import (ZERO, GaussianState, PolyGaussian, annihilation_residual,
                              evaluate, gaussian_integral, hermite_multi_indices,
                              inner_product, mp_act)
from weilkit.grid import sample_gaussian
from weilkit.siegel import SiegelPoint, mp_flow, mp_fourier, mp_identity
from weilkit.symplectic import QuadraticHamiltonian
from weilkit.verify import random_metaplectic, random_siegel


def _quad_complex(f, lo=-np.inf, hi=np.inf):
    re = quad(lambda x: f(x).real, lo, hi, limit=200)[0]
    im = quad(lambda x: f(x).imag, lo, hi, limit=200)[0]
    return re + 1j * im


@pytest.mark.parametrize("w", [1j, 0.7 + 1.3j, -2.0 + 0.4j])
@pytest.mark.parametrize("k", [0, 2, 3, 4])
def test_gaussian_integral_matches_quadrature(w, k):
    expected = _quad_complex(lambda x: x ** k * np.exp(0.5j * w * x * x))
    got = gaussian_integral(np.array([[w]]), {(k,): 1.0})
    assert abs(got - expected) < 1e-8 * max(1, abs(expected))


def test_state_basics():
    s = GaussianState(2.0, SiegelPoint([[1j]]))
    assert np.isclose(evaluate(s, [0.0]), 2.0)
    # ||s||^2 = 4 sqrt(pi)
    assert np.isclose(s.norm() ** 2, 4 * np.sqrt(np.pi))
    assert GaussianState.from_json(s.to_json()).amplitude == s.amplitude
    with pytest.raises(ValueError):
        GaussianState(0.0, SiegelPoint([[1j]]))
    assert mp_act(mp_identity(1), ZERO) is ZERO
    assert inner_product(ZERO, s) == 0
    with pytest.raises(DimensionError):
        mp_act(mp_identity(2), s)


def test_sampled_norm_matches_closed_form():
    s = GaussianState(1 - 0.5j, SiegelPoint(np.array([[0.3 + 1.2j, 0.1], [0.1, -0.2 + 0.9j]])))
    f = sample_gaussian(s)
    assert abs(f.norm() - s.norm()) < 1e-10


@given(st.integers(0, 10_000))
def test_annihilator(seed):
    # (v.x + w.i d) psi_Z = 0 exactly when v = Z w
    rng = np.random.default_rng(seed)
    Z = random_siegel(rng, 2)
    s = GaussianState(1.0, Z)
    w = rng.normal(size=2)
    pts = rng.normal(size=(20, 2))
    assert annihilation_residual(s, Z.Z @ w, w, pts) < 1e-12
    assert annihilation_residual(s, Z.Z @ w + 1, w, pts) > 1e-3


@given(st.integers(0, 10_000), st.sampled_from([1, 2]))
def test_mp_act_is_isometric(seed, n):
    rng = np.random.default_rng(seed)
    s = GaussianState(complex(*rng.normal(size=2)), random_siegel(rng, n))
    out = mp_act(random_metaplectic(rng, n), s)
    assert np.isclose(out.norm(), s.norm(), rtol=1e-9)


def test_hermite_orthonormal():
    idx = hermite_multi_indices(2, 4)
    hs = [PolyGaussian.hermite(a) for a in idx]
    G = np.array([[a.inner(b) for b in hs] for a in hs])
    assert np.allclose(G, np.eye(len(hs)), atol=1e-12)
    assert len(hermite_multi_indices(1, 6, parity=1)) == 4
    assert PolyGaussian.hermite((3,)).parity == -1
    assert PolyGaussian.hermite((1, 1)).parity == 1


def test_hermite_pointwise_values():
    x = np.linspace(-3, 3, 7)
    h2 = PolyGaussian.hermite((2,)).evaluate(x)
    expected = (2 * x ** 2 - 1) / np.sqrt(2 * np.sqrt(np.pi)) * np.exp(-x ** 2 / 2)
    assert np.allclose(h2, expected, atol=1e-14)


@pytest.mark.parametrize("k", [0, 1, 2, 5])
def test_hermite_are_oscillator_eigenfunctions(k):
    # exp(-i t H) h_k = exp(-i t (k + 1/2)) h_k
    t = 1.37
    h = PolyGaussian.hermite((k,))
    out = h.mp_act(mp_flow(QuadraticHamiltonian.oscillator(1), t))
    x = np.linspace(-4, 4, 17)
    assert np.allclose(out.evaluate(x), np.exp(-1j * t * (k + 0.5)) * h.evaluate(x), atol=1e-10)


def test_fourier_element_on_hermite():
    # F = flow(-pi/2) multiplies h_k by i^k e^{i pi/4}
    h = PolyGaussian.hermite((3,))
    out = h.mp_act(mp_fourier(1))
    x = np.linspace(-3, 3, 9)
    assert np.allclose(out.evaluate(x), 1j ** 3 * np.exp(0.25j * np.pi) * h.evaluate(x),
                       atol=1e-12)


def test_heisenberg_on_polygaussian():
    # (x + d) h_0 = sqrt(2) h_1 is the creation/annihilation pair a + a^dagger
    h0 = PolyGaussian.hermite((0,))
    out = h0.apply_heisenberg([1.0], [0.0])
    x = np.linspace(-3, 3, 7)
    assert np.allclose(out.evaluate(x), PolyGaussian.hermite((1,)).evaluate(x) / np.sqrt(2))
    # annihilation a = (x + d)/sqrt 2 kills h_0: w = -i
    assert h0.apply_heisenberg([1.0], [-1j]) is ZERO


def test_transform_of_state_matches_inner_product():
    rng = np.random.default_rng(5)
    s = GaussianState(1.0 + 0.2j, random_siegel(rng, 2))
    Z = random_siegel(rng, 2)
    p = PolyGaussian.from_state(s)
    assert np.isclose(p.transform(Z.Z), inner_product(s, GaussianState(1.0, Z)))
