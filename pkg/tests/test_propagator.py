import json

import numpy as np
import pytest

from weilkit.errors import IntegratorError, SingularFocalPointError
from weilkit.gaussian import GaussianState
from weilkit.grid import hermite_state, sample_gaussian
from weilkit.propagator import (build_kernel, kernel_evaluate, propagate_grid,
                                reference_integrator)
from weilkit.siegel import SiegelPoint
from weilkit.symplectic import QuadraticHamiltonian


def _mehler(t, x, y):
    s, c = np.sin(t), np.cos(t)
    return (2j * np.pi * s) ** -0.5 * np.exp(1j * ((x * x + y * y) * c - 2 * x * y) / (2 * s))


def test_mehler_spot_values():
    H = QuadraticHamiltonian.oscillator(1)
    for t in (0.2, 1.0, 2.5):
        K = build_kernel(H, t)
        for x, y in ((0.0, 0.0), (0.5, -1.2), (2.0, 0.3)):
            assert abs(kernel_evaluate(K, x, y) - _mehler(t, x, y)) < 1e-12


def test_mehler_past_first_focal_time():
    # the branch continues with an extra -i per half period
    H = QuadraticHamiltonian.oscillator(1)
    t = 4.0
    K = build_kernel(H, t)
    amp = (2 * np.pi * abs(np.sin(t))) ** -0.5 * np.exp(-0.25j * np.pi - 0.5j * np.pi)
    assert np.isclose(K.amp, amp, rtol=1e-12)
    assert K.focal_crossings == 1


def test_free_kernel():
    K = build_kernel(QuadraticHamiltonian.free(1), 0.5)
    x, y = 0.7, -0.1
    expected = (2j * np.pi * 0.5) ** -0.5 * np.exp(1j * (x - y) ** 2 / (2 * 0.5))
    assert np.isclose(kernel_evaluate(K, x, y), expected)


def test_focal_point_raises():
    with pytest.raises(SingularFocalPointError):
        build_kernel(QuadraticHamiltonian.oscillator(1), np.pi)


def test_kernel_json():
    K = build_kernel(QuadraticHamiltonian.oscillator(2), 0.4)
    d = json.loads(K.to_json())
    assert d["t"] == 0.4 and len(d["amp"]) == 2


def test_propagate_matches_splitting():
    H = QuadraticHamiltonian(np.array([[0.6]]), np.array([[0.2]]), np.array([[1.3]]))
    f = sample_gaussian(GaussianState(1.0, SiegelPoint([[0.3 + 1.0j]])), 10.0, 256)
    t = 0.8
    a = propagate_grid(build_kernel(H, t), f)
    b = reference_integrator(H, t, f, 256)
    assert (a - b).norm() / f.norm() < 1e-5


def test_propagate_2d_oscillator_eigenstate():
    H = QuadraticHamiltonian.oscillator(2)
    f = hermite_state((1, 0), 8.0, 96)
    t = 0.6
    out = propagate_grid(build_kernel(H, t), f)
    assert (out - f * np.exp(-2j * t)).norm() < 1e-8


def test_semigroup():
    H = QuadraticHamiltonian.oscillator(1)
    f = hermite_state((2,), 12.0, 256) + hermite_state((0,), 12.0, 256)
    one = propagate_grid(build_kernel(H, 1.0), propagate_grid(build_kernel(H, 0.7), f))
    both = propagate_grid(build_kernel(H, 1.7), f)
    assert (one - both).norm() / f.norm() < 1e-6


def test_integrator_drift_detected():
    # strong dilation pushes the packet out of a small box
    H = QuadraticHamiltonian(np.zeros((1, 1)), np.array([[-3.0]]), np.zeros((1, 1)))
    f = hermite_state((0,), 4.0, 64)
    with pytest.raises(IntegratorError):
        reference_integrator(H, 1.0, f, 16)
    with pytest.raises(ValueError):
        reference_integrator(H, 1.0, f, 0)
