from functools import reduce

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weilkit.errors import (BoundaryCausticError, ContinuationError, DimensionError,
                            NotInSiegelError)
from weilkit.siegel import (BoundaryChartPoint, MetaplecticElement, SiegelPoint,
                            branch_continue, cocycle_det, continue_sqrt, maslov_boundary_phase,
                            mp_center, mp_flow, mp_fourier, mp_gl, mp_identity, mp_inv, mp_mul,
                            mp_shear, siegel_action, sqrtdet_re_positive)
from weilkit.symplectic import QuadraticHamiltonian, generator_fourier
from weilkit.verify import random_metaplectic, random_siegel, random_word


def test_siegel_point_validation():
    SiegelPoint([[1 + 1j]])
    with pytest.raises(NotInSiegelError):
        SiegelPoint([[1 - 1j]])
    with pytest.raises(NotInSiegelError):
        SiegelPoint(np.diag([1j, 0.0]))
    p = SiegelPoint.from_dict(SiegelPoint(np.diag([1j, 2j])).to_dict())
    assert p.n == 2
    with pytest.raises(DimensionError):
        SiegelPoint.from_dict({"n": 3, "re": [[0.0]], "im": [[1.0]]})


def test_boundary_chart_point():
    assert BoundaryChartPoint([[1.0]]).n == 1
    with pytest.raises(ValueError):
        BoundaryChartPoint([[1 + 1j]])


def test_siegel_action_scalar_case():
    # n = 1: Mobius map (a z + b)/(c z + d)
    g = generator_fourier(1)
    z = 0.3 + 2j
    assert np.isclose(siegel_action(g, [[z]]).Z[0, 0], -1 / z)


@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_action_preserves_half_plane_and_composes(seed, n):
    rng = np.random.default_rng(seed)
    m1, m2 = random_metaplectic(rng, n), random_metaplectic(rng, n)
    Z = random_siegel(rng, n)
    W1 = siegel_action(m1.g, siegel_action(m2.g, Z))
    W2 = siegel_action((m1.g @ m2.g), Z)
    assert W1.min_imag_eig > 0
    assert np.allclose(W1.Z, W2.Z, atol=1e-8 * max(1, np.abs(W1.Z).max()))


def test_sqrtdet_branch():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert np.isclose(sqrtdet_re_positive(Q), np.sqrt(np.linalg.det(Q)))
    Q = np.array([[1 + 5j]])
    assert sqrtdet_re_positive(Q).real > 0


def test_continue_sqrt_winds():
    # det(s) = exp(2 pi i s * 3) winds three times; continuation gives exp(3 pi i)
    val = continue_sqrt(lambda s: np.exp(6j * np.pi * s), 1.0)
    assert np.isclose(val, -1.0)
    with pytest.raises(ContinuationError):
        continue_sqrt(lambda s: s - 0.5, np.sqrt(-0.5 + 0j))


def test_metaplectic_validation_and_roundtrip():
    with pytest.raises(ValueError):
        MetaplecticElement(generator_fourier(1), 5.0)
    m = mp_fourier(2)
    back = MetaplecticElement.from_json(m.to_json())
    assert back.eps0 == m.eps0 and back.g.allclose(m.g, atol=0)


def test_oscillator_ground_state_phase():
    # exp(-i t H) psi_i = exp(-i t n / 2) psi_i for the oscillator, any t
    for n in (1, 2):
        H = QuadraticHamiltonian.oscillator(n)
        for t in (0.3, 2.0, 4.0, 7.5, 11.0):
            eps = branch_continue(mp_flow(H, t), 1j * np.eye(n))
            assert np.isclose(1 / eps, np.exp(-0.5j * t * n), atol=1e-10)


def test_fourier_lift_is_backward_quarter_period():
    H = QuadraticHamiltonian.oscillator(1)
    m = mp_flow(H, -np.pi / 2)
    assert m.g.allclose(mp_fourier(1).g, atol=1e-14)
    assert np.isclose(m.eps0, mp_fourier(1).eps0)


def test_fourier_fourth_power_is_center():
    F = mp_fourier(1)
    F4 = mp_mul(mp_mul(F, F), mp_mul(F, F))
    assert F4.g.allclose(mp_identity(1).g, atol=1e-14)
    assert np.isclose(F4.eps0, -1.0)
    F8 = mp_mul(F4, F4)
    assert np.isclose(F8.eps0, 1.0)
    assert np.isclose(mp_mul(mp_center(1), mp_center(1)).eps0, 1.0)


@given(st.integers(0, 10_000))
def test_inverse_and_associativity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    a, b, c = (reduce(mp_mul, random_word(rng, n, 3)) for _ in range(3))
    left = mp_mul(mp_mul(a, b), c)
    right = mp_mul(a, mp_mul(b, c))
    assert np.isclose(left.eps0, right.eps0, rtol=1e-9)
    e = mp_mul(a, mp_inv(a))
    assert np.isclose(e.eps0, 1.0, atol=1e-8)


def test_shear_and_gl_lifts():
    m = mp_mul(mp_shear([[1.0]]), mp_shear([[-1.0]]))
    assert np.isclose(m.eps0, 1.0)
    m = mp_mul(mp_gl([[2.0]]), mp_gl([[0.5]]))
    assert np.isclose(m.eps0, 1.0)
    assert np.isclose(cocycle_det(mp_gl([[2.0]]).g, 1j * np.eye(1)), 0.5)


def test_maslov_fourier_powers():
    F = mp_fourier(1)
    m = mp_identity(1)
    ks = []
    for _ in range(8):
        m = mp_mul(F, m)
        res = maslov_boundary_phase(m, [[1.0]])
        assert res.snap_residual < 1e-3
        ks.append(res.k)
    # consecutive powers advance by at most a quarter turn and F^8 returns home
    steps = np.diff(ks) % 4
    assert set(steps) <= {0, 1}
    assert ks[-1] == 0
    with pytest.raises(BoundaryCausticError):
        maslov_boundary_phase(F, [[0.0]])
