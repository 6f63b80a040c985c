import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from weilkit.errors import (DimensionError, NotSymplecticError, SingularMatrixError,
                            SymmetryError)
from weilkit.grid import GridFunction, apply_heisenberg, hamiltonian_apply
from weilkit.symplectic import (HeisenbergVector, QuadraticHamiltonian, SymplecticMatrix,
                                compose, generator_fourier, generator_gl, generator_shear,
                                hamiltonian_flow, hamiltonian_generator, heisenberg_transform,
                                inverse, is_symplectic, symplectic_form)

small = st.floats(-2, 2, allow_nan=False)


def sym_matrices(n):
    return arrays(np.float64, (n, n), elements=small).map(lambda A: 0.5 * (A + A.T))


def test_symplectic_form_membership():
    for n in (1, 2, 3):
        ok, res = is_symplectic(symplectic_form(n))
        assert ok and res == 0.0


def test_odd_size_is_a_dimension_error():
    with pytest.raises(DimensionError):
        is_symplectic(np.eye(3))


def test_non_symplectic_rejected():
    with pytest.raises(NotSymplecticError):
        SymplecticMatrix(np.diag([2.0, 1.0]))


def test_generators():
    B = np.array([[1.0, 0.5], [0.5, -2.0]])
    for M in (generator_shear(B), generator_fourier(2), generator_gl(np.array([[2.0, 1.0], [0.0, 1.0]]))):
        assert is_symplectic(M.matrix)[0]
    with pytest.raises(SymmetryError):
        generator_shear(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(SingularMatrixError):
        generator_gl(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_fourier_squares_to_minus_identity():
    F = generator_fourier(2)
    assert np.allclose((F @ F).matrix, -np.eye(4))


@given(sym_matrices(2), sym_matrices(2))
def test_shears_compose_additively(B1, B2):
    # [[E,B1],[0,E]] [[E,B2],[0,E]] = [[E,B1+B2],[0,E]]
    M = compose(generator_shear(B1), generator_shear(B2))
    assert M.allclose(generator_shear(B1 + B2), atol=1e-12)


@given(sym_matrices(2), sym_matrices(2), st.floats(-1.5, 1.5))
def test_flow_is_symplectic_and_inverse(a, c, t):
    H = QuadraticHamiltonian(a, np.zeros((2, 2)), c)
    M = hamiltonian_flow(H, t)
    assert is_symplectic(M.matrix, tol=1e-9 * max(1, np.linalg.norm(M.matrix) ** 2))[0]
    assert np.allclose((M @ inverse(M)).matrix, np.eye(4), atol=1e-8 * np.linalg.norm(M.matrix) ** 2)


def test_oscillator_and_free_flows():
    # oracle: classical solutions x(t) = x cos t + p sin t, p(t) = p cos t - x sin t
    t = 0.83
    M = hamiltonian_flow(QuadraticHamiltonian.oscillator(1), t)
    c, s = np.cos(t), np.sin(t)
    assert np.allclose(M.matrix, [[c, -s], [s, c]], atol=1e-14)
    # free particle: x(t) = x + t p
    M = hamiltonian_flow(QuadraticHamiltonian.free(1), t)
    assert np.allclose(M.matrix, [[1, 0], [t, 1]], atol=1e-14)


def test_json_roundtrip():
    M = hamiltonian_flow(QuadraticHamiltonian.oscillator(2), 0.4)
    back = SymplecticMatrix.from_json(M.to_json())
    assert back.allclose(M, atol=0)
    d = json.loads(M.to_json())
    d["n"] = 3
    with pytest.raises(DimensionError):
        SymplecticMatrix.from_dict(d)


def test_generator_matches_operator_commutator():
    """
    Independent oracle: on a grid, [-i H_op, V_(v,w)] f must equal V_(X(v,w)) f
    where X is the generator matrix of H.
    """
    rng = np.random.default_rng(3)
    A = rng.normal(size=(2, 2))
    H = QuadraticHamiltonian(0.5 * (A + A.T), rng.normal(size=(2, 2)),
                             0.5 * (A.T + A) + 3 * np.eye(2))
    R, N = 8.0, 128
    proto = GridFunction(2, R, N, np.zeros((N, N)))
    x = proto.points
    f = proto.with_samples(np.exp(-0.5 * np.sum(x ** 2, axis=-1) + 0.3j * x[..., 0]))
    X = hamiltonian_generator(H)
    for v, w in ((np.array([1.0, 0.0]), np.zeros(2)), (np.zeros(2), np.array([0.0, 1.0])),
                 (np.array([0.3, -0.7]), np.array([1.1, 0.4]))):
        h = HeisenbergVector(v, w)
        lhs = (-1j) * (hamiltonian_apply(H, apply_heisenberg(f, h))
                       - apply_heisenberg(hamiltonian_apply(H, f), h))
        Xh = X @ h.stacked()
        rhs = apply_heisenberg(f, HeisenbergVector(Xh[:2], Xh[2:]))
        assert (lhs - rhs).norm() / f.norm() < 1e-9


def test_heisenberg_transform():
    M = generator_fourier(1)
    h = heisenberg_transform(M, HeisenbergVector([1.0], [0.0]))
    assert np.allclose(h.v, [0.0]) and np.allclose(h.w, [-1.0])
    with pytest.raises(DimensionError):
        heisenberg_transform(M, HeisenbergVector([1.0, 0.0], [0.0, 0.0]))
