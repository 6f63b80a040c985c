"""
weilkit: numerical metaplectic representation.

Symplectic and Siegel-space algebra (:mod:`weilkit.symplectic`,
:mod:`weilkit.siegel`), Gaussian states with an exact metaplectic action
(:mod:`weilkit.gaussian`), grid evolution operators (:mod:`weilkit.grid`),
Gaussian transforms and their checks (:mod:`weilkit.transform`), exact
quadratic propagators (:mod:`weilkit.propagator`) and seeded verification
suites (:mod:`weilkit.verify`).
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .symplectic import (HeisenbergVector, QuadraticHamiltonian, SymplecticMatrix,  # noqa: F401
                         compose, generator_fourier, generator_gl, generator_shear,
                         hamiltonian_flow, hamiltonian_generator, heisenberg_transform,
                         inverse, is_symplectic)
from .siegel import (BoundaryChartPoint, MetaplecticElement, SiegelPoint,  # noqa: F401
                     branch_continue, cocycle_det, maslov_boundary_phase, mp_center, mp_flow,
                     mp_fourier, mp_gl, mp_identity, mp_inv, mp_mul, mp_shear, siegel_action)
from .gaussian import (ZERO, GaussianState, PolyGaussian, annihilation_residual,  # noqa: F401
                       inner_product, mp_act)
from .grid import (GridFunction, apply_heisenberg, conjugation_residual,  # noqa: F401
                   evolution_apply, evolution_apply_general, fourier, hermite_state,
                   load_grid, sample_gaussian, save_grid)
from .transform import (TransformSampler, boundary_transform, boundary_transform_odd,  # noqa: F401
                        cauchy_riemann_residual, equivariance_check_even,
                        equivariance_check_odd, growth_probe, pde_residual_boundary,
                        pde_residual_even, pde_residual_odd, siegel_norm_n1, transform_odd,
                        transform_point)
from .propagator import (PropagatorKernel, build_kernel, kernel_evaluate,  # noqa: F401
                         propagate_grid, reference_integrator)
