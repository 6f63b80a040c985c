"""Hermite functions under the oscillator: the grid evolution reproduces e^{-it(k+1/2)}."""
import numpy as np

from weilkit.grid import evolution_apply_general, hermite_state
from weilkit.siegel import mp_flow
from weilkit.symplectic import QuadraticHamiltonian

H = QuadraticHamiltonian.oscillator(1)
for t in (0.5, np.pi, 5.0):
    m = mp_flow(H, t)
    for k in (0, 1, 4):
        f = hermite_state((k,))
        g = evolution_apply_general(m, f)
        phase = f.inner(g) / f.norm() ** 2
        print(f"t={t:6.3f} k={k}  measured={phase:.12f}  expected={np.exp(-1j * t * (k + 0.5)):.12f}")
