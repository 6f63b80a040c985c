"""Boundary phases of powers of the Fourier element: quarter turns, period 8."""
from weilkit.verify import maslov_fourier_powers

for j, ph in enumerate(maslov_fourier_powers(a=1.0), start=1):
    print(f"F^{j}: k={ph.k}  modulus={ph.modulus:.6f}  snap={ph.snap_residual:.1e}")
