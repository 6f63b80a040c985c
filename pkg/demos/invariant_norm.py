"""Regularized invariant norm of Gaussian transforms (n = 1) divided by the L2 norm."""
import numpy as np

from weilkit.gaussian import PolyGaussian
from weilkit.transform import TransformSampler, siegel_norm_n1

for k in (0, 2, 4):
    h = PolyGaussian.hermite((k,))
    res = siegel_norm_n1(TransformSampler(h))
    print(f"h{k}: ratio={res.value / h.norm() ** 2:.6f}")
print(f"-8 pi^(3/2) = {-8 * np.pi ** 1.5:.6f}")
