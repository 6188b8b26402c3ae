"""
Random Fourier features
=======================

How well does a finite random basis reproduce the Gaussian kernel?
"""

import numpy as np
from odkla.features import sample_basis, gaussian_kernel

rng = np.random.default_rng(0)
x = rng.random((200, 5))
x2 = rng.random((200, 5))
exact = gaussian_kernel(x, x2, sigma=0.5)

# every mapped point lies on the unit sphere, so the self-kernel is exact
basis = sample_basis(50, 5, 0.5, seed=1)
z = basis.map(x)
print(z.shape, np.allclose(np.sum(z * z, axis=1), 1.0))

# the cross terms converge at the Monte-Carlo rate, about one over the square root of the basis size
for l_count in (10, 50, 200, 1000, 5000):
    b = sample_basis(l_count, 5, 0.5, seed=l_count)
    approx = np.sum(b.map(x) * b.map(x2), axis=1)
    err = np.abs(approx - exact)
    print(f"L={l_count:5d}  mean |error| {err.mean():.4f}  max {err.max():.4f}  "
          f"sqrt(L)*mean {np.sqrt(l_count) * err.mean():.3f}")
