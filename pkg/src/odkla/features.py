"""Random Fourier features for the Gaussian kernel."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class RFBasis:
    """
    Shared random-feature basis.

    Attributes
    ----------
    omega : ndarray, shape (L, d)
        Frequencies drawn from N(0, sigma^-2 I).
    sigma : float
        Gaussian kernel bandwidth.
    seed : int
        Seed the frequencies were drawn with.
    """

    omega: np.ndarray
    sigma: float
    seed: int

    @property
    def l_count(self):
        return self.omega.shape[0]

    @property
    def dim(self):
        return self.omega.shape[1]

    @property
    def n_features(self):
        return 2 * self.l_count

    def map(self, x):
        """
        Map inputs of shape ``(..., d)`` to RF space, row by row.

        The output interleaves ``cos(w_l.x), sin(w_l.x)`` for each frequency and
        is scaled by ``1/sqrt(L)``, so every mapped vector has unit norm.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"input has shape {x.shape}, basis expects last dimension {self.dim}")
        proj = x @ self.omega.T
        out = np.empty(proj.shape[:-1] + (2 * self.l_count,))
        out[..., 0::2] = np.cos(proj)
        out[..., 1::2] = np.sin(proj)
        out *= np.sqrt(1.0 / self.l_count)
        return out

    __call__ = map


def sample_basis(l_count, dim, sigma, seed):
    """Draw ``l_count`` frequencies in ``dim`` dimensions for bandwidth ``sigma``."""
    if l_count < 1 or dim < 1:
        raise ValueError("l_count and dim must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((l_count, dim)) / sigma
    omega.setflags(write=False)
    return RFBasis(omega, float(sigma), seed)


def rf_map(basis, x):
    return basis.map(x)


def gaussian_kernel(x, x2, sigma):
    """Exact kernel ``exp(-||x - x2||^2 / (2 sigma^2))``, broadcasting over rows."""
    d = np.asarray(x, dtype=float) - np.asarray(x2, dtype=float)
    return np.exp(-np.sum(d * d, axis=-1) / (2.0 * sigma ** 2))
