"""
Instantaneous local costs in RF space.

Each agent's cost for one sample is ``loss(theta . z, y) + (lam / N) ||theta||^2``.
The squared loss carries no 1/2 factor, so summing it over a batch gives plain
ridge regression with weight ``lam``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch

LOSS_KINDS = ("squared", "logistic", "hinge")


@dataclass(frozen=True)
class LossSpec:
    kind: str = "squared"
    lam: float = 1e-4
    n_agents: int = 1

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.n_agents < 1:
            raise ValueError("n_agents must be at least 1")

    @property
    def reg(self):
        """Per-agent ridge weight ``lam / N``."""
        return self.lam / self.n_agents


def _check(theta, z):
    if theta.shape != z.shape:
        raise DimensionMismatch(f"theta {theta.shape} vs z {z.shape}")


def cost(spec, theta, z, y):
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    _check(theta, z)
    m = float(theta @ z)
    if spec.kind == "squared":
        data = (m - y) ** 2
    elif spec.kind == "logistic":
        data = np.logaddexp(0.0, -y * m)
    else:
        data = max(0.0, 1.0 - y * m)
    return float(data + spec.reg * (theta @ theta))


def gradient(spec, theta, z, y):
    """Gradient (a subgradient for hinge, zero at the kink) of :func:`cost`."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    _check(theta, z)
    m = theta @ z
    if spec.kind == "squared":
        scale = 2.0 * (m - y)
    elif spec.kind == "logistic":
        scale = -y * expit(-y * m)
    else:
        scale = -y if 1.0 - y * m > 0.0 else 0.0
    return scale * z + (2.0 * spec.reg) * theta


def predict(theta, z):
    return float(np.asarray(theta) @ np.asarray(z))
