"""
Per-agent update rules and the stacked-matrix reference recursion.

The per-agent functions are what a single node would run: they only touch
the node's own variables and the copies it holds of its neighbours'
broadcast states.  :func:`matrix_reference_step` advances all nodes at once
with dense linear algebra and exists to cross-check the distributed path.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import losses
from .comm import CensorSpec, QuantizerSpec
from .errors import DimensionMismatch, UnsupportedLoss
from .losses import LossSpec

ETA_SCHEDULES = ("constant", "inverse_sqrt", "sqrt_growth")


@dataclass
class AgentState:
    """
    Local variables of agent ``index``.

    ``theta_hat_self`` is the agent's last broadcast state and
    ``theta_hat_neighbors`` maps each neighbour to the copy of its broadcast
    state held here.  For exact-exchange algorithms these copies are the
    neighbours' true iterates.
    """

    index: int
    theta: np.ndarray
    gamma: np.ndarray
    theta_hat_self: np.ndarray
    theta_hat_neighbors: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, index, n_features, neighbors=()):
        zero = np.zeros(n_features)
        zero.setflags(write=False)
        return cls(index, zero, zero, zero, {j: zero for j in neighbors})

    @property
    def degree(self):
        return len(self.theta_hat_neighbors)


@dataclass(frozen=True)
class EtaSchedule:
    """
    Proximal weight ``eta_t``.

    ``constant`` uses ``eta0``; ``inverse_sqrt`` uses ``eta0 / sqrt(T)`` and
    ``sqrt_growth`` uses ``eta0 * sqrt(T)``, where ``T`` is the run horizon.
    All three are constant over the rounds of one run.
    """

    kind: str = "constant"
    eta0: float = 1.0
    horizon: int = 1

    def __post_init__(self):
        if self.kind not in ETA_SCHEDULES:
            raise ValueError(f"unknown eta schedule {self.kind!r}")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")

    def __call__(self, t):
        if self.kind == "constant":
            return self.eta0
        if self.kind == "inverse_sqrt":
            return self.eta0 / math.sqrt(self.horizon)
        return self.eta0 * math.sqrt(self.horizon)


@dataclass(frozen=True)
class HyperParams:
    rho: float = 1.0
    eta: EtaSchedule = EtaSchedule()
    loss: LossSpec = LossSpec()
    censor: CensorSpec = None
    quantizer: QuantizerSpec = None

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")


def _disagreement(own, neighbor_values):
    acc = np.zeros_like(own)
    for v in neighbor_values:
        acc += own - v
    return acc


def _linearized_step(theta, gamma, grad, own_ref, neighbor_refs, rho, eta_t):
    if grad.shape != theta.shape:
        raise DimensionMismatch(f"grad {grad.shape} vs theta {theta.shape}")
    neighbor_refs = list(neighbor_refs)
    d_i = len(neighbor_refs)
    push = grad + rho * _disagreement(own_ref, neighbor_refs) + gamma
    return theta - push / (eta_t + 2.0 * rho * d_i)


def odkla_primal(state, grad, neighbor_thetas, rho, eta_t):
    """
    Linearized primal step using the neighbours' exact iterates.

    ``neighbor_thetas`` is an iterable of the neighbours' current ``theta``;
    its length is the agent's degree.
    """
    return _linearized_step(state.theta, state.gamma, grad, state.theta,
                            neighbor_thetas, rho, eta_t)


def odkla_dual(state, theta_new, neighbor_thetas_new, rho):
    return state.gamma + rho * _disagreement(theta_new, neighbor_thetas_new)


def qc_primal(state, grad, rho, eta_t):
    """Linearized primal step with broadcast states in the consensus term."""
    return _linearized_step(state.theta, state.gamma, grad, state.theta_hat_self,
                            state.theta_hat_neighbors.values(), rho, eta_t)


def qc_dual(state, rho):
    """Dual ascent on the broadcast states; call after the round's exchange."""
    return state.gamma + rho * _disagreement(state.theta_hat_self,
                                             state.theta_hat_neighbors.values())


def rff_dokl_adapt(thetas, grads, step_size):
    return [th - step_size * g for th, g in zip(thetas, grads)]


def rff_dokl_combine(i, psi_self, weights_row, received):
    """Agent i's weighted average of its own and its neighbours' adapted iterates."""
    acc = weights_row[i] * psi_self
    for j, psi_j in received.items():
        acc = acc + weights_row[j] * psi_j
    return acc


def rff_dokl_step(thetas, grads, step_size, combine):
    """
    Diffusion baseline: adapt with a gradient step, then combine with neighbours.

    Parameters
    ----------
    thetas, grads : sequence of ndarray
        Current iterates and their local gradients, one per agent.
    step_size : float
    combine : ndarray, shape (N, N)
        Doubly stochastic weights supported on edges and the diagonal.

    Returns
    -------
    list of ndarray
    """
    psi = rff_dokl_adapt(thetas, grads, step_size)
    out = []
    for i in range(len(psi)):
        nbrs = {int(j): psi[j] for j in np.flatnonzero(combine[i]) if j != i}
        out.append(rff_dokl_combine(i, psi[i], combine[i], nbrs))
    return out


def dokl_primal(state, z, y, loss, neighbor_thetas, rho, eta_t, solver="dense"):
    """
    Exact ADMM primal step for the squared loss.

    Minimises ``cost(theta) + eta/2 ||theta - theta_t||^2 + gamma.theta
    + rho sum_j ||theta - (theta_t + theta_j)/2||^2``, whose Hessian is
    ``a I + 2 z z^T`` with ``a = eta + 2 lam/N + 2 rho d``.

    ``solver="dense"`` solves the 2L x 2L system directly, as a generic local
    ADMM solve would.  ``solver="rank_one"`` uses the Sherman-Morrison formula
    instead and costs O(L).
    """
    if loss.kind != "squared":
        raise UnsupportedLoss("the exact ADMM step supports the squared loss only")
    neighbor_thetas = list(neighbor_thetas)
    d_i = len(neighbor_thetas)
    theta = state.theta
    rhs = (2.0 * y) * z + eta_t * theta - state.gamma
    for th_j in neighbor_thetas:
        rhs = rhs + rho * (theta + th_j)
    a = eta_t + 2.0 * loss.reg + 2.0 * rho * d_i
    if solver == "dense":
        hess = 2.0 * np.outer(z, z)
        hess[np.diag_indices_from(hess)] += a
        return np.linalg.solve(hess, rhs)
    if solver != "rank_one":
        raise ValueError(f"unknown solver {solver!r}")
    zz = float(z @ z)
    return rhs / a - ((2.0 * float(z @ rhs)) / (a * (a + 2.0 * zz))) * z


def dokl_objective(theta, z, y, loss, theta_t, gamma, neighbor_thetas, rho, eta_t):
    """Objective minimised by :func:`dokl_primal`; used by tests."""
    val = losses.cost(loss, theta, z, y)
    val += 0.5 * eta_t * float((theta - theta_t) @ (theta - theta_t))
    val += float(gamma @ theta)
    for th_j in neighbor_thetas:
        c = theta - 0.5 * (theta_t + th_j)
        val += rho * float(c @ c)
    return val


def stacked_gradient(theta, z, y, loss):
    """Row-wise loss gradients for N agents, written in matrix form."""
    theta = np.asarray(theta, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    m = np.einsum("ij,ij->i", theta, z)
    if loss.kind == "squared":
        scale = 2.0 * (m - y)
    elif loss.kind == "logistic":
        scale = -y / (1.0 + np.exp(y * m))
    else:
        scale = np.where(1.0 - y * m > 0.0, -y, 0.0)
    return scale[:, None] * z + (2.0 * loss.reg) * theta


def matrix_reference_step(theta, gamma, theta_hat, z, y, topology, hyper, t,
                          variant="odkla"):
    """
    Advance all agents one round using the stacked N x 2L recursions.

    For ``variant="odkla"``::

        Theta+ = (eta I + 2 rho D)^-1 [(rho (D + W) + eta I) Theta - Gamma - grad]
        Gamma+ = Gamma + rho (D - W) Theta+

    For ``variant="qc"`` the consensus terms act on the broadcast stack::

        Theta+ = Theta - (eta I + 2 rho D)^-1 [grad + rho (D - W) Hat + Gamma]
        Hat+   = Hat + mask * Q(Theta+ - Hat)
        Gamma+ = Gamma + rho (D - W) Hat+

    where ``mask`` selects rows whose difference norm clears the censoring
    threshold.  Censoring and quantization are applied here with their own
    vectorised formulas rather than the per-agent code.

    Returns
    -------
    theta_new, gamma_new, theta_hat_new : ndarray
    """
    rho = hyper.rho
    eta_t = hyper.eta(t)
    n = topology.n
    deg = topology.degree_matrix.astype(float)
    adj = topology.adjacency.astype(float)
    lap = deg - adj
    system = eta_t * np.eye(n) + 2.0 * rho * deg
    grad = stacked_gradient(theta, z, y, hyper.loss)

    if variant == "odkla":
        rhs = (rho * (deg + adj) + eta_t * np.eye(n)) @ theta - gamma - grad
        theta_new = np.linalg.solve(system, rhs)
        gamma_new = gamma + rho * lap @ theta_new
        return theta_new, gamma_new, theta_new.copy()

    if variant != "qc":
        raise ValueError(f"unknown variant {variant!r}")
    theta_new = theta - np.linalg.solve(system, grad + rho * lap @ theta_hat + gamma)
    diff = theta_new - theta_hat
    censor, quant = hyper.censor, hyper.quantizer
    if censor is not None and censor.enabled:
        send = np.linalg.norm(diff, axis=1) >= censor.alpha * censor.beta ** t
    else:
        send = np.ones(n, dtype=bool)
    if quant is None:
        theta_hat_new = np.where(send[:, None], theta_new, theta_hat)
    else:
        lo, hi, delta = quant.lo, quant.hi, quant.delta
        k = np.floor((np.clip(diff, lo, hi - delta / 2) - lo) / delta)
        k = np.clip(k, 0, quant.levels - 1)
        theta_hat_new = np.where(send[:, None], theta_hat + (lo + (k + 0.5) * delta),
                                 theta_hat)
    gamma_new = gamma + rho * lap @ theta_hat_new
    return theta_new, gamma_new, theta_hat_new
