"""Online performance measurement: MSE, network regret, error bound, counters."""

from dataclasses import dataclass, asdict
import math

import numpy as np

from . import losses
from .errors import DegenerateRegret, UnsupportedLoss

CSV_COLUMNS = ("t", "mse_inst", "mse_running", "regret_cum", "triggers_cum",
               "bits_cum", "clip_events_cum", "error_frob", "error_bound",
               "step_time_us")


@dataclass
class MetricsRecord:
    t: int
    mse_inst: float
    mse_running: float
    regret_cum: float
    triggers_cum: int
    bits_cum: int
    clip_events_cum: int
    max_grad_norm: float
    max_theta_norm: float
    error_frob: float
    error_bound: float
    step_time_us: float = 0.0

    def as_row(self):
        return asdict(self)


def centralized_oracle(z, y, lam, loss=None):
    """
    Batch ridge solution ``argmin sum (theta.z - y)^2 + lam ||theta||^2``.

    Parameters
    ----------
    z : ndarray, shape (n, 2L)
        Mapped samples from every agent.
    y : ndarray, shape (n,)
    lam : float
    loss : LossSpec, optional
        Only the squared loss has this comparator.
    """
    if loss is not None and loss.kind != "squared":
        raise UnsupportedLoss("the batch comparator is defined for the squared loss")
    z = np.asarray(z, dtype=float).reshape(-1, np.shape(z)[-1])
    y = np.asarray(y, dtype=float).ravel()
    gram = z.T @ z
    gram[np.diag_indices_from(gram)] += lam
    return np.linalg.solve(gram, z.T @ y)


def regret_comparator(z, y, loss, rounds):
    """
    Best fixed model for the regret sum over ``rounds`` rounds.

    Every per-sample cost carries ``(lam / N) ||theta||^2``, so summed over N
    agents and ``rounds`` rounds the ridge weight is ``lam * rounds``.
    """
    return centralized_oracle(z, y, loss.lam * rounds, loss)


def streams_oracle(streams, basis, lam):
    """:func:`centralized_oracle` over every sample in ``streams``."""
    return centralized_oracle(basis.map(streams.features.reshape(-1, streams.dim)),
                              streams.labels.ravel(), lam)


def batch_objective_gradient(theta, z, y, lam):
    return 2.0 * z.T @ (z @ theta - y) + 2.0 * lam * theta


def _stacked_cost(loss, theta, z, y):
    """Cost of each row of ``theta`` (..., 2L) against matching samples."""
    m = np.einsum("...k,...k->...", theta, z)
    if loss.kind == "squared":
        data = (m - y) ** 2
    elif loss.kind == "logistic":
        data = np.logaddexp(0.0, -y * m)
    else:
        data = np.maximum(0.0, 1.0 - y * m)
    return data + loss.reg * np.einsum("...k,...k->...", theta, theta)


def regret(trajectory, z, y, theta_star, loss):
    """
    Cumulative network regret curve.

    Parameters
    ----------
    trajectory : ndarray, shape (T, N, 2L)
        ``trajectory[t, i]`` is agent i's iterate used at round t + 1.
    z : ndarray, shape (T, N, 2L)
        Mapped samples, aligned with the trajectory.
    y : ndarray, shape (T, N)
    theta_star : ndarray, shape (2L,)
    loss : LossSpec

    Returns
    -------
    ndarray, shape (T,)
        ``R(1), ..., R(T)``.
    """
    online = _stacked_cost(loss, np.asarray(trajectory), z, y).sum(axis=1)
    comp = _stacked_cost(loss, np.broadcast_to(theta_star, z.shape), z, y).sum(axis=1)
    return np.cumsum(online - comp)


class RegretAccumulator:
    """Streaming form of :func:`regret`, fed one round at a time."""

    def __init__(self, theta_star, loss):
        self.theta_star = np.asarray(theta_star, dtype=float)
        self.loss = loss
        self.total = 0.0
        self.rounds = 0

    def update(self, thetas, zs, ys):
        for theta, z, y in zip(thetas, zs, ys):
            self.total += (losses.cost(self.loss, theta, z, y)
                           - losses.cost(self.loss, self.theta_star, z, y))
        self.rounds += 1
        return self.total


def sublinearity_fit(regret_curve, t_checkpoints):
    """
    Least-squares slope of ``log R(T)`` against ``log T``.

    ``regret_curve[T - 1]`` is read at every checkpoint ``T``; a curve given
    as a mapping ``{T: R(T)}`` is also accepted.
    """
    t_checkpoints = np.asarray(t_checkpoints, dtype=float)
    if t_checkpoints.size < 4:
        raise ValueError("need at least four checkpoints")
    if isinstance(regret_curve, dict):
        values = np.array([regret_curve[int(t)] for t in t_checkpoints], dtype=float)
    else:
        curve = np.asarray(regret_curve, dtype=float)
        values = curve[t_checkpoints.astype(int) - 1]
    if np.any(values <= 0):
        raise DegenerateRegret(f"regret is non-positive at a checkpoint: {values}")
    slope, _ = np.polyfit(np.log(t_checkpoints), np.log(values), 1)
    return float(slope)


def broadcast_error_bound(n_agents, l_count, censor=None, quantizer=None):
    """
    Bound on the stacked broadcast error ``||Theta_t - Hat_t||_F``.

    ``max(sqrt(N) alpha beta, sqrt(2 N L) delta / 2)``; either term is zero
    when its mechanism is switched off.
    """
    cen = 0.0
    if censor is not None and censor.enabled:
        cen = math.sqrt(n_agents) * censor.alpha * censor.beta
    qua = 0.0
    if quantizer is not None:
        qua = math.sqrt(2 * n_agents * l_count) * quantizer.delta / 2
    return max(cen, qua)


@dataclass
class ErrorBoundReport:
    passed: bool
    bound: float
    violations: int
    exempt_rounds: int
    max_ratio: float


def error_bound_check(error_frob, n, l_count, censor=None, quantizer=None,
                 new_clip_events=None, tol=1e-9):
    """
    Check ``error_frob <= bound + tol`` on every round, where ``bound`` comes
    from :func:`broadcast_error_bound`.

    ``error_frob`` may be a scalar or one value per round.  Rounds flagged in
    ``new_clip_events`` are exempt and counted separately.
    """
    err = np.atleast_1d(np.asarray(error_frob, dtype=float))
    bound = broadcast_error_bound(n, l_count, censor, quantizer)
    if new_clip_events is None:
        exempt = np.zeros(err.shape, dtype=bool)
    else:
        exempt = np.atleast_1d(np.asarray(new_clip_events)) > 0
    bad = (err > bound + tol) & ~exempt
    ratio = float(np.max(err[~exempt]) / bound) if bound > 0 and (~exempt).any() else 0.0
    return ErrorBoundReport(not bad.any(), bound, int(bad.sum()), int(exempt.sum()),
                            ratio)
