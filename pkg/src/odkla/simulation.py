"""
Synchronous network simulation of the four learners.

In every round each agent is first scored on its new sample with the iterate
it already holds.  Only then does it take its primal step and broadcast; the
dual step waits until every delivery of the round is in.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import comm, engine, losses
from .comm import CommCounters, TraceLog
from .engine import AgentState
from .errors import UnsupportedLoss
from .graph import metropolis_weights
from .metrics import (MetricsRecord, RegretAccumulator, broadcast_error_bound,
                      regret_comparator)

ALGORITHMS = ("odkla", "qc-odkla", "rff-dokl", "dokl")


@dataclass
class SimulationResult:
    algorithm: str
    records: list
    counters: CommCounters
    theta_star: np.ndarray = None
    agents: list = None
    # optional per-round stacks, index t-1 holds the value entering round t
    thetas: np.ndarray = None
    gammas: np.ndarray = None
    theta_hats: np.ndarray = None
    trace: TraceLog = None
    wall_time: float = 0.0

    @property
    def horizon(self):
        return len(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def final_state(self):
        return (np.stack([a.theta for a in self.agents]),
                np.stack([a.gamma for a in self.agents]),
                np.stack([a.theta_hat_self for a in self.agents]))

    def summary(self):
        last = self.records[-1]
        return {
            "algorithm": self.algorithm,
            "rounds": self.horizon,
            "final_mse_running": last.mse_running,
            "regret": last.regret_cum,
            "regret_over_sqrt_t": last.regret_cum / math.sqrt(self.horizon),
            "triggers": last.triggers_cum,
            "bits": last.bits_cum,
            "clip_events": last.clip_events_cum,
            "max_grad_norm": last.max_grad_norm,
            "max_theta_norm": last.max_theta_norm,
            "mean_step_time_us": self.wall_time / self.horizon * 1e6,
        }


@dataclass
class _Stacks:
    thetas: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    hats: list = field(default_factory=list)

    def push(self, agents):
        self.thetas.append(np.stack([a.theta for a in agents]))
        self.gammas.append(np.stack([a.gamma for a in agents]))
        self.hats.append(np.stack([a.theta_hat_self for a in agents]))


def _dokl_primals(agents, zs, ys, hyper, eta_t):
    return [engine.dokl_primal(a, zs[i], ys[i], hyper.loss,
                               a.theta_hat_neighbors.values(), hyper.rho, eta_t)
            for i, a in enumerate(agents)]


def simulate(algorithm, topology, basis, streams, hyper, t_max=None,
             theta_star=None, record_states=False, timing=True, trace=False):
    """
    Run one learner over the agent streams.

    Parameters
    ----------
    algorithm : {"odkla", "qc-odkla", "rff-dokl", "dokl"}
    topology : Topology
    basis : RFBasis
        Shared by all agents.
    streams : AgentStreams
        One stream per agent; its length bounds the number of rounds.
    hyper : HyperParams
        ``censor`` and ``quantizer`` are read by ``qc-odkla`` only.
        ``rff-dokl`` uses the step size ``1 / eta_t``.
    t_max : int, optional
        Cap on the number of rounds.
    theta_star : ndarray, optional
        Regret comparator.  For the squared loss it defaults to the fixed
        model minimising the summed per-sample costs of the simulated rounds;
        other losses report NaN.
    record_states : bool
        Keep the stacked iterates entering every round.
    timing : bool
        Measure per-round wall time (excluded from bookkeeping otherwise 0).
    trace : bool
        Keep a per-transmission trace log.

    Returns
    -------
    SimulationResult
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if algorithm == "dokl" and hyper.loss.kind != "squared":
        raise UnsupportedLoss("dokl requires the squared loss")
    if streams.n_agents != topology.n:
        raise ValueError("one stream per agent is required")
    if basis.dim != streams.dim:
        raise ValueError("basis and data dimensions differ")

    n = topology.n
    horizon = streams.length if t_max is None else min(t_max, streams.length)
    loss = hyper.loss
    n_feat = basis.n_features

    if theta_star is None and loss.kind == "squared":
        x_all = streams.features[:, :horizon].reshape(-1, streams.dim)
        theta_star = regret_comparator(basis.map(x_all),
                                       streams.labels[:, :horizon].ravel(), loss, horizon)
    regret_acc = RegretAccumulator(theta_star, loss) if theta_star is not None else None

    agents = [AgentState.zeros(i, n_feat, topology.neighbors(i)) for i in range(n)]
    counters = CommCounters()
    log = TraceLog() if trace else None
    stacks = _Stacks() if record_states else None

    quantized = algorithm == "qc-odkla"
    censor = hyper.censor if quantized else None
    quantizer = hyper.quantizer if quantized else None
    bound = broadcast_error_bound(n, basis.l_count, censor, quantizer) if quantized else 0.0
    combine = metropolis_weights(topology) if algorithm == "rff-dokl" else None

    records = []
    mse_sum = 0.0
    max_grad = max_theta = 0.0
    wall = 0.0
    clock = time.perf_counter

    for t in range(1, horizon + 1):
        if stacks is not None:
            stacks.push(agents)
        zs = basis.map(streams.features[:, t - 1])
        ys = streams.labels[:, t - 1]

        thetas = np.stack([a.theta for a in agents])
        resid = np.einsum("ij,ij->i", thetas, zs) - ys
        mse_inst = float(np.mean(resid ** 2))
        mse_sum += mse_inst
        regret_cum = regret_acc.update(thetas, zs, ys) if regret_acc else float("nan")
        max_theta = max(max_theta, float(np.sqrt((thetas ** 2).sum(axis=1)).max()))

        if algorithm == "dokl":
            # the exact step needs no gradient; it is taken for the metrics only
            grads = [losses.gradient(loss, a.theta, zs[i], ys[i])
                     for i, a in enumerate(agents)]
        start = clock() if timing else 0.0
        eta_t = hyper.eta(t)
        if algorithm != "dokl":
            grads = [losses.gradient(loss, a.theta, zs[i], ys[i])
                     for i, a in enumerate(agents)]

        if algorithm == "odkla":
            proposals = [engine.odkla_primal(a, grads[i], a.theta_hat_neighbors.values(),
                                             hyper.rho, eta_t)
                         for i, a in enumerate(agents)]
        elif algorithm == "qc-odkla":
            proposals = [engine.qc_primal(a, grads[i], hyper.rho, eta_t)
                         for i, a in enumerate(agents)]
        elif algorithm == "dokl":
            proposals = _dokl_primals(agents, zs, ys, hyper, eta_t)
        else:
            proposals = engine.rff_dokl_adapt([a.theta for a in agents], grads,
                                              1.0 / eta_t)

        comm.round_exchange(agents, proposals, topology, t, censor, quantizer,
                            counters, log)

        if algorithm == "rff-dokl":
            for i, a in enumerate(agents):
                a.theta = engine.rff_dokl_combine(i, proposals[i], combine[i],
                                                  a.theta_hat_neighbors)
        elif algorithm == "qc-odkla":
            for a, new in zip(agents, proposals):
                a.theta = new
                a.gamma = engine.qc_dual(a, hyper.rho)
        else:
            for a, new in zip(agents, proposals):
                a.theta = new
                a.gamma = engine.odkla_dual(a, new, a.theta_hat_neighbors.values(),
                                            hyper.rho)
        if timing:
            elapsed = clock() - start
            wall += elapsed
        else:
            elapsed = 0.0

        if quantized:
            err = float(np.sqrt(sum(float((a.theta - a.theta_hat_self)
                                          @ (a.theta - a.theta_hat_self))
                                    for a in agents)))
        else:
            err = 0.0
        max_grad = max(max_grad, max(float(np.sqrt(g @ g)) for g in grads))
        records.append(MetricsRecord(
            t=t, mse_inst=mse_inst, mse_running=mse_sum / t, regret_cum=regret_cum,
            triggers_cum=counters.triggers, bits_cum=counters.bits,
            clip_events_cum=counters.clip_events, max_grad_norm=max_grad,
            max_theta_norm=max_theta, error_frob=err, error_bound=bound,
            step_time_us=elapsed * 1e6))

    result = SimulationResult(algorithm, records, counters, theta_star, agents,
                              trace=log, wall_time=wall)
    if stacks is not None:
        stacks.push(agents)
        result.thetas = np.stack(stacks.thetas)
        result.gammas = np.stack(stacks.gammas)
        result.theta_hats = np.stack(stacks.hats)
    return result


def reference_trajectory(algorithm, topology, basis, streams, hyper, t_max=None):
    """
    Stacked iterates from :func:`engine.matrix_reference_step`.

    Returns arrays of shape ``(rounds + 1, n_agents, 2 * l_count)`` for theta,
    gamma and the broadcast states; index ``t - 1`` holds the values entering
    round ``t``.
    """
    variant = {"odkla": "odkla", "qc-odkla": "qc"}[algorithm]
    n, n_feat = topology.n, basis.n_features
    horizon = streams.length if t_max is None else min(t_max, streams.length)
    theta = np.zeros((n, n_feat))
    gamma = np.zeros((n, n_feat))
    hat = np.zeros((n, n_feat))
    out_t, out_g, out_h = [theta], [gamma], [hat]
    for t in range(1, horizon + 1):
        z = basis.map(streams.features[:, t - 1])
        y = streams.labels[:, t - 1]
        theta, gamma, hat = engine.matrix_reference_step(
            theta, gamma, hat, z, y, topology, hyper, t, variant)
        out_t.append(theta)
        out_g.append(gamma)
        out_h.append(hat)
    return np.stack(out_t), np.stack(out_g), np.stack(out_h)
