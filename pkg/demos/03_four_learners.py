"""
Four learners on one network
============================

Accuracy against communication and per-step cost.  This is the
programmatic version of ``odkla compare``.
"""

import numpy as np
from odkla.comm import CensorSpec, QuantizerSpec
from odkla.data import normalize_minmax, shuffle_partition, synthesize
from odkla.engine import EtaSchedule, HyperParams
from odkla.features import sample_basis
from odkla.graph import random_connected_graph
from odkla.losses import LossSpec
from odkla.simulation import simulate

n_agents, l_count, rounds = 5, 50, 3000
data = normalize_minmax(synthesize(n_agents * rounds, 5, seed=3))
streams = shuffle_partition(data, n_agents, seed=3)
topology = random_connected_graph(n_agents, 0.5, seed=3)
basis = sample_basis(l_count, 5, 0.5, seed=3)
loss = LossSpec("squared", 1e-4, n_agents)

runs = {
    "odkla": HyperParams(0.5, EtaSchedule("constant", 2.0), loss),
    "qc-odkla": HyperParams(0.5, EtaSchedule("constant", 2.0), loss,
                            CensorSpec(4.0, 0.99), QuantizerSpec.symmetric(8, 4.0)),
    "rff-dokl": HyperParams(0.5, EtaSchedule("constant", 2.0), loss),
    "dokl": HyperParams(0.5, EtaSchedule("constant", 2.0), loss),
}

print(f"{'algorithm':10s} {'MSE':>8s} {'regret':>9s} {'Mbit':>8s} {'us/step':>8s}")
for name, hyper in runs.items():
    s = simulate(name, topology, basis, streams, hyper).summary()
    print(f"{name:10s} {s['final_mse_running']:8.4f} {s['regret']:9.1f} "
          f"{s['bits'] / 1e6:8.2f} {s['mean_step_time_us']:8.1f}")

# running MSE at a few points of the ODKLA curve
res = simulate("odkla", topology, basis, streams, runs["odkla"], timing=False)
mse = res.column("mse_running")
print(np.round(mse[[9, 99, 999, rounds - 1]], 4))
