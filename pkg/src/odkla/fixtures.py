"""
Golden trajectories and brute-force oracles for the test suite.

A golden file stores the stacked primal and dual iterates of a small run at
a few checkpoints.  The values come from the dense matrix recursion, never
from the per-agent engine, so comparing the two is a genuine cross-check.
Each file begins with ``#`` comment lines carrying the SHA-256 of the
serialized run configuration; a mismatch marks the fixture as stale.

Regenerate with ``python3 -m odkla.fixtures tests/goldens``.
"""

from dataclasses import dataclass, field
import hashlib
from pathlib import Path
import sys
import warnings

import numpy as np

from . import losses
from .config import (CensorConfig, DataConfig, GraphConfig, HyperConfig, QuantizerConfig,
                     RFConfig, RunConfig, serialize_config)
from .errors import HashMismatch

CHECKPOINTS = (1, 10, 100)
GOLDEN_SEEDS = (3, 7)
GOLDEN_ALGORITHMS = ("odkla", "qc-odkla")


def golden_config(seed, algorithm="odkla"):
    """Small five-agent run over 100 rounds with every seed set to ``seed``."""
    quantized = algorithm == "qc-odkla"
    return RunConfig(
        algorithm=algorithm, n_agents=5, seed=seed, t_max=max(CHECKPOINTS),
        data=DataConfig(samples=5 * max(CHECKPOINTS), dim=3, seed=seed),
        graph=GraphConfig(edge_prob=0.5, seed=seed),
        rf=RFConfig(l_count=4, sigma=0.5, seed=seed),
        hyper=HyperConfig(rho=0.5, eta0=2.0),
        censor=CensorConfig(enabled=quantized, alpha=1.0, beta=0.95),
        quantizer=QuantizerConfig(enabled=quantized, bits=4, range=2.0),
    ).validate()


def config_hash(cfg):
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


@dataclass
class GoldenTrace:
    """
    Checkpointed iterates of one run.

    ``snapshots[c]`` is ``(theta, gamma)``, the (N, 2L) stacks after ``c``
    completed rounds.
    """

    config_hash: str
    algorithm: str
    snapshots: dict = field(default_factory=dict)
    stale: bool = False

    def to_csv(self, config_text=""):
        lines = [f"# config_hash={self.config_hash}", f"# algorithm={self.algorithm}"]
        lines += [f"# config {ln}" for ln in config_text.splitlines()]
        width = next(iter(self.snapshots.values()))[0].shape[1]
        lines.append(",".join(["checkpoint", "kind", "agent"]
                              + [f"v{k}" for k in range(width)]))
        for c in sorted(self.snapshots):
            for kind, stack in zip(("theta", "gamma"), self.snapshots[c]):
                for i, row in enumerate(stack):
                    lines.append(",".join([str(c), kind, str(i)]
                                          + [repr(float(v)) for v in row]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key in ("config_hash", "algorithm"):
                    meta[key] = value
            elif line.strip():
                body.append(line.split(","))
        rows = {}
        for rec in body[1:]:
            c, kind, agent = int(rec[0]), rec[1], int(rec[2])
            rows.setdefault(c, {}).setdefault(kind, {})[agent] = [float(v) for v in rec[3:]]
        snaps = {}
        for c, kinds in rows.items():
            snaps[c] = tuple(np.array([kinds[k][i] for i in sorted(kinds[k])])
                             for k in ("theta", "gamma"))
        return cls(meta.get("config_hash", ""), meta.get("algorithm", ""), snaps)


def compute_golden(cfg, checkpoints=CHECKPOINTS):
    # imported here: the orchestration layer pulls in the whole package
    from .cli import build_experiment
    from .simulation import reference_trajectory

    exp = build_experiment(cfg)
    thetas, gammas, _ = reference_trajectory(cfg.algorithm, exp.topology, exp.basis,
                                             exp.streams, exp.hyper, max(checkpoints))
    snaps = {c: (thetas[c], gammas[c]) for c in checkpoints}
    return GoldenTrace(config_hash(cfg), cfg.algorithm, snaps)


def golden_path(directory, seed, algorithm):
    return Path(directory) / f"golden_{algorithm}_seed{seed}.csv"


def regenerate_goldens(seeds=GOLDEN_SEEDS, directory="tests/goldens",
                       algorithms=GOLDEN_ALGORITHMS):
    """Write one fixture per (seed, algorithm) and return their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for seed in seeds:
        for alg in algorithms:
            cfg = golden_config(seed, alg)
            path = golden_path(directory, seed, alg)
            path.write_text(compute_golden(cfg).to_csv(serialize_config(cfg)))
            paths.append(path)
    return paths


def load_golden(path, cfg=None):
    """
    Read a fixture; when ``cfg`` is given, warn with :class:`HashMismatch`
    and flag the trace as stale if it was produced from another config.
    """
    trace = GoldenTrace.from_csv(Path(path).read_text())
    if cfg is not None and trace.config_hash != config_hash(cfg):
        trace.stale = True
        warnings.warn(HashMismatch(f"{path} is stale; regenerate the goldens"),
                      stacklevel=2)
    return trace


def brute_force_regret(trajectory, z, y, theta_star, loss):
    """Double loop over rounds and agents; returns R(T)."""
    total = 0.0
    for t in range(len(trajectory)):
        for i in range(len(trajectory[t])):
            total += losses.cost(loss, trajectory[t][i], z[t][i], y[t][i])
            total -= losses.cost(loss, theta_star, z[t][i], y[t][i])
    return total


def ridge_lstsq(z, y, lam):
    """Ridge solution as least squares on the augmented system ``[Z; sqrt(lam) I]``."""
    z = np.asarray(z, dtype=float)
    aug = np.vstack([z, np.sqrt(lam) * np.eye(z.shape[1])])
    rhs = np.concatenate([np.asarray(y, dtype=float), np.zeros(z.shape[1])])
    return np.linalg.lstsq(aug, rhs, rcond=None)[0]


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "tests/goldens"
    for p in regenerate_goldens(directory=target):
        print(p)
