"""
Online decentralized kernel learning over networks.

Agents hold private data streams, map them with a shared random Fourier
basis and reach a common model through linearized ADMM, optionally
broadcasting censored and quantized state differences.
"""

from .errors import (OdklaError, DimensionMismatch, ConnectivityFailure, CodeOutOfRange,
                     UnsupportedLoss, ParseError, EmptyDataset, TooFewSamples,
                     DegenerateRegret, ConfigError, MismatchedExperiment, HashMismatch)
from .graph import (Topology, random_connected_graph, path_graph, complete_graph,
                    incidence, metropolis_weights)
from .features import RFBasis, sample_basis, rf_map, gaussian_kernel
from .losses import LossSpec, cost, gradient, predict
from .comm import (QuantizerSpec, CensorSpec, Message, CommCounters, quantize,
                   dequantize, censor_decision, round_exchange)
from .engine import (AgentState, EtaSchedule, HyperParams, odkla_primal, odkla_dual,
                     qc_primal, qc_dual, rff_dokl_step, dokl_primal,
                     matrix_reference_step)
from .data import (Dataset, AgentStreams, load_csv, normalize_minmax,
                   shuffle_partition, synthesize)
from .metrics import (centralized_oracle, regret, RegretAccumulator, sublinearity_fit,
                      broadcast_error_bound, error_bound_check)
from .simulation import simulate, reference_trajectory, SimulationResult
from .config import RunConfig, parse_config, serialize_config, load_config

__version__ = "0.1.0"
