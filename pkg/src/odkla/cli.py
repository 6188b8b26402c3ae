"""
Experiment orchestration and the ``odkla`` command.

``odkla run --config exp.cfg`` writes one metrics CSV plus a JSON summary
next to it.  ``odkla compare`` merges several runs into one long-format
table, and ``odkla synth`` writes a synthetic regression dataset.
"""

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import comm, data, features, graph
from .config import load_config, serialize_config
from .engine import EtaSchedule, HyperParams
from .errors import ConfigError, MismatchedExperiment, OdklaError
from .losses import LossSpec
from .metrics import CSV_COLUMNS
from .simulation import simulate

log = logging.getLogger(__name__)

COMPARE_COLUMNS = ("algorithm", "t", "mse_running", "triggers_cum", "bits_cum",
                   "regret_cum", "step_time")


@dataclass
class Experiment:
    """Everything :func:`simulate` needs, built from a RunConfig."""

    topology: graph.Topology
    basis: features.RFBasis
    streams: data.AgentStreams
    hyper: HyperParams


def load_dataset(cfg):
    d = cfg.data
    if d.source == "synthetic":
        ds = data.synthesize(d.samples, d.dim, d.sigma_true, d.noise_std, d.seed)
    else:
        ds = data.load_csv(d.source, d.label_column, d.delimiter)
    return data.normalize_minmax(ds) if d.normalize else ds


def build_experiment(cfg):
    ds = load_dataset(cfg)
    streams = data.shuffle_partition(ds, cfg.n_agents, cfg.seed)
    if cfg.t_max:
        streams = streams.truncate(cfg.t_max)
    topo = graph.random_connected_graph(cfg.n_agents, cfg.graph.edge_prob, cfg.graph.seed)
    basis = features.sample_basis(cfg.rf.l_count, ds.dim, cfg.rf.sigma, cfg.rf.seed)
    censor = quant = None
    if cfg.censor.enabled:
        censor = comm.CensorSpec(cfg.censor.alpha, cfg.censor.beta)
    if cfg.quantizer.enabled:
        quant = comm.QuantizerSpec.symmetric(cfg.quantizer.bits, cfg.quantizer.range)
    hyper = HyperParams(
        rho=cfg.hyper.rho,
        eta=EtaSchedule(cfg.hyper.eta_schedule, cfg.hyper.eta0, streams.length),
        loss=LossSpec(cfg.loss.kind, cfg.loss.lam, cfg.n_agents),
        censor=censor, quantizer=quant)
    return Experiment(topo, basis, streams, hyper)


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_metrics(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = r.as_row()
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def run(cfg, out=None):
    """
    Execute one configured experiment and write its outputs.

    Returns ``(result, summary)``; the summary dictionary is also written as
    JSON to ``<out>.summary.json``.  With ``output.timing`` off (the default) the
    ``step_time_us`` column is zero so that reruns give byte-identical CSVs.
    """
    cfg.validate()
    out = Path(out or cfg.output.path)
    exp = build_experiment(cfg)
    result = simulate(cfg.algorithm, exp.topology, exp.basis, exp.streams, exp.hyper,
                      timing=cfg.output.timing, trace=bool(cfg.output.trace))
    write_metrics(result.records, out)
    if cfg.output.trace:
        Path(cfg.output.trace).write_text(result.trace.to_csv())
    summary = result.summary()
    summary["label"] = cfg.name
    summary["config"] = serialize_config(cfg)
    out.with_suffix(".summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return result, summary


def _shared(cfg):
    return (cfg.data, cfg.graph, cfg.rf, cfg.seed, cfg.n_agents, cfg.t_max)


def compare(configs, out):
    """
    Run every config and write one long-format CSV keyed by (algorithm, t).

    The configs must describe the same experiment; see ``_shared`` for the
    fields that have to agree.  Runs are executed one
    after another so their step times are measured under the same load.
    """
    if not configs:
        raise ConfigError("configs", "at least one config is required")
    ref = _shared(configs[0])
    names = ("data", "graph", "rf", "seed", "n_agents", "t_max")
    for cfg in configs[1:]:
        for name, a, b in zip(names, ref, _shared(cfg)):
            if a != b:
                raise MismatchedExperiment(name, "differs between compared configs")
    keys = [c.name for c in configs]
    if len(set(keys)) != len(keys):
        raise ConfigError("label", "compared runs need distinct algorithm or label")

    rows = []
    for cfg in configs:
        cfg.validate()
        exp = build_experiment(cfg)
        res = simulate(cfg.algorithm, exp.topology, exp.basis, exp.streams, exp.hyper,
                       timing=cfg.output.timing)
        for r in res.records:
            rows.append((cfg.name, r.t, r.mse_running, r.triggers_cum, r.bits_cum,
                         r.regret_cum, r.step_time_us))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return rows


def _parser():
    p = argparse.ArgumentParser(prog="odkla", description=__doc__.strip().splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    r = sub.add_parser("run", help="run one configured experiment")
    r.add_argument("--config", required=True)
    r.add_argument("--out")

    c = sub.add_parser("compare", help="run several configs into one table")
    c.add_argument("--configs", required=True, help="comma-separated config files")
    c.add_argument("--out", required=True)

    s = sub.add_parser("synth", help="write a synthetic regression CSV")
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sigma-true", type=float, default=0.5)
    s.add_argument("--noise-std", type=float, default=0.1)
    s.add_argument("--out", required=True)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.verb == "run":
            _, summary = run(load_config(args.config), args.out)
            print(json.dumps({k: v for k, v in summary.items() if k != "config"}))
        elif args.verb == "compare":
            cfgs = [load_config(p.strip()) for p in args.configs.split(",") if p.strip()]
            compare(cfgs, args.out)
        else:
            if args.samples < 1 or args.dim < 1:
                raise ConfigError("samples" if args.samples < 1 else "dim",
                                  "must be positive")
            ds = data.synthesize(args.samples, args.dim, args.sigma_true,
                                 args.noise_std, args.seed)
            data.write_csv(ds, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OdklaError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
