"""
Run configuration in a flat ``section.key=value`` text format.

Example::

    algorithm=qc-odkla
    n_agents=10
    rf.l_count=50
    censor.alpha=4
"""

from dataclasses import dataclass, field, fields, replace
import math

from .errors import ConfigError
from .simulation import ALGORITHMS
from .engine import ETA_SCHEDULES
from .losses import LOSS_KINDS


@dataclass(frozen=True)
class DataConfig:
    # "synthetic" or a CSV path
    source: str = "synthetic"
    label_column: str = "-1"
    delimiter: str = ","
    normalize: bool = True
    samples: int = 20000
    dim: int = 5
    sigma_true: float = 0.5
    noise_std: float = 0.1
    seed: int = 1


@dataclass(frozen=True)
class GraphConfig:
    edge_prob: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class RFConfig:
    l_count: int = 50
    sigma: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class LossConfig:
    kind: str = "squared"
    # "lambda" in the file
    lam: float = 1e-4


@dataclass(frozen=True)
class HyperConfig:
    rho: float = 0.03
    eta_schedule: str = "constant"
    eta0: float = 3.0


@dataclass(frozen=True)
class CensorConfig:
    enabled: bool = False
    alpha: float = 4.0
    beta: float = 0.99


@dataclass(frozen=True)
class QuantizerConfig:
    enabled: bool = False
    bits: int = 3
    range: float = 4.0


@dataclass(frozen=True)
class OutputConfig:
    path: str = "results.csv"
    timing: bool = False
    trace: str = ""


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "odkla"
    n_agents: int = 5
    seed: int = 0
    t_max: int = 0
    label: str = ""
    data: DataConfig = field(default_factory=DataConfig)
    graph: GraphConfig = field(default_factory=GraphConfig)
    rf: RFConfig = field(default_factory=RFConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    hyper: HyperConfig = field(default_factory=HyperConfig)
    censor: CensorConfig = field(default_factory=CensorConfig)
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def name(self):
        return self.label or self.algorithm

    def validate(self):
        _check(self.algorithm in ALGORITHMS, "algorithm",
               f"must be one of {', '.join(ALGORITHMS)}")
        _check(self.n_agents >= 1, "n_agents", "must be at least 1")
        _check(self.t_max >= 0, "t_max", "must be nonnegative (0 means no cap)")
        _check(0.0 <= self.graph.edge_prob <= 1.0, "graph.edge_prob", "must lie in [0, 1]")
        _check(self.rf.l_count >= 1, "rf.l_count", "must be at least 1")
        _check(self.rf.sigma > 0, "rf.sigma", "must be positive")
        _check(self.loss.kind in LOSS_KINDS, "loss.kind",
               f"must be one of {', '.join(LOSS_KINDS)}")
        _check(self.loss.lam >= 0, "loss.lambda", "must be nonnegative")
        _check(self.hyper.rho > 0, "hyper.rho", "must be positive")
        _check(self.hyper.eta_schedule in ETA_SCHEDULES, "hyper.eta_schedule",
               f"must be one of {', '.join(ETA_SCHEDULES)}")
        _check(self.hyper.eta0 > 0, "hyper.eta0", "must be positive")
        if self.data.source == "synthetic":
            _check(self.data.samples >= self.n_agents, "data.samples",
                   "must be at least n_agents")
            _check(self.data.dim >= 1, "data.dim", "must be at least 1")
            _check(self.data.sigma_true > 0, "data.sigma_true", "must be positive")
            _check(self.data.noise_std >= 0, "data.noise_std", "must be nonnegative")
        if self.censor.enabled:
            _check(self.algorithm == "qc-odkla", "censor.enabled",
                   "censoring applies to qc-odkla only")
            _check(self.censor.alpha > 0, "censor.alpha", "must be positive")
            _check(0 < self.censor.beta < 1, "censor.beta", "must lie in (0, 1)")
        if self.quantizer.enabled:
            _check(self.algorithm == "qc-odkla", "quantizer.enabled",
                   "quantization applies to qc-odkla only")
            _check(self.quantizer.bits >= 1, "quantizer.bits", "must be at least 1")
            _check(self.quantizer.range > 0, "quantizer.range", "must be positive")
        if self.algorithm == "dokl":
            _check(self.loss.kind == "squared", "loss.kind", "dokl requires the squared loss")
        return self


def _check(ok, key, message):
    if not ok:
        raise ConfigError(key, message)


_FILE_NAMES = {"lam": "lambda"}
_ATTR_NAMES = {v: k for k, v in _FILE_NAMES.items()}


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(key, raw, kind):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        return raw
    except ValueError:
        raise ConfigError(key, f"cannot read {raw!r} as {kind.__name__}") from None


def _field_types(cls):
    return {f.name: f.type for f in fields(cls)}


def parse_config(text):
    """Parse ``key=value`` lines (``#`` starts a comment) into a validated RunConfig."""
    top = {}
    sections = {}
    top_types = _field_types(RunConfig)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected key=value")
        key, raw = (p.strip() for p in line.split("=", 1))
        if "." in key:
            sec, name = key.split(".", 1)
            sec_cls = top_types.get(sec)
            if sec_cls is None or not hasattr(sec_cls, "__dataclass_fields__"):
                raise ConfigError(key, "unknown section")
            attr = _ATTR_NAMES.get(name, name)
            types = _field_types(sec_cls)
            if attr not in types:
                raise ConfigError(key, "unknown key")
            sections.setdefault(sec, {})[attr] = _convert(key, raw, types[attr])
        else:
            kind = top_types.get(key)
            if kind is None or hasattr(kind, "__dataclass_fields__"):
                raise ConfigError(key, "unknown key")
            top[key] = _convert(key, raw, kind)

    cfg = RunConfig(**top)
    for sec, values in sections.items():
        cfg = replace(cfg, **{sec: replace(getattr(cfg, sec), **values)})
    return cfg.validate()


def serialize_config(cfg):
    """Inverse of :func:`parse_config`; every key is written explicitly."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if hasattr(value, "__dataclass_fields__"):
            for g in fields(value):
                name = _FILE_NAMES.get(g.name, g.name)
                lines.append(f"{f.name}.{name}={_format(getattr(value, g.name))}")
        else:
            lines.append(f"{f.name}={_format(value)}")
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
