"""Datasets: CSV input, synthetic regression targets and per-agent streams."""

from dataclasses import dataclass
import csv
import logging

import numpy as np

from .errors import EmptyDataset, ParseError, TooFewSamples
from .features import sample_basis

log = logging.getLogger(__name__)

HIDDEN_FEATURES = 100


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = None
    dropped_count: int = 0

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("features must be 2-D and labels 1-D")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("row counts of features and labels differ")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class AgentStreams:
    """
    Equal-length sample streams, one per agent.

    ``features[i, t]`` and ``labels[i, t]`` are agent i's sample at round t + 1.
    """

    features: np.ndarray
    labels: np.ndarray
    rows: np.ndarray

    @property
    def n_agents(self):
        return self.labels.shape[0]

    @property
    def length(self):
        return self.labels.shape[1]

    @property
    def dim(self):
        return self.features.shape[2]

    def truncate(self, t_max):
        t_max = min(t_max, self.length)
        return AgentStreams(self.features[:, :t_max], self.labels[:, :t_max],
                            self.rows[:, :t_max])


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=-1, delimiter=","):
    """
    Read a numeric CSV file.

    A header is assumed when the first row holds any non-numeric field.  Rows
    with unparseable or missing fields are skipped; their number is kept in
    ``Dataset.dropped_count``.

    Parameters
    ----------
    path : str or Path
    label_column : int or str
        Column index (negative counts from the end) or header name.
    delimiter : str
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if not rows:
        raise EmptyDataset(f"{path} has no rows")

    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    width = len(header) if header else len(rows[0]) if rows else 0

    if isinstance(label_column, str) and not _is_number(label_column):
        if header is None or label_column not in header:
            raise ParseError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise ParseError(f"label column {label_idx} outside {width} columns")
        label_idx %= width
    if width < 2:
        raise ParseError("need at least one feature column besides the label")

    values, dropped = [], 0
    for r in rows:
        try:
            if len(r) != width:
                raise ValueError
            values.append([float(c) for c in r])
        except ValueError:
            dropped += 1
    if dropped:
        log.warning("%s: dropped %d malformed rows", path, dropped)
    if not values:
        raise EmptyDataset(f"{path} has no parseable rows")

    arr = np.asarray(values)
    keep = [c for c in range(width) if c != label_idx]
    names = tuple(header[c] for c in keep) if header else None
    return Dataset(arr[:, keep], arr[:, label_idx], names, dropped)


def write_csv(dataset, path, label_name="y"):
    """Write features followed by the label, with a header row."""
    names = dataset.feature_names or tuple(f"x{k}" for k in range(dataset.dim))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(names) + [label_name])
        for x, y in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def normalize_minmax(dataset):
    """Rescale every feature column to [0, 1]; constant columns become 0."""
    x = dataset.features
    if len(dataset) == 0:
        raise EmptyDataset("cannot normalise an empty dataset")
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (x - lo) / safe, 0.0)
    return Dataset(out, dataset.labels.copy(), dataset.feature_names,
                   dataset.dropped_count)


def shuffle_partition(dataset, n_agents, seed):
    """
    Shuffle rows and cut them into ``n_agents`` contiguous blocks of equal size.

    The trailing ``len(dataset) % n_agents`` rows of the permutation are dropped.
    """
    total = len(dataset)
    if n_agents < 1:
        raise ValueError("n_agents must be positive")
    if total < n_agents:
        raise TooFewSamples(f"{total} samples cannot feed {n_agents} agents")
    per = total // n_agents
    perm = np.random.default_rng(seed).permutation(total)
    rows = perm[: per * n_agents].reshape(n_agents, per)
    return AgentStreams(dataset.features[rows], dataset.labels[rows], rows)


class SyntheticTarget:
    """
    Smooth random function ``f(x) = w . phi(x)`` on a hidden RF basis.

    With ``w ~ N(0, I)`` and unit-norm features, ``f(x)`` has unit variance
    over draws of ``w`` at every ``x``.
    """

    def __init__(self, dim, sigma_true, seed, n_hidden=HIDDEN_FEATURES):
        ss = np.random.SeedSequence(seed)
        basis_seed, weight_seed = ss.spawn(2)
        self.basis = sample_basis(n_hidden, dim, sigma_true, basis_seed)
        self.weights = np.random.default_rng(weight_seed).standard_normal(2 * n_hidden)

    def __call__(self, x):
        return self.basis.map(x) @ self.weights


def synthesize(n_samples, dim, sigma_true=0.5, noise_std=0.1, seed=0):
    """
    Regression data ``y = f(x) + noise`` with ``x`` uniform on ``[0, 1]^dim``.

    ``f`` is ``SyntheticTarget(dim, sigma_true, seed)``.
    """
    if n_samples < 1 or dim < 1:
        raise ValueError("n_samples and dim must be positive")
    target = SyntheticTarget(dim, sigma_true, seed)
    rng = np.random.default_rng([seed, 1])
    x = rng.random((n_samples, dim))
    y = target(x)
    if noise_std > 0:
        y = y + noise_std * rng.standard_normal(n_samples)
    return Dataset(x, y)
