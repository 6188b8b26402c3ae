"""
Communication graph and its matrix representations.

Graphs are undirected and must be connected.  Arcs of the incidence
matrices are ordered lexicographically by edge, with the (i, j) orientation
first and (j, i) second, so that every matrix built here is reproducible.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConnectivityFailure

MAX_RESAMPLES = 1000


@dataclass(frozen=True)
class Topology:
    """
    Undirected connected graph over ``n`` agents.

    Parameters
    ----------
    n : int
        Number of agents.
    edges : tuple of (int, int)
        Unordered edges stored as ``(i, j)`` with ``i < j``, sorted.
    """

    n: int
    edges: tuple
    neighbor_lists: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a topology needs at least one agent")
        normalized = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at agent {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            normalized.add((min(i, j), max(i, j)))
        edges = tuple(sorted(normalized))
        object.__setattr__(self, "edges", edges)

        nbrs = [[] for _ in range(self.n)]
        for i, j in edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "neighbor_lists",
                           tuple(tuple(sorted(a)) for a in nbrs))

        if not self.is_connected():
            raise ConnectivityFailure("topology is not connected")

    @property
    def degrees(self):
        return tuple(len(a) for a in self.neighbor_lists)

    @property
    def n_edges(self):
        return len(self.edges)

    def neighbors(self, i):
        return self.neighbor_lists[i]

    def is_connected(self):
        if self.n == 1:
            return True
        a = self._sparse_adjacency()
        n_comp, _ = connected_components(a, directed=False)
        return n_comp == 1

    def _sparse_adjacency(self):
        if not self.edges:
            return coo_matrix((self.n, self.n))
        e = np.asarray(self.edges)
        data = np.ones(len(e))
        return coo_matrix((data, (e[:, 0], e[:, 1])), shape=(self.n, self.n))

    @cached_property
    def degree_matrix(self):
        return np.diag(np.asarray(self.degrees, dtype=np.int64))

    @cached_property
    def adjacency(self):
        w = np.zeros((self.n, self.n), dtype=np.int64)
        for i, j in self.edges:
            w[i, j] = w[j, i] = 1
        return w

    @cached_property
    def laplacian(self):
        return self.degree_matrix - self.adjacency

    def to_edge_list(self):
        """Edge-list text, one ``"i j"`` pair per line."""
        return "".join(f"{i} {j}\n" for i, j in self.edges)

    @classmethod
    def from_edge_list(cls, n, text):
        edges = []
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                i, j = line.split()
                edges.append((int(i), int(j)))
        return cls(n, tuple(edges))


def path_graph(n):
    return Topology(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n):
    return Topology(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def random_connected_graph(n, edge_prob, seed, max_resamples=MAX_RESAMPLES):
    """
    Draw an Erdos-Renyi graph G(n, p), resampling until it is connected.

    Attempt ``k`` uses the generator seeded with ``(seed, k)``, so the result
    depends only on the arguments.

    Raises
    ------
    ConnectivityFailure
        If no connected graph is found within ``max_resamples`` draws.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    if n == 1:
        return Topology(1, ())

    iu, ju = np.triu_indices(n, k=1)
    for attempt in range(max_resamples):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(iu.size) < edge_prob
        edges = tuple(zip(iu[keep].tolist(), ju[keep].tolist()))
        try:
            return Topology(n, edges)
        except ConnectivityFailure:
            continue
    raise ConnectivityFailure(
        f"no connected G({n}, {edge_prob}) after {max_resamples} draws; "
        "edge_prob is too low for this n")


@dataclass(frozen=True)
class IncidencePair:
    """Unsigned and signed incidence matrices, both N x 2r integer arrays."""

    s_plus: np.ndarray
    s_minus: np.ndarray


def incidence(topology):
    """
    Build the unsigned and signed incidence matrices of ``topology``.

    Column ``2k`` is the arc (i, j) of the k-th edge and column ``2k + 1`` the
    reverse arc.  With this layout ``D + W = S+ S+^T / 2`` and
    ``D - W = S- S-^T / 2`` hold exactly.
    """
    n, r = topology.n, topology.n_edges
    s_plus = np.zeros((n, 2 * r), dtype=np.int64)
    s_minus = np.zeros((n, 2 * r), dtype=np.int64)
    for k, (i, j) in enumerate(topology.edges):
        for col, (a, b) in ((2 * k, (i, j)), (2 * k + 1, (j, i))):
            s_plus[a, col] = s_plus[b, col] = 1
            s_minus[a, col] = 1
            s_minus[b, col] = -1
    return IncidencePair(s_plus, s_minus)


def metropolis_weights(topology):
    """
    Metropolis-Hastings combination matrix.

    Off-diagonal entries are ``1 / (1 + max(d_i, d_j))`` on edges; the diagonal
    takes whatever is left so every row sums to one.
    """
    n = topology.n
    deg = topology.degrees
    w = np.zeros((n, n))
    for i, j in topology.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    w[np.diag_indices(n)] = 1.0 - w.sum(axis=1)
    return w
