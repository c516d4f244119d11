"""Network data model, hop metrics and the neighbouring-dataset relation.

A :class:`CinDescription` is a public topology (nodes, undirected edges with
nonnegative distances) plus an ordered list of sensitive elements.  Each element
sits on a *site* and carries one real value.  Sites are node ids for
node-sited elements (generators on buses) and edge ids, i.e. positions in the
edge list, for edge-sited elements (traffic on road segments).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import InputError, ParameterError, TopologyError

NODE = "node"
EDGE = "edge"


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class CinDescription:
    """An immutable network description.

    Parameters
    ----------
    n_nodes : int
        Number of nodes; node ids are ``0 .. n_nodes - 1``.
    edges : sequence of (int, int)
        Undirected edges.  Edge ``k`` is the site id ``k`` for edge-sited data.
    locations : sequence of int
        Site of each element, pairwise distinct.
    values : sequence of float
        Sensitive value of each element.
    kind : {"node", "edge"}
        Whether elements sit on nodes or on edges.
    distances : sequence of float, optional
        Public per-edge distance (defaults to 1 for every edge).
    costs : sequence of float, optional
        Public per-element marginal cost (dispatch data only).
    closed_edges : iterable of int
        Edges unusable for routing.  Only damaged networks produced by an
        attack have closed edges; hop metrics ignore them.
    require_connected : bool
        Damaged networks skip the connectivity check.
    """

    n_nodes: int
    edges: tuple
    locations: tuple
    values: np.ndarray
    kind: str = NODE
    distances: np.ndarray | None = None
    costs: np.ndarray | None = None
    closed_edges: frozenset = field(default_factory=frozenset)
    require_connected: bool = True

    def __post_init__(self):
        set_ = object.__setattr__
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise InputError(f"n_nodes must be a positive integer, got {self.n_nodes!r}", "E_BAD_FIELD")
        set_(self, "n_nodes", int(self.n_nodes))
        if self.kind not in (NODE, EDGE):
            raise InputError(f"unknown element kind {self.kind!r}", "E_BAD_FIELD")

        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen = set()
        for k, (u, v) in enumerate(edges):
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise InputError(f"edge {k} references unknown node", "E_BAD_FIELD")
            key = (min(u, v), max(u, v))
            if u == v or key in seen:
                raise InputError(f"edge {k} ({u}, {v}) is a self loop or duplicate", "E_DUP_EDGE")
            seen.add(key)
        set_(self, "edges", edges)

        if self.distances is None:
            distances = np.ones(len(edges))
        else:
            distances = np.asarray(self.distances, dtype=float)
        if distances.shape != (len(edges),):
            raise InputError("one distance per edge is required", "E_BAD_FIELD")
        if np.any(distances < 0) or not np.all(np.isfinite(distances)):
            raise InputError("edge distances must be finite and nonnegative", "E_NEG_DISTANCE")
        set_(self, "distances", _frozen(distances))

        locations = tuple(int(s) for s in self.locations)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(locations),):
            raise InputError("one value per element is required", "E_BAD_FIELD")
        n_sites = self.n_sites
        for i, s in enumerate(locations):
            if not 0 <= s < n_sites:
                raise InputError(f"element {i} sits on unknown {self.kind} {s}", "E_BAD_SITE")
        if len(set(locations)) != len(locations):
            raise InputError("element locations must be pairwise distinct", "E_DUP_SITE")
        set_(self, "locations", locations)
        set_(self, "values", _frozen(values))

        if self.costs is not None:
            costs = np.asarray(self.costs, dtype=float)
            if costs.shape != (len(locations),):
                raise InputError("one cost per element is required", "E_BAD_FIELD")
            if np.any(costs < 0):
                raise InputError("element costs must be nonnegative", "E_NEG_VALUE")
            set_(self, "costs", _frozen(costs))

        closed = frozenset(int(e) for e in self.closed_edges)
        if any(not 0 <= e < len(edges) for e in closed):
            raise InputError("closed edge id out of range", "E_BAD_FIELD")
        set_(self, "closed_edges", closed)

        if self.kind == EDGE and not edges:
            raise InputError("edge-sited data needs at least one edge", "E_BAD_FIELD")
        if self.require_connected and not self.is_connected():
            raise TopologyError("the topology graph is not connected", "E_DISCONNECTED")

    # -- structure ---------------------------------------------------------

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_elements(self):
        return len(self.locations)

    @property
    def n_sites(self):
        return self.n_nodes if self.kind == NODE else len(self.edges)

    def is_connected(self):
        if self.n_nodes == 1:
            return True
        n_comp, _ = connected_components(self._adjacency(self.edges), directed=False)
        return n_comp == 1

    def _adjacency(self, edges):
        n = self.n_nodes
        if not edges:
            return coo_matrix((n, n)).tocsr()
        u, v = np.array(edges).T
        data = np.ones(len(u))
        return coo_matrix((data, (u, v)), shape=(n, n)).tocsr()

    def _line_graph_edges(self):
        incident = [[] for _ in range(self.n_nodes)]
        for k, (u, v) in enumerate(self.edges):
            incident[u].append(k)
            incident[v].append(k)
        pairs = set()
        for ks in incident:
            for a in range(len(ks)):
                for b in range(a + 1, len(ks)):
                    pairs.add((ks[a], ks[b]))
        return sorted(pairs)

    @cached_property
    def hop_matrix(self):
        """All-pairs hop distances between sites (read-only, ``inf`` if unreachable)."""
        if self.kind == NODE:
            adj = self._adjacency(self.edges)
            n = self.n_nodes
        else:
            line = self._line_graph_edges()
            n = len(self.edges)
            if line:
                u, v = np.array(line).T
                adj = coo_matrix((np.ones(len(u)), (u, v)), shape=(n, n)).tocsr()
            else:
                adj = coo_matrix((n, n)).tocsr()
        hops = shortest_path(adj, method="D", directed=False, unweighted=True)
        hops.setflags(write=False)
        return hops

    @cached_property
    def edge_index(self):
        """Map from an unordered node pair to its edge id."""
        out = {}
        for k, (u, v) in enumerate(self.edges):
            out[(u, v)] = k
            out[(v, u)] = k
        return out

    # -- derived networks ----------------------------------------------------

    def replace(self, **changes):
        """Return a copy with some fields replaced (validation re-runs)."""
        fields = dict(
            n_nodes=self.n_nodes,
            edges=self.edges,
            locations=self.locations,
            values=self.values,
            kind=self.kind,
            distances=self.distances,
            costs=self.costs,
            closed_edges=self.closed_edges,
            require_connected=self.require_connected,
        )
        fields.update(changes)
        return CinDescription(**fields)

    def with_values(self, values):
        return self.replace(values=values)

    def with_locations(self, locations):
        return self.replace(locations=locations)

    def site_values(self):
        """Per-site value totals; unoccupied sites hold 0."""
        out = np.zeros(self.n_sites)
        out[list(self.locations)] = self.values
        return out

    def element_at(self, site):
        """Index of the element sitting on ``site``, or ``None``."""
        try:
            return self.locations.index(int(site))
        except ValueError:
            return None

    def __eq__(self, other):
        if not isinstance(other, CinDescription):
            return NotImplemented
        same_costs = (self.costs is None and other.costs is None) or (
            self.costs is not None
            and other.costs is not None
            and np.array_equal(self.costs, other.costs)
        )
        return (
            self.n_nodes == other.n_nodes
            and self.edges == other.edges
            and self.kind == other.kind
            and self.locations == other.locations
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.distances, other.distances)
            and same_costs
            and self.closed_edges == other.closed_edges
        )

    __hash__ = None


@dataclass(frozen=True)
class PrivacyParams:
    """Calibration shared by the three release phases.

    ``alpha_loc`` is in hops, ``alpha_val`` in value units and ``beta`` is a
    relative objective tolerance.
    """

    epsilon: float
    alpha_loc: float
    alpha_val: float
    beta: float
    seed: int = 0

    def __post_init__(self):
        for name in ("epsilon", "alpha_loc", "alpha_val", "beta"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError(f"seed must be an unsigned integer, got {self.seed!r}")


def _check_site(G, site):
    if int(site) != site or not 0 <= site < G.n_sites:
        raise InputError(f"unknown {G.kind} id {site!r}", "E_BAD_SITE")
    return int(site)


def hop_distance(G, i, j):
    """Minimum number of hops between sites ``i`` and ``j`` of ``G``.

    Node sites use the topology graph, edge sites its line graph.
    """
    i, j = _check_site(G, i), _check_site(G, j)
    d = G.hop_matrix[i, j]
    if not np.isfinite(d):
        raise TopologyError(f"sites {i} and {j} are not connected")
    return int(d)


def diameter(G):
    """Largest hop distance between any two sites."""
    hops = G.hop_matrix
    if not np.all(np.isfinite(hops)):
        raise TopologyError("diameter of a disconnected network is undefined")
    return int(hops.max()) if hops.size else 0


def check_adjacency(G, G2, alpha_loc, alpha_val):
    """Whether ``G`` and ``G2`` are neighbouring datasets.

    True iff exactly one element moved by at most ``alpha_loc`` hops with all
    values equal, or exactly one value changed by at most ``alpha_val`` with
    all locations equal.  Identical datasets are *not* adjacent.
    """
    if (
        G.n_nodes != G2.n_nodes
        or G.edges != G2.edges
        or G.kind != G2.kind
        or G.n_elements != G2.n_elements
    ):
        raise InputError("adjacency needs networks with the same topology and element count")
    loc_diff = [k for k, (a, b) in enumerate(zip(G.locations, G2.locations)) if a != b]
    val_diff = np.flatnonzero(G.values != G2.values)

    if len(loc_diff) == 1 and len(val_diff) == 0:
        k = loc_diff[0]
        return G.hop_matrix[G.locations[k], G2.locations[k]] <= alpha_loc
    if len(loc_diff) == 0 and len(val_diff) == 1:
        k = val_diff[0]
        return abs(G.values[k] - G2.values[k]) <= alpha_val
    return False
