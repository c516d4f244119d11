"""The optimisation problems run on released networks.

Two concrete problems are supported:

* copper-plate economic dispatch, where elements are generators whose value
  is their capacity (MW), solved exactly by merit order;
* multi-pair shortest-path routing, where elements are road segments whose
  value is a traffic volume and edge ``e`` costs ``d_e + gamma * t_e``.

Value vectors passed to :func:`evaluate_objective` and :func:`check_feasible`
are always indexed by element, in the order of the source network.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError
from .network import EDGE, NODE

FEAS_TOL = 1e-9
ANCILLARY_PRICE = 10.0


@dataclass(frozen=True)
class DispatchInstance:
    capacities: np.ndarray
    costs: np.ndarray
    demand: float
    ancillary_price: float = ANCILLARY_PRICE

    def __post_init__(self):
        caps = np.asarray(self.capacities, dtype=float)
        costs = np.asarray(self.costs, dtype=float)
        if caps.shape != costs.shape or caps.ndim != 1:
            raise InputError("capacities and costs must be 1-d arrays of equal length")
        if np.any(caps < 0) or np.any(costs < 0):
            raise InputError("capacities and costs must be nonnegative", "E_NEG_VALUE")
        if not (np.isfinite(self.demand) and self.demand >= 0):
            raise InputError("demand must be nonnegative", "E_BAD_FIELD")
        object.__setattr__(self, "capacities", caps)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "demand", float(self.demand))

    @property
    def n(self):
        return len(self.capacities)

    @classmethod
    def from_network(cls, G, demand, ancillary_price=ANCILLARY_PRICE):
        if G.kind != NODE:
            raise InputError("dispatch needs node-sited generators")
        if G.costs is None:
            raise InputError("dispatch needs a marginal cost per generator", "E_MISSING_FIELD")
        return cls(G.values, G.costs, demand, ancillary_price)

    def rebind(self, G):
        """Same demand and pricing on another generator set."""
        return DispatchInstance.from_network(G, self.demand, self.ancillary_price)


@dataclass(frozen=True)
class TrafficInstance:
    n_nodes: int
    edges: tuple
    distances: np.ndarray
    element_edges: tuple
    values: np.ndarray
    gamma: float
    od_pairs: tuple
    multiplicity: np.ndarray = None
    closed_edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        set_(self, "distances", np.asarray(self.distances, dtype=float))
        set_(self, "element_edges", tuple(int(e) for e in self.element_edges))
        set_(self, "values", np.asarray(self.values, dtype=float))
        set_(self, "od_pairs", tuple((int(o), int(d)) for o, d in self.od_pairs))
        if self.multiplicity is None:
            mult = np.ones(len(self.od_pairs))
        else:
            mult = np.asarray(self.multiplicity, dtype=float)
        if mult.shape != (len(self.od_pairs),) or np.any(mult < 0):
            raise InputError("one nonnegative multiplicity per O-D pair is required", "E_BAD_FIELD")
        set_(self, "multiplicity", mult)
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise InputError("gamma must be nonnegative", "E_BAD_FIELD")
        for o, d in self.od_pairs:
            if not (0 <= o < self.n_nodes and 0 <= d < self.n_nodes):
                raise InputError(f"O-D pair ({o}, {d}) references unknown node", "E_BAD_FIELD")
        set_(self, "closed_edges", frozenset(self.closed_edges))

    @classmethod
    def from_network(cls, G, gamma, od_pairs, multiplicity=None):
        if G.kind != EDGE:
            raise InputError("routing needs edge-sited traffic values")
        return cls(
            n_nodes=G.n_nodes,
            edges=G.edges,
            distances=G.distances,
            element_edges=G.locations,
            values=G.values,
            gamma=gamma,
            od_pairs=od_pairs,
            multiplicity=multiplicity,
            closed_edges=G.closed_edges,
        )

    def rebind(self, G):
        return TrafficInstance.from_network(G, self.gamma, self.od_pairs, self.multiplicity)

    @property
    def n(self):
        return len(self.element_edges)

    def edge_matrix(self):
        """Matrix ``M`` with ``M @ values`` = per-edge traffic."""
        M = np.zeros((len(self.edges), self.n))
        M[list(self.element_edges), np.arange(self.n)] = 1.0
        return M

    def edge_traffic(self, values=None):
        values = self.values if values is None else np.asarray(values, dtype=float)
        if values.shape != (self.n,):
            raise InputError("one traffic value per element is required")
        t = np.zeros(len(self.edges))
        t[list(self.element_edges)] = values
        return t

    def weights(self, values=None):
        return self.distances + self.gamma * self.edge_traffic(values)

    @cached_property
    def _edge_index(self):
        index = {}
        for k, (u, v) in enumerate(self.edges):
            index[(u, v)] = index[(v, u)] = k
        return index

    def path_edges(self, path):
        try:
            return [self._edge_index[(a, b)] for a, b in zip(path[:-1], path[1:])]
        except KeyError as exc:
            raise InputError(f"path {path} uses a non-existent edge") from exc

    def path_incidence(self, path):
        """Per-edge 0/1 indicator of ``path``."""
        out = np.zeros(len(self.edges))
        out[self.path_edges(path)] = 1.0
        return out


@dataclass(frozen=True)
class DispatchSolution:
    x: np.ndarray
    objective: float
    unserved: float = 0.0

    @property
    def feasible(self):
        return self.unserved <= 0.0


@dataclass(frozen=True)
class TrafficSolution:
    paths: tuple  # node sequence per O-D pair, None when disconnected
    pair_costs: np.ndarray
    objective: float

    @property
    def feasible(self):
        return all(p is not None for p in self.paths)


@dataclass(frozen=True)
class FeasibilityReport:
    residuals: dict
    feasible: bool

    @property
    def max_residual(self):
        vals = [np.max(r) for r in self.residuals.values() if np.size(r)]
        return float(max(vals)) if vals else 0.0


def solve_dispatch(inst):
    """Merit-order dispatch: cheapest generators first (ties by index)."""
    if inst.n == 0:
        raise InputError("dispatch needs at least one generator")
    order = np.lexsort((np.arange(inst.n), inst.costs))
    x = np.zeros(inst.n)
    remaining = inst.demand
    for i in order:
        if remaining <= 0:
            break
        x[i] = min(inst.capacities[i], remaining)
        remaining -= x[i]
    unserved = max(0.0, inst.demand - float(inst.capacities.sum()))
    return DispatchSolution(x=x, objective=float(inst.costs @ x), unserved=unserved)


def dispatch_cost_with_ancillary(inst):
    """Optimal dispatch cost plus the ancillary price of unserved load."""
    if inst.n == 0:
        return inst.ancillary_price * inst.demand
    sol = solve_dispatch(inst)
    return sol.objective + inst.ancillary_price * sol.unserved


def _adjacency(inst, weights):
    adj = [[] for _ in range(inst.n_nodes)]
    for k, (u, v) in enumerate(inst.edges):
        if k in inst.closed_edges:
            continue
        adj[u].append((v, weights[k]))
        adj[v].append((u, weights[k]))
    for nbrs in adj:
        nbrs.sort()
    return adj


def _dijkstra(adj, source):
    dist = np.full(len(adj), np.inf)
    pred = [-1] * len(adj)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _lexicographic_path(adj, origin, dest, to_dest, pred):
    """Smallest node sequence among shortest paths, walking down ``to_dest``."""
    path, seen, x = [origin], {origin}, origin
    while x != dest:
        tol = 1e-9 * max(1.0, abs(to_dest[x]))
        nxt = None
        for y, w in adj[x]:
            if y not in seen and abs(w + to_dest[y] - to_dest[x]) <= tol:
                nxt = y
                break
        if nxt is None:
            # Only reachable through zero-weight cycles; use the tree path.
            out, node = [origin], origin
            while node != dest:
                node = pred[node]
                out.append(node)
            return tuple(out)
        path.append(nxt)
        seen.add(nxt)
        x = nxt
    return tuple(path)


def solve_traffic(inst, values=None):
    """Shortest path for every O-D pair under ``d_e + gamma * t_e``.

    Ties go to the lexicographically smallest node sequence.  Pairs that are
    disconnected (after closing edges) get path ``None`` and cost ``inf``; the
    objective sums the connected pairs only.
    """
    weights = inst.weights(values)
    if np.any(weights < 0):
        raise InputError("edge weights must be nonnegative")
    adj = _adjacency(inst, weights)
    trees = {}
    paths, costs = [], []
    for o, d in inst.od_pairs:
        if d not in trees:
            trees[d] = _dijkstra(adj, d)
        to_dest, pred = trees[d]
        if not np.isfinite(to_dest[o]):
            paths.append(None)
            costs.append(np.inf)
            continue
        path = _lexicographic_path(adj, o, d, to_dest, pred)
        paths.append(path)
        costs.append(float(sum(weights[k] for k in inst.path_edges(path))))
    costs = np.array(costs)
    finite = np.isfinite(costs)
    objective = float(inst.multiplicity[finite] @ costs[finite])
    return TrafficSolution(paths=tuple(paths), pair_costs=costs, objective=objective)


def evaluate_objective(inst, sol, values):
    """Objective of a given solution under given element values (no re-solve)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (inst.n,):
        raise InputError("value vector does not match the instance")
    if isinstance(inst, DispatchInstance):
        if np.shape(sol.x) != (inst.n,):
            raise InputError("dispatch vector does not match the instance")
        return float(inst.costs @ sol.x)
    if len(sol.paths) != len(inst.od_pairs):
        raise InputError("one path per O-D pair is required")
    weights = inst.weights(values)
    total = 0.0
    for mult, path in zip(inst.multiplicity, sol.paths):
        if path is not None:
            total += mult * float(inst.path_incidence(path) @ weights)
    return total


def _path_residual(inst, path, od):
    if path is None or path[0] != od[0] or path[-1] != od[1] or len(set(path)) != len(path):
        return 1.0
    try:
        ks = inst.path_edges(path)
    except InputError:
        return 1.0
    return 1.0 if any(k in inst.closed_edges for k in ks) else 0.0


def check_feasible(inst, sol, values, tol=FEAS_TOL):
    """Constraint residuals ``g_i(x, v)`` (feasible iff all are ``<= tol``)."""
    values = np.asarray(values, dtype=float)
    if isinstance(inst, DispatchInstance):
        x = np.asarray(sol.x, dtype=float)
        imbalance = float(x.sum() - inst.demand)
        residuals = {
            "capacity": x - values,
            "nonnegative": -x,
            "balance": np.array([imbalance, -imbalance]),
        }
    else:
        residuals = {
            "path": np.array([_path_residual(inst, p, od) for p, od in zip(sol.paths, inst.od_pairs)]),
            "nonnegative": -values,
        }
    feasible = all(np.all(r <= tol) for r in residuals.values())
    return FeasibilityReport(residuals=residuals, feasible=bool(feasible))


def admits_feasible(inst, values, tol=FEAS_TOL):
    """Whether the problem has any feasible solution under ``values``."""
    values = np.asarray(values, dtype=float)
    if np.any(values < -tol):
        return False
    if isinstance(inst, DispatchInstance):
        return float(values.sum()) >= inst.demand - tol
    sol = solve_traffic(inst, np.maximum(values, 0.0))
    return sol.feasible
