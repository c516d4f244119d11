"""Seeded synthetic benchmark networks.

``dispatch_benchmark``
    30-node connected random grid-like graph with 10 generators on distinct
    buses, capacities U(2, 10) MW, marginal costs U(1, 5) $/MWh and demand a
    fixed fraction (80 % by default) of total capacity.
``traffic_benchmark``
    20-node planar road graph (Delaunay triangulation of random points with
    the longest non-bridge edges dropped), Euclidean segment lengths, 15 O-D
    pairs and traffic volumes equal to the number of background trips routed
    through each segment.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .network import EDGE, NODE, CinDescription
from .problems import DispatchInstance, TrafficInstance, solve_traffic


def _random_connected_edges(n, extra, rng):
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    while len(edges) < n - 1 + extra:
        u, v = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        edges.add((u, v))
    return sorted(edges)


def dispatch_benchmark(seed=0, n_nodes=30, n_generators=10, demand_fraction=0.8, extra_edges=12):
    rng = np.random.default_rng(seed)
    edges = _random_connected_edges(n_nodes, extra_edges, rng)
    sites = sorted(int(s) for s in rng.choice(n_nodes, size=n_generators, replace=False))
    caps = rng.uniform(2.0, 10.0, n_generators)
    costs = rng.uniform(1.0, 5.0, n_generators)
    G = CinDescription(n_nodes=n_nodes, edges=edges, locations=sites, values=caps, kind=NODE, costs=costs)
    inst = DispatchInstance.from_network(G, demand_fraction * caps.sum())
    return G, inst


def _is_connected_without(n, edges, skip):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, (u, v) in enumerate(edges):
        if k != skip:
            parent[find(u)] = find(v)
    return len({find(x) for x in range(n)}) == 1


def _planar_edges(points, drop):
    tri = Delaunay(points)
    edges = set()
    for simplex in tri.simplices:
        for a in range(3):
            for b in range(a + 1, 3):
                u, v = sorted((int(simplex[a]), int(simplex[b])))
                edges.add((u, v))
    edges = sorted(edges)
    length = lambda e: float(np.linalg.norm(points[e[0]] - points[e[1]]))
    for e in sorted(edges, key=length, reverse=True):
        if drop == 0:
            break
        k = edges.index(e)
        if _is_connected_without(len(points), edges, k):
            edges.pop(k)
            drop -= 1
    return edges


def traffic_benchmark(seed=0, n_nodes=20, n_pairs=15, gamma=0.1, background_trips=60, drop_edges=8, scale=10.0):
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, scale, size=(n_nodes, 2))
    edges = _planar_edges(points, drop_edges)
    dist = np.array([np.linalg.norm(points[u] - points[v]) for u, v in edges])

    def random_pairs(count):
        out = []
        while len(out) < count:
            o, d = (int(x) for x in rng.choice(n_nodes, size=2, replace=False))
            out.append((o, d))
        return out

    base = CinDescription(n_nodes=n_nodes, edges=edges, distances=dist,
                          locations=range(len(edges)), values=np.zeros(len(edges)), kind=EDGE)
    trips = random_pairs(background_trips)
    routing = TrafficInstance.from_network(base, 0.0, trips)
    volume = np.zeros(len(edges))
    for path in solve_traffic(routing).paths:
        volume[routing.path_edges(path)] += 1.0
    G = base.with_values(volume)
    inst = TrafficInstance.from_network(G, gamma, random_pairs(n_pairs))
    return G, inst


def triangle_traffic(traffic=(0.0, 0.0, 0.0), gamma=1.0):
    """Triangle A-B-C (nodes 0, 1, 2) with lengths AB = BC = 1, AC = 3 and pair (A, C)."""
    G = CinDescription(n_nodes=3, edges=[(0, 1), (1, 2), (0, 2)], distances=[1.0, 1.0, 3.0],
                       locations=[0, 1, 2], values=traffic, kind=EDGE)
    return G, TrafficInstance.from_network(G, gamma, [(0, 2)])
