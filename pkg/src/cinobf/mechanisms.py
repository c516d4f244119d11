"""Location shuffling (exponential mechanism) and value noise (Laplace mechanism).

All randomness is drawn from a caller-owned generator.  Anything exposing
``laplace(loc, scale, size)`` and ``choice(a, p=...)`` like
:class:`numpy.random.Generator` works, which lets tests inject stubs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import softmax

from .errors import InputError, ParameterError

OCCUPIED = "occupied"
ALL_SITES = "all"


@dataclass(frozen=True)
class LocationPermutation:
    """New site of every element, in element order."""

    targets: tuple

    def __post_init__(self):
        if len(set(self.targets)) != len(self.targets):
            raise InputError("a location permutation must be injective")


@dataclass(frozen=True)
class NoisyValues:
    """Released values together with the realised noise (kept for audit)."""

    values: np.ndarray
    noise: np.ndarray


def laplace_noise(scale, count, rng):
    """``count`` i.i.d. zero-mean Laplace samples with scale ``scale``."""
    if not (np.isfinite(scale) and scale > 0):
        raise ParameterError(f"Laplace scale must be positive, got {scale!r}")
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")
    return np.asarray(rng.laplace(0.0, scale, int(count)), dtype=float)


def obfuscate_values(G, epsilon, alpha_val, rng):
    """Add ``Lap(alpha_val / epsilon)`` noise to every element value."""
    if not (epsilon > 0 and alpha_val > 0):
        raise ParameterError("epsilon and alpha_val must be positive")
    noise = laplace_noise(alpha_val / epsilon, G.n_elements, rng)
    return NoisyValues(values=G.values + noise, noise=noise)


def candidate_sites(G, candidates=OCCUPIED):
    if candidates == OCCUPIED:
        sites = np.array(sorted(G.locations), dtype=int)
    elif candidates == ALL_SITES:
        sites = np.arange(G.n_sites)
    else:
        raise ParameterError(f"unknown candidate set {candidates!r}")
    if sites.size == 0:
        raise InputError("no candidate sites to sample from")
    return sites


def location_distribution(G, element, epsilon, alpha_loc, candidates=OCCUPIED):
    """Sampling distribution for the new site of one element.

    Site ``s`` gets probability proportional to
    ``exp(-epsilon * hops(l_i, s) / (2 * alpha_loc))``.

    Returns
    -------
    sites : ndarray of int
    probs : ndarray of float
    """
    if not (epsilon > 0 and alpha_loc > 0):
        raise ParameterError("epsilon and alpha_loc must be positive")
    sites = candidate_sites(G, candidates)
    hops = G.hop_matrix[G.locations[element], sites]
    return sites, softmax(-epsilon * hops / (2.0 * alpha_loc))


def sample_locations(G, epsilon, alpha_loc, rng, candidates=OCCUPIED):
    """Independently draw a target site for every element (collisions allowed)."""
    if G.n_elements == 0:
        raise InputError("no candidate sites to sample from")
    raw = np.empty(G.n_elements, dtype=int)
    for i in range(G.n_elements):
        sites, probs = location_distribution(G, i, epsilon, alpha_loc, candidates)
        raw[i] = sites[int(rng.choice(len(sites), p=probs))]
    return raw


def _optimal_cost(cost, rows, cols):
    if not rows:
        return 0
    sub = cost[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub)
    return int(sub[r, c].sum())


def _assign_lexicographic(cost):
    """Min-cost assignment of every row; ties resolved in favour of lower rows.

    Rows are fixed one at a time, in order, to their cheapest column (then the
    smallest column) that still admits an optimal completion.
    """
    n_rows, n_cols = cost.shape
    rows, cols = list(range(n_rows)), list(range(n_cols))
    best = _optimal_cost(cost, rows, cols)
    choice = {}
    for r in range(n_rows):
        rest_rows = rows[1:]
        for c in sorted(cols, key=lambda c: (cost[r, c], c)):
            rest_cols = [x for x in cols if x != c]
            if cost[r, c] + _optimal_cost(cost, rest_rows, rest_cols) == best:
                choice[r] = c
                best -= cost[r, c]
                rows, cols = rest_rows, rest_cols
                break
    return [choice[r] for r in range(n_rows)]


def resolve_assignment(raw_targets, G, sites=None):
    """Repair colliding draws into an injective site assignment.

    Elements whose draw is unique keep it.  Elements sharing a draw compete,
    together with the sites nobody drew, in a minimum total hop-distance
    assignment measured from each element's draw.  The repair reads only the
    draws and the public topology.

    Parameters
    ----------
    raw_targets : sequence of int
        Draw of every element.
    G : CinDescription
        Supplies the hop metric.
    sites : sequence of int, optional
        Sites available for placement; defaults to the occupied sites of ``G``.
    """
    raw = [int(s) for s in raw_targets]
    if len(raw) != G.n_elements:
        raise InputError("one raw target per element is required")
    pool = sorted(G.locations) if sites is None else sorted(int(s) for s in sites)
    if len(pool) < len(raw):
        raise InputError("fewer available sites than elements")
    if any(s not in set(pool) for s in raw):
        raise InputError("raw target outside the available sites")

    claims = {}
    for i, s in enumerate(raw):
        claims.setdefault(s, []).append(i)
    targets = list(raw)
    conflicted = sorted(i for members in claims.values() if len(members) > 1 for i in members)
    if conflicted:
        free = sorted(s for s in pool if len(claims.get(s, ())) != 1)
        hops = G.hop_matrix
        cost = np.array([[int(hops[raw[i], s]) for s in free] for i in conflicted], dtype=np.int64)
        for i, col in zip(conflicted, _assign_lexicographic(cost)):
            targets[i] = free[col]
    return LocationPermutation(tuple(targets))


def shuffle_locations(G, epsilon, alpha_loc, rng, candidates=OCCUPIED):
    """Move every element to a new site; values travel with their element."""
    raw = sample_locations(G, epsilon, alpha_loc, rng, candidates)
    pool = candidate_sites(G, candidates)
    perm = resolve_assignment(raw, G, sites=pool)
    return G.with_locations(perm.targets)


def exact_output_distribution(G, epsilon, alpha_loc, candidates=OCCUPIED):
    """Exact distribution of the shuffled locations, by full enumeration of draws.

    Only for tiny networks (cost grows as ``n_sites ** n_elements``).
    Returns a dict mapping location tuples to probabilities.
    """
    per_element = [location_distribution(G, i, epsilon, alpha_loc, candidates) for i in range(G.n_elements)]
    pool = candidate_sites(G, candidates)
    out = {}
    for combo in itertools.product(*(range(len(s)) for s, _ in per_element)):
        prob = 1.0
        raw = []
        for (sites, probs), k in zip(per_element, combo):
            prob *= probs[k]
            raw.append(sites[k])
        key = resolve_assignment(raw, G, sites=pool).targets
        out[key] = out.get(key, 0.0) + prob
    return out
