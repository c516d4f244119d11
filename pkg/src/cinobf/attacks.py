"""Ranking attacks on a real network guided by (possibly released) data.

The attacker picks ``k = ceil(b% * n)`` elements and disables them.  Three
knowledge levels are simulated:

``random``
    uniform choice of ``k`` distinct elements;
``obfuscated``
    rank the *released* network and strike the same sites in the real one;
``fully-informed``
    rank the real network.

Damage is the increase of the real network's optimal objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, ParameterError
from .network import EDGE
from .problems import (
    DispatchInstance,
    dispatch_cost_with_ancillary,
    solve_dispatch,
    solve_traffic,
)

RANDOM = "random"
OBFUSCATED = "obfuscated"
FULLY_INFORMED = "fully-informed"
STRATEGIES = (RANDOM, OBFUSCATED, FULLY_INFORMED)

# A pair cut off by an attack costs this multiple of its pre-attack cost.
DISCONNECT_PENALTY = 10.0


def attack_count(budget_pct, n):
    """``ceil(budget_pct / 100 * n)`` computed exactly."""
    if not 0 < budget_pct <= 100:
        raise ParameterError(f"attack budget must lie in (0, 100], got {budget_pct!r}")
    return max(1, math.ceil(Fraction(str(budget_pct)) * n / 100))


@dataclass(frozen=True)
class AttackConfig:
    strategy: str
    budget_pct: float
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ParameterError(f"unknown strategy {self.strategy!r}")
        attack_count(self.budget_pct, 1)

    def k(self, n):
        return attack_count(self.budget_pct, n)


@dataclass(frozen=True)
class AttackOutcome:
    ids: tuple
    damaged: object
    damage: float
    unserved: float = 0.0
    disconnected_pairs: int = 0


def rank_elements(G, inst, key=None):
    """Element ids of ``G`` sorted by decreasing importance (ties by id).

    ``key="dispatch"`` ranks generators by their optimal dispatch on ``G``;
    ``key="value"`` ranks by the element value itself.  The default is
    dispatch for dispatch instances and value otherwise.
    """
    if key is None:
        key = "dispatch" if isinstance(inst, DispatchInstance) else "value"
    if key == "dispatch":
        if G.n_elements == 0:
            return []
        score = solve_dispatch(inst.rebind(G)).x
    elif key == "value":
        score = np.asarray(G.values)
    else:
        raise ParameterError(f"unknown ranking key {key!r}")
    ids = np.arange(G.n_elements)
    return [int(i) for i in np.lexsort((ids, -score))]


def apply_attack(G, ids):
    """Remove the given elements; attacked road segments are closed to traffic."""
    ids = [int(i) for i in ids]
    if len(set(ids)) != len(ids):
        raise InputError("attacked element ids must be distinct")
    if any(not 0 <= i < G.n_elements for i in ids):
        raise InputError("unknown element id in attack")
    if not ids:
        return G
    keep = [i for i in range(G.n_elements) if i not in set(ids)]
    changes = dict(
        locations=[G.locations[i] for i in keep],
        values=G.values[keep],
        costs=None if G.costs is None else G.costs[keep],
    )
    if G.kind == EDGE:
        changes["closed_edges"] = G.closed_edges | {G.locations[i] for i in ids}
        changes["require_connected"] = False
    return G.replace(**changes)


def damage(inst, G, damaged):
    """Objective increase from ``G`` to ``damaged`` (ancillary or penalty included)."""
    if isinstance(inst, DispatchInstance):
        return dispatch_cost_with_ancillary(inst.rebind(damaged)) - dispatch_cost_with_ancillary(inst.rebind(G))
    before = solve_traffic(inst.rebind(G))
    after = solve_traffic(inst.rebind(damaged))
    post = np.where(np.isfinite(after.pair_costs), after.pair_costs, DISCONNECT_PENALTY * before.pair_costs)
    return float(inst.multiplicity @ (post - before.pair_costs))


def _details(inst, damaged):
    if isinstance(inst, DispatchInstance):
        if damaged.n_elements == 0:
            return inst.demand, 0
        return solve_dispatch(inst.rebind(damaged)).unserved, 0
    sol = solve_traffic(inst.rebind(damaged))
    return 0.0, int(sum(p is None for p in sol.paths))


def choose_targets(strategy, k, G, released, inst, rng):
    """Element ids of the real network ``G`` hit by one attack."""
    if strategy == RANDOM:
        return sorted(int(i) for i in rng.choice(G.n_elements, size=k, replace=False))
    if strategy == FULLY_INFORMED:
        return rank_elements(G, inst)[:k]
    if strategy == OBFUSCATED:
        # The attacker only sees the released network and strikes sites.
        ranked = rank_elements(released, inst)[:k]
        hit = (G.element_at(released.locations[i]) for i in ranked)
        return [i for i in hit if i is not None]
    raise ParameterError(f"unknown strategy {strategy!r}")


def attack(inst, G, released, config, rng):
    k = config.k(G.n_elements)
    ids = choose_targets(config.strategy, k, G, released, inst, rng)
    damaged = apply_attack(G, ids)
    unserved, cut = _details(inst, damaged)
    return AttackOutcome(
        ids=tuple(ids),
        damaged=damaged,
        damage=damage(inst, G, damaged),
        unserved=unserved,
        disconnected_pairs=cut,
    )


def attack_suite(inst, G, released, budgets, strategies, rng):
    """Damage of every (strategy, budget) combination on one released network.

    Returns ``{strategy: {budget: damage}}``.
    """
    out = {}
    for strategy in strategies:
        out[strategy] = {}
        for b in budgets:
            out[strategy][b] = attack(inst, G, released, AttackConfig(strategy, b), rng).damage
    return out


def run_seed(seed, run):
    """Per-run seed: the base seed XOR the run index."""
    return int(seed) ^ int(run)


def run_experiment(G, released, inst, config, runs, budgets=None, strategies=STRATEGIES):
    """Repeat the attack suite ``runs`` times against a fixed released network.

    ``config`` supplies the base seed (and the budget when ``budgets`` is not
    given).  Returns an :class:`~cinobf.report.ExperimentReport`.
    """
    from .report import ExperimentReport

    if int(runs) != runs or runs < 1:
        raise ParameterError("runs must be a positive integer")
    budgets = [config.budget_pct] if budgets is None else list(budgets)
    records = []
    for r in range(int(runs)):
        seed = run_seed(config.seed, r)
        rng = np.random.default_rng(seed)
        records.append({"run": r, "seed": seed, "damages": attack_suite(inst, G, released, budgets, strategies, rng)})
    meta = {"budgets": budgets, "strategies": list(strategies), "disconnect_penalty": DISCONNECT_PENALTY}
    return ExperimentReport(meta=meta, records=records)
