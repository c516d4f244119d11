"""JSON network files.

One self-describing document per instance::

    {
      "topology": {"nodes": 3,
                   "edges": [{"u": 0, "v": 1, "distance": 1.0}, ...]},
      "elements": [{"site": 0, "value": 5.0, "cost": 1.0}, ...],
      "problem":  {"kind": "dispatch", "demand": 8.0, "ancillary_price": 10.0}
    }

``problem.kind`` is ``"dispatch"`` (elements sit on nodes and need a
``cost``) or ``"traffic"`` (elements sit on edges, referenced by their
position in ``topology.edges``; the problem lists ``gamma``, ``od_pairs`` and
optionally ``multiplicity``).
"""

from __future__ import annotations

import json
import numbers

from .errors import CinError, InputError, TopologyError
from .network import EDGE, NODE, CinDescription
from .problems import ANCILLARY_PRICE, DispatchInstance, TrafficInstance

PROBLEM_KINDS = {"dispatch": NODE, "traffic": EDGE}


def _get(obj, key, where):
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object", "E_BAD_FIELD")
    if key not in obj:
        raise InputError(f"{where}.{key}: missing field", "E_MISSING_FIELD")
    return obj[key]


def _number(value, where, integer=False):
    ok = isinstance(value, numbers.Integral) if integer else isinstance(value, numbers.Real)
    if isinstance(value, bool) or not ok:
        kind = "an integer" if integer else "a number"
        raise InputError(f"{where}: expected {kind}, got {value!r}", "E_BAD_FIELD")
    return value


def _list(value, where):
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list", "E_BAD_FIELD")
    return value


def parse_network(doc):
    """Build ``(CinDescription, instance)`` from a decoded JSON document."""
    topo = _get(doc, "topology", "$")
    n = _number(_get(topo, "nodes", "topology"), "topology.nodes", integer=True)
    edges, distances = [], []
    for k, e in enumerate(_list(_get(topo, "edges", "topology"), "topology.edges")):
        where = f"topology.edges[{k}]"
        u = _number(_get(e, "u", where), f"{where}.u", integer=True)
        v = _number(_get(e, "v", where), f"{where}.v", integer=True)
        d = _number(e.get("distance", 1.0), f"{where}.distance")
        if d < 0:
            raise InputError(f"{where}.distance: negative distance {d}", "E_NEG_DISTANCE")
        edges.append((u, v))
        distances.append(d)

    problem = _get(doc, "problem", "$")
    kind = _get(problem, "kind", "problem")
    if kind not in PROBLEM_KINDS:
        raise InputError(f"problem.kind: unknown problem {kind!r}", "E_BAD_FIELD")
    site_kind = PROBLEM_KINDS[kind]

    locations, values, costs, seen = [], [], [], {}
    for i, el in enumerate(_list(_get(doc, "elements", "$"), "elements")):
        where = f"elements[{i}]"
        site = _number(_get(el, "site", where), f"{where}.site", integer=True)
        if site in seen:
            raise InputError(f"{where}.site: site {site} already used by elements[{seen[site]}]", "E_DUP_SITE")
        seen[site] = i
        locations.append(site)
        values.append(_number(_get(el, "value", where), f"{where}.value"))
        if kind == "dispatch":
            cost = _number(_get(el, "cost", where), f"{where}.cost")
            if cost < 0:
                raise InputError(f"{where}.cost: negative cost {cost}", "E_NEG_VALUE")
            costs.append(cost)

    try:
        G = CinDescription(
            n_nodes=n,
            edges=edges,
            distances=distances,
            locations=locations,
            values=values,
            kind=site_kind,
            costs=costs if kind == "dispatch" else None,
        )
    except TopologyError as exc:
        raise TopologyError(f"topology: {exc.args[0]}", exc.code) from None
    except CinError as exc:
        raise type(exc)(f"elements/topology: {exc.args[0]}", exc.code) from None

    if kind == "dispatch":
        demand = _number(_get(problem, "demand", "problem"), "problem.demand")
        price = _number(problem.get("ancillary_price", ANCILLARY_PRICE), "problem.ancillary_price")
        inst = DispatchInstance.from_network(G, demand, price)
    else:
        gamma = _number(_get(problem, "gamma", "problem"), "problem.gamma")
        pairs = []
        for k, pair in enumerate(_list(_get(problem, "od_pairs", "problem"), "problem.od_pairs")):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise InputError(f"problem.od_pairs[{k}]: expected [origin, destination]", "E_BAD_FIELD")
            pairs.append(tuple(_number(x, f"problem.od_pairs[{k}]", integer=True) for x in pair))
        mult = problem.get("multiplicity")
        if mult is not None:
            mult = [_number(m, f"problem.multiplicity[{k}]", integer=True) for k, m in enumerate(_list(mult, "problem.multiplicity"))]
        inst = TrafficInstance.from_network(G, gamma, pairs, mult)
    return G, inst


def load_network(path):
    """Read and validate a network file; raises :class:`CinError` subclasses with codes."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}", "E_JSON") from None
    return parse_network(doc)


def network_document(G, inst):
    topo = {
        "nodes": G.n_nodes,
        "edges": [{"u": u, "v": v, "distance": float(d)} for (u, v), d in zip(G.edges, G.distances)],
    }
    elements = []
    for i, (site, value) in enumerate(zip(G.locations, G.values)):
        el = {"site": site, "value": float(value)}
        if G.costs is not None:
            el["cost"] = float(G.costs[i])
        elements.append(el)
    if isinstance(inst, DispatchInstance):
        problem = {"kind": "dispatch", "demand": inst.demand, "ancillary_price": inst.ancillary_price}
    else:
        problem = {
            "kind": "traffic",
            "gamma": float(inst.gamma),
            "od_pairs": [list(p) for p in inst.od_pairs],
            "multiplicity": [int(m) if float(m).is_integer() else float(m) for m in inst.multiplicity],
        }
    return {"topology": topo, "elements": elements, "problem": problem}


def save_network(G, inst, path):
    with open(path, "w") as fh:
        json.dump(network_document(G, inst), fh, indent=2, sort_keys=True)
        fh.write("\n")
