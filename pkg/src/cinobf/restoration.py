"""Fidelity restoration: move noisy values to the nearest faithful network.

Both restoration modes minimise ``||v_dot - v_noisy||_2`` over a polyhedron
of value vectors, computed with Dykstra's alternating projections.

* :func:`restore_convex` keeps feasibility and the objective band only.  For
  dispatch the set ``{v : some dispatch x is feasible with cost in the band}``
  is written directly as half-spaces in ``v`` through LP duality on the
  merit-order cost.  For routing a fixed candidate path per O-D pair makes the
  band linear in ``v``.
* :func:`restore_exact_sp` additionally requires the witness paths to be
  shortest paths under the restored values.  Optimality is imposed lazily:
  whenever a re-solve finds a strictly shorter competitor, an inequality
  ``cost(candidate) <= cost(competitor)`` is added and the projection redone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, ParameterError
from .problems import (
    DispatchInstance,
    DispatchSolution,
    TrafficInstance,
    TrafficSolution,
    check_feasible,
    evaluate_objective,
    solve_dispatch,
    solve_traffic,
)

logger = logging.getLogger(__name__)

MOVE_TOL = 1e-8
MAX_SWEEPS = 100_000
MAX_ROUNDS = 1_000
RESIDUAL_TOL = 1e-6
CUT_TOL = 1e-9


@dataclass(frozen=True)
class RestorationResult:
    """Restored values with a witness solution and its faithfulness gap.

    ``iterations`` counts Dykstra sweeps for the convex mode and outer
    cutting-plane rounds for the exact shortest-path mode.
    """

    values: np.ndarray
    witness: object
    gap: float
    iterations: int
    converged: bool


def project_halfspace(point, normal, offset):
    """Euclidean projection of ``point`` onto ``{z : normal . z <= offset}``."""
    point = np.asarray(point, dtype=float)
    a = np.asarray(normal, dtype=float)
    norm2 = float(a @ a)
    if norm2 == 0.0:
        raise ParameterError("half-space normal must be nonzero")
    excess = float(a @ point) - offset
    if excess <= 0.0:
        return point.copy()
    return point - (excess / norm2) * a


def _inside(z, A, b, lower, tol):
    if lower is not None and np.any(z < lower - tol):
        return False
    return A.shape[0] == 0 or bool(np.all(A @ z <= b + tol))


MAX_POLISH_ROWS = 12
POLISH_EVERY = 500


def _kkt_point(point, S, s, A, b, lower):
    """Projection onto ``{S z = s}`` if it satisfies the full KKT conditions, else None."""
    if np.linalg.matrix_rank(S) < S.shape[0]:
        return None
    lam = np.linalg.solve(S @ S.T, S @ point - s)
    y = point - S.T @ lam
    scale = 1e-9 * max(1.0, float(np.abs(point).max()))
    if np.all(lam >= -scale) and _inside(y, A, b, lower, 1e-10):
        return y
    return None


def _polish(point, z, A, b, lower, tol=1e-6):
    """Exact projection from the constraints (nearly) tight at ``z``, or None.

    Tries the whole near-tight set first and then its subsets.  A candidate
    is accepted only if it is feasible with nonnegative multipliers, i.e. it
    satisfies the KKT conditions of the full problem and so is the exact
    nearest point.
    """
    rows, rhs = [], []
    if lower is not None:
        for i in np.flatnonzero(z <= lower + tol):
            e = np.zeros_like(z)
            e[i] = -1.0
            rows.append(e)
            rhs.append(-lower[i])
    if A.shape[0]:
        tight = np.flatnonzero(A @ z >= b - tol * np.maximum(1.0, np.abs(b)))
        rows.extend(A[tight])
        rhs.extend(b[tight])
    if not rows:
        return point.copy() if _inside(point, A, b, lower, 0.0) else None
    S, s = np.array(rows), np.array(rhs)
    y = _kkt_point(point, S, s, A, b, lower)
    if y is None and len(rows) <= MAX_POLISH_ROWS:
        for size in range(1, min(len(rows), point.size) + 1):
            for subset in combinations(range(len(rows)), size):
                y = _kkt_point(point, S[list(subset)], s[list(subset)], A, b, lower)
                if y is not None:
                    break
            if y is not None:
                break
    if y is not None and lower is not None:
        y = np.maximum(y, lower)
    return y


def dykstra(point, A, b, lower=None, tol=MOVE_TOL, max_sweeps=MAX_SWEEPS, polish=True):
    """Nearest point of ``{z : A z <= b, z >= lower}`` to ``point``.

    The bound constraints form one block projected by clipping; every row of
    ``A`` is its own half-space.  Sweeps stop once both the iterate and the
    correction terms move less than ``tol`` in a sweep.  With ``polish`` the
    iterate is also snapped to the exact projection of its active face every
    few hundred sweeps; a snap that passes the KKT check ends the run early
    (slow corners where several constraints nearly coincide).

    Returns
    -------
    z : ndarray
    sweeps : int
    converged : bool
    """
    point = np.asarray(point, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float)).reshape(-1, point.size)
    b = np.asarray(b, dtype=float).reshape(-1)
    norms = np.einsum("ij,ij->i", A, A)
    if np.any(norms == 0.0):
        raise ParameterError("half-space normal must be nonzero")
    if lower is not None:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), point.shape)
    if _inside(point, A, b, lower, 0.0):
        return point.copy(), 0, True

    z = point.copy()
    n_sets = A.shape[0] + (lower is not None)
    incr = np.zeros((n_sets, point.size))
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        z_prev, incr_prev = z.copy(), incr.copy()
        k = 0
        if lower is not None:
            y = z + incr[0]
            z = np.maximum(y, lower)
            incr[0] = y - z
            k = 1
        for i in range(A.shape[0]):
            y = z + incr[k + i]
            excess = A[i] @ y - b[i]
            z = y - (excess / norms[i]) * A[i] if excess > 0 else y
            incr[k + i] = y - z
        # A still iterate is not enough: z can pause for a sweep while the
        # correction terms keep moving, so those must settle too.
        if np.linalg.norm(z - z_prev) < tol and np.linalg.norm(incr - incr_prev) < tol:
            converged = True
            break
        if polish and sweeps % POLISH_EVERY == 0:
            exact = _polish(point, z, A, b, lower)
            if exact is not None:
                return exact, sweeps, True
    if polish:
        exact = _polish(point, z, A, b, lower)
        if exact is not None:
            z, converged = exact, True
    if lower is not None:
        z = np.maximum(z, lower)
    return z, sweeps, converged


# -- dispatch ------------------------------------------------------------------


def dispatch_halfspaces(inst, optimum, beta):
    """Half-spaces in capacity space for feasible, band-faithful dispatch.

    With sorted marginal costs the cheapest and dearest dispatch costs are
    ``max_j c_j D - sum_i (c_j - c_i)^+ v_i`` and
    ``min_j c_j D + sum_i (c_i - c_j)^+ v_i`` whenever ``sum v >= D``.
    Requiring cheapest <= upper band and dearest >= lower band gives one
    linear inequality per cost level.

    Returns ``(A, b, consistent)``; ``consistent`` is False if a
    capacity-independent inequality already fails.
    """
    c, D = inst.costs, inst.demand
    upper, lower = optimum * (1.0 + beta), optimum * (1.0 - beta)
    rows, rhs = [-np.ones(inst.n)], [-D]
    consistent = True
    for cj in np.unique(c):
        for a, r in (
            (-np.maximum(cj - c, 0.0), upper - cj * D),
            (-np.maximum(c - cj, 0.0), cj * D - lower),
        ):
            if np.any(a != 0.0):
                rows.append(a)
                rhs.append(r)
            elif r < 0.0:
                consistent = False
    if D == 0.0:
        rows, rhs = rows[1:], rhs[1:]
    return np.array(rows).reshape(-1, inst.n), np.array(rhs), consistent


def dispatch_witness(inst, values, optimum):
    """Feasible dispatch under ``values`` whose cost is as close to ``optimum`` as possible."""
    values = np.maximum(np.asarray(values, dtype=float), 0.0)
    cheap = solve_dispatch(inst.__class__(values, inst.costs, inst.demand, inst.ancillary_price))
    rev = DispatchInstance(values, inst.costs.max() - inst.costs, inst.demand, inst.ancillary_price)
    dear_x = solve_dispatch(rev).x
    lo, hi = cheap.objective, float(inst.costs @ dear_x)
    target = min(max(optimum, lo), hi)
    t = 0.0 if hi - lo <= 0.0 else (target - lo) / (hi - lo)
    x = (1.0 - t) * cheap.x + t * dear_x
    return DispatchSolution(x=x, objective=float(inst.costs @ x), unserved=cheap.unserved)


# -- routing -------------------------------------------------------------------


def _path_cost_row(inst, path):
    """``(a, c)`` such that the cost of ``path`` under values ``v`` is ``a @ v + c``."""
    inc = inst.path_incidence(path)
    return inst.gamma * (inc @ inst.edge_matrix()), float(inc @ inst.distances)


def _band_rows(inst, paths, optimum, beta):
    a = np.zeros(inst.n)
    c = 0.0
    for mult, path in zip(inst.multiplicity, paths):
        ap, cp = _path_cost_row(inst, path)
        a += mult * ap
        c += mult * cp
    upper, lower = optimum * (1.0 + beta), optimum * (1.0 - beta)
    return [(a, upper - c), (-a, c - lower)]


def _assemble(rows):
    """Split rows into proper half-spaces and a consistency flag for constant ones."""
    A, b, consistent = [], [], True
    for a, r in rows:
        if np.any(a != 0.0):
            A.append(a)
            b.append(r)
        elif r < -1e-12:
            consistent = False
    n = rows[0][0].size if rows else 0
    return np.array(A).reshape(-1, n), np.array(b), consistent


def _traffic_gap(inst, paths, values, optimum):
    weights = inst.weights(values)
    costs = np.array([float(inst.path_incidence(p) @ weights) for p in paths])
    sol = TrafficSolution(paths=tuple(paths), pair_costs=costs, objective=float(inst.multiplicity @ costs))
    return abs(evaluate_objective(inst, sol, values) - optimum) / optimum, sol


# -- public entry points -------------------------------------------------------


def _check_inputs(inst, noisy, optimum, beta):
    noisy = np.asarray(noisy, dtype=float)
    if noisy.shape != (inst.n,):
        raise InputError("one noisy value per element is required")
    if not optimum > 0:
        raise ParameterError("the reference optimum must be positive")
    if not beta > 0:
        raise ParameterError("beta must be positive")
    return noisy


def restore_convex(inst, noisy, optimum, beta, tol=MOVE_TOL, max_sweeps=MAX_SWEEPS, paths=None):
    """Project noisy values onto the feasible, band-faithful polyhedron.

    Parameters
    ----------
    inst : DispatchInstance or TrafficInstance
    noisy : array_like
        Released (noisy) element values.
    optimum : float
        Public optimum of the original network (> 0).
    beta : float
        Relative objective tolerance.
    paths : sequence, optional
        Candidate path per O-D pair (routing only).  Defaults to the shortest
        paths under the clipped noisy values.
    """
    noisy = _check_inputs(inst, noisy, optimum, beta)
    zeros = np.zeros(inst.n)
    if isinstance(inst, DispatchInstance):
        A, b, consistent = dispatch_halfspaces(inst, optimum, beta)
    else:
        if paths is None:
            paths = solve_traffic(inst, np.maximum(noisy, 0.0)).paths
        if any(p is None for p in paths):
            raise InputError("every O-D pair needs a candidate path")
        A, b, consistent = _assemble(_band_rows(inst, paths, optimum, beta))

    values, sweeps, converged = dykstra(noisy, A, b, lower=zeros, tol=tol, max_sweeps=max_sweeps)
    if isinstance(inst, DispatchInstance):
        witness = dispatch_witness(inst, values, optimum)
        gap = abs(witness.objective - optimum) / optimum
    else:
        gap, witness = _traffic_gap(inst, paths, values, optimum)
    ok = (
        consistent
        and converged
        and check_feasible(inst, witness, values, tol=RESIDUAL_TOL).feasible
        and gap <= beta + RESIDUAL_TOL
    )
    return RestorationResult(values=values, witness=witness, gap=float(gap), iterations=sweeps, converged=bool(ok))


def _lp_feasible(A, b, n):
    if A.shape[0] == 0:
        return True
    res = linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
    return res.status == 0


def _cutting_plane(inst, noisy, optimum, beta, paths, max_rounds, tol, max_sweeps):
    paths = list(paths)
    competitors = [[] for _ in paths]
    values = noisy

    def system():
        rows = _band_rows(inst, paths, optimum, beta)
        for p, qs in enumerate(competitors):
            ap, cp = _path_cost_row(inst, paths[p])
            for q in qs:
                aq, cq = _path_cost_row(inst, q)
                rows.append((ap - aq, cq - cp))
        return _assemble(rows)

    A, b, consistent = system()
    for rounds in range(1, max_rounds + 1):
        if not consistent or not _lp_feasible(A, b, inst.n):
            return None, rounds
        values, _, ok = dykstra(noisy, A, b, lower=np.zeros(inst.n), tol=tol, max_sweeps=max_sweeps)
        if not ok:
            return None, rounds
        best = solve_traffic(inst, values)
        violated = False
        for p, path in enumerate(paths):
            here = float(_path_cost_row(inst, path)[0] @ values) + _path_cost_row(inst, path)[1]
            shortcut = best.paths[p]
            if here - best.pair_costs[p] <= CUT_TOL or shortcut == path:
                continue
            if shortcut in competitors[p]:
                if here - best.pair_costs[p] <= RESIDUAL_TOL:
                    continue
                return None, rounds
            violated = True
            competitors[p].append(shortcut)
            A, b, consistent = system()
            if not (consistent and _lp_feasible(A, b, inst.n)):
                # The old candidate cannot be made optimal; try the competitor instead.
                competitors[p].remove(shortcut)
                competitors[p].append(path)
                paths[p] = shortcut
                A, b, consistent = system()
        if not violated:
            return (values, tuple(paths)), rounds
    return None, max_rounds


def restore_exact_sp(inst, noisy, optimum, beta, max_rounds=MAX_ROUNDS, tol=MOVE_TOL,
                     max_sweeps=MAX_SWEEPS, starts=None):
    """Restore routing values so that the witness paths are shortest paths.

    The loop starts from a candidate path per O-D pair, projects onto the band
    plus all optimality cuts generated so far, re-solves the routing problem
    under the projected values and adds a cut for every pair whose candidate
    is beaten by more than ``1e-9``.  When a cut empties the feasible set the
    pair switches to the competitor path.  Several public starting candidate
    sets are tried (shortest paths under the clipped noisy values and under
    the public distances alone) and the closest certified result is kept.
    """
    if not isinstance(inst, TrafficInstance):
        raise InputError("exact restoration is only available for shortest-path routing")
    noisy = _check_inputs(inst, noisy, optimum, beta)
    if starts is None:
        starts = [
            solve_traffic(inst, np.maximum(noisy, 0.0)).paths,
            solve_traffic(inst, np.zeros(inst.n)).paths,
        ]
    best, total_rounds = None, 0
    for start in starts:
        if any(p is None for p in start):
            raise InputError("every O-D pair must be connected")
        found, rounds = _cutting_plane(inst, noisy, optimum, beta, start, max_rounds, tol, max_sweeps)
        total_rounds = max(total_rounds, rounds)
        if found is None:
            continue
        dist = float(np.linalg.norm(found[0] - noisy))
        if best is None or dist < best[0] - 1e-12:
            best = (dist, found, rounds)
        if dist == 0.0:
            break

    if best is None:
        logger.info("exact restoration did not converge from any start")
        values = np.maximum(noisy, 0.0)
        gap, witness = _traffic_gap(inst, solve_traffic(inst, values).paths, values, optimum)
        return RestorationResult(values=values, witness=witness, gap=float(gap),
                                 iterations=total_rounds, converged=False)

    _, (values, paths), rounds = best
    gap, witness = _traffic_gap(inst, paths, values, optimum)
    ok = check_feasible(inst, witness, values, tol=RESIDUAL_TOL).feasible and gap <= beta + RESIDUAL_TOL
    return RestorationResult(values=values, witness=witness, gap=float(gap), iterations=rounds, converged=bool(ok))
