"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL line to the terminal summary (section
"acceptance criteria") before asserting, so a full run lists all ten.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import time
from functools import lru_cache
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from cinobf.attacks import FULLY_INFORMED, OBFUSCATED, RANDOM
from cinobf.benchmarks import dispatch_benchmark, traffic_benchmark, triangle_traffic
from cinobf.io import save_network
from cinobf.mechanisms import ALL_SITES, exact_output_distribution, laplace_noise
from cinobf.network import CinDescription, EDGE, PrivacyParams, check_adjacency
from cinobf.pipeline import CONVEX, EXACT_SP, PipelineConfig, run_pipeline, run_release_experiment
from cinobf.problems import DispatchInstance, TrafficInstance, check_feasible, solve_dispatch, solve_traffic
from cinobf.restoration import dispatch_halfspaces, dykstra, restore_convex, restore_exact_sp

from conftest import ACCEPTANCE_LINES

BUDGETS = (10, 20, 30)
SEEDS = range(50)


def verdict(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# -- shared experiment data ---------------------------------------------------------------


@lru_cache(maxsize=None)
def convex_restorations():
    out = []
    for seed in range(100):
        G, inst = dispatch_benchmark(seed)
        v = G.values
        noisy = v + np.random.default_rng(seed).laplace(0.0, 1.0, v.size)
        out.append((inst, v, noisy, restore_convex(inst, noisy, solve_dispatch(inst).objective, 0.1)))
    return out


@lru_cache(maxsize=None)
def exact_restorations():
    out = []
    cases = [("triangle", triangle_traffic()), ("benchmark", traffic_benchmark(0))]
    for name, (G, inst) in cases:
        opt = solve_traffic(inst).objective
        for seed in range(50):
            noisy = G.values + np.random.default_rng(seed).laplace(0.0, 1.0, G.n_elements)
            out.append((name, inst, G.values, noisy, restore_exact_sp(inst, noisy, opt, 0.1)))
    return out


@lru_cache(maxsize=None)
def per_seed_damages(problem, alpha_pct):
    """Mean-ready damage series: one pipeline run per seed on that seed's benchmark."""
    build = dispatch_benchmark if problem == "dispatch" else traffic_benchmark
    restore = CONVEX if problem == "dispatch" else EXACT_SP
    series = {s: {b: [] for b in BUDGETS} for s in (RANDOM, OBFUSCATED, FULLY_INFORMED)}
    converged = 0
    for seed in SEEDS:
        G, inst = build(seed)
        config = PipelineConfig(input_path=None, privacy=PrivacyParams(1.0, 1.0, 0.1, 0.1, seed=seed),
                                budgets=BUDGETS, runs=1, restore=restore, alpha_loc_pct=alpha_pct)
        rec = run_release_experiment(G, inst, config).records[0]
        converged += rec["converged"]
        for s in series:
            for b in BUDGETS:
                series[s][b].append(rec["damages"][s][b])
    return {s: {b: np.array(x) for b, x in d.items()} for s, d in series.items()}, converged


def mean_se(x):
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def pooled_se(a, b):
    return math.sqrt(mean_se(a)[1] ** 2 + mean_se(b)[1] ** 2)


# -- criteria --------------------------------------------------------------------------------


def test_01_laplace_calibration():
    start = time.perf_counter()
    lam = 0.1 / 1.0
    z = laplace_noise(lam, 1_000_000, np.random.default_rng(2024))
    elapsed = time.perf_counter() - start
    se = z.std() / math.sqrt(z.size)
    rel_var = abs(z.var() - 2 * lam**2) / (2 * lam**2)
    ok = abs(z.mean()) < 3 * se and rel_var < 0.02 and elapsed < 5.0
    verdict(1, "Laplace calibration", ok,
            f"|mean|={abs(z.mean()):.2e} (3SE={3 * se:.2e}), var rel err={rel_var:.4f}, {elapsed:.2f}s")


def test_02_location_epsilon_bound():
    start = time.perf_counter()
    edges = [(0, 1), (1, 2), (2, 3)]
    alpha = 1.0
    worst = {}
    for eps in (0.5, 1.0, 2.0):
        worst[eps] = 0.0
        nets = [CinDescription(4, edges, [s], [1.0]) for s in range(4)]
        for Ga in nets:
            for Gb in nets:
                if not check_adjacency(Ga, Gb, alpha, 0.0):
                    continue
                Pa = exact_output_distribution(Ga, eps, alpha, ALL_SITES)
                Pb = exact_output_distribution(Gb, eps, alpha, ALL_SITES)
                for o, p in Pa.items():
                    worst[eps] = max(worst[eps], p / Pb[o])
    elapsed = time.perf_counter() - start
    ok = all(worst[e] <= math.exp(e) + 1e-12 for e in worst) and elapsed < 1.0
    detail = ", ".join(f"eps={e}: max ratio {w:.6f} <= {math.exp(e):.6f}" for e, w in worst.items())
    verdict(2, "Location epsilon bound", ok, f"{detail}, {elapsed:.3f}s")


def test_03_convex_restoration_bound():
    start = time.perf_counter()
    runs = convex_restorations()
    elapsed = time.perf_counter() - start
    held = sum(np.linalg.norm(r.values - v) <= np.linalg.norm(noisy - v) + 1e-6 for _, v, noisy, r in runs)
    ok = held == 100 and all(r.converged for *_, r in runs) and elapsed < 60
    verdict(3, "Convex restoration distance bound", ok, f"{held}/100 within bound, {elapsed:.2f}s")


def test_04_exact_restoration_bound():
    start = time.perf_counter()
    runs = exact_restorations()
    elapsed = time.perf_counter() - start
    conv = [x for x in runs if x[-1].converged]
    held = sum(np.linalg.norm(r.values - v) <= 2 * np.linalg.norm(noisy - v) + 1e-6 for _, _, v, noisy, r in conv)
    rate = len(conv) / len(runs)
    ok = held == len(conv) and rate >= 0.95 and elapsed < 600
    verdict(4, "Exact shortest-path restoration bound", ok,
            f"{held}/{len(conv)} converged within 2x bound, convergence {rate:.0%}, {elapsed:.1f}s")


def test_05_faithfulness():
    checked, good = 0, 0
    for inst, _, _, r in convex_restorations():
        if r.converged:
            checked += 1
            good += r.gap <= 0.1 + 1e-6 and check_feasible(inst, r.witness, r.values, tol=1e-6).feasible
    for _, inst, _, _, r in exact_restorations():
        if r.converged:
            checked += 1
            good += r.gap <= 0.1 + 1e-6 and check_feasible(inst, r.witness, r.values, tol=1e-6).feasible
    verdict(5, "Faithfulness of converged restorations", good == checked and checked > 0,
            f"{good}/{checked} within beta with feasible witness")


def test_06_feasibility_before_restoration():
    G, _ = dispatch_benchmark(0)
    inst = DispatchInstance.from_network(G, 0.95 * G.values.sum())
    alpha_val = 0.2 * float(G.values.mean())
    config = PipelineConfig(input_path=None, privacy=PrivacyParams(1.0, 1.0, alpha_val, 0.1, seed=0),
                            budgets=(10,), runs=50, alpha_loc_pct=10)
    report = run_release_experiment(G, inst, config)
    before, after = report.feasibility_rate, report.restored_feasibility_rate
    ok = before <= 0.5 and after == 1.0
    verdict(6, "Feasibility before vs after restoration", ok,
            f"before restoration {before:.0%} (need <= 50%), after {after:.0%} (need 100%)")


@pytest.mark.slow
def test_07_attack_ordering():
    failures, worst = [], math.inf
    for problem in ("dispatch", "traffic"):
        for pct in (1, 10):
            d, _ = per_seed_damages(problem, pct)
            for b in BUDGETS:
                r, o, f = d[RANDOM][b], d[OBFUSCATED][b], d[FULLY_INFORMED][b]
                for lo, hi, label in ((r, o, "random<=obfuscated"), (o, f, "obfuscated<=fully-informed")):
                    slack = (hi.mean() - lo.mean()) / max(pooled_se(lo, hi), 1e-12)
                    worst = min(worst, slack)
                    if slack < -1:
                        failures.append(f"{problem} a={pct}% b={b} {label} slack={slack:.2f}SE")
    verdict(7, "Attack ordering random <= obfuscated <= fully-informed", not failures,
            f"worst slack {worst:+.2f} pooled SE" + (f"; {failures}" if failures else ""))


@pytest.mark.slow
def test_08_convergence_to_random():
    failures = []
    for problem in ("dispatch", "traffic"):
        data = {pct: per_seed_damages(problem, pct)[0] for pct in (1, 5, 10)}
        for b in BUDGETS:
            obf = {pct: data[pct][OBFUSCATED][b] for pct in data}
            if obf[10].mean() > obf[1].mean():
                failures.append(f"{problem} b={b}: obfuscated at 10% {obf[10].mean():.3f} > at 1% {obf[1].mean():.3f}")
            gaps = {pct: obf[pct].mean() - data[pct][RANDOM][b].mean() for pct in data}
            for lo, hi in ((1, 5), (5, 10)):
                se = pooled_se(obf[lo], obf[hi])
                if gaps[hi] > gaps[lo] + se:
                    failures.append(f"{problem} b={b}: gap {gaps[hi]:.3f} at {hi}% > {gaps[lo]:.3f} at {lo}% + SE")
    verdict(8, "Obfuscated damage converges to random", not failures,
            "monotone on both benchmarks, all budgets" if not failures else "; ".join(failures))


def _vertex_oracle(caps, costs, demand):
    n, best = len(caps), math.inf
    for size in range(n + 1):
        for full in combinations(range(n), size):
            base = sum(caps[i] for i in full)
            fixed = sum(costs[i] * caps[i] for i in full)
            if abs(base - demand) <= 1e-12:
                best = min(best, fixed)
            for j in set(range(n)) - set(full):
                if 0 <= demand - base <= caps[j]:
                    best = min(best, fixed + costs[j] * (demand - base))
    return best


def _paths_oracle(inst, weights):
    g = nx.Graph()
    g.add_nodes_from(range(inst.n_nodes))
    for (u, v), w in zip(inst.edges, weights):
        g.add_edge(u, v, w=w)
    out = []
    for o, d in inst.od_pairs:
        if o == d:
            out.append((0.0, (o,)))
            continue
        out.append(min((sum(g[a][b]["w"] for a, b in zip(p[:-1], p[1:])), tuple(p))
                       for p in nx.all_simple_paths(g, o, d)))
    return out


def _qp_oracle(point, A, b):
    best, best_d = None, math.inf
    m, n = A.shape
    for size in range(min(m, n) + 1):
        for S in combinations(range(m), size):
            z = point.copy()
            if size:
                As = A[list(S)]
                if np.linalg.matrix_rank(As) < size:
                    continue
                z = point - As.T @ np.linalg.solve(As @ As.T, As @ point - b[list(S)])
            if np.all(A @ z <= b + 1e-9) and np.linalg.norm(z - point) < best_d:
                best, best_d = z, np.linalg.norm(z - point)
    return best


def test_09_oracle_equivalence():
    rng = np.random.default_rng(9)
    dispatch_ok = 0
    for _ in range(500):
        n = int(rng.integers(1, 6))
        caps = rng.integers(0, 11, n).astype(float)
        costs = rng.integers(1, 6, n).astype(float)
        demand = float(rng.integers(0, int(caps.sum()) + 1))
        dispatch_ok += solve_dispatch(DispatchInstance(caps, costs, demand)).objective == _vertex_oracle(caps, costs, demand)

    traffic_ok = traffic_total = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        edges = {(i, i + 1) for i in range(n - 1)}
        for _ in range(int(rng.integers(0, n + 1))):
            u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
            edges.add((u, v))
        edges = sorted(edges)
        G = CinDescription(n, edges, range(len(edges)), rng.integers(0, 4, len(edges)).astype(float), kind=EDGE,
                           distances=rng.integers(1, 5, len(edges)).astype(float))
        pairs = [tuple(int(x) for x in rng.integers(0, n, 2)) for _ in range(3)]
        inst = TrafficInstance.from_network(G, 0.5, pairs)
        sol = solve_traffic(inst)
        for (cost, path), got, got_cost in zip(_paths_oracle(inst, inst.weights()), sol.paths, sol.pair_costs):
            traffic_total += 1
            traffic_ok += got == path and abs(got_cost - cost) <= 1e-12

    qp_ok = qp_total = 0
    for _ in range(300):
        n = int(rng.integers(2, 4))
        A = rng.integers(-3, 4, (int(rng.integers(1, 4)), n)).astype(float)
        A = A[np.any(A != 0, axis=1)]
        b = rng.uniform(-3, 3, A.shape[0])
        point = rng.uniform(-5, 5, n)
        if A.shape[0] == 0 or linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(None, None)] * n).status != 0:
            continue
        qp_total += 1
        qp_ok += np.allclose(dykstra(point, A, b)[0], _qp_oracle(point, A, b), atol=1e-6)
    for _ in range(200):
        caps = rng.uniform(1, 10, 2)
        inst = DispatchInstance(caps, np.sort(rng.uniform(1, 5, 2)), rng.uniform(0.3, 0.9) * caps.sum())
        opt = solve_dispatch(inst).objective
        noisy = caps + rng.laplace(0, 2.0, 2)
        A, b, _ = dispatch_halfspaces(inst, opt, 0.1)
        full_A, full_b = np.vstack([A, -np.eye(2)]), np.concatenate([b, np.zeros(2)])
        qp_total += 1
        qp_ok += np.allclose(restore_convex(inst, noisy, opt, 0.1).values, _qp_oracle(noisy, full_A, full_b), atol=1e-6)

    ok = dispatch_ok == 500 and traffic_ok == traffic_total and qp_ok == qp_total
    verdict(9, "Oracle equivalence", ok,
            f"dispatch {dispatch_ok}/500, routing {traffic_ok}/{traffic_total}, projection {qp_ok}/{qp_total}")


def test_10_determinism(tmp_path):
    identical = True
    for name, (G, inst), restore in (("dispatch", dispatch_benchmark(0), CONVEX), ("traffic", traffic_benchmark(0), EXACT_SP)):
        path = str(tmp_path / f"{name}.json")
        save_network(G, inst, path)
        outputs = []
        for k in range(2):
            out = tmp_path / f"{name}_{k}"
            config = PipelineConfig(input_path=path, privacy=PrivacyParams(1.0, 1.0, 0.1, 0.1, seed=7),
                                    runs=5, out_dir=str(out), restore=restore, alpha_loc_pct=10)
            run_pipeline(config)
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        identical &= outputs[0] == outputs[1]
    verdict(10, "Deterministic reports", identical, "byte-identical report files for repeated runs" if identical
            else "report files differ between runs")
