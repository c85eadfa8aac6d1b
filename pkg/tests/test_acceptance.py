"""Release gate: one test per acceptance criterion, each reporting a PASS/FAIL line."""

import time

import numpy as np
import pytest

from dqsimon.algorithms import phase_residual
from dqsimon.cli import bench_grid, run_bench, summarize
from dqsimon.gf2 import perp, span_ints
from dqsimon.instance import ProblemParams, all_signatures, generate, make_nodes
from dqsimon.sim import (
    RegisterLayout,
    apply_A,
    apply_A_dagger,
    apply_node_oracle,
    apply_usort,
    hadamard_u,
    inner,
    marginal,
    max_abs_diff,
    project_first_register,
    random_state,
    zero_state,
)
from dqsimon.witness import find_ds_witness

TOL = 1e-9
SEEDS_PER_POINT = 50
MASTER_SEED = 20261016


def grid_params(ns=range(3, 9), ts=(1, 2), seeds=range(3)):
    for n in ns:
        for t in ts:
            if t >= n:
                continue
            for k in range(n + 1):
                for seed in seeds:
                    yield ProblemParams(n, t, max(n - k, 1), k, seed)


def record(report, number, title, ok, detail):
    report(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def bench():
    tasks = bench_grid(range(3, 9), (1, 2), trials=SEEDS_PER_POINT, master_seed=MASTER_SEED)
    start = time.perf_counter()
    rows = run_bench(tasks, TOL)
    return rows, time.perf_counter() - start


def test_1_exactness_over_grid(bench, acceptance_report):
    rows, elapsed = bench
    failures = [r for r in rows if not r.exact_success]
    points = {(r.n, r.t, r.k) for r in rows}
    ok = not failures and elapsed < 300 and all(
        sum((r.n, r.t, r.k) == p for r in rows) >= 50 for p in points
    )
    record(
        acceptance_report,
        1,
        "eds(edsl(inst)) equals brute force",
        ok,
        f"{len(rows) - len(failures)}/{len(rows)} exact over {len(points)} grid points in {elapsed:.1f}s",
    )


def test_2_zero_bad_amplitude(bench, acceptance_report):
    rows, _ = bench
    worst = max(r.max_bad_probability for r in rows)
    record(
        acceptance_report,
        2,
        "bad mass after Q at d_l = k_l",
        worst < TOL,
        f"max probability on <Y> = {worst:.2e} over {len(rows)} runs (tol {TOL})",
    )


def test_3_good_bad_inner_products_and_phase_residual(acceptance_report):
    worst_norm, checked = 0.0, 0
    for p in grid_params():
        inst = generate(p)
        nodes = make_nodes(inst)
        psi = apply_A(zero_state(RegisterLayout.for_instance(inst)), nodes)
        basis = perp(inst.sl_basis)
        for r in range(inst.u_bits - inst.k_l + 1):
            in_y = np.zeros(1 << inst.u_bits, dtype=bool)
            in_y[span_ints(basis.ints()[:r])] = True
            good = project_first_register(psi, ~in_y)
            bad = project_first_register(psi, in_y)
            frac = 2.0 ** (r + inst.k_l + inst.t - inst.n)
            worst_norm = max(
                worst_norm,
                abs(inner(good, good) - (1 - frac)),
                abs(inner(bad, bad) - frac),
                abs(inner(good, bad)),
            )
            checked += 1
    worst_res, combos = 0.0, 0
    for n in range(2, 17):
        for t in range(1, n):
            for r in range(n - t):
                for d_l in range(n - t - r):
                    worst_res = max(worst_res, phase_residual(n, t, r, d_l))
                    combos += 1
    record(
        acceptance_report,
        3,
        "good/bad norms and phase residual",
        worst_norm < TOL and worst_res < 1e-12,
        f"norm error {worst_norm:.1e} over {checked} (instance, r); residual {worst_res:.1e} over {combos} (n,t,r,d_l)",
    )


def test_4_signature_equivalence(acceptance_report):
    failures, instances = 0, 0
    for t in (1, 2):
        for n in range(t + 1, t + 9):
            for k in range(n + 1):
                m = max(n - k, 1)
                if (1 << t) * m > 64:
                    continue
                inst = generate(ProblemParams(n, t, m, k, 1000 + n))
                sigs = all_signatures(inst)
                ids = np.unique(np.array(sigs, dtype=object), return_inverse=True)[1].reshape(-1)
                same_sig = ids[:, None] == ids[None, :]
                in_sl = np.zeros(1 << inst.u_bits, dtype=bool)
                in_sl[span_ints(inst.sl_basis.ints())] = True
                u = np.arange(1 << inst.u_bits)
                failures += int(np.count_nonzero(same_sig != in_sl[u[:, None] ^ u[None, :]]))
                instances += 1
    record(
        acceptance_report,
        4,
        "S(u) = S(v) iff u⊕v in S_l, all pairs",
        failures == 0,
        f"{failures} mismatching pairs over {instances} instances with n−t ≤ 8",
    )


def test_5_psi5_support_and_uniformity(acceptance_report):
    worst_in, worst_out, count = 0.0, 0.0, 0
    for p in grid_params():
        inst = generate(p)
        probs = marginal(apply_A(zero_state(RegisterLayout.for_instance(inst)), make_nodes(inst)))
        support = np.zeros(len(probs), dtype=bool)
        support[span_ints(perp(inst.sl_basis).ints())] = True
        target = 2.0 ** -(inst.u_bits - inst.k_l)
        worst_in = max(worst_in, float(np.max(np.abs(probs[support] - target))))
        if (~support).any():
            worst_out = max(worst_out, float(np.max(probs[~support])))
        count += 1
    record(
        acceptance_report,
        5,
        "A|0> first register uniform on S_l^⊥",
        worst_in < TOL and worst_out < 1e-12,
        f"max deviation on S_l^⊥ {worst_in:.1e}, max mass off it {worst_out:.1e}, {count} instances",
    )


def test_6_iteration_and_query_bounds(bench, acceptance_report):
    rows, _ = bench
    s = summarize(rows)
    ok = s["iterations_within_n_minus_t"] and s["queries_within_6_n_minus_t"]
    record(
        acceptance_report,
        6,
        "iterations ≤ n−t and quantum queries/node ≤ 6(n−t)",
        ok,
        f"mean iterations {s['mean_iterations']:.3f}, mean queries/node "
        f"{s['mean_quantum_queries_per_node']:.3f}, max iterations {s['max_iterations']}",
    )


def test_7_non_exact_assembly_witness(acceptance_report):
    found = find_ds_witness(max_n=6, ts=(1, 2), seeds=range(20))
    ok = found is not None and found.instance.n <= 6 and bool(found.missing)
    detail = "none found"
    if found is not None:
        p = found.instance.params
        detail = (
            f"n={p.n} t={p.t} k={p.k} seed={p.seed}, S'_l basis "
            f"{[str(v) for v in found.sl_prime]}, misses {[str(s) for s in found.missing]}"
        )
    record(acceptance_report, 7, "non-exact assembly output differs from S", ok, detail)


def test_8_unitarity_and_involutions(acceptance_report):
    worst, count = 0.0, 0
    rng = np.random.default_rng(MASTER_SEED)
    for p in grid_params(seeds=range(2)):
        inst = generate(p)
        nodes = make_nodes(inst)
        s = random_state(RegisterLayout.for_instance(inst), rng, size=24)
        checks = [
            max_abs_diff(hadamard_u(hadamard_u(s)), s),
            max_abs_diff(apply_usort(apply_usort(s)), s),
            max_abs_diff(apply_A_dagger(apply_A(s, nodes), nodes), s),
            abs(apply_A(s, nodes).norm() - 1),
            abs(hadamard_u(s).norm() - 1),
        ]
        for nd in nodes:
            checks.append(max_abs_diff(apply_node_oracle(apply_node_oracle(s, nd), nd), s))
        worst = max(worst, *checks)
        count += 1
    record(
        acceptance_report,
        8,
        "H, oracle, U_sort involutions; A†A = I; norms",
        worst < TOL,
        f"max deviation {worst:.1e} over {count} random states",
    )
