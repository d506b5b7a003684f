"""End-to-end acceptance checks, one group per criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; the terminal summary
prints one PASS/FAIL line per criterion with the measured numbers.
"""

import itertools
import math
import time

import numpy as np
import pytest

from spectracl import bounds as bd
from spectracl import experiments as ex
from spectracl import path_lab as pl
from spectracl.degree_model import BiDegreeSequence, PartitionSpec, cl_predictor, p_max
from spectracl.graph_gen import ensemble
from spectracl.random_models import random_graph, random_sequence, random_spec
from spectracl.spectral import (
    build_p_matrix, column_sum_bounds, entrywise_power_bound_check, find_stable_exponent, rho_p,
    spectral_radius, trace_powers,
)
from spectracl.verify import fixed_sequence, t_path_violations, two_inducing_threshold

pytestmark = pytest.mark.slow


def _walk(rng, g, r):
    walk = [int(rng.integers(g.N))]
    for _ in range(r):
        nbrs = g.out_neighbors(walk[-1])
        if nbrs.size == 0:
            break
        walk.append(int(nbrs[rng.integers(nbrs.size)]))
    return tuple(walk) if len(walk) > 1 else None


def _mc(values):
    v = np.asarray(values, dtype=float)
    return v.mean(), v.std(ddof=1) / math.sqrt(v.size), v.var(ddof=1)


# 1 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(1, "spectral radius concentrates at a·b/S (N=600, target 161)")
def test_fig2_concentration(detail):
    t0 = time.perf_counter()
    seq = ex.fig2_sequence()
    res = ex.run_fig2(seq, n_trials=100, seed=0)
    elapsed = time.perf_counter() - t0
    within = res.within(0.04)
    std = float(res.ratios.std(ddof=1))
    detail(f"predictor {res.predictor:.3f}, {within}/100 within 4%, ratio std {std:.4f}, "
           f"{len(res.dominance_violations())} dominance violations, {elapsed:.1f}s")
    assert abs(res.predictor - 161) <= 1
    assert within >= 93
    assert std < 0.02
    assert not res.dominance_violations()
    assert elapsed <= 300


# 2 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(2, "trace(A^r)/N <= ρ(A)^r <= 1ᵀA^r1 on 200 small graphs")
def test_radius_sandwich(rng, detail):
    slack = 1e-8
    checks = 0
    for _ in range(200):
        g = random_graph(rng, int(rng.integers(1, 13)), density=rng.choice([0.05, 0.15, 0.3, 0.6, 0.9]))
        rho = spectral_radius(g).rho
        for r in range(1, 9):
            power = rho ** r
            lower = pl.count_cycles_exact(g, r) / g.N
            upper = pl.count_paths_exact(g, r)
            assert lower <= power * (1 + slack) + slack, (g.N, r, lower, power)
            assert power <= upper * (1 + slack) + slack, (g.N, r, power, upper)
            checks += 1
    detail(f"{checks} (graph, r) pairs")


# 3 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(3, "product formula equals distinct-edge product on every short path")
def test_path_probability_oracle(detail):
    seq = fixed_sequence(5)
    worst, compared, identities = 0.0, 0, 0
    for r in range(1, 7):
        for path in itertools.product(range(5), repeat=r + 1):
            dec = pl.decompose_path(path)
            assert dec.k0 + sum(i * c for i, c in dec.k.items()) == r
            if dec.ends_new:
                assert len(dec.interior) == r - 1 - dec.block_mass()
                identities += 1
            if dec.is_cycle or dec.ends_new:
                dev = abs(pl.path_probability(path, seq) - pl.path_probability_oracle(path, seq))
                worst = max(worst, dev)
                compared += 1
    detail(f"{compared} paths compared, max deviation {worst:.1e}, {identities} count identities")
    assert worst <= 1e-12


# 4 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(4, "Monte Carlo moments sit inside the expected-count brackets (N=50, predictor 10)")
def test_moment_brackets(detail):
    seq = BiDegreeSequence(np.full(50, 10.0), np.full(50, 10.0))
    pred, pm, S = cl_predictor(seq), p_max(seq), seq.S
    assert pred == pytest.approx(10)
    stats = {r: {"paths": [], "trace": [], "sc": []} for r in (2, 3)}
    for g in ensemble(seq, 10_000, 2024):
        A = g.dense().astype(np.int64)
        for r in (2, 3):
            Ar = np.linalg.matrix_power(A, r)
            stats[r]["paths"].append(Ar.sum())
            stats[r]["trace"].append(np.trace(Ar))
            stats[r]["sc"].append(pl.simple_cycle_count(g, r))
    notes = []
    for r in (2, 3):
        upper_paths = sum(bd.paths_upper(b, pred, pm, r) for b in seq.b)
        m_p, se_p, _ = _mc(stats[r]["paths"])
        m_t, se_t, var_t = _mc(stats[r]["trace"])
        assert bd.paths_lower_total(S, pred, r) - 3 * se_p <= m_p <= upper_paths + 3 * se_p
        assert bd.trace_lower(pred, r) - 3 * se_t <= m_t <= upper_paths + 3 * se_t
        E_trace = pl.expected_walk_count(seq, r, closed=True)
        var_bound = bd.trace_variance_upper(E_trace, pred, pm, r)
        assert var_t <= var_bound

        _, _, var_sc = _mc(stats[r]["sc"])
        E_sc = pl.expected_walk_count(seq, r, closed=True, simple=True)
        sc_bound = bd.simple_cycle_variance_upper(E_sc, pred, pm, r)
        assert var_sc <= sc_bound
        notes.append(f"r={r}: paths {m_p:.0f} in [{bd.paths_lower_total(S, pred, r):.0f}, {upper_paths:.0f}], "
                     f"trace {m_t:.1f} >= {bd.trace_lower(pred, r):.0f}, Var trace {var_t:.0f} <= {var_bound:.0f}, "
                     f"Var SC {var_sc:.0f} <= {sc_bound:.0f}")
    detail("; ".join(notes))


# 5 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(5, "exponential bound on the multinomial sum, 500 draws")
def test_expineq_draws(rng, detail):
    worst = 0.0
    for _ in range(500):
        m = int(rng.integers(2, 13))
        l = int(rng.integers(1, m))
        r = int(rng.integers(1, 13))
        alpha = float(rng.uniform(0, 1.5))
        beta = float(rng.uniform(0, 0.99))
        lhs, rhs = bd.expineq(l, m, r, alpha, beta)
        assert lhs <= rhs, (l, m, r, alpha, beta, lhs, rhs)
        worst = max(worst, lhs / rhs)
    detail(f"0 violations, largest lhs/rhs {worst:.3f}")


# 6 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(6, "block-model matrix machinery")
def test_node_matrices_sum_exactly(rng):
    # dyadic block sizes and edge totals keep every product exact in binary floating point
    spec = PartitionSpec.uniform_blocks([2, 4], np.array([[2.0, 4.0], [8.0, 1.0]]))
    Bs, As = pl.node_matrices(spec)
    total = sum(Bs[i] @ As[i] for i in range(spec.N))
    assert np.array_equal(total, build_p_matrix(spec).entries)
    for _ in range(50):
        spec = random_spec(rng, int(rng.integers(2, 10)), int(rng.integers(1, 4)), zero_prob=0.3)
        Bs, As = pl.node_matrices(spec)
        np.testing.assert_allclose(sum(Bs[i] @ As[i] for i in range(spec.N)), build_p_matrix(spec).entries,
                                   rtol=1e-12, atol=1e-15)


@pytest.mark.criterion(6, "block-model matrix machinery")
def test_matrix_expectation_matches_graph_enumeration(rng, detail):
    worst, cases = 0.0, 0
    for spec, rs in [(random_spec(rng, 3, 2), (1, 2, 3, 4)),
                     (random_spec(rng, 3, 2, zero_prob=0.3), (2, 3))]:
        for r in rs:
            oracle = pl.expected_walk_matrix_by_graphs(spec, r)  # all 512 graphs
            for i in range(3):
                for j in range(3):
                    worst = max(worst, abs(pl.partitioned_expected_paths(spec, i, j, r) - oracle[i, j]))
                    cases += 1
    for _ in range(3):
        spec = random_spec(rng, 4, 2, zero_prob=0.4)
        oracle = pl.expected_walk_matrix_by_graphs(spec, 3)
        for i in range(4):
            for j in range(4):
                worst = max(worst, abs(pl.partitioned_expected_paths(spec, i, j, 3) - oracle[i, j]))
                cases += 1
    detail(f"{cases} endpoint pairs vs exhaustive enumeration, max deviation {worst:.1e}")
    assert worst <= 1e-10


@pytest.mark.criterion(6, "block-model matrix machinery")
def test_single_group_radius_is_predictor(rng):
    seq = BiDegreeSequence([2.0, 2.0, 2.0, 2.0], [2.0, 2.0, 2.0, 2.0])
    spec = PartitionSpec.from_chung_lu(seq, np.ones(4, dtype=int), 1)
    assert rho_p(build_p_matrix(spec)) == cl_predictor(seq)
    for _ in range(20):
        seq = random_sequence(rng, int(rng.integers(2, 30)))
        spec = PartitionSpec.from_chung_lu(seq, np.ones(seq.N, dtype=int), 1)
        assert rho_p(build_p_matrix(spec)) == pytest.approx(cl_predictor(seq), rel=1e-13)


@pytest.mark.criterion(6, "block-model matrix machinery")
def test_trace_cr_monte_carlo(detail):
    spec = PartitionSpec.uniform_blocks([15, 15], np.array([[30.0, 15.0], [15.0, 30.0]]))
    r = 3
    vals = [pl.trace_cr(g, spec, r) for g in ensemble(spec, 10_000, 77)]
    mean, se, _ = _mc(vals)
    bound = bd.trace_cr_mean_lower(build_p_matrix(spec), r)
    detail(f"mean trace_cr {mean:.2f} vs lower bound {bound:.2f} (3σ = {3 * se:.2f})")
    assert mean >= bound - 3 * se


# 7 -----------------------------------------------------------------------------------------------

def _heterogeneous_blocks(rng, N: int, D) -> PartitionSpec:
    half = N // 2
    groups = np.array([1] * half + [2] * (N - half))
    a_blocks, b_blocks = {}, {}
    for x in (1, 2):
        for y in (1, 2):
            rows, cols = groups == x, groups == y
            S = D[x - 1][y - 1] * rows.sum()
            u = np.where(rows, rng.uniform(0.5, 1.5, N), 0.0)
            v = np.where(cols, rng.uniform(0.5, 1.5, N), 0.0)
            b_blocks[(x, y)] = S * u / u.sum()
            a_blocks[(x, y)] = S * v / v.sum()
    return PartitionSpec(2, groups, a_blocks, b_blocks)


@pytest.mark.criterion(7, "ρ(P) predicts ρ(A) for a two-group model")
def test_block_predictor(detail):
    rng = np.random.default_rng(7)
    D = [[6.0, 3.0], [2.0, 5.0]]
    devs = {}
    for N in (125, 250, 500):
        spec = _heterogeneous_blocks(rng, N, D)
        P = build_p_matrix(spec)
        assert np.all(P.positive_pattern_entries() >= 1)
        ratios = np.array([spectral_radius(g).rho for g in ensemble(spec, 50, N)]) / rho_p(P)
        devs[N] = (float(ratios.mean()), float(np.abs(ratios - 1).mean()))
    detail(", ".join(f"N={N}: mean ratio {m:.4f}, mean |ratio-1| {d:.4f}" for N, (m, d) in devs.items()))
    assert 0.9 <= devs[500][0] <= 1.1
    assert devs[500][1] < devs[125][1]


# 8 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(8, "SIS stopping time ordered by ρ(P) while a·b/S stays flat")
def test_sis_ordering(detail):
    t0 = time.perf_counter()
    specs = ex.fig6_specs()
    res = ex.run_sis_experiment(specs, n_trials=100, seed=0)
    elapsed = time.perf_counter() - t0
    preds = [cl_predictor(s) for s in specs]
    rhos = [rho_p(build_p_matrix(s)) for s in specs]
    med = res.medians(0.07)
    censored = sum(int(res.cell(n, 0.05).ensemble.censored.sum()) for n in range(3))
    detail(f"ρ(P) {', '.join(f'{x:.2f}' for x in rhos)}; a·b/S {', '.join(f'{x:.2f}' for x in preds)}; "
           f"β=0.07 medians {med}; β=0.05 censored {censored}/300; {elapsed:.1f}s")
    assert rhos == sorted(rhos)
    assert max(preds) / min(preds) - 1 <= 0.02
    assert med[0] < med[1] < med[2]
    assert censored == 0
    assert elapsed <= 600


# 9 -----------------------------------------------------------------------------------------------

@pytest.mark.criterion(9, "sparse-regime structure survives randomized falsification (N <= 12)")
def test_cycle_cap_and_tpath_falsification(detail):
    rng = np.random.default_rng(9)
    walks = 0
    for _ in range(150):
        N = int(rng.integers(3, 13))
        g = random_graph(rng, N, density=rng.uniform(1.0, 2.5) / N)
        if g.n_edges == 0:
            continue
        l_star = two_inducing_threshold(g, 9)
        for _ in range(100):
            walk = _walk(rng, g, int(rng.integers(1, 16)))
            if walk is None:
                continue
            edges = pl.minimal_edge_list(walk)
            t = len(pl.cycle_inducing_edges(edges))
            short = [c for c in pl.simple_cycles_in(edges, len(edges)) if len(c) < l_star / 2]
            assert len(short) <= t, (walk, l_star)
            assert not t_path_violations(walk)
            walks += 1
    L, eps = bd.cycle_edge_rarity(12, 1.0, 1.0, 2, 2.0)
    detail(f"{walks} walks, no counterexample; rarity bound at N=12 gives ε={eps:.3g} (vacuous)")


@pytest.mark.criterion(9, "sparse-regime structure survives randomized falsification (N <= 12)")
def test_cycle_block_round_trip(detail):
    rng = np.random.default_rng(10)
    admissible = 0
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(2, 8)), density=0.35)
        for r in range(1, 7):
            for walk in pl.iter_walks(g, r):
                t = len(pl.cycle_inducing_edges(pl.minimal_edge_list(walk)))
                dec = pl.cycle_block_decomposition(walk)
                if t <= 1:
                    assert dec is not None and dec.concat() == walk
                    admissible += 1
                else:
                    assert dec is None
    detail(f"{admissible} admissible walks round-trip")


# 10 ----------------------------------------------------------------------------------------------

def _matrix_with_power_at_least_one(rng, w: int):
    while True:
        n = int(rng.integers(2, 6))
        if w == 1:
            B = rng.integers(1, 4, (n, n))
        elif rng.random() < 0.5:
            B = rng.integers(0, 3, (n, n))
            B[rng.random((n, n)) < 0.3] = 0
        else:
            B = (rng.random((n, n)) < rng.uniform(0.15, 0.5)).astype(np.int64)
        if np.all(np.linalg.matrix_power(B, w) >= 1):
            return B


@pytest.mark.criterion(10, "matrix power bounds and the stable exponent")
def test_matrix_corollaries(detail):
    rng = np.random.default_rng(11)
    sandwiches = entrywise = 0
    for k in range(200):
        w = 1 if k % 2 else 2
        B = _matrix_with_power_at_least_one(rng, w)
        if w == 1:
            Bf = B * rng.uniform(1.0, 1.5, B.shape)
            assert all(column_sum_bounds(Bf, m).holds for m in range(1, 7))
            sandwiches += 6
        for u in range(4):
            for v in range(4):
                assert entrywise_power_bound_check(B, w, u, v), (B, w, u, v)
                entrywise += 1
    detail(f"{sandwiches} row-sum sandwiches, {entrywise} entrywise power checks on 200 matrices")


@pytest.mark.criterion(10, "matrix power bounds and the stable exponent")
def test_stable_exponent_certified(detail):
    rng = np.random.default_rng(12)
    counts = {}
    # a sparse 0/1 matrix whose fifth-power trace dips below its fourth
    cases = [(np.array([[0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 1, 1], [1, 1, 1, 0]]), 4, 5)]
    for _ in range(200):
        w = int(rng.integers(1, 4))
        cases.append((_matrix_with_power_at_least_one(rng, w), w, w + int(rng.integers(1, 8))))
    for B, w, r in cases:
        m = find_stable_exponent(B, w, r)
        traces = trace_powers(B, r)
        assert 0 <= m < w
        assert all(traces[q] <= traces[r - m] for q in range(r - m + 1))
        for smaller in range(m):
            assert any(traces[q] > traces[r - smaller] for q in range(r - smaller + 1))
        counts[m] = counts.get(m, 0) + 1
    detail("stable exponent distribution " + ", ".join(f"m={m}: {c}" for m, c in sorted(counts.items())))
