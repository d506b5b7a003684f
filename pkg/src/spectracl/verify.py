"""Property suites behind ``spectracl verify``.

``INVARIANTS`` lists the checked property of every module.  Each entry must
have a registered suite; ``check_coverage`` runs at import time, so a missing
suite stops the package from loading the verify command at all.
"""

from __future__ import annotations

import itertools
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import stats

from . import bounds as bd
from . import path_lab as pl
from .degree_model import BiDegreeSequence, PartitionSpec, cl_predictor, edge_probability, p_max
from .graph_gen import DirectedGraph, RngSeed, ensemble, sample
from .random_models import random_graph, random_sequence, random_spec
from .sis import SISConfig, sis_ensemble, sis_run, sis_step
from .spectral import build_p_matrix, spectral_radius

INVARIANTS: dict[str, tuple[str, ...]] = {
    "degree_model": ("edge_probability_range", "marginal_sums", "single_group_reduction"),
    "graph_gen": ("edge_frequency", "seed_determinism", "block_support"),
    "spectral": ("radius_sandwich", "shifted_eigen_oracle", "node_matrix_sum"),
    "path_lab": ("count_identity", "probability_oracle", "exact_counts", "short_cycle_cap",
                 "m_list_identity", "node_matrix_sum"),
    "bounds": ("regime_reporting", "desk_sandwich", "expineq", "alpha_products", "tpath_bound"),
    "sis": ("absorbing_state", "monotone_coupling", "log_growth"),
    "cli_harness": ("csv_reproducible", "coverage_lock"),
}

SuiteFn = Callable[[int], tuple[bool, str]]
_REGISTRY: dict[tuple[str, str], SuiteFn] = {}


class CoverageError(RuntimeError):
    pass


def suite(*modules: str, name: str):
    def wrap(fn: SuiteFn) -> SuiteFn:
        for m in modules:
            _REGISTRY[(m, name)] = fn
        return fn
    return wrap


@dataclass(frozen=True)
class SuiteResult:
    module: str
    name: str
    passed: bool
    detail: str
    seconds: float

    @property
    def key(self) -> str:
        return f"{self.module}.{self.name}"


def missing_suites() -> list[str]:
    return [f"{m}.{n}" for m, names in INVARIANTS.items() for n in names if (m, n) not in _REGISTRY]


def check_coverage() -> None:
    missing = missing_suites()
    extra = [f"{m}.{n}" for m, n in _REGISTRY if n not in INVARIANTS.get(m, ())]
    if missing or extra:
        raise CoverageError(f"suite coverage broken; missing={missing} unlisted={extra}")


def suite_keys() -> list[str]:
    return [f"{m}.{n}" for m, names in INVARIANTS.items() for n in names]


def select(filters: Optional[Iterable[str]] = None) -> list[str]:
    """Suite keys matching any filter (a module name, a suite name or module.suite)."""
    keys = suite_keys()
    if not filters:
        return keys
    filters = list(filters)
    chosen = [k for k in keys if any(f == k or f == k.split(".")[0] or f == k.split(".")[1] for f in filters)]
    unknown = [f for f in filters if not any(f == k or f in k.split(".") for k in keys)]
    if unknown:
        raise KeyError(f"unknown suites: {unknown}")
    return chosen


def run_suite(key: str, seed: int = 0) -> SuiteResult:
    module, name = key.split(".")
    t0 = time.perf_counter()
    try:
        passed, detail = _REGISTRY[(module, name)](seed)
    except Exception as exc:  # a crashing suite is a failing suite
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return SuiteResult(module, name, bool(passed), detail, time.perf_counter() - t0)


def run_all(filters: Optional[Iterable[str]] = None, seed: int = 0) -> list[SuiteResult]:
    return [run_suite(k, seed) for k in select(filters)]


def _rng(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng([seed, sum(map(ord, tag))])


# degree_model ---------------------------------------------------------------------------

def _random_models(rng, count: int):
    for k in range(count):
        N = int(rng.integers(1, 12))
        if k % 2:
            yield random_sequence(rng, N)
        else:
            yield random_spec(rng, N, int(rng.integers(1, 4)), zero_prob=0.3)


@suite("degree_model", name="edge_probability_range")
def _edge_probability_range(seed: int, count: int = 100):
    rng = _rng(seed, "range")
    for model in _random_models(rng, count):
        pm = p_max(model)
        for i in range(model.N):
            for j in range(model.N):
                p = edge_probability(model, i, j)
                if not (0 <= p <= 1 and p <= pm * (1 + 1e-12)):
                    return False, f"p={p} at ({i},{j}) with p_max={pm}"
    return True, f"{count} models"


@suite("degree_model", name="marginal_sums")
def _marginal_sums(seed: int, count: int = 100):
    rng = _rng(seed, "marginals")
    for _ in range(count):
        seq = random_sequence(rng, int(rng.integers(1, 15)))
        P = seq.probability_matrix()
        if not (np.allclose(P.sum(axis=1), seq.b, rtol=1e-10, atol=0) and np.allclose(P.sum(axis=0), seq.a, rtol=1e-10, atol=0)):
            return False, "row or column sums disagree with b or a"
    return True, f"{count} sequences"


@suite("degree_model", name="single_group_reduction")
def _single_group_reduction(seed: int, count: int = 100):
    rng = _rng(seed, "k1")
    worst = 0.0
    for _ in range(count):
        seq = random_sequence(rng, int(rng.integers(1, 15)))
        spec = PartitionSpec.from_chung_lu(seq, np.ones(seq.N, dtype=int), 1)
        worst = max(worst, float(np.abs(spec.probability_matrix() - seq.probability_matrix()).max()))
    return worst <= 1e-14, f"max deviation {worst:.2e}"


# graph_gen ------------------------------------------------------------------------------

@suite("graph_gen", name="edge_frequency")
def _edge_frequency(seed: int, trials: int = 10_000):
    """Edge counts over ``trials`` realizations against a family-wise 99% binomial interval."""
    rng = _rng(seed, "freq")
    seq = random_sequence(rng, 6, fill=0.9)
    P = seq.probability_matrix()
    level = 1 - 0.01 / P.size
    lo, hi = stats.binom.interval(level, trials, P)
    details = []
    for mode in ("exact", "sparse"):
        counts = np.zeros_like(P)
        for g in ensemble(seq, trials, RngSeed(seed, 7), mode=mode):
            counts[g.src, g.dst] += 1
        outside = int(np.count_nonzero((counts < lo) | (counts > hi)))
        details.append(f"{mode}: {outside} outside")
        if outside:
            return False, "; ".join(details)
    return True, "; ".join(details)


@suite("graph_gen", name="seed_determinism")
def _seed_determinism(seed: int):
    rng = _rng(seed, "det")
    for _ in range(20):
        model = random_sequence(rng, int(rng.integers(2, 40)), fill=0.8)
        for mode in ("exact", "sparse"):
            s = RngSeed(int(rng.integers(0, 2 ** 63)), int(rng.integers(0, 100)))
            if sample(model, s, mode) != sample(model, s, mode):
                return False, f"resampling differs in {mode} mode"
    model = random_sequence(rng, 30)
    serial = list(ensemble(model, 12, seed, workers=1))
    threaded = list(ensemble(model, 12, seed, workers=4))
    if serial != threaded:
        return False, "thread count changes the ensemble"
    return True, "same (seed, stream) gives the same graph"


@suite("graph_gen", name="block_support")
def _block_support(seed: int):
    rng = _rng(seed, "support")
    checked = 0
    for _ in range(30):
        spec = random_spec(rng, int(rng.integers(2, 25)), int(rng.integers(1, 4)), zero_prob=0.4)
        spec = _knock_out(rng, spec, 0.2)
        for mode in ("exact", "sparse"):
            g = sample(spec, RngSeed(seed, checked), mode)
            checked += 1
            for i, j in g.edges():
                key = (int(spec.groups[i]), int(spec.groups[j]))
                if not (spec.b_blocks[key][i] > 0 and spec.a_blocks[key][j] > 0):
                    return False, f"edge {i}->{j} outside block support"
    return True, f"{checked} graphs"


def _knock_out(rng, spec: PartitionSpec, frac: float) -> PartitionSpec:
    """Zero a random fraction of node entries in every block, then restore Σa = Σb and p <= 1."""
    a_blocks, b_blocks = {}, {}
    for key in spec.blocks():
        a = np.where(rng.random(spec.N) < frac, 0.0, spec.a_blocks[key])
        b = np.where(rng.random(spec.N) < frac, 0.0, spec.b_blocks[key])
        if a.sum() == 0 or b.sum() == 0:
            continue
        b *= a.sum() / b.sum()
        c = min(1.0, a.sum() / (a.max() * b.max()))
        a_blocks[key], b_blocks[key] = a * c, b * c
    return PartitionSpec(spec.K, spec.groups, a_blocks, b_blocks)


# spectral -------------------------------------------------------------------------------

@suite("spectral", name="radius_sandwich")
def _radius_sandwich(seed: int, count: int = 200, r_max: int = 8, slack: float = 1e-8):
    rng = _rng(seed, "sandwich")
    for k in range(count):
        N = int(rng.integers(1, 13))
        g = random_graph(rng, N)
        rho = spectral_radius(g).rho
        for r in range(1, r_max + 1):
            rr = rho ** r
            tr = pl.count_cycles_exact(g, r)
            walks = pl.count_paths_exact(g, r)
            if not (tr / N <= rr * (1 + slack) and rr * (1 - slack) <= walks):
                return False, f"graph {k} (N={N}), r={r}: trace/N={tr / N}, ρ^r={rr}, 1ᵀAʳ1={walks}"
    return True, f"{count} graphs, r=1..{r_max}"


@suite("spectral", name="shifted_eigen_oracle")
def _shifted_eigen_oracle(seed: int, count: int = 300):
    rng = _rng(seed, "eig")
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(1, 9))
        M = rng.random((n, n)) * 2
        M[rng.random((n, n)) < rng.uniform(0, 0.8)] = 0
        direct = float(np.abs(np.linalg.eigvals(M + np.eye(n))).max()) - 1
        worst = max(worst, abs(spectral_radius(M).rho - direct))
    return worst <= 1e-6, f"max deviation {worst:.2e}"


def _dyadic_spec(rng, N: int, K: int) -> PartitionSpec:
    """Integer degrees with power-of-two block sums, so every product below is exact."""
    groups = np.concatenate([np.arange(1, K + 1), rng.integers(1, K + 1, N - K)])
    a_blocks, b_blocks = {}, {}
    for x in range(1, K + 1):
        for y in range(1, K + 1):
            rows, cols = np.flatnonzero(groups == x), np.flatnonzero(groups == y)
            S = 2 ** int(rng.integers(4, 7))
            a = np.zeros(N)
            b = np.zeros(N)
            a[cols] = np.bincount(rng.integers(0, cols.size, S), minlength=cols.size)
            b[rows] = np.bincount(rng.integers(0, rows.size, S), minlength=rows.size)
            if a.max() * b.max() <= S:
                a_blocks[(x, y)], b_blocks[(x, y)] = a, b
    return PartitionSpec(K, groups, a_blocks, b_blocks)


@suite("spectral", "path_lab", name="node_matrix_sum")
def _node_matrix_sum(seed: int, count: int = 100):
    rng = _rng(seed, "BA")
    worst = 0.0
    exact_cases = 0
    for k in range(count):
        K = int(rng.integers(1, 4))
        N = int(rng.integers(K, 12))
        if k % 2:
            spec = _dyadic_spec(rng, N, K)
            Bs, As = pl.node_matrices(spec)
            total = np.einsum("nij,njk->ik", Bs, As)
            if not np.array_equal(total, build_p_matrix(spec).entries):
                return False, f"dyadic spec {k}: Σ B_i A_i differs from P"
            exact_cases += 1
        else:
            spec = random_spec(rng, N, K, zero_prob=0.3)
            Bs, As = pl.node_matrices(spec)
            P = build_p_matrix(spec).entries
            total = np.einsum("nij,njk->ik", Bs, As)
            worst = max(worst, float(np.abs(total - P).max() / max(1.0, np.abs(P).max())))
    return worst <= 1e-12, f"{exact_cases} exact dyadic cases; float cases max rel deviation {worst:.2e}"


# path_lab --------------------------------------------------------------------------------

def _all_paths(N: int, r_max: int):
    for r in range(1, r_max + 1):
        yield from itertools.product(range(N), repeat=r + 1)


@suite("path_lab", name="count_identity")
def _count_identity(seed: int, N: int = 5, r_max: int = 6):
    checked = 0
    for path in _all_paths(N, r_max):
        dec = pl.decompose_path(path)
        mass = dec.block_mass()
        if dec.k0 + sum(i * c for i, c in dec.k.items()) != dec.r:
            return False, f"edge count identity fails on {path}"
        if dec.ends_new:
            checked += 1
            if len(dec.interior) != dec.r - 1 - mass:
                return False, f"interior identity fails on {path}"
        if dec.is_cycle and len(dec.cycle_interior) != dec.r - mass:
            return False, f"cycle identity fails on {path}"
    return True, f"{checked} paths with new end edges"


def fixed_sequence(N: int = 5) -> BiDegreeSequence:
    a = np.array([1.0, 2.0, 0.5, 1.5, 3.0])[:N]
    b = np.array([2.0, 1.0, 2.5, 1.0, 1.5])[:N]
    b *= a.sum() / b.sum()
    c = a.sum() / (a.max() * b.max())
    return BiDegreeSequence(a * c, b * c)


@suite("path_lab", name="probability_oracle")
def _probability_oracle(seed: int, N: int = 5, r_max: int = 6, tol: float = 1e-12):
    seq = fixed_sequence(N)
    worst, checked = 0.0, 0
    for path in _all_paths(N, r_max):
        dec = pl.decompose_path(path)
        if not (dec.is_cycle or dec.ends_new):
            continue
        dev = abs(pl.path_probability(path, seq) - pl.path_probability_oracle(path, seq))
        worst = max(worst, dev)
        checked += 1
    return worst <= tol, f"{checked} paths, max deviation {worst:.2e}"


@suite("path_lab", name="exact_counts")
def _exact_counts(seed: int, count: int = 60):
    rng = _rng(seed, "counts")
    for _ in range(count):
        g = random_graph(rng, int(rng.integers(1, 8)))
        for r in range(1, 6):
            if pl.count_paths_exact(g, r) != pl.walks_by_dfs(g, r):
                return False, f"path count mismatch at r={r}"
            if pl.count_cycles_exact(g, r) != pl.walks_by_dfs(g, r, closed=True):
                return False, f"cycle count mismatch at r={r}"
            simple = sum(1 for w in pl.iter_walks(g, r) if w[0] == w[-1] and len(set(w[:-1])) == r)
            if pl.simple_cycle_count(g, r) != simple:
                return False, f"simple cycle count mismatch at r={r}"
    return True, f"{count} graphs, r=1..5"


def two_inducing_threshold(g: DirectedGraph, limit: int) -> int:
    """Smallest walk length carrying two cycle-inducing edges, capped at limit + 1.

    Every walk shorter than the returned value has at most one.
    """
    for r in range(1, limit + 1):
        for w in pl.iter_walks(g, r):
            if len(pl.cycle_inducing_edges(pl.minimal_edge_list(w))) >= 2:
                return r
    return limit + 1


@suite("path_lab", name="short_cycle_cap")
def _short_cycle_cap(seed: int, graphs: int = 120, walk_len: int = 12, walks_per_graph: int = 200):
    """Walks with t cycle-inducing edges span at most t simple cycles shorter than l*/2."""
    rng = _rng(seed, "cyclelength")
    tested = 0
    for _ in range(graphs):
        N = int(rng.integers(3, 11))
        g = random_graph(rng, N, density=rng.uniform(1.0, 2.2) / N)
        if g.n_edges == 0:
            continue
        l_star = two_inducing_threshold(g, 9)
        for _ in range(walks_per_graph):
            walk = _random_walk(rng, g, int(rng.integers(1, walk_len + 1)))
            if walk is None:
                continue
            edges = pl.minimal_edge_list(walk)
            t = len(pl.cycle_inducing_edges(edges))
            short = [c for c in pl.simple_cycles_in(edges, walk_len) if len(c) < l_star / 2]
            tested += 1
            if len(short) > t:
                return False, f"walk {walk}: {len(short)} short cycles > t={t} (l*={l_star})"
    return True, f"{tested} walks"


def _random_walk(rng, g: DirectedGraph, r: int):
    node = int(rng.integers(g.N))
    walk = [node]
    for _ in range(r):
        nbrs = g.out_neighbors(walk[-1])
        if nbrs.size == 0:
            return tuple(walk) if len(walk) > 1 else None
        walk.append(int(nbrs[rng.integers(nbrs.size)]))
    return tuple(walk)


@suite("path_lab", name="m_list_identity")
def _m_list_identity(seed: int, count: int = 400):
    rng = _rng(seed, "mlists")
    checked = 0
    for _ in range(count):
        N = int(rng.integers(2, 9))
        seq = random_sequence(rng, N)
        g = random_graph(rng, N, density=0.5)
        walk = _random_walk(rng, g, int(rng.integers(2, 14)))
        if walk is None:
            continue
        t = len(pl.cycle_inducing_edges(pl.minimal_edge_list(walk)))
        for j in range(1, t + 1):
            dec = pl.m_lists(pl.reduce_edge_list(walk, j), seq, tol=0.0)
            checked += 1
            if not dec.ok:
                return False, f"walk {walk}, j={j}: {dec.violations}"
    return True, f"{checked} reduced lists"


# bounds -----------------------------------------------------------------------------------

def _raises_regime(fn, *args) -> bool:
    try:
        fn(*args)
    except bd.RegimeError as exc:
        return bool(exc.regime.failed())
    return False


@suite("bounds", name="regime_reporting")
def _regime_reporting(seed: int):
    K2 = build_p_matrix(PartitionSpec.uniform_blocks([3, 3], np.full((2, 2), 3.0)))
    out_of_regime = [
        (bd.paths_upper, 1.0, 1.5, 0.1, 1),
        (bd.paths_upper, 1.0, 10.0, 0.1, 12),
        (bd.trace_variance_upper, 1.0, 10.0, 0.1, 5),
        (bd.simple_cycle_variance_upper, 1.0, 0.5, 0.1, 3),
        (bd.cycle_edge_rarity, 100.0, 1.0, 0.5, 1, 5.0),
        (bd.partitioned_paths_upper, 10.0, 2.0, 1.5, 0.1, 1),
        (bd.trace_cr_variance_upper, 1.0, K2, 0.1, 5),
        (bd.sc_partitioned_bounds, K2, 0.1, 0.1, 10),
        (bd.partitioned_rarity, 10.0, 1.0, 0.5, 1, 0.5),
    ]
    for fn, *args in out_of_regime:
        if not _raises_regime(fn, *args):
            return False, f"{fn.__name__}{tuple(args)} evaluated outside its regime"
    reports = [
        bd.upper_concentration(10.0, 100.0, 50, 0.1, 8, 0.1).regime,
        bd.lower_concentration(10.0, 100.0, 50, 0.1, 8, 0.1).regime,
        bd.sparse_paths_upper(1.0, 3.0, 1e3, 0.5, 1, 3, 1.0, 1.0).regime,
        bd.partitioned_upper_concentration(100.0, 3.0, 10.0, 0.1, 50, 8, 0.1).regime,
        bd.partitioned_sparse_upper(100.0, 3.0, 10.0, 0.1, 1e3, 0.5, 1, 3, 20.0).regime,
    ]
    if any(rep.ok or not rep.failed() for rep in reports):
        return False, "an out-of-regime concentration result did not name a failed condition"
    in_regime = bd.paths_upper(1.0, 10.0, 0.1, 3)
    return math.isfinite(in_regime), f"{len(out_of_regime)} raising ops, {len(reports)} reporting ops"


@suite("bounds", name="desk_sandwich")
def _desk_sandwich(seed: int, count: int = 200, trials: int = 200, r_max: int = 6):
    """Monte Carlo means of trace(A^r) and 1ᵀA^r1 against the lower and upper moment bounds (3σ)."""
    rng = _rng(seed, "desk")
    compared = 0
    for k in range(count):
        N = int(rng.integers(3, 13))
        seq = random_sequence(rng, N, fill=rng.uniform(0.6, 1.0), spread=0.5)
        pred, pm = cl_predictor(seq), p_max(seq)
        mats = np.stack([g.dense(np.float64) for g in ensemble(seq, trials, RngSeed(seed, k))])
        power = np.broadcast_to(np.eye(N), mats.shape).copy()
        for r in range(1, r_max + 1):
            power = power @ mats
            traces = np.trace(power, axis1=1, axis2=2)
            walks = power.sum(axis=(1, 2))
            tol_t = 3 * traces.std(ddof=1) / math.sqrt(trials)
            if traces.mean() + tol_t < bd.trace_lower(pred, r) and traces.std() > 0:
                return False, f"model {k}, r={r}: mean trace {traces.mean():.4g} below {bd.trace_lower(pred, r):.4g}"
            if walks.mean() + 3 * walks.std(ddof=1) / math.sqrt(trials) < bd.paths_lower_total(seq.S, pred, r):
                return False, f"model {k}, r={r}: mean walks below the lower bound"
            if pred > 2 and r < pred:
                upper = sum(bd.paths_upper(b, pred, pm, r) for b in seq.b)
                if walks.mean() - 3 * walks.std(ddof=1) / math.sqrt(trials) > upper:
                    return False, f"model {k}, r={r}: mean walks {walks.mean():.4g} above {upper:.4g}"
                compared += 1
    return True, f"{count} models; {compared} (model, r) pairs inside the upper bound's regime"


@suite("bounds", name="expineq")
def _expineq(seed: int, count: int = 500):
    rng = _rng(seed, "expineq")
    for _ in range(count):
        m = int(rng.integers(2, 13))
        l = int(rng.integers(1, m))
        r = int(rng.integers(1, 13))
        alpha = float(rng.uniform(0, 1.5))
        beta = float(rng.uniform(0, 0.99))
        lhs, rhs = bd.expineq(l, m, r, alpha, beta)
        if lhs > rhs * (1 + 1e-12):
            return False, f"l={l} m={m} r={r} α={alpha} β={beta}: {lhs} > {rhs}"
    return True, f"{count} draws"


def _pattern_positive_spec(rng, N: int) -> PartitionSpec:
    while True:
        spec = random_spec(rng, N, 2)
        if np.all(build_p_matrix(spec).positive_pattern_entries() > 0):
            return spec


@suite("bounds", name="alpha_products")
def _alpha_products(seed: int, specs: int = 5, products: int = 1000):
    """The computed α bounds random generator products on the support of P."""
    rng = _rng(seed, "alpha")
    gens = list(pl.generator_patterns(2).values())
    for _ in range(specs):
        spec = _pattern_positive_spec(rng, int(rng.integers(4, 12)))
        P = build_p_matrix(spec).entries
        alpha = bd.alpha_condition(spec, strict=False)
        Bmax, Amax = bd.max_degree_matrices(spec)
        support = P > 0
        for _ in range(products):
            M = np.eye(4)
            for _ in range(int(rng.integers(1, 9))):
                M = gens[int(rng.integers(len(gens)))] @ M
            L = Bmax @ (M != 0).astype(float) @ Amax
            if np.any(L[support] > alpha * P[support] * (1 + 1e-12)):
                return False, "a random product exceeds α·P"
    return True, f"{specs} specs × {products} products"


def t_path_violations(walk, l_max: int = 8) -> list[str]:
    edges = pl.minimal_edge_list(walk)
    t = len(pl.cycle_inducing_edges(edges))
    g = pl.edge_subgraph(edges)
    bad = []
    for y in range(g.N):
        for l in range(1, min(l_max, g.N) + 1):
            n = pl.count_simple_paths_from(g, y, l)
            if n > (1 + t / l) ** l * (1 + 1e-12) or n > math.exp(t) * (1 + 1e-12):
                bad.append(f"y={y} l={l}: {n} simple paths with t={t}")
    return bad


@suite("bounds", name="tpath_bound")
def _tpath_bound(seed: int, count: int = 400):
    rng = _rng(seed, "tpath")
    for _ in range(count):
        N = int(rng.integers(2, 11))
        g = random_graph(rng, N, density=rng.uniform(1.0, 3.0) / N)
        walk = _random_walk(rng, g, int(rng.integers(1, 20)))
        if walk is None:
            continue
        bad = t_path_violations(walk)
        if bad:
            return False, f"walk {walk}: {bad[0]}"
    return True, f"{count} walks"


# sis ----------------------------------------------------------------------------------------

@suite("sis", name="absorbing_state")
def _absorbing_state(seed: int):
    rng = _rng(seed, "absorb")
    g = random_graph(rng, 40, density=0.1)
    cfg = SISConfig(beta=0.3, dt=0.5, seed=seed)
    for t in range(50):
        if sis_step(g, np.zeros(g.N, dtype=bool), cfg, RngSeed(seed, t).generator(1)).any():
            return False, "infection appeared from the empty state"
    for k in range(50):
        trace = sis_run(g, SISConfig(beta=0.3, dt=0.5, seed=RngSeed(seed, k), max_steps=2000))
        zeros = np.flatnonzero(trace.infected_counts == 0)
        if zeros.size and zeros[0] != trace.infected_counts.size - 1:
            return False, "a run continued past an empty infected set"
    return True, "empty set stays empty"


@suite("sis", name="monotone_coupling")
def _monotone_coupling(seed: int, runs: int = 40):
    rng = _rng(seed, "coupling")
    betas = (0.05, 0.06, 0.07)
    for k in range(runs):
        g = random_graph(rng, int(rng.integers(20, 80)), density=rng.uniform(0.05, 0.3))
        times = [sis_run(g, SISConfig(beta=b, seed=RngSeed(seed, k), max_steps=5000)).stopping_time for b in betas]
        if any(x > y for x, y in zip(times, times[1:])):
            return False, f"run {k}: stopping times {times} decrease in β"
    return True, f"{runs} coupled triples"


def log_growth_medians(seed: int, sizes=(100, 200, 400, 800), degree: float = 4.0, beta: float = 0.15,
                       trials: int = 100) -> list[tuple[int, float, float]]:
    """(N, β·ρ(A), median stopping time) on uniform-degree graphs."""
    out = []
    for N in sizes:
        seq = BiDegreeSequence(np.full(N, degree), np.full(N, degree))
        g = sample(seq, RngSeed(seed, N))
        rho = spectral_radius(g).rho
        ens = sis_ensemble(g, SISConfig(beta=beta, seed=RngSeed(seed, N << 20)), trials)
        out.append((N, beta * rho, float(np.median(ens.stopping_times))))
    return out


@suite("sis", name="log_growth")
def _log_growth(seed: int):
    """Subcritical medians stay within a factor 2 band of c·log N across N."""
    rows = log_growth_medians(seed)
    if any(br >= 1 for _, br, _ in rows):
        return False, f"not subcritical: {rows}"
    scaled = [m / math.log(N) for N, _, m in rows]
    ok = max(scaled) <= 2 * min(scaled) and rows[-1][2] / math.log(rows[-1][0]) <= 2 * scaled[0]
    return ok, "median/log N = " + ", ".join(f"{s:.3f}" for s in scaled)


# cli_harness --------------------------------------------------------------------------------

@suite("cli_harness", name="csv_reproducible")
def _csv_reproducible(seed: int):
    from .cli import main

    digests = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            cfg = tmp / "cfg.json"
            cfg.write_text('{"trials": 5, "params": {"fig2": {"N": 60, "target": 12}, "sis": {"N": 60, "target": 4}}}')
            files = {}
            for cmd in ("fig2", "sis"):
                out = tmp / cmd
                code = main([cmd, "--config", str(cfg), "--seed", str(seed), "--out", str(out)])
                if code != 0:
                    return False, f"{cmd} exited with {code}"
                for f in sorted(out.glob("*.csv")):
                    files[f"{cmd}/{f.name}"] = f.read_bytes()
            digests.append(files)
    if digests[0] != digests[1]:
        diff = [k for k in digests[0] if digests[0][k] != digests[1].get(k)]
        return False, f"CSV output differs between identical runs: {diff}"
    return True, f"{len(digests[0])} CSV files identical"


@suite("cli_harness", name="coverage_lock")
def _coverage_lock(seed: int):
    missing = missing_suites()
    return not missing, "all invariants covered" if not missing else f"missing {missing}"


check_coverage()
