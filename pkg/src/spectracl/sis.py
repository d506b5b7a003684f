"""Discrete-time SIS epidemics on realized directed graphs.

Each step starts from the current infected set I.  Every node of I recovers
with probability dt, and every edge i -> j with i in I transmits with
probability beta·dt.  The next infected set is the survivors of I together
with every transmission target.

Randomness is addressed rather than streamed: step t of a trial draws one
uniform per edge and one per node from its own counter region.  Two runs
that share a seed therefore see identical uniforms and differ only through
beta, which makes the infected sets nested (larger beta, larger set) at
every step.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .graph_gen import DirectedGraph, RngSeed, as_seed, thread_budget


@dataclass(frozen=True)
class SISConfig:
    beta: float
    dt: float = 1.0
    init: Union[float, Sequence[int]] = 0.5   # fraction, or explicit node list
    max_steps: int = 10_000
    seed: Union[int, RngSeed] = 0

    def __post_init__(self):
        if not 0 < self.dt <= 1:
            raise ValueError("dt must lie in (0, 1]")
        if not 0 <= self.beta * self.dt <= 1:
            raise ValueError("beta·dt must lie in [0, 1]")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if isinstance(self.init, float) and not 0 <= self.init <= 1:
            raise ValueError("initial fraction must lie in [0, 1]")

    @property
    def infect_prob(self) -> float:
        return self.beta * self.dt


@dataclass(frozen=True)
class SISTrace:
    infected_counts: np.ndarray      # entry t is |I_t|; entry 0 is the initial set
    stopping_time: int               # first t with |I_t| = 0, or max_steps when censored
    censored: bool


def initial_infected(graph: DirectedGraph, config: SISConfig, seed: RngSeed) -> np.ndarray:
    mask = np.zeros(graph.N, dtype=bool)
    if isinstance(config.init, (float, np.floating)):
        k = int(round(config.init * graph.N))
        mask[seed.generator(0).permutation(graph.N)[:k]] = True
    else:
        mask[np.asarray(list(config.init), dtype=np.int64)] = True
    return mask


def sis_step(graph: DirectedGraph, infected: np.ndarray, config: SISConfig,
             rng: np.random.Generator) -> np.ndarray:
    """One synchronous update; ``infected`` is a boolean mask of length N."""
    edge_u = rng.random(graph.n_edges)
    node_u = rng.random(graph.N)
    survive = infected & (node_u >= config.dt)
    fire = infected[graph.src] & (edge_u < config.infect_prob)
    nxt = survive.copy()
    nxt[graph.dst[fire]] = True
    return nxt


def sis_run(graph: DirectedGraph, config: SISConfig) -> SISTrace:
    seed = as_seed(config.seed)
    infected = initial_infected(graph, config, seed)
    counts = [int(infected.sum())]
    t = 0
    while counts[-1] > 0 and t < config.max_steps:
        t += 1
        infected = sis_step(graph, infected, config, seed.generator(t))
        counts.append(int(infected.sum()))
    censored = counts[-1] > 0
    return SISTrace(np.array(counts, dtype=np.int64), t, censored)


@dataclass(frozen=True)
class BoxStats:
    n: int
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    n_censored: int

    def as_row(self) -> dict:
        return {
            "n": self.n, "q1": self.q1, "median": self.median, "q3": self.q3,
            "whisker_low": self.whisker_low, "whisker_high": self.whisker_high,
            "n_censored": self.n_censored,
        }


def box_stats(values: Sequence[float], censored: Optional[Sequence[bool]] = None) -> BoxStats:
    """Quartiles plus Tukey whiskers (furthest points within 1.5 IQR)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    n_cens = int(np.count_nonzero(censored)) if censored is not None else 0
    return BoxStats(int(v.size), float(q1), float(med), float(q3), float(inside.min()), float(inside.max()), n_cens)


@dataclass(frozen=True)
class SISEnsemble:
    config: SISConfig
    stopping_times: np.ndarray
    censored: np.ndarray

    @property
    def summary(self) -> BoxStats:
        return box_stats(self.stopping_times, self.censored)

    def write_trials_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial_id", "stopping_time", "censored"])
            for k, (t, c) in enumerate(zip(self.stopping_times.tolist(), self.censored.tolist())):
                w.writerow([k, t, int(c)])


def sis_ensemble(graph: DirectedGraph, config: SISConfig, n_trials: int,
                 workers: Optional[int] = None) -> SISEnsemble:
    """Independent trials; trial k uses stream k of the configured seed."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    base = as_seed(config.seed)
    configs = [
        SISConfig(config.beta, config.dt, config.init, config.max_steps, base.with_stream(base.stream + k))
        for k in range(n_trials)
    ]
    workers = thread_budget() if workers is None else workers
    run = lambda c: sis_run(graph, c)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(run, configs))
    else:
        traces = [run(c) for c in configs]
    return SISEnsemble(
        config,
        np.array([tr.stopping_time for tr in traces], dtype=np.int64),
        np.array([tr.censored for tr in traces], dtype=bool),
    )


def geometric_max_cdf(N: int, dt: float, t: int) -> float:
    """Pr(max of N independent geometric(dt) recovery times <= t)."""
    if t < 0:
        return 0.0
    return (1 - (1 - dt) ** t) ** N if dt < 1 else 1.0 if t >= 1 or N == 0 else 0.0


def write_summary_csv(rows: Sequence[dict], path: Union[str, Path]) -> None:
    if not rows:
        raise ValueError("no rows")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.10g}" if isinstance(v, float) and not math.isnan(v) else v) for k, v in row.items()})
