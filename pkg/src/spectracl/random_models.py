"""Random valid models and graphs for property checks."""

from __future__ import annotations

import numpy as np

from .degree_model import BiDegreeSequence, PartitionSpec
from .graph_gen import DirectedGraph


def random_sequence(rng: np.random.Generator, N: int, fill: float | None = None,
                    spread: float = 1.0) -> BiDegreeSequence:
    """Valid bidegree sequence; ``fill`` in (0, 1] is max(b)·max(a)/S."""
    a = rng.random(N) ** spread + 0.05
    b = rng.random(N) ** spread + 0.05
    b *= a.sum() / b.sum()
    fill = rng.uniform(0.2, 1.0) if fill is None else fill
    c = fill * a.sum() / (a.max() * b.max())
    return BiDegreeSequence(a * c, b * c)


def random_spec(rng: np.random.Generator, N: int, K: int, zero_prob: float = 0.0,
                fill: float | None = None) -> PartitionSpec:
    """Valid block spec; each block is empty with probability ``zero_prob``.

    Group labels are shuffled but every group is nonempty when N >= K.
    """
    groups = np.concatenate([np.arange(1, K + 1), rng.integers(1, K + 1, max(0, N - K))])[:N]
    rng.shuffle(groups)
    a_blocks, b_blocks = {}, {}
    for x in range(1, K + 1):
        for y in range(1, K + 1):
            rows, cols = groups == x, groups == y
            if not rows.any() or not cols.any() or rng.random() < zero_prob:
                continue
            b = np.where(rows, rng.random(N) + 0.05, 0.0)
            a = np.where(cols, rng.random(N) + 0.05, 0.0)
            b *= a.sum() / b.sum()
            f = rng.uniform(0.2, 1.0) if fill is None else fill
            c = f * a.sum() / (a.max() * b.max())
            a_blocks[(x, y)] = a * c
            b_blocks[(x, y)] = b * c
    return PartitionSpec(K, groups, a_blocks, b_blocks)


def random_graph(rng: np.random.Generator, N: int, density: float | None = None,
                 loops: bool = True) -> DirectedGraph:
    density = rng.uniform(0.05, 0.9) if density is None else density
    A = rng.random((N, N)) < density
    if not loops:
        np.fill_diagonal(A, False)
    return DirectedGraph.from_dense(A)


def random_nonnegative(rng: np.random.Generator, n: int, integer: bool = False,
                       zero_prob: float = 0.3) -> np.ndarray:
    if integer:
        M = rng.integers(0, 4, (n, n))
    else:
        M = rng.random((n, n)) * 3
    M[rng.random((n, n)) < zero_prob] = 0
    return M
