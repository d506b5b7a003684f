"""Reproducible sampling of directed graph realizations.

Every random draw comes from a Philox counter-based generator keyed by
``(seed, stream)``.  Trial ``t`` of an ensemble uses stream ``t``, so results
do not depend on the order (or thread) in which trials are produced.

Two samplers share the same distribution:

* exact mode draws one uniform per ordered pair, in row-major order, from
  counter 0 of the keyed stream.  It is used whenever N <= 2000.
* sparse mode walks each row with geometric skips over columns sorted by
  decreasing in-weight and thins the candidates.  Row ``i`` reads from its own
  counter region, so its work is O(expected edges).
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

import numpy as np
import scipy.sparse as sp

from .degree_model import BiDegreeSequence, Model, PartitionSpec, ensure_valid

EXACT_MAX_N = 2000
_MASK64 = (1 << 64) - 1
_ROW_BUDGET = 8192  # rows of uniforms generated per chunk in exact mode


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = int(getattr(self, name))
            if not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer")
            object.__setattr__(self, name, v)

    @property
    def key(self) -> int:
        return self.seed | (self.stream << 64)

    def generator(self, region: int = 0) -> np.random.Generator:
        """Generator positioned at counter region ``region`` of this key."""
        return np.random.Generator(np.random.Philox(key=self.key, counter=region << 192))

    def with_stream(self, stream: int) -> "RngSeed":
        return RngSeed(self.seed, stream)


def as_seed(seed: Union[int, RngSeed]) -> RngSeed:
    return seed if isinstance(seed, RngSeed) else RngSeed(int(seed))


class DirectedGraph:
    """Immutable directed graph on nodes ``0..N-1``; self-loops allowed, no multi-edges."""

    __slots__ = ("N", "src", "dst", "groups", "__dict__")

    def __init__(self, N: int, src, dst, groups=None):
        src = np.asarray(src, dtype=np.int64).reshape(-1)
        dst = np.asarray(dst, dtype=np.int64).reshape(-1)
        if src.shape != dst.shape:
            raise ValueError("src and dst differ in length")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= N):
            raise ValueError("edge endpoint outside 0..N-1")
        code = np.unique(src * N + dst) if N else np.zeros(0, dtype=np.int64)
        self.N = int(N)
        self.src = code // max(N, 1)
        self.dst = code % max(N, 1)
        self.src.setflags(write=False)
        self.dst.setflags(write=False)
        if groups is not None:
            groups = np.asarray(groups, dtype=np.int64).reshape(-1)
            if groups.size != N:
                raise ValueError("groups must label every node")
            groups.setflags(write=False)
        self.groups = groups

    @classmethod
    def from_edges(cls, N: int, edges: Iterable[tuple[int, int]], groups=None) -> "DirectedGraph":
        edges = list(edges)
        if not edges:
            return cls(N, [], [], groups)
        s, d = zip(*edges)
        return cls(N, s, d, groups)

    @classmethod
    def from_dense(cls, A, groups=None) -> "DirectedGraph":
        A = np.asarray(A)
        s, d = np.nonzero(A)
        return cls(A.shape[0], s, d, groups)

    @property
    def n_edges(self) -> int:
        return int(self.src.size)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def has_edge(self, i: int, j: int) -> bool:
        row = self.out_neighbors(i)
        k = np.searchsorted(row, j)
        return bool(k < row.size and row[k] == j)

    @cached_property
    def _out_ptr(self) -> np.ndarray:
        return np.searchsorted(self.src, np.arange(self.N + 1))

    @cached_property
    def _in_order(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.lexsort((self.src, self.dst))
        ptr = np.searchsorted(self.dst[order], np.arange(self.N + 1))
        return self.src[order], ptr

    def out_neighbors(self, i: int) -> np.ndarray:
        p = self._out_ptr
        return self.dst[p[i]:p[i + 1]]

    def in_neighbors(self, j: int) -> np.ndarray:
        srcs, ptr = self._in_order
        return srcs[ptr[j]:ptr[j + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.N)

    def adjacency(self, dtype=np.float64) -> sp.csr_matrix:
        data = np.ones(self.n_edges, dtype=dtype)
        return sp.csr_matrix((data, (self.src, self.dst)), shape=(self.N, self.N))

    def dense(self, dtype=np.int64) -> np.ndarray:
        A = np.zeros((self.N, self.N), dtype=dtype)
        A[self.src, self.dst] = 1
        return A

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        same_groups = (self.groups is None and other.groups is None) or (
            self.groups is not None and other.groups is not None and np.array_equal(self.groups, other.groups)
        )
        return (
            self.N == other.N
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and same_groups
        )

    def __hash__(self):
        return hash((self.N, self.src.tobytes(), self.dst.tobytes()))

    def __repr__(self) -> str:
        return f"DirectedGraph(N={self.N}, edges={self.n_edges})"


# samplers -------------------------------------------------------------------

def _block_rows(model: Model, rows: np.ndarray) -> np.ndarray:
    """Probability rows for the given sources, computed as (b_i * a_j) / S."""
    if isinstance(model, BiDegreeSequence):
        S = model.S
        if S == 0:
            return np.zeros((rows.size, model.N))
        return np.multiply.outer(model.b[rows], model.a) / S
    out = np.zeros((rows.size, model.N))
    for x, y in model.blocks():
        S = model.S_block(x, y)
        if S <= 0:
            continue
        sel = model.groups[rows] == x
        if not sel.any():
            continue
        cols = model.members(y)
        block = np.multiply.outer(model.b_blocks[(x, y)][rows[sel]], model.a_blocks[(x, y)][cols]) / S
        out[np.ix_(np.flatnonzero(sel), cols)] = block
    return out


def _sample_exact(model: Model, seed: RngSeed) -> tuple[np.ndarray, np.ndarray]:
    n = model.N
    gen = seed.generator(0)
    srcs, dsts = [], []
    step = max(1, _ROW_BUDGET * 64 // max(n, 1))
    for start in range(0, n, step):
        rows = np.arange(start, min(n, start + step))
        u = gen.random((rows.size, n))
        hit_r, hit_c = np.nonzero(u < _block_rows(model, rows))
        srcs.append(rows[hit_r])
        dsts.append(hit_c)
    if not srcs:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(srcs), np.concatenate(dsts)


def _skip_row(gen: np.random.Generator, weight: float, cols: np.ndarray, col_w: np.ndarray, S: float) -> list[int]:
    """Bernoulli(weight*col_w[j]/S) for each j, via geometric skips; col_w sorted descending."""
    hits = []
    n = cols.size
    j = 0
    p = weight * col_w[0] / S if n else 0.0
    while j < n and p > 0:
        if p < 1:
            u = gen.random()
            j += int(np.floor(np.log1p(-u) / np.log1p(-p))) if u > 0 else 0
        if j >= n:
            break
        q = weight * col_w[j] / S
        if gen.random() < q / p:
            hits.append(int(cols[j]))
        p = q
        j += 1
    return hits


def _sample_sparse(model: Model, seed: RngSeed) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(model, BiDegreeSequence):
        plan = {1: [(model.a, model.b, model.S, np.arange(model.N))]}
        group_of = np.ones(model.N, dtype=np.int64)
    else:
        plan = {}
        for x, y in model.blocks():
            S = model.S_block(x, y)
            if S > 0:
                plan.setdefault(x, []).append((model.a_blocks[(x, y)], model.b_blocks[(x, y)], S, model.members(y)))
        group_of = model.groups
    sorted_plan = {}
    for x, entries in plan.items():
        prepared = []
        for a, b, S, cols in entries:
            keep = cols[a[cols] > 0]
            order = keep[np.argsort(-a[keep], kind="stable")]
            prepared.append((b, S, order, a[order]))
        sorted_plan[x] = prepared
    srcs, dsts = [], []
    for i in range(model.N):
        entries = sorted_plan.get(int(group_of[i]), [])
        if not entries:
            continue
        gen = seed.generator(i + 1)
        for b, S, order, weights in entries:
            if b[i] <= 0 or order.size == 0:
                continue
            for j in _skip_row(gen, float(b[i]), order, weights, S):
                srcs.append(i)
                dsts.append(j)
    return np.asarray(srcs, dtype=np.int64), np.asarray(dsts, dtype=np.int64)


def _sample(model: Model, seed, mode: str) -> DirectedGraph:
    ensure_valid(model)
    seed = as_seed(seed)
    if mode == "auto":
        mode = "exact" if model.N <= EXACT_MAX_N else "sparse"
    if mode == "exact":
        s, d = _sample_exact(model, seed)
    elif mode == "sparse":
        s, d = _sample_sparse(model, seed)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    groups = model.groups if isinstance(model, PartitionSpec) else None
    return DirectedGraph(model.N, s, d, groups)


def sample_chung_lu(seq: BiDegreeSequence, seed: Union[int, RngSeed], mode: str = "auto") -> DirectedGraph:
    return _sample(seq, seed, mode)


def sample_partitioned(spec: PartitionSpec, seed: Union[int, RngSeed], mode: str = "auto") -> DirectedGraph:
    return _sample(spec, seed, mode)


def sample(model: Model, seed: Union[int, RngSeed], mode: str = "auto") -> DirectedGraph:
    return _sample(model, seed, mode)


def thread_budget() -> int:
    raw = os.environ.get("SPECTRACL_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def ensemble(model: Model, n_trials: int, seed: Union[int, RngSeed], mode: str = "auto",
             workers: Optional[int] = None) -> Iterator[DirectedGraph]:
    """Yield realizations for trials ``0..n_trials-1``; trial t uses stream t."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    ensure_valid(model)
    base = as_seed(seed)
    workers = thread_budget() if workers is None else max(1, workers)
    seeds = [base.with_stream(t) for t in range(n_trials)]
    if workers == 1:
        for s in seeds:
            yield _sample(model, s, mode)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(lambda s: _sample(model, s, mode), seeds)


# persistence ----------------------------------------------------------------

_MAGIC = b"SPCLG\x01"


def write_edge_list(graph: DirectedGraph, path: Union[str, Path]) -> None:
    lines = [f"# N={graph.N}"]
    if graph.groups is not None:
        lines.append("# groups=" + " ".join(map(str, graph.groups.tolist())))
    lines.extend(f"{i} {j}" for i, j in zip(graph.src.tolist(), graph.dst.tolist()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: Union[str, Path]) -> DirectedGraph:
    N = None
    groups = None
    src, dst = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("N="):
                N = int(body[2:])
            elif body.startswith("groups="):
                groups = [int(t) for t in body[len("groups="):].split()]
            continue
        i, j = line.split()[:2]
        src.append(int(i))
        dst.append(int(j))
    if N is None:
        raise ValueError("edge list lacks '# N=<n>' header")
    return DirectedGraph(N, src, dst, groups)


def write_binary(graph: DirectedGraph, path: Union[str, Path]) -> None:
    has_groups = graph.groups is not None
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQB", graph.N, graph.n_edges, int(has_groups)))
        fh.write(graph.src.astype("<i8").tobytes())
        fh.write(graph.dst.astype("<i8").tobytes())
        if has_groups:
            fh.write(graph.groups.astype("<i8").tobytes())


def read_binary(path: Union[str, Path]) -> DirectedGraph:
    blob = Path(path).read_bytes()
    if not blob.startswith(_MAGIC):
        raise ValueError("not a spectracl binary graph")
    off = len(_MAGIC)
    N, E, has_groups = struct.unpack_from("<QQB", blob, off)
    off += struct.calcsize("<QQB")
    src = np.frombuffer(blob, dtype="<i8", count=E, offset=off)
    off += 8 * E
    dst = np.frombuffer(blob, dtype="<i8", count=E, offset=off)
    off += 8 * E
    groups = np.frombuffer(blob, dtype="<i8", count=N, offset=off) if has_groups else None
    return DirectedGraph(N, src, dst, groups)
