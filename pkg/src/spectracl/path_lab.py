"""Path and cycle combinatorics for Chung-Lu style random graphs.

A path is a node sequence ``(i_0, ..., i_r)`` of length ``r`` (its number of
edges).  Walking the path, an edge is *new* at its first occurrence and
*repeating* afterwards; maximal runs of repeating edges form blocks.  The
*interior* collects nodes whose incoming and outgoing edges are both new.
With that bookkeeping the existence probability of a path under the Chung-Lu
model collapses to a short product, which ``path_probability`` evaluates and
``path_probability_oracle`` checks by brute force.

The module also builds minimal and reduced edge lists, locates
cycle-inducing edges, counts paths, cycles and simple cycles exactly, and
hosts the small-scale matrix-product machinery of the block model.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .degree_model import BiDegreeSequence, Model, PartitionSpec, edge_probability
from .graph_gen import DirectedGraph
from .spectral import pair_index, pair_labels

Edge = tuple[int, int]

ENUM_MAX_N = 20
ENUM_MAX_R = 12
TUPLE_CAP = 10 ** 7


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [(int(path[k]), int(path[k + 1])) for k in range(len(path) - 1)]


# decomposition -----------------------------------------------------------------

@dataclass(frozen=True)
class PathDecomposition:
    nodes: tuple[int, ...]
    edge_flags: tuple[bool, ...]          # True where the edge is new
    blocks: tuple[tuple[int, int], ...]   # (first edge index, length), 0-based edge indices
    interior: tuple[int, ...]
    block_endpoints: tuple[tuple[int, int], ...]
    k: dict
    k0: int

    @property
    def r(self) -> int:
        return len(self.edge_flags)

    @property
    def is_cycle(self) -> bool:
        return self.nodes[0] == self.nodes[-1]

    @property
    def ends_new(self) -> bool:
        return self.edge_flags[0] and self.edge_flags[-1]

    @property
    def cycle_interior(self) -> tuple[int, ...]:
        """Interior for a closed path: the start node joins when both end edges are new."""
        if self.ends_new:
            return (self.nodes[0],) + self.interior
        return self.interior

    def block_mass(self) -> int:
        return sum((i + 1) * c for i, c in self.k.items())


def decompose_path(path: Sequence[int]) -> PathDecomposition:
    nodes = tuple(int(v) for v in path)
    if len(nodes) < 2:
        raise ValueError("a path needs at least one edge")
    edges = path_edges(nodes)
    seen: set[Edge] = set()
    flags = []
    for e in edges:
        flags.append(e not in seen)
        seen.add(e)
    r = len(edges)

    blocks = []
    k = 0
    while k < r:
        if flags[k]:
            k += 1
            continue
        start = k
        while k < r and not flags[k]:
            k += 1
        blocks.append((start, k - start))
    # node at position m sits between edge m-1 (incoming) and edge m (outgoing)
    interior = tuple(nodes[m] for m in range(1, r) if flags[m - 1] and flags[m])
    endpoints = tuple((nodes[s], nodes[s + length]) for s, length in blocks)
    counts = Counter(length for _, length in blocks)
    dec = PathDecomposition(nodes, tuple(flags), tuple(blocks), interior, endpoints, dict(counts), sum(flags))

    assert dec.k0 + sum(i * c for i, c in dec.k.items()) == r
    if dec.ends_new:
        assert len(dec.interior) == r - 1 - dec.block_mass()
    if dec.is_cycle:
        assert len(dec.cycle_interior) == r - dec.block_mass()
    return dec


class PreconditionError(ValueError):
    pass


def _cl_vectors(model: Model) -> tuple[np.ndarray, np.ndarray, float]:
    if not isinstance(model, BiDegreeSequence):
        raise TypeError("the product formula applies to Chung-Lu sequences; use path_probability_oracle")
    return model.a, model.b, model.S


def path_probability(path: Sequence[int], model: BiDegreeSequence) -> float:
    """Existence probability of a path through the interior/block product formula.

    Open paths need a new last edge; closed paths use the cycle variant, which
    drops the end factor and lets the start node join the interior.
    """
    a, b, S = _cl_vectors(model)
    dec = decompose_path(path)
    if S == 0:
        return 0.0
    if dec.is_cycle:
        prob = 1.0
        interior = dec.cycle_interior
    elif dec.ends_new:
        prob = b[dec.nodes[0]] * a[dec.nodes[-1]] / S
        interior = dec.interior
    else:
        raise PreconditionError("last edge repeats and the path is open; use path_probability_oracle")
    for i in interior:
        prob *= a[i] * b[i] / S
    for j, k in dec.block_endpoints:
        prob *= a[j] * b[k] / S
    return float(prob)


def path_probability_oracle(path: Sequence[int], model: Model) -> float:
    """Product of edge probabilities over the distinct edges of the path."""
    prob = 1.0
    for i, j in dict.fromkeys(path_edges(path)):
        prob *= edge_probability(model, i, j)
    return prob


# edge lists ----------------------------------------------------------------------

def minimal_edge_list(path: Sequence[int]) -> list[Edge]:
    return list(dict.fromkeys(path_edges(path)))


def _reaches(adj: dict, start: int, goal: int) -> bool:
    if start == goal:
        return True
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj.get(v, ()):
            if w == goal:
                return True
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return False


def cycle_inducing_edges(edge_list: Sequence[Edge]) -> list[int]:
    """Positions m whose edge (u, v) closes a simple cycle using edges 0..m only."""
    edges = [tuple(e) for e in edge_list]
    if len(set(edges)) != len(edges):
        raise ValueError("edge list contains duplicates")
    adj: dict = defaultdict(list)
    flagged = []
    for m, (u, v) in enumerate(edges):
        adj[u].append(v)
        if _reaches(adj, v, u):
            flagged.append(m)
    return flagged


def _adjacency(edges: Iterable[Edge]) -> dict:
    adj: dict = defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
    return adj


def edge_on_cycle(edges: Sequence[Edge], edge: Edge) -> bool:
    u, v = edge
    return _reaches(_adjacency(edges), v, u)


def node_on_cycle(edges: Sequence[Edge], node: int) -> bool:
    adj = _adjacency(edges)
    return any(_reaches(adj, w, node) for w in adj.get(node, ()))


@dataclass(frozen=True)
class ReducedEdgeList:
    edges: tuple[Edge, ...]
    cycle_inducing_positions: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.cycle_inducing_positions)


def reduce_edge_list(path: Sequence[int], j: int) -> ReducedEdgeList:
    """Prefix of the minimal edge list with exactly j cycle-inducing edges, front-trimmed."""
    if j < 1:
        raise ValueError("j must be at least 1")
    minimal = minimal_edge_list(path)
    flags = cycle_inducing_edges(minimal)
    if len(flags) < j:
        raise PreconditionError(f"path has {len(flags)} cycle-inducing edges, fewer than {j}")
    edges = minimal[: flags[j - 1] + 1]
    while edges and not edge_on_cycle(edges, edges[0]):
        edges = edges[1:]
    positions = cycle_inducing_edges(edges)
    assert len(positions) == j
    assert node_on_cycle(edges, edges[0][0]) and node_on_cycle(edges, edges[-1][1])
    return ReducedEdgeList(tuple(edges), tuple(positions))


@dataclass(frozen=True)
class MListDecomposition:
    lists: tuple[tuple[int, ...], ...]
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def m_lists(reduced: ReducedEdgeList, model: Optional[BiDegreeSequence] = None, tol: float = 1e-12) -> MListDecomposition:
    """Split a reduced list at its cycle-inducing edges and check the list properties."""
    if reduced.t == 0:
        raise ValueError("reduced list has no cycle-inducing edges")
    edges = list(reduced.edges)
    pieces, start = [], 0
    for pos in reduced.cycle_inducing_positions:
        pieces.append(edges[start:pos + 1])
        start = pos + 1
    if start < len(edges):
        pieces[-1] = pieces[-1] + edges[start:]
    lists = tuple(tuple([u for u, _ in piece] + [piece[-1][1]]) for piece in pieces)

    problems = []
    if not (node_on_cycle(edges, lists[0][0]) and node_on_cycle(edges, lists[-1][-1])):
        problems.append("endpoints not on a simple cycle")
    seen: set[int] = set()
    for idx, M in enumerate(lists):
        if idx > 0 and M[0] not in seen:
            problems.append(f"first node of list {idx + 1} not seen before")
        if M[-1] not in seen and M[-1] not in M[:-1]:
            problems.append(f"last node of list {idx + 1} not seen before")
        seen.update(M)
    if model is not None:
        a, b, S = _cl_vectors(model)
        via_lists = 1.0
        for M in lists:
            for x, y in zip(M[:-1], M[1:]):
                via_lists *= b[x] * a[y] / S
        direct = 1.0
        for u, v in edges:
            direct *= edge_probability(model, u, v)
        if abs(via_lists - direct) > tol:
            problems.append(f"probability identity off by {abs(via_lists - direct):.3g}")
    return MListDecomposition(lists, tuple(problems))


# exact counting ------------------------------------------------------------------

_INT_SAFE = 2 ** 62


def _max_out_degree(graph: DirectedGraph) -> int:
    return int(graph.out_degrees().max()) if graph.N and graph.n_edges else 0


def count_paths_exact(graph: DirectedGraph, r: int) -> int:
    """1ᵀ A^r 1 as an exact integer."""
    if r < 1:
        raise ValueError("r must be at least 1")
    d = _max_out_degree(graph)
    if graph.N * d ** r < _INT_SAFE:
        A = graph.adjacency(dtype=np.int64)
        v = np.ones(graph.N, dtype=np.int64)
        for _ in range(r):
            v = A @ v
        return int(v.sum())
    v = [1] * graph.N
    outs = [graph.out_neighbors(i).tolist() for i in range(graph.N)]
    for _ in range(r):
        v = [sum(v[j] for j in outs[i]) for i in range(graph.N)]
    return sum(v)


def _exact_matrix_power(A: np.ndarray, r: int, bound_base: int) -> np.ndarray:
    n = A.shape[0]
    if n * bound_base ** r < _INT_SAFE:
        return np.linalg.matrix_power(A.astype(np.int64), r)
    M = A.astype(object)
    out = M
    for _ in range(r - 1):
        out = out.dot(M)
    return out


def count_cycles_exact(graph: DirectedGraph, r: int) -> int:
    """trace(A^r): closed walks of length r, counted per starting node."""
    if r < 1:
        raise ValueError("r must be at least 1")
    Ar = _exact_matrix_power(graph.dense(), r, _max_out_degree(graph))
    return int(sum(int(Ar[i, i]) for i in range(graph.N)))


def enumerate_simple_cycles(graph: DirectedGraph, r: int) -> int:
    """Number of rotation-distinct simple cycles of length r (backtracking)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if graph.N > ENUM_MAX_N or r > ENUM_MAX_R:
        raise ValueError(f"enumeration limited to N <= {ENUM_MAX_N} and r <= {ENUM_MAX_R}")
    outs = [graph.out_neighbors(i).tolist() for i in range(graph.N)]
    if r == 1:
        return sum(1 for i in range(graph.N) if i in outs[i])
    total = 0
    for s in range(graph.N):
        # rotation representative: s is the smallest node of the cycle
        on_path = {s}

        def extend(v: int, depth: int) -> int:
            found = 0
            for w in outs[v]:
                if depth == r:
                    found += w == s
                elif w > s and w not in on_path:
                    on_path.add(w)
                    found += extend(w, depth + 1)
                    on_path.discard(w)
            return found

        total += extend(s, 1)
    return total


def simple_cycle_count(graph: DirectedGraph, r: int) -> int:
    """SC_r: simple cycles of length r counted once per rotation (r times the distinct count).

    For r <= 3 every closed walk without self-loop steps is simple, so the count
    is trace((A - diag A)^r); longer cycles fall back to enumeration.
    """
    if r == 1:
        return int(np.count_nonzero(graph.src == graph.dst))
    if r <= 3:
        A = graph.dense()
        np.fill_diagonal(A, 0)
        return int(np.trace(np.linalg.matrix_power(A, r)))
    return r * enumerate_simple_cycles(graph, r)


def count_simple_paths_from(graph: DirectedGraph, y: int, l: int) -> int:
    """Simple paths (no repeated node) with l edges starting at y."""
    if graph.N > ENUM_MAX_N:
        raise ValueError(f"enumeration limited to N <= {ENUM_MAX_N}")
    if l == 0:
        return 1
    outs = [graph.out_neighbors(i).tolist() for i in range(graph.N)]
    on_path = {y}

    def extend(v: int, depth: int) -> int:
        found = 0
        for w in outs[v]:
            if w in on_path:
                continue
            if depth == l:
                found += 1
            else:
                on_path.add(w)
                found += extend(w, depth + 1)
                on_path.discard(w)
        return found

    return extend(y, 1)


def edge_subgraph(edges: Sequence[Edge], N: Optional[int] = None) -> DirectedGraph:
    edges = list(edges)
    if N is None:
        N = 1 + max((max(u, v) for u, v in edges), default=-1)
    return DirectedGraph.from_edges(N, edges)


def simple_cycles_in(edges: Sequence[Edge], max_len: int) -> list[tuple[int, ...]]:
    """Rotation-distinct simple cycles of length <= max_len in a small edge set."""
    adj = _adjacency(sorted(set(map(tuple, edges))))
    found = []
    for s in sorted(adj):
        stack = [(s, (s,))]
        while stack:
            v, trail = stack.pop()
            for w in adj.get(v, ()):
                if w == s and len(trail) <= max_len:
                    found.append(trail)
                elif w > s and w not in trail and len(trail) < max_len:
                    stack.append((w, trail + (w,)))
    return found


# cycle block decomposition ----------------------------------------------------------

@dataclass(frozen=True)
class CycleBlockDecomposition:
    prefix: tuple[int, ...]             # simple path ending where the cycle starts
    cycle: Optional[tuple[int, ...]]    # closed simple cycle (c0, ..., c0), or None
    repeats: int
    suffix: tuple[int, ...]             # simple path starting at c0 (may be just (c0,))

    def concat(self) -> tuple[int, ...]:
        if self.cycle is None:
            return self.prefix
        out = list(self.prefix)
        for _ in range(self.repeats):
            out.extend(self.cycle[1:])
        out.extend(self.suffix[1:])
        return tuple(out)


def _is_simple(nodes: Sequence[int]) -> bool:
    return len(set(nodes)) == len(nodes)


def cycle_block_decomposition(path: Sequence[int]) -> Optional[CycleBlockDecomposition]:
    """Write a path as prefix, repeated simple cycle, suffix; None if it has over one cycle-inducing edge."""
    nodes = tuple(int(v) for v in path)
    minimal = minimal_edge_list(nodes)
    flags = cycle_inducing_edges(minimal)
    if len(flags) > 1:
        return None
    if not flags:
        assert _is_simple(nodes)
        return CycleBlockDecomposition(nodes, None, 0, ())
    closing = minimal[flags[0]]
    # the closing edge first appears at path position k, landing on an earlier node
    k = path_edges(nodes).index(closing) + 1
    c0 = nodes[k]
    p = nodes.index(c0)
    prefix = nodes[: p + 1]
    cycle = nodes[p: k + 1]
    length = len(cycle) - 1
    pos, repeats = p, 0
    while nodes[pos: pos + length + 1] == cycle:
        repeats += 1
        pos += length
    suffix = nodes[pos:]
    dec = CycleBlockDecomposition(prefix, cycle, repeats, suffix)
    assert _is_simple(prefix) and _is_simple(cycle[:-1]) and _is_simple(suffix)
    assert dec.concat() == nodes
    return dec


# block model matrix products ------------------------------------------------------------

def node_matrices(spec: PartitionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-node matrices (B_i, A_i), each of shape (N, K², K²), with Σ_i B_i A_i = P."""
    K, N = spec.K, spec.N
    labels = pair_labels(K)
    Bs = np.zeros((N, K * K, K * K))
    As = np.zeros((N, K * K, K * K))
    for x, y in labels:
        row = pair_index(x, y, K)
        S = spec.S_block(x, y)
        if S > 0:
            As[:, row, row] = spec.a_blocks[(x, y)] / S
        cols = [pair_index(u, x, K) for u in range(1, K + 1)]
        Bs[:, row, cols] = spec.b_blocks[(x, y)][:, None]
    return Bs, As


def _pattern(K: int, c: int, d: int, value: float) -> np.ndarray:
    M = np.zeros((K * K, K * K))
    row = pair_index(c, d, K)
    for u in range(1, K + 1):
        M[row, pair_index(u, c, K)] = value
    return M


def step_matrix(spec: PartitionSpec, i: int, j: int) -> np.ndarray:
    """Propagation matrix for a new edge i -> j."""
    c, d = int(spec.groups[i]), int(spec.groups[j])
    return _pattern(spec.K, c, d, edge_probability(spec, i, j))


def repeat_matrix(spec: PartitionSpec, i: int, j: int) -> np.ndarray:
    """Propagation matrix for a repeated edge i -> j (0/1 group indicator)."""
    return _pattern(spec.K, int(spec.groups[i]), int(spec.groups[j]), 1.0)


def generator_patterns(K: int) -> dict:
    """The K² distinct repeated-edge patterns, keyed by group pair."""
    return {(c, d): _pattern(K, c, d, 1.0) for c, d in pair_labels(K)}


def partitioned_expected_paths(spec: PartitionSpec, i0: int, ir: int, r: int) -> float:
    """Expected number of length-r walks i0 -> ir by the matrix-product expansion."""
    if r < 1:
        raise ValueError("r must be at least 1")
    N, K = spec.N, spec.K
    if N ** (r - 1) > TUPLE_CAP:
        raise ValueError("too many interior tuples for exact enumeration")
    steps = {}
    repeats = {}

    def step(i, j):
        if (i, j) not in steps:
            steps[(i, j)] = step_matrix(spec, i, j)
        return steps[(i, j)]

    def repeat(i, j):
        if (i, j) not in repeats:
            repeats[(i, j)] = repeat_matrix(spec, i, j)
        return repeats[(i, j)]

    total = np.zeros(K * K)
    for inner in itertools.product(range(N), repeat=r - 1):
        nodes = (i0,) + inner + (ir,)
        v = np.zeros(K * K)
        v[pair_index(int(spec.groups[nodes[0]]), int(spec.groups[nodes[1]]), K)] = edge_probability(spec, nodes[0], nodes[1])
        if not v.any():
            continue
        seen = {(nodes[0], nodes[1])}
        for k in range(1, r):
            e = (nodes[k], nodes[k + 1])
            v = (repeat(*e) if e in seen else step(*e)) @ v
            seen.add(e)
        total += v
    return float(np.abs(total).sum())


def lifted_edge_matrix(graph: DirectedGraph, spec: PartitionSpec) -> np.ndarray:
    """Block matrix whose (j, i) block is the 0/1 edge matrix of i -> j."""
    K2 = spec.K ** 2
    N = graph.N
    L = np.zeros((N * K2, N * K2))
    groups = spec.groups
    for i, j in zip(graph.src.tolist(), graph.dst.tolist()):
        L[j * K2:(j + 1) * K2, i * K2:(i + 1) * K2] = _pattern(spec.K, int(groups[i]), int(groups[j]), 1.0)
    return L


def trace_cr(graph: DirectedGraph, spec: PartitionSpec, r: int, max_dim: int = 4096) -> float:
    """Half the trace of the summed edge-matrix products over closed r-walks."""
    if graph.N != spec.N:
        raise ValueError("graph and spec disagree on N")
    if graph.N * spec.K ** 2 > max_dim:
        raise ValueError("graph too large for the lifted matrix product")
    L = lifted_edge_matrix(graph, spec)
    return 0.5 * float(np.trace(np.linalg.matrix_power(L, r)))


# exact expectations by enumeration (oracle grade) ------------------------------------------

def expected_walk_count(model: Model, r: int, closed: bool = False, simple: bool = False,
                        start: Optional[int] = None) -> float:
    """E[number of length-r walks] as a sum of distinct-edge probability products.

    ``closed`` restricts to walks returning to their start (so the total is
    E trace(A^r)); ``simple`` keeps only walks without repeated nodes (apart
    from the closing node); ``start`` fixes the first node.
    """
    P = model.probability_matrix()
    N = P.shape[0]
    free = r if closed else r + 1
    starts = range(N) if start is None else [start]
    if len(starts) * N ** (free - 1) > 50 * TUPLE_CAP:
        raise ValueError("too many walks for exact enumeration")
    flatP = P.reshape(-1)
    total = 0.0
    for s in starts:
        grids = np.indices((N,) * (free - 1)).reshape(free - 1, -1) if free > 1 else np.zeros((0, 1), dtype=np.int64)
        cols = [np.full(grids.shape[1], s)] + list(grids)
        if closed:
            cols.append(cols[0])
        nodes = np.array(cols)
        keep = np.ones(nodes.shape[1], dtype=bool)
        if simple:
            distinct = nodes[:-1] if closed else nodes
            for p in range(distinct.shape[0]):
                for q in range(p + 1, distinct.shape[0]):
                    keep &= distinct[p] != distinct[q]
        nodes = nodes[:, keep]
        codes = nodes[:-1] * N + nodes[1:]
        prob = np.ones(nodes.shape[1])
        for k in range(codes.shape[0]):
            fresh = np.ones(nodes.shape[1], dtype=bool)
            for l in range(k):
                fresh &= codes[k] != codes[l]
            prob *= np.where(fresh, flatP[codes[k]], 1.0)
        total += float(prob.sum())
    return total


def walks_by_dfs(graph: DirectedGraph, r: int, closed: bool = False) -> int:
    """Count walks by explicit depth-first enumeration (slow reference)."""
    outs = [graph.out_neighbors(i).tolist() for i in range(graph.N)]
    total = 0
    for s in range(graph.N):
        stack = [(s, 0)]
        while stack:
            v, depth = stack.pop()
            if depth == r:
                total += (not closed) or v == s
                continue
            for w in outs[v]:
                stack.append((w, depth + 1))
    return total


def iter_walks(graph: DirectedGraph, r: int, start: Optional[int] = None):
    """Yield every walk with r edges as a node tuple."""
    outs = [graph.out_neighbors(i).tolist() for i in range(graph.N)]
    starts = range(graph.N) if start is None else [start]
    for s in starts:
        stack = [(s,)]
        while stack:
            walk = stack.pop()
            if len(walk) == r + 1:
                yield walk
                continue
            for w in outs[walk[-1]]:
                stack.append(walk + (w,))


GRAPH_ENUM_MAX_N = 4


def expected_walk_matrix_by_graphs(model: Model, r: int) -> np.ndarray:
    """E[(A^r)_ij] by summing over all 2^(N²) graphs weighted by their probability."""
    P = model.probability_matrix()
    N = P.shape[0]
    if N > GRAPH_ENUM_MAX_N:
        raise ValueError(f"graph enumeration limited to N <= {GRAPH_ENUM_MAX_N}")
    codes = np.arange(2 ** (N * N), dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(N * N)) & 1).astype(bool)
    flat = P.reshape(-1)
    weights = np.prod(np.where(bits, flat, 1.0 - flat), axis=1)
    A = bits.reshape(-1, N, N).astype(float)
    Ar = np.linalg.matrix_power(A, r)
    return np.einsum("g,gij->ij", weights, Ar)
