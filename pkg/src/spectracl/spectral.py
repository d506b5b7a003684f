"""Spectral radii of nonnegative matrices and the block predictor matrix.

The radius is found by power iteration on ``M + I``.  Adding the identity
shifts every eigenvalue by exactly one, which removes the oscillation that
periodic nonnegative matrices (directed cycles, bipartite structure) cause in
plain power iteration.  Reducible inputs are split into strongly connected
components first: the radius of a nonnegative matrix is the largest radius of
its irreducible diagonal blocks, and on an irreducible block the shifted
iteration converges geometrically.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .degree_model import PartitionSpec, ensure_valid
from .graph_gen import DirectedGraph


@dataclass(frozen=True)
class SpectralEstimate:
    rho: float
    iterations: int
    residual: float
    converged: bool = True


def _as_matrix(obj) -> Union[np.ndarray, sp.csr_matrix]:
    if isinstance(obj, DirectedGraph):
        return obj.adjacency()
    if isinstance(obj, PMatrix):
        return obj.entries
    if sp.issparse(obj):
        return sp.csr_matrix(obj, dtype=float)
    return np.asarray(obj, dtype=float)


def _shifted_power(M, tol: float, max_iter: int) -> SpectralEstimate:
    n = M.shape[0]
    x = np.full(n, 1.0 / n)
    rho, residual = 0.0, np.inf
    for it in range(1, max_iter + 1):
        z = M @ x
        rho = float(z.sum())  # x >= 0 with unit l1 norm
        residual = float(np.abs(z - rho * x).sum())
        if residual <= tol:
            return SpectralEstimate(rho, it, residual, True)
        y = z + x
        x = y / y.sum()
    return SpectralEstimate(rho, max_iter, residual, False)


def spectral_radius(graph_or_matrix, tol: float = 1e-10, max_iter: int | None = None) -> SpectralEstimate:
    """Spectral radius of a nonnegative matrix (or graph adjacency)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = _as_matrix(graph_or_matrix)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return SpectralEstimate(0.0, 0, 0.0, True)
    data = M.data if sp.issparse(M) else M
    if np.any(data < 0):
        raise ValueError("matrix must be entrywise nonnegative")
    if max_iter is None:
        max_iter = 100 * n + 1000

    S = sp.csr_matrix(M)
    n_comp, labels = connected_components(S, directed=True, connection="strong")
    diag = S.diagonal()
    best = SpectralEstimate(0.0, 0, 0.0, True)
    iterations = 0
    all_converged = True
    sizes = np.bincount(labels, minlength=n_comp)
    # singleton components: radius is the diagonal entry
    single = sizes[labels] == 1
    if single.any():
        r = float(diag[single].max())
        if r > best.rho:
            best = SpectralEstimate(r, 0, 0.0, True)
    for c in np.flatnonzero(sizes > 1):
        idx = np.flatnonzero(labels == c)
        block = S[idx][:, idx]
        if not sp.issparse(M) and idx.size <= 64:
            block = block.toarray()
        est = _shifted_power(block, tol, max_iter)
        iterations += est.iterations
        all_converged &= est.converged
        if est.rho > best.rho:
            best = est
    if not all_converged:
        warnings.warn("power iteration did not reach the requested tolerance", RuntimeWarning, stacklevel=2)
    return SpectralEstimate(best.rho, iterations, best.residual, all_converged)


# block predictor matrix -------------------------------------------------------

def pair_index(x: int, y: int, K: int) -> int:
    """Position of ordered group pair (x, y): y is the outer index, x the inner."""
    return (y - 1) * K + (x - 1)


def pair_labels(K: int) -> list[tuple[int, int]]:
    return [(x, y) for y in range(1, K + 1) for x in range(1, K + 1)]


@dataclass(frozen=True)
class PMatrix:
    K: int
    entries: np.ndarray

    @property
    def labels(self) -> list[tuple[int, int]]:
        return pair_labels(self.K)

    def l1_norm(self) -> float:
        return float(np.abs(self.entries).sum())

    def trace_power(self, r: int) -> float:
        return float(np.trace(np.linalg.matrix_power(self.entries, r)))

    def positive_pattern_entries(self) -> np.ndarray:
        """Entries on the structural pattern (v == x); there are K**3 of them."""
        mask = pattern_mask(self.K)
        return self.entries[mask]

    def to_json(self) -> str:
        return json.dumps({
            "K": self.K,
            "labels": [f"{x},{y}" for x, y in self.labels],
            "rows": self.entries.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "PMatrix":
        data = json.loads(text)
        return cls(int(data["K"]), np.array(data["rows"], dtype=float))


def pattern_mask(K: int) -> np.ndarray:
    """Boolean K²×K² mask of entries ((x,y),(u,v)) with v == x."""
    labels = pair_labels(K)
    mask = np.zeros((K * K, K * K), dtype=bool)
    for r, (x, _y) in enumerate(labels):
        for c, (_u, v) in enumerate(labels):
            mask[r, c] = v == x
    return mask


def build_p_matrix(spec: PartitionSpec) -> PMatrix:
    """Entry ((x,y),(u,x)) = a^(u,x)·b^(x,y) / S_ux; all others zero."""
    ensure_valid(spec)
    K = spec.K
    P = np.zeros((K * K, K * K))
    for x, y in pair_labels(K):
        row = pair_index(x, y, K)
        b = spec.b_blocks[(x, y)]
        for u in range(1, K + 1):
            S = spec.S_block(u, x)
            if S > 0:
                P[row, pair_index(u, x, K)] = float(np.dot(spec.a_blocks[(u, x)], b)) / S
    return PMatrix(K, P)


def rho_p(P: PMatrix, tol: float = 1e-12) -> float:
    return spectral_radius(P.entries, tol=tol).rho


# matrix-power bounds ------------------------------------------------------------

class PreconditionError(ValueError):
    pass


def _exact_or_float(B) -> np.ndarray:
    B = np.asarray(B)
    if np.issubdtype(B.dtype, np.integer):
        return B.astype(object)
    return B.astype(float)


def _power(B: np.ndarray, k: int) -> np.ndarray:
    out = np.eye(B.shape[0], dtype=B.dtype) if B.dtype != object else np.identity(B.shape[0], dtype=int).astype(object)
    for _ in range(k):
        out = out.dot(B)
    return out


def _dense_rho(B) -> float:
    return spectral_radius(np.asarray(B, dtype=float), tol=1e-13).rho


@dataclass(frozen=True)
class SandwichCheck:
    lower: float
    upper: float
    row_values: np.ndarray
    holds: bool


def column_sum_bounds(B, m: int, rtol: float = 1e-9) -> SandwichCheck:
    """Bracket the m-th roots of row sums of B^m by c_max^(∓1/m)·ρ(B).

    c_max is the largest row sum of B²; requires B² >= 1 entrywise.
    """
    Bx = _exact_or_float(B)
    if np.any(np.asarray(B) < 0):
        raise PreconditionError("B must be nonnegative")
    B2 = Bx.dot(Bx)
    if np.any(np.asarray(B2, dtype=float) < 1):
        raise PreconditionError("B² has an entry below 1")
    if m < 1:
        raise ValueError("m must be at least 1")
    c_max = float(max(np.asarray(B2, dtype=float).sum(axis=1)))
    rho = _dense_rho(B)
    lower = c_max ** (-1.0 / m) * rho
    upper = c_max ** (1.0 / m) * rho
    rows = np.asarray(_power(Bx, m).sum(axis=1), dtype=float) ** (1.0 / m)
    holds = bool(np.all(rows >= lower * (1 - rtol)) and np.all(rows <= upper * (1 + rtol)))
    return SandwichCheck(lower, upper, rows, holds)


def _require_power_at_least_one(B, w: int) -> None:
    if np.any(np.asarray(B) < 0):
        raise PreconditionError("B must be nonnegative")
    Bw = np.asarray(_power(_exact_or_float(B), w), dtype=float)
    if np.any(Bw < 1):
        raise PreconditionError(f"B^{w} has an entry below 1")


def entrywise_power_bound_check(B, w: int, u: int, v: int, rtol: float = 1e-9) -> bool:
    """Check ρ^v·B^u <= B^(u+v+2w) entrywise and k·ρ^v <= trace(B^(v+2w))."""
    _require_power_at_least_one(B, w)
    Bx = _exact_or_float(B)
    k = Bx.shape[0]
    rho = _dense_rho(B)
    lhs = rho ** v * np.asarray(_power(Bx, u), dtype=float)
    rhs = np.asarray(_power(Bx, u + v + 2 * w), dtype=float)
    entrywise = bool(np.all(lhs <= rhs * (1 + rtol)))
    tr = float(np.trace(np.asarray(_power(Bx, v + 2 * w), dtype=float)))
    return entrywise and k * rho ** v <= tr * (1 + rtol)


def trace_powers(B, upto: int) -> list:
    """trace(B^q) for q = 0..upto; exact for integer matrices."""
    Bx = _exact_or_float(B)
    out = []
    cur = _power(Bx, 0)
    for q in range(upto + 1):
        if q:
            cur = cur.dot(Bx)
        t = sum(cur[i, i] for i in range(cur.shape[0]))
        out.append(t if Bx.dtype == object else float(t))
    return out


def find_stable_exponent(B, w: int, r: int, check: bool = True, rtol: float = 1e-12) -> int:
    """Smallest m in [0, w-1] with trace(B^q) <= trace(B^(r-m)) for all q <= r-m."""
    if r <= w:
        raise PreconditionError("need r > w")
    if check:
        _require_power_at_least_one(B, w)
    traces = trace_powers(B, r)
    for m in range(w):
        top = traces[r - m]
        slack = 0 if isinstance(top, int) else rtol * abs(top)
        if all(traces[q] <= top + slack for q in range(r - m + 1)):
            return m
    raise PreconditionError("no stable exponent in [0, w-1]; the B^w >= 1 precondition is violated")
