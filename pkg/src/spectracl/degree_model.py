"""Expected-degree models for directed random graphs.

Two models are supported:

* ``BiDegreeSequence``: the directed Chung-Lu model, where the edge i -> j
  appears independently with probability ``b[i] * a[j] / S``.  ``a`` holds the
  expected in-degrees, ``b`` the expected out-degrees and ``S`` their common
  sum.
* ``PartitionSpec``: a block (partitioned) Chung-Lu model.  Nodes carry a group
  label in ``1..K`` and every ordered block ``(x, y)`` has its own pair of
  degree vectors, so ``p_ij = b_xy[i] * a_xy[j] / S_xy`` with ``x = group(i)``
  and ``y = group(j)``.

Degrees are real numbers.  Validation is report-style: ``validate`` never
raises, ``ensure_valid`` raises ``ModelValidationError`` carrying the report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

SUM_RTOL = 1e-9
PROB_TOL = 1e-12

Block = tuple[int, int]


class ModelValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__("invalid degree model: " + "; ".join(report.problems))
        self.report = report


@dataclass(frozen=True)
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


def _sums_match(u: float, v: float) -> bool:
    return abs(u - v) <= SUM_RTOL * max(abs(u), abs(v), 1.0)


@dataclass(frozen=True)
class BiDegreeSequence:
    """Expected in-degrees ``a`` and out-degrees ``b`` of a directed Chung-Lu model."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _as_vector(self.a, "a")
        b = _as_vector(self.b, "b")
        if a.shape != b.shape:
            raise ValueError(f"a and b differ in length ({a.size} vs {b.size})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return int(self.a.size)

    @property
    def S(self) -> float:
        return float(self.a.sum())

    def probability_matrix(self) -> np.ndarray:
        S = self.S
        if S == 0:
            return np.zeros((self.N, self.N))
        return np.outer(self.b, self.a) / S

    def scaled(self, c: float) -> "BiDegreeSequence":
        return BiDegreeSequence(self.a * c, self.b * c)


@dataclass(frozen=True)
class PartitionSpec:
    """Block Chung-Lu model with ``K`` groups.

    ``groups`` holds 1-based labels.  ``a_blocks[(x, y)]`` is a length-N vector
    supported on group ``y`` (expected column sums of block ``(x, y)``) and
    ``b_blocks[(x, y)]`` is supported on group ``x`` (expected row sums).
    Blocks missing from the mappings are empty.
    """

    K: int
    groups: np.ndarray
    a_blocks: dict
    b_blocks: dict

    def __post_init__(self):
        groups = np.array(self.groups, dtype=np.int64).reshape(-1)
        groups.setflags(write=False)
        if self.K < 1:
            raise ValueError("K must be at least 1")
        n = groups.size
        a_blocks, b_blocks = {}, {}
        for x in range(1, self.K + 1):
            for y in range(1, self.K + 1):
                a = self.a_blocks.get((x, y))
                b = self.b_blocks.get((x, y))
                a = np.zeros(n) if a is None else _as_vector(a, f"a{(x, y)}")
                b = np.zeros(n) if b is None else _as_vector(b, f"b{(x, y)}")
                if a.size != n or b.size != n:
                    raise ValueError(f"block {(x, y)} vectors must have length {n}")
                a_blocks[(x, y)] = a
                b_blocks[(x, y)] = b
        extra = (set(self.a_blocks) | set(self.b_blocks)) - set(a_blocks)
        if extra:
            raise ValueError(f"blocks outside 1..K: {sorted(extra)}")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "a_blocks", a_blocks)
        object.__setattr__(self, "b_blocks", b_blocks)

    @property
    def N(self) -> int:
        return int(self.groups.size)

    def blocks(self) -> list[Block]:
        return [(x, y) for y in range(1, self.K + 1) for x in range(1, self.K + 1)]

    def S_block(self, x: int, y: int) -> float:
        return float(self.a_blocks[(x, y)].sum())

    @property
    def S(self) -> float:
        return sum(self.S_block(x, y) for x, y in self.blocks())

    def members(self, x: int) -> np.ndarray:
        return np.flatnonzero(self.groups == x)

    def probability_matrix(self) -> np.ndarray:
        n = self.N
        P = np.zeros((n, n))
        for x, y in self.blocks():
            S = self.S_block(x, y)
            if S <= 0:
                continue
            rows, cols = self.members(x), self.members(y)
            P[np.ix_(rows, cols)] = np.outer(self.b_blocks[(x, y)][rows], self.a_blocks[(x, y)][cols]) / S
        return P

    def aggregate(self) -> BiDegreeSequence:
        """Total expected in/out degrees, ignoring block structure."""
        a = sum(self.a_blocks.values())
        b = sum(self.b_blocks.values())
        return BiDegreeSequence(a, b)

    def scaled(self, c: float) -> "PartitionSpec":
        return PartitionSpec(
            self.K,
            self.groups,
            {k: v * c for k, v in self.a_blocks.items()},
            {k: v * c for k, v in self.b_blocks.items()},
        )

    @classmethod
    def from_chung_lu(cls, seq: BiDegreeSequence, groups: Iterable[int], K: int | None = None) -> "PartitionSpec":
        """Block model whose edge probabilities equal those of ``seq``.

        With ``B_x`` the out-degree mass of group x and ``A_y`` the in-degree
        mass of group y, block (x, y) gets ``b * A_y / S`` on group x and
        ``a * B_x / S`` on group y, so ``S_xy = B_x A_y / S``.
        """
        groups = np.array(list(groups), dtype=np.int64)
        K = int(groups.max()) if K is None else K
        S = seq.S
        a_blocks, b_blocks = {}, {}
        for x in range(1, K + 1):
            for y in range(1, K + 1):
                in_x, in_y = groups == x, groups == y
                Bx = seq.b[in_x].sum()
                Ay = seq.a[in_y].sum()
                b_blocks[(x, y)] = np.where(in_x, seq.b * Ay / S, 0.0) if S > 0 else np.zeros(seq.N)
                a_blocks[(x, y)] = np.where(in_y, seq.a * Bx / S, 0.0) if S > 0 else np.zeros(seq.N)
        return cls(K, groups, a_blocks, b_blocks)

    @classmethod
    def uniform_blocks(cls, sizes: list[int], block_edges: np.ndarray) -> "PartitionSpec":
        """Stochastic-block-style spec: ``block_edges[x-1, y-1]`` expected edges spread evenly."""
        K = len(sizes)
        groups = np.repeat(np.arange(1, K + 1), sizes)
        a_blocks, b_blocks = {}, {}
        for x in range(1, K + 1):
            for y in range(1, K + 1):
                Sxy = float(block_edges[x - 1][y - 1])
                b_blocks[(x, y)] = np.where(groups == x, Sxy / sizes[x - 1], 0.0)
                a_blocks[(x, y)] = np.where(groups == y, Sxy / sizes[y - 1], 0.0)
        return cls(K, groups, a_blocks, b_blocks)


Model = Union[BiDegreeSequence, PartitionSpec]


def _check_vectors(a: np.ndarray, b: np.ndarray, label: str, problems: list[str]) -> bool:
    fine = True
    for name, v in (("a", a), ("b", b)):
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            problems.append(f"{label}{name} not finite at {bad[:10].tolist()}")
            fine = False
            continue
        neg = np.flatnonzero(v < 0)
        if neg.size:
            problems.append(f"{label}{name} negative at {neg[:10].tolist()}")
            fine = False
    return fine


def _check_pair(a: np.ndarray, b: np.ndarray, label: str, problems: list[str]) -> None:
    if not _check_vectors(a, b, label, problems):
        return
    sa, sb = float(a.sum()), float(b.sum())
    if not _sums_match(sa, sb):
        problems.append(f"{label}Σa≠Σb ({sa:.12g} vs {sb:.12g})")
        return
    S = sa
    if S == 0:
        return
    i, j = int(np.argmax(b)), int(np.argmax(a))
    if b[i] * a[j] > S * (1 + PROB_TOL):
        problems.append(f"{label}p_ij>1 possible: b[{i}]*a[{j}] = {b[i] * a[j]:.6g} > S = {S:.6g}")


def validate(model: Model) -> ValidationReport:
    """Check every model invariant; never raises."""
    problems: list[str] = []
    if isinstance(model, BiDegreeSequence):
        if model.N < 1:
            problems.append("N must be at least 1")
        _check_pair(model.a, model.b, "", problems)
    elif isinstance(model, PartitionSpec):
        if model.N < 1:
            problems.append("N must be at least 1")
        bad = np.flatnonzero((model.groups < 1) | (model.groups > model.K))
        if bad.size:
            problems.append(f"group labels outside 1..{model.K} at {bad[:10].tolist()}")
        for x, y in model.blocks():
            a, b = model.a_blocks[(x, y)], model.b_blocks[(x, y)]
            off_a = np.flatnonzero((model.groups != y) & (a != 0))
            off_b = np.flatnonzero((model.groups != x) & (b != 0))
            if off_a.size:
                problems.append(f"block {x},{y}: a nonzero outside group {y} at {off_a[:10].tolist()}")
            if off_b.size:
                problems.append(f"block {x},{y}: b nonzero outside group {x} at {off_b[:10].tolist()}")
            _check_pair(a, b, f"block {x},{y}: ", problems)
    else:
        problems.append(f"unsupported model type {type(model).__name__}")
    return ValidationReport(problems)


def ensure_valid(model: Model) -> Model:
    report = validate(model)
    if not report.ok:
        raise ModelValidationError(report)
    return model


def edge_probability(model: Model, i: int, j: int) -> float:
    if isinstance(model, BiDegreeSequence):
        S = model.S
        return 0.0 if S == 0 else float(model.b[i] * model.a[j] / S)
    x, y = int(model.groups[i]), int(model.groups[j])
    S = model.S_block(x, y)
    if S <= 0:
        return 0.0
    return float(model.b_blocks[(x, y)][i] * model.a_blocks[(x, y)][j] / S)


def cl_predictor(model: Model) -> float:
    """Chung-Lu spectral-radius predictor a·b/S (aggregated degrees for block models)."""
    seq = model.aggregate() if isinstance(model, PartitionSpec) else model
    S = seq.S
    if S == 0:
        raise ValueError("empty model: S = 0")
    return float(np.dot(seq.a, seq.b) / S)


def p_max(model: Model) -> float:
    """Largest edge probability, from per-block maxima (no N² scan)."""
    if isinstance(model, BiDegreeSequence):
        S = model.S
        return 0.0 if S == 0 else float(model.a.max() * model.b.max() / S)
    best = 0.0
    for x, y in model.blocks():
        S = model.S_block(x, y)
        if S > 0:
            best = max(best, float(model.a_blocks[(x, y)].max() * model.b_blocks[(x, y)].max() / S))
    return best


# persistence ---------------------------------------------------------------

def load_sequence_csv(path: Union[str, Path]) -> BiDegreeSequence:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["node_id"]))
    ids = [int(r["node_id"]) for r in rows]
    if ids != list(range(len(ids))):
        raise ValueError("node_id column must enumerate 0..N-1")
    return BiDegreeSequence([float(r["a"]) for r in rows], [float(r["b"]) for r in rows])


def save_sequence_csv(seq: BiDegreeSequence, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "a", "b"])
        for i, (ai, bi) in enumerate(zip(seq.a, seq.b)):
            w.writerow([i, repr(float(ai)), repr(float(bi))])


def sequence_to_dict(seq: BiDegreeSequence) -> dict:
    return {"a": seq.a.tolist(), "b": seq.b.tolist()}


def spec_to_dict(spec: PartitionSpec) -> dict:
    return {
        "K": spec.K,
        "groups": spec.groups.tolist(),
        "blocks": {
            f"{x},{y}": {"a": spec.a_blocks[(x, y)].tolist(), "b": spec.b_blocks[(x, y)].tolist()}
            for x, y in spec.blocks()
        },
    }


def model_from_dict(data: dict) -> Model:
    if "blocks" in data:
        a_blocks, b_blocks = {}, {}
        for key, vecs in data["blocks"].items():
            x, y = (int(t) for t in key.split(","))
            a_blocks[(x, y)] = vecs["a"]
            b_blocks[(x, y)] = vecs["b"]
        return PartitionSpec(int(data["K"]), data["groups"], a_blocks, b_blocks)
    return BiDegreeSequence(data["a"], data["b"])


def model_to_dict(model: Model) -> dict:
    if isinstance(model, PartitionSpec):
        return spec_to_dict(model)
    return sequence_to_dict(model)


def load_model(path: Union[str, Path]) -> Model:
    """Load a model from ``.csv`` (Chung-Lu only) or ``.json``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_sequence_csv(path)
    return model_from_dict(json.loads(path.read_text()))


def save_model(model: Model, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        if not isinstance(model, BiDegreeSequence):
            raise ValueError("CSV format holds Chung-Lu sequences only")
        save_sequence_csv(model, path)
    else:
        path.write_text(json.dumps(model_to_dict(model)))
