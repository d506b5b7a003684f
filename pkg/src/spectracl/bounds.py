"""Closed-form moment and concentration bounds for path and cycle counts.

Throughout, ``predictor`` is the Chung-Lu value a·b/S (or ρ(P) for the block
model), ``r`` a path or cycle length and ``p_max`` the largest edge
probability.  Large powers are evaluated in log space, so ``predictor**r``
with r in the hundreds does not overflow.

Every function checks the inequalities its formula relies on.  Scalar bounds
raise ``RegimeError`` naming the failed inequalities; concentration results
return a ``Regime`` alongside the numbers.  A probability bound that carries
no information (a failure probability >= 1) is reported as vacuous rather
than clamped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .degree_model import PartitionSpec, ensure_valid
from .path_lab import generator_patterns
from .spectral import PMatrix, build_p_matrix, pair_index, pair_labels, pattern_mask, rho_p as _rho_p


# regime bookkeeping -----------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    conditions: tuple[tuple[str, bool], ...]

    @property
    def ok(self) -> bool:
        return all(flag for _, flag in self.conditions)

    def failed(self) -> list[str]:
        return [name for name, flag in self.conditions if not flag]

    def as_dict(self) -> dict[str, bool]:
        return dict(self.conditions)

    def __bool__(self) -> bool:
        return self.ok


def regime(*pairs: tuple[str, bool]) -> Regime:
    return Regime(tuple((name, bool(flag)) for name, flag in pairs))


class RegimeError(ValueError):
    def __init__(self, reg: Regime):
        super().__init__("outside the bound's regime: " + ", ".join(reg.failed()))
        self.regime = reg


def _require(*pairs: tuple[str, bool]) -> Regime:
    reg = regime(*pairs)
    if not reg.ok:
        raise RegimeError(reg)
    return reg


@dataclass(frozen=True)
class ProbabilityBound:
    """Bound on the probability of a bad event: Pr(bad) <= value."""

    value: float
    regime: Regime
    r: Optional[int] = None

    @property
    def vacuous(self) -> bool:
        return not (self.value < 1)

    @property
    def success(self) -> float:
        """The matching lower bound 1 - value on the good event."""
        return 1.0 - self.value


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _pow(base: float, e: float) -> float:
    if base == 0:
        return 1.0 if e == 0 else 0.0
    return _exp(e * math.log(base))


# Chung-Lu moments ---------------------------------------------------------------------

def paths_lower(b_y: float, predictor: float, r: int) -> float:
    """Lower bound on expected paths of length r starting at a node of out-weight b_y."""
    return b_y * _pow(predictor, r - 1)


def paths_lower_total(S: float, predictor: float, r: int) -> float:
    return S * _pow(predictor, r - 1)


def _paths_upper_log_correction(predictor: float, p_max: float, r: int) -> float:
    x = r / predictor
    return p_max * x * x / (1 - x)


def paths_upper_log(b_y: float, predictor: float, p_max: float, r: int) -> float:
    _require(("predictor > 2", predictor > 2), ("r < predictor", r < predictor))
    return _log(2 * b_y) + (r - 1) * math.log(predictor) + _paths_upper_log_correction(predictor, p_max, r)


def paths_upper(b_y: float, predictor: float, p_max: float, r: int) -> float:
    """Upper bound on expected paths of length r from a node of out-weight b_y."""
    return _exp(paths_upper_log(b_y, predictor, p_max, r))


def trace_lower(predictor: float, r: int) -> float:
    """Lower bound on E trace(A^r)."""
    return _pow(predictor, r)


def trace_variance_upper(E_trace: float, predictor: float, p_max: float, r: int) -> float:
    """Upper bound on Var trace(A^r), given its mean E_trace."""
    _require(("2r < predictor", 2 * r < predictor))
    x = 2 * r / predictor
    bracket = math.expm1(x * x * p_max / (1 - x)) + _pow(x, r)
    return E_trace + E_trace * _pow(predictor, r) * bracket


def janson_tail(E_T: float, Cov: float, beta: float) -> float:
    """Lower bound on Pr(T >= (1 - beta)·E_T) for a sum of positively related indicators."""
    if not 0 <= beta <= 1:
        raise ValueError("beta must lie in [0, 1]")
    if E_T < 0 or Cov < 0:
        raise ValueError("E_T and Cov must be nonnegative")
    if E_T + Cov == 0:
        return 0.0
    return -math.expm1(-0.5 * (beta * E_T) ** 2 / (E_T + Cov))


def simple_cycle_mean_lower(predictor: float, p_max: float, r: int) -> float:
    return _pow(predictor, r) - math.comb(r, 2) * p_max * _pow(predictor, r - 1)


def simple_cycle_variance_upper(E_sc: float, predictor: float, p_max: float, r: int) -> float:
    _require(("predictor > 1", predictor > 1))
    inner = p_max * r * r / predictor ** 2 / (1 - 1 / predictor)
    return E_sc * (r + _pow(predictor, r) * math.expm1(inner))


# concentration ---------------------------------------------------------------------

@dataclass(frozen=True)
class UpperConcentration:
    epsilon: float
    r: int
    regime: Regime
    markov_tail: ProbabilityBound      # Pr(ρ > (1+ε)·predictor) <= value
    rho_high_probability: float        # ρ <= this with probability >= 1 - 1/N

    @property
    def guaranteed(self) -> Optional[float]:
        """1 - ε when every regime condition holds."""
        return 1 - self.epsilon if self.regime.ok else None


def markov_upper_tail(predictor: float, S: float, p_max: float, r: int, epsilon: float) -> ProbabilityBound:
    """Markov bound on Pr(ρ(A) > (1+ε)·predictor) from the expected count of r-paths."""
    reg = regime(("predictor > 2", predictor > 2), ("r < predictor", r < predictor), ("epsilon > 0", epsilon > 0))
    if not reg.ok:
        return ProbabilityBound(math.inf, reg, r)
    log_value = (
        math.log(2 * S / predictor)
        + _paths_upper_log_correction(predictor, p_max, r)
        - r * math.log1p(epsilon)
    )
    return ProbabilityBound(_exp(log_value), reg, r)


def upper_concentration(predictor: float, S: float, N: int, p_max: float, r: int, epsilon: float) -> UpperConcentration:
    x = r / predictor
    reg = regime(
        ("0 < epsilon < 1/2", 0 < epsilon < 0.5),
        ("r/predictor < 1/2", x < 0.5),
        ("r/predictor^2 < epsilon/20", r / predictor ** 2 < epsilon / 20),
        ("log(N)/r < epsilon/20", math.log(N) / r < epsilon / 20),
        ("1/N < epsilon", 1 / N < epsilon),
    )
    tail = markov_upper_tail(predictor, S, p_max, r, epsilon)
    if x < 1:
        rho_hp = _exp(math.log(2 * N * S) / r + math.log(predictor) + p_max * r / predictor ** 2 / (1 - x))
    else:
        rho_hp = math.inf
    return UpperConcentration(epsilon, r, reg, tail, rho_hp)


@dataclass(frozen=True)
class LowerConcentration:
    epsilon: float
    r: int
    regime: Regime
    janson_failure: float          # failure probability from the full Janson chain
    simplified_failure: float      # exp(-predictor^2 / (96 r^2))
    rho_lower_factor: float        # ρ >= factor·predictor on the good event

    @property
    def certified(self) -> bool:
        """Conditions hold and the chain really delivers failure probability <= ε."""
        return self.regime.ok and self.simplified_failure <= self.epsilon

    @property
    def guaranteed(self) -> Optional[float]:
        return 1 - self.epsilon if self.certified else None


def janson_cycle_failure(predictor: float, p_max: float, r: int, E_cycles: Optional[float] = None) -> float:
    """exp(-E/(8(1 + r^r + predictor^r[exp(p_max x^2/(1-x)) - 1]))) with x = 2r/predictor.

    The expression decreases in E, so the default E = predictor^r (a lower
    bound on the mean cycle count) keeps it valid.
    """
    x = 2 * r / predictor
    if x >= 1:
        return math.inf
    log_E = r * math.log(predictor) if E_cycles is None else math.log(E_cycles)
    # E / (1 + r^r + predictor^r·g) computed as exp(log E - log denominator)
    g = math.expm1(p_max * x * x / (1 - x))
    terms = [0.0, r * math.log(r)]
    if g > 0:
        terms.append(r * math.log(predictor) + math.log(g))
    top = max(terms)
    log_den = top + math.log(sum(math.exp(t - top) for t in terms))
    ratio = _exp(log_E - log_den)
    return math.exp(-ratio / 8) if ratio < math.inf else 0.0


def lower_concentration(predictor: float, S: float, N: int, p_max: float, r: int, epsilon: float) -> LowerConcentration:
    x = r / predictor
    cap = math.sqrt(-96 / math.log(epsilon)) if 0 < epsilon < 1 else 0.0
    reg = regime(
        ("0 < epsilon < 1", 0 < epsilon < 1),
        ("r/predictor < min(1/10, sqrt(-96/log epsilon))", x < min(0.1, cap)),
        ("log(2N)/r < epsilon/3", math.log(2 * N) / r < epsilon / 3),
    )
    simplified = math.exp(-1 / (96 * x * x))
    return LowerConcentration(
        epsilon, r, reg,
        janson_cycle_failure(predictor, p_max, r),
        simplified,
        _exp(-math.log(2 * N) / r),
    )


@dataclass(frozen=True)
class CurvePoint:
    epsilon: float
    bound: float
    r: Optional[int]
    vacuous: bool


@dataclass(frozen=True)
class ConcentrationCurve:
    name: str
    points: tuple[CurvePoint, ...]
    regime: Regime = field(default_factory=lambda: regime())

    def values(self) -> np.ndarray:
        return np.array([p.bound for p in self.points])

    def epsilons(self) -> np.ndarray:
        return np.array([p.epsilon for p in self.points])


def _r_grid(limit: float) -> list[int]:
    """Integers in [1, limit); every one when few, otherwise a log-spaced sample."""
    top = math.ceil(limit) - 1
    if top < 1:
        return []
    if top <= 5000:
        return list(range(1, top + 1))
    return sorted(set(np.unique(np.geomspace(1, top, 2000).astype(int)).tolist()))


def upper_tail_curve(predictor: float, S: float, p_max: float, epsilons: Iterable[float],
                     r_values: Optional[Sequence[int]] = None) -> ConcentrationCurve:
    """Markov tail bound on Pr(ρ > (1+ε)·predictor), minimized over r < predictor."""
    rs = list(r_values) if r_values is not None else _r_grid(predictor)
    points = []
    for eps in epsilons:
        best: Optional[ProbabilityBound] = None
        for r in rs:
            b = markov_upper_tail(predictor, S, p_max, r, eps)
            if best is None or b.value < best.value:
                best = b
        if best is None or not best.regime.ok:
            points.append(CurvePoint(float(eps), math.inf, None, True))
        else:
            points.append(CurvePoint(float(eps), best.value, best.r, best.vacuous))
    return ConcentrationCurve("markov_upper", tuple(points), regime(("predictor > 2", predictor > 2)))


def lower_tail_curve(predictor: float, N: int, p_max: float, epsilons: Iterable[float],
                     variant: str = "janson") -> ConcentrationCurve:
    """Bound on Pr(ρ < (1-ε)·predictor) through the cycle-count lower tail.

    A length r certifies the factor (1-ε) once (2N)^(-1/r) >= 1-ε; among those
    r with 2r < predictor the smallest failure probability is kept.  With
    ``variant="simplified"`` the failure probability is exp(-predictor²/(96r²)),
    subject to r < predictor/10.
    """
    points = []
    for eps in epsilons:
        if not 0 < eps < 1:
            points.append(CurvePoint(float(eps), math.inf, None, True))
            continue
        r_min = max(1, math.ceil(math.log(2 * N) / -math.log1p(-eps)))
        if variant == "janson":
            limit = predictor / 2
            fail = lambda r: janson_cycle_failure(predictor, p_max, r)
        elif variant == "simplified":
            limit = predictor / 10
            fail = lambda r: math.exp(-predictor ** 2 / (96 * r * r))
        else:
            raise ValueError(f"unknown variant {variant!r}")
        candidates = [r for r in range(r_min, math.ceil(limit)) if r < limit]
        if not candidates:
            points.append(CurvePoint(float(eps), 1.0, None, True))
            continue
        r_best = min(candidates, key=fail)
        value = fail(r_best)
        points.append(CurvePoint(float(eps), value, r_best, not value < 1))
    return ConcentrationCurve(f"lower_{variant}", tuple(points))


# sparse regime ------------------------------------------------------------------------

def cycle_edge_rarity(N: float, R: float, tau: float, t: int, predictor: float,
                      p_max: Optional[float] = None) -> tuple[float, float]:
    """(L, ε): paths of length <= L carry fewer than t cycle-inducing edges with probability >= 1-ε."""
    conds = [("predictor > 1", predictor > 1), ("t >= 2", t >= 2)]
    if p_max is not None:
        conds.append(("p_max <= R/N^tau", p_max <= R / N ** tau))
    _require(*conds)
    L = (t - 1) * tau / 2 * math.log(N) / math.log(predictor)
    log_eps = math.log(t) + (t - 1) * _log(R) + (3 * t - 2) * math.log(L + 1) - (t - 1) * tau / 2 * math.log(N)
    return L, _exp(log_eps)


def _p_star(N: float, R: float, tau: float, L: float, t: int) -> float:
    return 1 - t * R ** (t - 1) * (L + 1) ** (3 * t - 2) / N ** ((t - 1) * tau / 2)


@dataclass(frozen=True)
class SparsePathsBound:
    value: float
    eta: float
    growth: float            # η^(4/(τ log N)), log taken in the predictor's base
    pr_good: float           # lower bound on Pr(G in the good set)
    regime: Regime

    @property
    def vacuous(self) -> bool:
        return not (self.pr_good > 0) or not math.isfinite(self.value)


def sparse_paths_upper(b_y: float, predictor: float, N: float, tau: float, m: int, r: int,
                       p_max: float, R: float) -> SparsePathsBound:
    """Expected r-paths from y, conditioned on the graph avoiding cycle-dense short paths."""
    logN = math.log(N) / math.log(predictor) if predictor > 1 else math.nan
    quarter = tau / 4 * logN
    eta = 3 * (m + 1) * quarter ** 2 * math.exp(2 * m)
    growth = _exp(4 / (tau * logN) * math.log(eta)) if quarter > 0 and eta > 0 else math.inf
    reg = regime(
        ("predictor > 1", predictor > 1),
        ("m >= 1", m >= 1),
        ("(tau/4) log N > 1", quarter > 1),
        ("eta^(4/(tau log N)) < predictor", growth < predictor),
        ("(m-1)(tau/2) log N <= r", (m - 1) * tau / 2 * logN <= r),
        ("r <= m (tau/2) log N", r <= m * tau / 2 * logN),
        ("p_max <= R/N^tau", p_max <= R / N ** tau),
    )
    pr_good = _p_star(N, R, tau, tau * logN / 2, 2) + _p_star(N, R, tau, r, m + 1) - 1
    if not reg.ok or pr_good <= 0:
        return SparsePathsBound(math.inf, eta, growth, pr_good, reg)
    log_value = (
        math.log(b_y) - math.log(pr_good) - math.log1p(-1 / predictor)
        + (r - 1) * math.log(predictor)
        + r * eta * p_max * growth / predictor ** 2 / (1 - growth / predictor)
    )
    return SparsePathsBound(_exp(log_value), eta, growth, pr_good, reg)


# appendix inequality -------------------------------------------------------------------

EXPINEQ_MAX = 12


def _compositions(r: int, m: int):
    """All (k_1..k_m) with Σ i·k_i <= r."""
    def rec(i: int, left: int):
        if i > m:
            yield ()
            return
        for k in range(left // i + 1):
            for rest in rec(i + 1, left - i * k):
                yield (k,) + rest
    yield from rec(1, r)


def expineq(l: int, m: int, r: int, alpha: float, beta: float) -> tuple[float, float]:
    """Exact multinomial sum (lhs) and its exponential bound (rhs)."""
    if not beta < 1:
        raise ValueError("beta must be below 1")
    if not 1 <= l < m:
        raise ValueError("need 1 <= l < m")
    rhs = _exp(l * r * alpha / (1 - beta))
    if r > EXPINEQ_MAX or m > EXPINEQ_MAX:
        raise ValueError(f"exact enumeration limited to r, m <= {EXPINEQ_MAX}")
    a, b = Fraction(alpha), Fraction(beta)
    lhs = Fraction(0)
    for ks in _compositions(r, m):
        k0 = r - sum(i * k for i, k in enumerate(ks, start=1))
        total = k0 + sum(ks)
        coef = math.factorial(total) // math.factorial(k0)
        for k in ks:
            coef //= math.factorial(k)
        term = Fraction(coef)
        for i, k in enumerate(ks, start=1):
            if k:
                term *= a ** k if i <= l else a ** k * b ** ((i - l) * k)
        lhs += term
    return float(lhs), rhs


# block model --------------------------------------------------------------------------

class ConditionUnsatisfiable(ValueError):
    pass


def pattern_closure(K: int, max_size: int = 1000) -> list[np.ndarray]:
    """All products of repeated-edge patterns (the semigroup they generate)."""
    gens = list(generator_patterns(K).values())
    found: dict[bytes, np.ndarray] = {}
    frontier = []
    for g in gens:
        key = (g != 0).tobytes()
        if key not in found:
            found[key] = g
            frontier.append(g)
    while frontier:
        nxt = []
        for M in frontier:
            for g in gens:
                prod = (g @ M != 0).astype(float)
                key = (prod != 0).tobytes()
                if key not in found:
                    found[key] = prod
                    nxt.append(prod)
        if len(found) > max_size:
            raise RuntimeError("pattern closure did not stabilise")
        frontier = nxt
    return list(found.values())


def max_degree_matrices(spec: PartitionSpec) -> tuple[np.ndarray, np.ndarray]:
    K = spec.K
    Bmax = np.zeros((K * K, K * K))
    Amax = np.zeros((K * K, K * K))
    for x, y in pair_labels(K):
        row = pair_index(x, y, K)
        for u in range(1, K + 1):
            Bmax[row, pair_index(u, x, K)] = spec.b_blocks[(x, y)].max()
        S = spec.S_block(x, y)
        if S > 0:
            Amax[row, row] = spec.a_blocks[(x, y)].max() / S
    return Bmax, Amax


@dataclass(frozen=True)
class AlphaReport:
    alpha: float                 # least α over entries where P > 0
    closure_size: int
    off_support: int             # positive left-side entries where P == 0

    @property
    def satisfiable(self) -> bool:
        return self.off_support == 0


def alpha_report(spec: PartitionSpec, P: Optional[PMatrix] = None) -> AlphaReport:
    ensure_valid(spec)
    P = build_p_matrix(spec) if P is None else P
    Bmax, Amax = max_degree_matrices(spec)
    closure = pattern_closure(spec.K)
    support = P.entries > 0
    alpha, off = 0.0, 0
    for M in closure:
        L = Bmax @ M @ Amax
        off += int(np.count_nonzero((L > 0) & ~support))
        if support.any():
            ratio = np.where(support, L / np.where(support, P.entries, 1.0), 0.0)
            alpha = max(alpha, float(ratio.max()))
    return AlphaReport(alpha, len(closure), off)


def alpha_condition(spec: PartitionSpec, strict: bool = True) -> float:
    """Least α with B_max·M·A_max <= α·P over all repeated-edge products M.

    With ``strict`` the comparison covers every entry, and any positive entry
    facing a zero of P makes the condition unsatisfiable.  Otherwise only the
    support of P is compared.
    """
    rep = alpha_report(spec)
    if strict and not rep.satisfiable:
        raise ConditionUnsatisfiable(
            f"condition unsatisfiable: {rep.off_support} positive entries meet zeros of P"
        )
    return rep.alpha


def c_max(P: PMatrix) -> float:
    """Largest column sum of P²."""
    P2 = P.entries @ P.entries
    return float(P2.sum(axis=0).max())


def pattern_entries_at_least(P: PMatrix, threshold: float = 1.0) -> bool:
    return bool(np.all(P.positive_pattern_entries() >= threshold))


def partitioned_paths_upper(S_total: float, c_max_value: float, rho: float, alpha: float, r: int) -> float:
    _require(("rho(P) > 2", rho > 2), ("r < rho(P)", r < rho))
    x = r / rho
    log_value = math.log(8 * S_total * c_max_value) + (r - 1) * math.log(rho) + r * r * alpha / rho / (1 - x)
    return _exp(log_value)


def partitioned_markov_tail(S_total: float, c_max_value: float, rho: float, alpha: float, r: int,
                            epsilon: float) -> ProbabilityBound:
    reg = regime(("rho(P) > 2", rho > 2), ("r < rho(P)", r < rho), ("epsilon > 0", epsilon > 0))
    if not reg.ok:
        return ProbabilityBound(math.inf, reg, r)
    x = r / rho
    log_value = (
        math.log(8 * S_total * c_max_value / rho)
        + r * r * alpha / rho / (1 - x)
        - r * math.log1p(epsilon)
    )
    return ProbabilityBound(_exp(log_value), reg, r)


@dataclass(frozen=True)
class PartitionedUpperConcentration:
    epsilon: float
    r: int
    regime: Regime
    markov_tail: ProbabilityBound

    @property
    def certified(self) -> bool:
        return self.regime.ok and self.markov_tail.value <= self.epsilon

    @property
    def guaranteed(self) -> Optional[float]:
        return 1 - self.epsilon if self.certified else None


def partitioned_upper_concentration(S_total: float, c_max_value: float, rho: float, alpha: float,
                                    N: int, r: int, epsilon: float) -> PartitionedUpperConcentration:
    """Markov bound on Pr(ρ(A) > (1+ε)ρ(P)) with conditions modelled on the Chung-Lu case."""
    reg = regime(
        ("0 < epsilon < 1/2", 0 < epsilon < 0.5),
        ("rho(P) > 2", rho > 2),
        ("r/rho(P) < 1/2", r / rho < 0.5),
        ("log(N)/r < epsilon/20", math.log(N) / r < epsilon / 20),
        ("alpha r^2/rho(P) < epsilon/20", alpha * r * r / rho < epsilon / 20),
        ("1/N < epsilon", 1 / N < epsilon),
    )
    return PartitionedUpperConcentration(epsilon, r, reg, partitioned_markov_tail(S_total, c_max_value, rho, alpha, r, epsilon))


def partitioned_upper_tail_curve(S_total: float, c_max_value: float, rho: float, alpha: float,
                                 epsilons: Iterable[float]) -> ConcentrationCurve:
    rs = _r_grid(rho)
    points = []
    for eps in epsilons:
        bounds = [partitioned_markov_tail(S_total, c_max_value, rho, alpha, r, eps) for r in rs]
        bounds = [b for b in bounds if b.regime.ok]
        if not bounds:
            points.append(CurvePoint(float(eps), math.inf, None, True))
            continue
        best = min(bounds, key=lambda b: b.value)
        points.append(CurvePoint(float(eps), best.value, best.r, best.vacuous))
    return ConcentrationCurve("partitioned_markov_upper", tuple(points), regime(("rho(P) > 2", rho > 2)))


def trace_cr_mean_lower(P: PMatrix, r: int) -> float:
    return 0.5 * P.trace_power(r)


def traces_monotone(P: PMatrix, r: int, rtol: float = 1e-12) -> bool:
    top = P.trace_power(r)
    return all(P.trace_power(q) <= top * (1 + rtol) for q in range(r + 1))


def trace_cr_variance_upper(E_tcr: float, P: PMatrix, alpha: float, r: int) -> float:
    rho = _rho_p(P)
    _require(
        ("trace(P^q) <= trace(P^r) for q <= r", traces_monotone(P, r)),
        ("pattern entries of P >= 1", pattern_entries_at_least(P)),
        ("2r < rho(P)", 2 * r < rho),
    )
    growth = math.expm1(64 * alpha * r ** 5 / (1 - 2 * r / rho))
    return E_tcr * (1 + _pow(r, r) + P.trace_power(r) * growth)


@dataclass(frozen=True)
class SimpleCycleBounds:
    mean_lower: float
    variance_factor: float

    def variance_upper(self, E_sc: float) -> float:
        return E_sc * self.variance_factor


def sc_partitioned_bounds(P: PMatrix, p_max: float, alpha: float, r: int) -> SimpleCycleBounds:
    rho = _rho_p(P)
    _require(("pattern entries of P >= 1", pattern_entries_at_least(P)), ("r < rho(P)", r < rho))
    tr = P.trace_power(r)
    mean_lower = 0.5 * (1 - r * p_max) ** r * tr
    factor = r + tr * math.expm1(4 * alpha * r * r / (1 - r / rho))
    return SimpleCycleBounds(mean_lower, factor)


def partitioned_rarity(N: float, R: float, tau: float, k: int, P_l1_norm: float) -> tuple[float, float]:
    _require(("|P| > 1", P_l1_norm > 1), ("k >= 1", k >= 1))
    L = k * tau / 2 * math.log(N) / math.log(P_l1_norm)
    log_delta = k * _log(R) + (3 * k - 2) * _log(L) - k * tau / 2 * math.log(N)
    return L, _exp(log_delta)


def partitioned_sparse_upper(S: float, c_max_value: float, rho: float, alpha: float, N: float, tau: float,
                             m: int, r: int, P_l1_norm: float, R: float = 1.0) -> SparsePathsBound:
    logN = math.log(N) / math.log(P_l1_norm) if P_l1_norm > 1 else math.nan
    quarter = tau / 4 * logN
    eta = quarter ** 3 * (m + 1) * math.exp(2 * m)
    growth = _exp(4 / (tau * logN) * math.log(eta)) if eta > 0 and logN > 0 else math.inf
    reg = regime(
        ("|P| > 1", P_l1_norm > 1),
        ("rho(P) > 1", rho > 1),
        ("m >= 1", m >= 1),
        ("eta^(4/(tau log N)) < rho(P)", growth < rho),
        ("(m-1)(tau/2) log N <= r", (m - 1) * tau / 2 * logN <= r),
        ("r <= m (tau/2) log N", r <= m * tau / 2 * logN),
    )
    if not reg.ok:
        return SparsePathsBound(math.inf, eta, growth, math.nan, reg)
    _, d1 = partitioned_rarity(N, R, tau, 1, P_l1_norm)
    _, dm = partitioned_rarity(N, R, tau, m + 1, P_l1_norm)
    pr_good = 1 - d1 - dm
    if pr_good <= 0:
        return SparsePathsBound(math.inf, eta, growth, pr_good, reg)
    log_value = (
        math.log(4 * S * c_max_value) + (r - 1) * math.log(rho)
        - math.log1p(-1 / rho) - math.log(pr_good)
        + r * alpha * eta * growth / rho / (1 - growth / rho)
    )
    return SparsePathsBound(_exp(log_value), eta, growth, pr_good, reg)
