"""Reproductions of the two experiments: spectral-radius concentration and SIS stopping times."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import bounds
from .degree_model import BiDegreeSequence, PartitionSpec, cl_predictor, ensure_valid, p_max
from .graph_gen import RngSeed, as_seed, ensemble, sample
from .sis import SISConfig, SISEnsemble, sis_ensemble
from .spectral import build_p_matrix, rho_p, spectral_radius


class ConstructionError(ValueError):
    pass


# concentration experiment -------------------------------------------------------------

FIG2_N = 600
FIG2_TARGET = 161.0
DEFAULT_EPSILONS = tuple(np.round(np.linspace(0.005, 0.5, 100), 6))


def fig2_sequence(N: int = FIG2_N, target: float = FIG2_TARGET, exponent: float = 0.5,
                  offset: Optional[float] = None) -> BiDegreeSequence:
    """Heterogeneous bidegree sequence with a·b/S equal to ``target``.

    Weights follow w_i ∝ (i + offset)^(-exponent) (offset defaults to N/2),
    in- and out-weights coincide, and the common scale is solved from
    a·b/S = target.  Raises ConstructionError when that scale would push
    some edge probability above one.
    """
    offset = N / 2 if offset is None else offset
    u = (np.arange(N) + offset) ** (-exponent)
    c = target * u.sum() / (u ** 2).sum()
    w = c * u
    if w.max() ** 2 > w.sum() * (1 + 1e-12):
        raise ConstructionError(
            f"target {target} unreachable: needs max weight² {w.max() ** 2:.4g} <= S {w.sum():.4g}"
        )
    return BiDegreeSequence(w, w.copy())


@dataclass(frozen=True)
class Fig2Result:
    predictor: float
    rhos: np.ndarray
    epsilons: np.ndarray
    upper: bounds.ConcentrationCurve
    lower: bounds.ConcentrationCurve

    @property
    def ratios(self) -> np.ndarray:
        return self.rhos / self.predictor

    def within(self, eps: float) -> int:
        return int(np.count_nonzero(np.abs(self.ratios - 1) <= eps))

    def empirical_cdf(self) -> np.ndarray:
        err = np.abs(self.ratios - 1)
        return np.array([np.mean(err <= e) for e in self.epsilons])

    def empirical_upper_tail(self) -> np.ndarray:
        return np.array([np.mean(self.ratios > 1 + e) for e in self.epsilons])

    def empirical_lower_tail(self) -> np.ndarray:
        return np.array([np.mean(self.ratios < 1 - e) for e in self.epsilons])

    def dominance_violations(self) -> list[float]:
        """Epsilons where an empirical tail frequency exceeds its bound."""
        bad = []
        up, lo = self.upper.values(), self.lower.values()
        for e, eu, el, bu, bl in zip(self.epsilons, self.empirical_upper_tail(), self.empirical_lower_tail(), up, lo):
            if eu > bu or el > bl:
                bad.append(float(e))
        return bad

    def write_curves_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([
                "epsilon", "empirical_cdf", "upper_tail_bound", "upper_r", "upper_vacuous",
                "lower_tail_bound", "lower_r", "lower_vacuous",
            ])
            for e, cdf, pu, pl in zip(self.epsilons, self.empirical_cdf(), self.upper.points, self.lower.points):
                w.writerow([
                    f"{e:.6g}", f"{cdf:.6g}",
                    f"{pu.bound:.10g}", "" if pu.r is None else pu.r, int(pu.vacuous),
                    f"{pl.bound:.10g}", "" if pl.r is None else pl.r, int(pl.vacuous),
                ])

    def write_rhos_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial_id", "rho", "ratio"])
            for k, rho in enumerate(self.rhos.tolist()):
                w.writerow([k, f"{rho:.12g}", f"{rho / self.predictor:.12g}"])


def run_fig2(seq: BiDegreeSequence, n_trials: int = 100, seed: Union[int, RngSeed] = 0,
             epsilons: Sequence[float] = DEFAULT_EPSILONS, workers: Optional[int] = None) -> Fig2Result:
    ensure_valid(seq)
    pred = cl_predictor(seq)
    rhos = np.array([spectral_radius(g).rho for g in ensemble(seq, n_trials, seed, workers=workers)])
    eps = np.asarray(epsilons, dtype=float)
    upper = bounds.upper_tail_curve(pred, seq.S, p_max(seq), eps)
    lower = bounds.lower_tail_curve(pred, seq.N, p_max(seq), eps)
    return Fig2Result(pred, rhos, eps, upper, lower)


# SIS experiment ------------------------------------------------------------------------

FIG6_N = 500
FIG6_TARGET = 8.0
FIG6_RATIOS = (1.0, 1.3, 1.6)
FIG6_BETAS = (0.05, 0.06, 0.07)


def bipartite_spec(N: int, target: float, ratio: float) -> PartitionSpec:
    """Two equal groups, all edges crossing; rates c (1 -> 2) and k·c (2 -> 1).

    a·b/S is the harmonic mean 2kc/(1+k) and ρ(P) the geometric mean c·√k,
    so fixing a·b/S = target and choosing k with (1+k)/(2√k) = ratio sets
    ρ(P) = ratio·target.
    """
    if ratio < 1:
        raise ConstructionError("ρ(P)/(a·b/S) below 1 is not reachable by this family")
    if N % 2:
        raise ConstructionError("N must be even")
    root_k = ratio + math.sqrt(ratio * ratio - 1)
    k = root_k ** 2
    c = target * (1 + k) / (2 * k)
    half = N // 2
    edges = np.array([[0.0, half * c], [half * k * c, 0.0]])
    if k * c > half:
        raise ConstructionError("edge probability would exceed one")
    return PartitionSpec.uniform_blocks([half, half], edges)


def fig6_specs(N: int = FIG6_N, target: float = FIG6_TARGET,
               ratios: Sequence[float] = FIG6_RATIOS) -> list[PartitionSpec]:
    return [bipartite_spec(N, target, r) for r in ratios]


@dataclass(frozen=True)
class SISCell:
    network: int
    beta: float
    rho_p: float
    cl_predictor: float
    rho_graph: float
    ensemble: SISEnsemble


@dataclass(frozen=True)
class SISExperiment:
    cells: tuple[SISCell, ...]

    def cell(self, network: int, beta: float) -> SISCell:
        for c in self.cells:
            if c.network == network and math.isclose(c.beta, beta):
                return c
        raise KeyError((network, beta))

    def medians(self, beta: float) -> list[float]:
        nets = sorted({c.network for c in self.cells})
        return [self.cell(n, beta).ensemble.summary.median for n in nets]

    def summary_rows(self) -> list[dict]:
        rows = []
        for c in self.cells:
            row = {
                "network": c.network, "beta": c.beta, "rho_p": c.rho_p,
                "cl_predictor": c.cl_predictor, "rho_graph": c.rho_graph,
            }
            row.update(c.ensemble.summary.as_row())
            rows.append(row)
        return rows


def run_sis_experiment(specs: Sequence[PartitionSpec], betas: Sequence[float] = FIG6_BETAS,
                       n_trials: int = 100, seed: int = 0, max_steps: int = 10_000,
                       init: float = 0.5, dt: float = 1.0, workers: Optional[int] = None) -> SISExperiment:
    """One realized graph per spec; every beta reuses the same trial seeds (coupled runs)."""
    base = as_seed(seed)
    cells = []
    for n, spec in enumerate(specs):
        graph = sample(spec, base.with_stream(n))
        rp = rho_p(build_p_matrix(spec))
        rg = spectral_radius(graph).rho
        trial_seed = RngSeed(base.seed, (n + 1) << 32)
        for beta in betas:
            cfg = SISConfig(beta=beta, dt=dt, init=init, max_steps=max_steps, seed=trial_seed)
            ens = sis_ensemble(graph, cfg, n_trials, workers=workers)
            cells.append(SISCell(n, float(beta), rp, cl_predictor(spec), rg, ens))
    return SISExperiment(tuple(cells))
