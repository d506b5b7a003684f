"""Command-line entry point: ``spectracl generate|bounds|fig2|sis|verify``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import inspect
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds as bd
from . import experiments as ex
from .degree_model import (
    BiDegreeSequence, PartitionSpec, cl_predictor, load_model, p_max, save_model, save_sequence_csv,
)
from .graph_gen import RngSeed, sample, write_binary, write_edge_list
from .sis import write_summary_csv
from .spectral import build_p_matrix, rho_p

EXPERIMENTS = ("generate", "bounds", "fig2", "sis", "verify")


@dataclass
class ExperimentConfig:
    experiment: str = "custom"
    model: Optional[Path] = None
    trials: int = 100
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: Optional[Path] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.model is not None and not Path(self.model).exists():
            raise FileNotFoundError(f"model file {self.model} does not exist")

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        model = data.get("model")
        if model is not None:
            model = Path(model)
            if not model.is_absolute():
                model = Path(path).parent / model
        return cls(
            experiment=data.get("experiment", "custom"),
            model=model,
            trials=int(data.get("trials", 100)),
            seed=int(data.get("seed", 0)),
            params=dict(data.get("params", {})),
            out=Path(data["out"]) if data.get("out") else None,
        )

    def section(self, name: str) -> dict:
        """Parameters for one command: ``params[name]`` when present, else the flat params."""
        sub = self.params.get(name)
        return dict(sub) if isinstance(sub, dict) else {k: v for k, v in self.params.items() if not isinstance(v, dict)}


def _out_dir(args, cfg: ExperimentConfig, default: str) -> Path:
    out = Path(args.out) if args.out else (cfg.out or Path(default))
    out.mkdir(parents=True, exist_ok=True)
    return out


# generate ------------------------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig, out: Path) -> int:
    if cfg.model is None:
        raise ValueError("generate needs a model file (config 'model' or --model)")
    model = load_model(cfg.model)
    params = cfg.section("generate")
    count = int(params.get("count", 1))
    mode = params.get("mode", "auto")
    for k in range(count):
        g = sample(model, RngSeed(cfg.seed, k), mode)
        stem = "graph" if count == 1 else f"graph_{k}"
        write_edge_list(g, out / f"{stem}.edges")
        if params.get("binary"):
            write_binary(g, out / f"{stem}.bin")
        print(f"{stem}: N={g.N} edges={g.n_edges}")
    return 0


# bounds --------------------------------------------------------------------------------------

BOUND_OPS = {
    name: getattr(bd, name)
    for name in (
        "paths_lower", "paths_lower_total", "paths_upper", "trace_lower", "trace_variance_upper",
        "janson_tail", "simple_cycle_mean_lower", "simple_cycle_variance_upper", "markov_upper_tail",
        "upper_concentration", "lower_concentration", "janson_cycle_failure", "cycle_edge_rarity",
        "sparse_paths_upper", "expineq", "partitioned_paths_upper", "partitioned_markov_tail",
        "partitioned_upper_concentration", "trace_cr_mean_lower", "trace_cr_variance_upper",
        "sc_partitioned_bounds", "partitioned_rarity", "partitioned_sparse_upper",
    )
}

ALIASES = {"c_max_value": "c_max", "rho": "rho_p", "P_l1_norm": "P_l1", "S_total": "S"}


def model_inputs(model) -> dict:
    """Quantities the bound formulas take, derived from a model."""
    base = {
        "predictor": cl_predictor(model), "S": model.S, "N": model.N, "p_max": p_max(model),
        "b_y": float(np.max(model.aggregate().b if isinstance(model, PartitionSpec) else model.b)),
    }
    if isinstance(model, PartitionSpec):
        P = build_p_matrix(model)
        base.update({
            "P": P, "rho_p": rho_p(P), "c_max": bd.c_max(P), "P_l1": P.l1_norm(),
            "alpha": bd.alpha_condition(model, strict=False),
        })
    return base


def _normalize(result) -> tuple[float, Optional[bd.Regime], dict]:
    if isinstance(result, tuple):
        return float(result[-1]), None, {"first": float(result[0])}
    if isinstance(result, (int, float)):
        return float(result), None, {}
    if isinstance(result, bd.ProbabilityBound):
        return result.value, result.regime, {"r": result.r}
    if isinstance(result, (bd.UpperConcentration, bd.PartitionedUpperConcentration)):
        extra = {"markov_r": result.markov_tail.r}
        if isinstance(result, bd.UpperConcentration):
            extra["rho_high_probability"] = result.rho_high_probability
        return result.markov_tail.value, result.regime, extra
    if isinstance(result, bd.LowerConcentration):
        return result.janson_failure, result.regime, {
            "simplified_failure": result.simplified_failure,
            "rho_lower_factor": result.rho_lower_factor, "certified": result.certified,
        }
    if isinstance(result, bd.SparsePathsBound):
        return result.value, result.regime, {"eta": result.eta, "growth": result.growth, "pr_good": result.pr_good}
    if isinstance(result, bd.SimpleCycleBounds):
        return result.mean_lower, None, {"variance_factor": result.variance_factor}
    raise TypeError(f"unhandled result type {type(result).__name__}")


def evaluate_bound(name: str, inputs: dict) -> dict:
    fn = BOUND_OPS[name]
    kwargs = {}
    for pname in inspect.signature(fn).parameters:
        key = pname if pname in inputs else ALIASES.get(pname, pname)
        if key in inputs:
            kwargs[pname] = inputs[key]
    used = {k: v for k, v in kwargs.items() if not hasattr(v, "entries")}
    row = {"bound": name, "inputs": json.dumps(used, sort_keys=True)}
    try:
        value, regime, extra = _normalize(fn(**kwargs))
        row.update({
            "value": value, "regime_ok": "" if regime is None else int(regime.ok),
            "failed": "" if regime is None else ";".join(regime.failed()), "extra": json.dumps(extra, sort_keys=True),
        })
    except bd.RegimeError as exc:
        row.update({"value": math.nan, "regime_ok": 0, "failed": ";".join(exc.regime.failed()), "extra": "{}"})
    return row


def cmd_bounds(cfg: ExperimentConfig, out: Path) -> int:
    params = cfg.section("bounds")
    base = model_inputs(load_model(cfg.model)) if cfg.model is not None else {}
    evaluations = params.get("evaluations")
    if not evaluations:
        if not base:
            raise ValueError("bounds needs a model or an explicit 'evaluations' list")
        evaluations = [{"bound": "paths_upper", "args": {"r": r}} for r in params.get("r", [2, 3, 4])]
        evaluations += [{"bound": "upper_concentration", "args": {"r": r, "epsilon": e}}
                        for r in params.get("r", [2, 3, 4]) for e in params.get("epsilon", [0.1, 0.2])]
    rows = []
    for ev in evaluations:
        if ev["bound"] not in BOUND_OPS:
            raise KeyError(f"unknown bound {ev['bound']!r}; choose from {sorted(BOUND_OPS)}")
        rows.append(evaluate_bound(ev["bound"], {**base, **ev.get("args", {})}))
    path = out / "bounds.csv"
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["bound", "inputs", "value", "regime_ok", "failed", "extra"])
        w.writeheader()
        for row in rows:
            w.writerow({**row, "value": f"{row['value']:.12g}"})
    print(f"{len(rows)} bound evaluations -> {path}")
    return 0


# experiments ---------------------------------------------------------------------------------

def cmd_fig2(cfg: ExperimentConfig, out: Path) -> int:
    params = cfg.section("fig2")
    if cfg.model is not None:
        seq = load_model(cfg.model)
        if not isinstance(seq, BiDegreeSequence):
            raise ValueError("fig2 needs a Chung-Lu sequence")
    else:
        seq = ex.fig2_sequence(
            int(params.get("N", ex.FIG2_N)), float(params.get("target", ex.FIG2_TARGET)),
            float(params.get("exponent", 0.5)), params.get("offset"),
        )
    eps = params.get("epsilons", ex.DEFAULT_EPSILONS)
    res = ex.run_fig2(seq, cfg.trials, cfg.seed, eps)
    save_sequence_csv(seq, out / "sequence.csv")
    res.write_rhos_csv(out / "rhos.csv")
    res.write_curves_csv(out / "curves.csv")
    summary = {
        "N": seq.N, "predictor": res.predictor, "trials": cfg.trials,
        "within_4pct": res.within(0.04), "mean_ratio": float(res.ratios.mean()),
        "std_ratio": float(res.ratios.std(ddof=1)) if cfg.trials > 1 else 0.0,
        "dominance_violations": len(res.dominance_violations()),
    }
    write_summary_csv([summary], out / "summary.csv")
    print(", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items()))
    return 0


def cmd_sis(cfg: ExperimentConfig, out: Path) -> int:
    params = cfg.section("sis")
    specs = ex.fig6_specs(
        int(params.get("N", ex.FIG6_N)), float(params.get("target", ex.FIG6_TARGET)),
        tuple(params.get("ratios", ex.FIG6_RATIOS)),
    )
    for k, spec in enumerate(specs):
        save_model(spec, out / f"network_{k}.json")
    res = ex.run_sis_experiment(
        specs, tuple(params.get("betas", ex.FIG6_BETAS)), cfg.trials, cfg.seed,
        int(params.get("max_steps", 10_000)), float(params.get("init", 0.5)), float(params.get("dt", 1.0)),
    )
    for cell in res.cells:
        cell.ensemble.write_trials_csv(out / f"trials_network_{cell.network}_beta_{cell.beta:g}.csv")
    rows = res.summary_rows()
    write_summary_csv(rows, out / "summary.csv")
    for row in rows:
        print(f"network {row['network']} (ρ(P)={row['rho_p']:.3f}, a·b/S={row['cl_predictor']:.3f}) "
              f"β={row['beta']:g}: median {row['median']:g}, censored {row['n_censored']}")
    return 0


def cmd_verify(cfg: ExperimentConfig, out: Optional[Path], suites: Sequence[str]) -> int:
    from . import verify

    results = verify.run_all(suites or cfg.section("verify").get("suites"), cfg.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.key} ({r.seconds:.1f}s): {r.detail}")
    if out is not None:
        with open(out / "verify.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["suite", "passed", "detail"])
            for r in results:
                w.writerow([r.key, int(r.passed), r.detail])
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return 1 if failed else 0


# entry point ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectracl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--trials", type=int, help="override the configured trial count")
        if name in ("generate", "bounds", "fig2"):
            p.add_argument("--model", type=Path, help="model file (.csv sequence or .json spec)")
        if name == "verify":
            p.add_argument("--suite", action="append", default=[], help="module, suite or module.suite; repeatable")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ValueError("seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.trials is not None:
            cfg = dataclasses.replace(cfg, trials=args.trials)
        if getattr(args, "model", None) is not None:
            cfg = dataclasses.replace(cfg, model=args.model)
        if args.command == "verify":
            out = _out_dir(args, cfg, ".") if (args.out or cfg.out) else None
            return cmd_verify(cfg, out, args.suite)
        out = _out_dir(args, cfg, f"spectracl_{args.command}")
        handler = {"generate": cmd_generate, "bounds": cmd_bounds, "fig2": cmd_fig2, "sis": cmd_sis}[args.command]
        return handler(cfg, out)
    except (ValueError, KeyError, FileNotFoundError, TypeError) as exc:
        print(f"spectracl {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
