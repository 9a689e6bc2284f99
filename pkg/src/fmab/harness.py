"""Experiment registry: configuration, seeded execution, aggregation, file outputs.

Every experiment is a pure function of (config, repeat seed); repeats write
individual trace CSVs, plot-ready curve CSVs, a summary JSON recomputable
from the traces, and a manifest with seeds and artifact hashes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import baselines, flcb
from .oracles import Cauchy, FirstOrderOracle, GaussianGradient, GaussianValue
from .optimizers import ProjectedSubgradient, ScriptedOptimizer
from .problems import (
    Ball,
    BlackBox,
    FunctionClass,
    Unbounded,
    make_max_affine,
    make_smooth_convex,
)
from .rates import (
    HARDNESS_TAGS,
    HardnessFunction,
    Polynomial,
    bfi_budget_bound,
    bfi_lower_bound,
    exponential_sum_bound,
    Exponential,
    fmab_lower_bound,
    fmab_upper_bound,
    stochastic_regret_bound,
    vicinity_hitting_time,
)

EXPERIMENT_NAMES = (
    "smooth_det",
    "nonsmooth_det",
    "smooth_stoch",
    "bfi_synthetic",
    "baseline_compare",
    "mab_reduction",
    "bounds_report",
)


class ConfigError(ValueError):
    """Unresolvable experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str = "smooth_det"
    K: int = 3
    dim: int = 20
    T: int = 200
    budgets: tuple = (50, 100, 200, 350, 500)
    eps: float = 0.5
    delta: float = 0.0
    sigma: float = 2.0            # gradient-noise level (stochastic experiments)
    sigma_value: float = 0.3      # observed-value noise (comparison experiment)
    cauchy_scale: float = 1.0
    optimizer: str = "agd"
    rate_scale: float = 1.0
    gamma: float = 0.0            # 0 selects the balanced default
    repeats: int = 10
    base_seed: int = 0
    out: Optional[str] = None
    value_bound_A: float = 10.0
    eta: int = 2
    allocators: tuple = ("flcb", "successive_halving", "hyperband")
    # instance-family knobs (full-scale experiment defaults)
    c_values: tuple = (0.0, 0.5, 1.0)
    minima: tuple = (0.5, 1.0, 1.5)
    pieces: tuple = (5, 10, 12)
    bound: float = 4.0
    slope_scale: float = 0.3
    x_star_radius: float = 2.0
    # comparison / reduction knobs
    n_arms: int = 10
    gap: float = 0.25
    c_base: float = 1.0
    start_value: float = 4.6
    exploration_c: float = 1.5
    block_size: int = 1
    # bounds-report knobs
    class_tag: str = "convex_lipschitz"
    M: float = 1.0
    L: float = 1.0
    mu: float = 1.0
    R: float = 1.0
    alpha: float = 2.0
    rate_beta: float = 1.0
    rate_r: float = 0.5
    gaps: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENT_NAMES}"
            )
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")

    def seed_for(self, repeat: int) -> int:
        return self.base_seed + repeat

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        for key, value in doc.items():
            if isinstance(value, tuple):
                doc[key] = list(value)
        return doc


_TUPLE_FIELDS = {"budgets", "allocators", "c_values", "minima", "pieces", "gaps"}
_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in _TUPLE_FIELDS:
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if name == "allocators":
            return tuple(parts)
        if name == "pieces":
            return tuple(int(p) for p in parts)
        return tuple(float(p) for p in parts)
    if raw.lower() in ("none", ""):
        return None
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def parse_config(path) -> ExperimentConfig:
    """Parse a flat key = value config file ('#' starts a comment)."""
    values: dict = {}
    with open(path) as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Summary statistics
# ---------------------------------------------------------------------------


@dataclass
class MetricSummary:
    mean: float
    std: float
    q10: float
    q90: float

    @staticmethod
    def of(values: Sequence[float]) -> "MetricSummary":
        arr = np.asarray(list(values), dtype=float)
        return MetricSummary(
            mean=float(np.mean(arr)),
            std=float(np.std(arr)),
            q10=float(np.quantile(arr, 0.1)),
            q90=float(np.quantile(arr, 0.9)),
        )

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "q10": self.q10, "q90": self.q90}


@dataclass
class SummaryStats:
    experiment: str
    repeats: int
    metrics: Dict[str, MetricSummary]
    per_repeat: List[dict]
    rank_table: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "experiment": self.experiment,
            "repeats": self.repeats,
            "metrics": {k: v.to_dict() for k, v in self.metrics.items()},
            "per_repeat": self.per_repeat,
        }
        if self.rank_table is not None:
            doc["rank_table"] = self.rank_table
        doc.update(self.extra)
        return doc


def summarize(experiment: str, per_repeat: List[dict], **extra) -> SummaryStats:
    metrics = {}
    if per_repeat:
        for key, value in per_repeat[0].items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                metrics[key] = MetricSummary.of([rep[key] for rep in per_repeat])
    return SummaryStats(
        experiment=experiment,
        repeats=len(per_repeat),
        metrics=metrics,
        per_repeat=per_repeat,
        **extra,
    )


# ---------------------------------------------------------------------------
# Instance builders
# ---------------------------------------------------------------------------


def smooth_family(config: ExperimentConfig, rng: np.random.Generator):
    """The sqrt-quadratic family: K instances with minima 1 + c_i."""
    problems = []
    c_values = list(config.c_values)
    if len(c_values) != config.K:
        raise ConfigError("need one entry in c_values per arm")
    for i, c in enumerate(c_values):
        direction = rng.normal(size=config.dim)
        direction /= np.linalg.norm(direction)
        x_star = direction * rng.uniform(0.5, 1.0) * config.x_star_radius
        problems.append(make_smooth_convex(config.dim, x_star, c, rng_seed=rng, id=f"f{i + 1}"))
    return problems


def nonsmooth_family(config: ExperimentConfig, rng: np.random.Generator):
    """The piecewise-linear family on [-bound, bound]^dim with given minima."""
    if not (len(config.pieces) == len(config.minima) == config.K):
        raise ConfigError("need one piece count and one minimum per arm")
    problems = []
    for i, (p, c) in enumerate(zip(config.pieces, config.minima)):
        x_star = rng.uniform(-config.x_star_radius, config.x_star_radius, size=config.dim)
        problems.append(
            make_max_affine(
                config.dim, p, x_star, c, config.bound, rng_seed=rng,
                slope_scale=config.slope_scale, id=f"f{i + 1}",
            )
        )
    return problems


def noisy_value_arm(idx: int, c: float, start_value: float, rng: np.random.Generator,
                    sigma_value: float, x0: float = 2.0) -> flcb.Arm:
    """A one-dimensional training-curve stand-in: all arms start at the same
    loss, descend at their own curvature to their own minimum, and report
    values through Gaussian observation noise."""
    x_star = float(rng.uniform(-0.3, 0.3))
    dist0 = x0 - x_star
    curvature = 2.0 * (start_value - c) / dist0**2

    def value_fn(x):
        return 0.5 * curvature * float((x[0] - x_star) ** 2) + c

    def grad_fn(x):
        return np.array([curvature * (x[0] - x_star)])

    problem = BlackBox(
        id=f"arm{idx}", dim=1, feasible=Ball(np.zeros(1), 3.0),
        fclass=FunctionClass(mu=curvature / 2.0, L=curvature, M=3.0 * curvature, R=6.0),
        f_star=c, x_star=np.array([x_star]), value_fn=value_fn, grad_fn=grad_fn,
    )
    oracle = FirstOrderOracle(
        problem, noise=GaussianValue(sigma_value), rng=np.random.default_rng(rng.integers(2**63))
    )
    opt = ProjectedSubgradient(problem, oracle, x0=np.array([x0]), schedule="strongly_convex")
    return flcb.Arm(problem=problem, optimizer=opt, rate=opt.certified_rate(), name=problem.id)


def comparison_arms(config: ExperimentConfig, rng: np.random.Generator):
    """n_arms stochastic arms with ground-truth ordering (rank 1 = smallest minimum)."""
    order = rng.permutation(config.n_arms)
    arms, ranks = [], {}
    for pos, rank in enumerate(order):
        c = config.c_base + float(rank) * config.gap
        arms.append(noisy_value_arm(pos, c, config.start_value, rng, config.sigma_value))
        ranks[pos] = int(rank) + 1
    return arms, ranks


def scripted_arms(K: int, rate: Polynomial, f_stars: Sequence[float], theta: float = 1.0):
    """Arms whose values follow f* + theta * g(k) exactly (certified by construction)."""
    arms = []
    for i, f_star in enumerate(f_stars):
        problem = BlackBox(
            id=f"s{i}", dim=1, feasible=Unbounded(1.0, 1),
            fclass=FunctionClass(mu=0.0, L=1.0, M=1.0, R=1.0),
            f_star=f_star, x_star=None,
            value_fn=lambda x, v=f_star: v, grad_fn=lambda x: np.zeros(1),
        )
        opt = ScriptedOptimizer(problem, rate, theta=theta)
        arms.append(flcb.Arm(problem=problem, optimizer=opt, rate=rate, name=problem.id))
    return arms


def default_gamma(problems, sigma: float) -> float:
    """Balance the two terms of the stochastic rate constant."""
    R = max(p.fclass.R for p in problems)
    M = max(p.fclass.M for p in problems)
    return math.sqrt(2.0 * math.sqrt(2.0) * (M**2 + sigma**2) / (3.0 * R))


# ---------------------------------------------------------------------------
# Experiments (one repeat each; pure functions of config + seed)
# ---------------------------------------------------------------------------


def _final_quarter_stats(trace: flcb.RegretTrace, T: int):
    q = math.ceil(0.75 * T)
    arms_final = {e.arm for e in trace.events[q:]}
    increase = trace.cum_regret[-1] - trace.cum_regret[q - 1]
    rel = increase / max(abs(trace.total_regret), 1e-12)
    return len(arms_final), rel


def run_smooth_det(config: ExperimentConfig, seed: int):
    rng = np.random.default_rng(seed)
    problems = smooth_family(config, rng)
    state = flcb.init(problems, config.optimizer, rng=rng, rate_scale=config.rate_scale)
    init_values = [arm.current_value for arm in state.arms]
    trace = flcb.run_fmab(state, config.T)
    n_final, rel = _final_quarter_stats(trace, config.T)
    winner = flcb.select_winner(state)
    metrics = {
        "total_regret": trace.total_regret,
        "final_quarter_arms": n_final,
        "plateau_rel_increase": rel,
        "winner": winner,
        "winner_is_best": bool(winner == 0),
        "pull_counts": state.pull_counts,
    }
    return trace, state, init_values, metrics


def run_nonsmooth_det(config: ExperimentConfig, seed: int):
    rng = np.random.default_rng(seed)
    problems = nonsmooth_family(config, rng)
    state = flcb.init(problems, "triple_avg", rng=rng, rate_scale=config.rate_scale)
    init_values = [arm.current_value for arm in state.arms]
    trace = flcb.run_fmab(state, config.T)
    winner = flcb.select_winner(state)
    best_value = state.arms[winner].optimizer.best_value_seen
    smallest = min(config.minima)
    metrics = {
        "total_regret": trace.total_regret,
        "winner": winner,
        "winner_is_best": bool(winner == int(np.argmin(config.minima))),
        "winner_best_value": best_value,
        "value_error": abs(best_value - smallest),
        "pull_counts": state.pull_counts,
    }
    return trace, state, init_values, metrics


def run_smooth_stoch(config: ExperimentConfig, seed: int):
    rng = np.random.default_rng(seed)
    problems = smooth_family(config, rng)
    gamma = config.gamma if config.gamma > 0 else default_gamma(problems, config.sigma)
    state = flcb.init(
        problems, "sagd", delta=config.delta, rng=rng, rate_scale=config.rate_scale,
        noise=GaussianGradient(config.sigma), optimizer_params={"gamma": gamma},
    )
    init_values = [arm.current_value for arm in state.arms]
    trace = flcb.run_fmab(state, config.T, check=False)
    pulls = state.pull_counts
    best = int(np.argmin(config.c_values))
    metrics = {
        "total_regret": trace.total_regret,
        "best_arm_pulls": pulls[best],
        "max_other_pulls": max(p for i, p in enumerate(pulls) if i != best),
        "best_is_plurality": bool(pulls[best] == max(pulls)),
        "gamma": gamma,
        "pull_counts": pulls,
    }
    return trace, state, init_values, metrics


def run_bfi_synthetic(config: ExperimentConfig, seed: int):
    """One random identification instance: 2-4 piecewise-linear arms, one gap 0."""
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 5))
    dim = int(rng.integers(1, 4))
    base = float(rng.uniform(0.0, 1.0))
    gaps = [0.0] + [float(rng.uniform(0.1, 1.5)) for _ in range(K - 1)]
    rng.shuffle(gaps)
    problems = []
    for i, gap in enumerate(gaps):
        x_star = rng.uniform(-0.3, 0.3, size=dim)
        problems.append(
            make_max_affine(dim, 4, x_star, base + gap, 1.0, rng_seed=rng,
                            slope_scale=1.0, id=f"i{i}")
        )
    eps = float(rng.uniform(0.2, 1.0))
    state = flcb.init(problems, "pgd", eps=eps, rng=rng, rate_scale=config.rate_scale)
    init_values = [arm.current_value for arm in state.arms]
    budget = bfi_budget_bound(gaps, [arm.rate for arm in state.arms], eps)
    result = flcb.run_bfi(state, T_max=budget)
    metrics = {
        "K": K,
        "eps": eps,
        "r_b": result.r_b,
        "rounds_used": result.rounds_used,
        "budget_bound": budget,
        "within_budget": bool(result.rounds_used <= budget and not result.budget_limited),
        "identified_eps_optimal": bool(result.r_b <= eps),
    }
    return result.trace, state, init_values, metrics


def run_mab_reduction(config: ExperimentConfig, seed: int):
    mu_means = [i / 10 for i in range(config.n_arms)]
    noise = Cauchy(config.cauchy_scale)
    trace_f = baselines.functional_mab_reduction(
        mu_means, noise, C=config.exploration_c, block_size=config.block_size,
        T=config.T, rng=np.random.default_rng(seed),
    )
    trace_r = baselines.rucb_median(
        mu_means, noise, T=config.T, rng=np.random.default_rng(seed),
        C=config.exploration_c, block_size=config.block_size,
    )
    metrics = {
        "functional_regret": trace_f.total_regret,
        "rucb_regret": trace_r.total_regret,
        "regret_ratio": trace_f.total_regret / max(trace_r.total_regret, 1e-12),
        "functional_mean_regret_curve": [
            trace_f.cum_regret[t - 1] / t for t in range(1, config.T + 1)
        ],
    }
    return trace_f, trace_r, metrics


REPEAT_RUNNERS = {
    "smooth_det": run_smooth_det,
    "nonsmooth_det": run_nonsmooth_det,
    "smooth_stoch": run_smooth_stoch,
    "bfi_synthetic": run_bfi_synthetic,
}


# ---------------------------------------------------------------------------
# Allocator comparison (the model-selection table, synthetic arms)
# ---------------------------------------------------------------------------


def _best_value_winner(arms) -> int:
    return min(range(len(arms)), key=lambda j: (arms[j].optimizer.best_value_seen, j))


def _run_allocator(name: str, config: ExperimentConfig, budget: int, seed: int) -> int:
    """Run one allocator on a fresh instance; return the selected arm's true rank."""
    rng = np.random.default_rng(seed)
    arms, ranks = comparison_arms(config, rng)
    if name == "flcb":
        state = flcb.init_from_arms(arms)
        flcb.heuristic_rate_mode(state)
        rounds = budget - len(arms)
        if rounds > 0:
            flcb.run_fmab(state, rounds, check=False)
        winner = _best_value_winner(arms)
    elif name == "round_robin":
        baselines.round_robin(arms, budget)
        winner = _best_value_winner(arms)
    elif name == "successive_halving":
        winner = baselines.successive_halving(arms, budget, eta=config.eta).winner
    elif name == "hyperband":
        winner = baselines.hyperband(arms, budget, eta=config.eta, rng=rng).winner
    else:
        raise ConfigError(f"unknown allocator {name!r}")
    return ranks[winner]


def compare_allocators(config: ExperimentConfig) -> SummaryStats:
    """Per-budget mean rank (with std) of each allocator's selected arm."""
    if len(config.allocators) < 1:
        raise ConfigError("need at least one allocator")
    table: Dict[str, dict] = {}
    per_repeat = []
    for budget in config.budgets:
        budget = int(budget)
        if budget < config.n_arms:
            raise ConfigError(f"budget {budget} below the number of arms {config.n_arms}")
        row = {}
        for name in config.allocators:
            ranks = [
                _run_allocator(name, config, budget, config.seed_for(rep))
                for rep in range(config.repeats)
            ]
            row[name] = {
                "mean_rank": float(np.mean(ranks)),
                "std_rank": float(np.std(ranks)),
                "ranks": ranks,
            }
            per_repeat.extend(
                {"budget": budget, "allocator": name, "rank": r} for r in ranks
            )
        table[str(budget)] = row
    stats = summarize("baseline_compare", [], rank_table=table)
    stats.per_repeat = per_repeat
    stats.extra["budgets"] = [int(b) for b in config.budgets]
    stats.extra["allocators"] = list(config.allocators)
    return stats


# ---------------------------------------------------------------------------
# Bounds report
# ---------------------------------------------------------------------------


def _hardness_from_config(config: ExperimentConfig) -> HardnessFunction:
    if config.class_tag not in HARDNESS_TAGS:
        raise ConfigError(f"unknown class tag {config.class_tag!r}")
    return HardnessFunction(
        tag=config.class_tag, M=config.M, L=config.L, mu=config.mu, R=config.R,
        constant_scale=config.rate_scale,
    )


def _table_upper_bound(config: ExperimentConfig) -> float:
    """The deterministic cumulative-regret formula for the configured class."""
    tag = config.class_tag
    if tag == "convex_lipschitz":
        rates = [Polynomial(beta=config.M * config.R, r=0.5)] * config.K
        return fmab_upper_bound(rates, config.T)
    if tag == "smooth_convex":
        rates = [Polynomial(beta=config.L * config.R**2, r=2.0)] * config.K
        return fmab_upper_bound(rates, config.T)
    if tag == "strongly_convex_lipschitz":
        rates = [Polynomial(beta=config.M**2 / config.mu, r=1.0)] * config.K
        return fmab_upper_bound(rates, config.T)
    rates = [Exponential(amp=config.R**2, tau=math.sqrt(config.L / config.mu))] * config.K
    return exponential_sum_bound(rates)


def emit_bounds_report(config: ExperimentConfig) -> dict:
    """Upper bounds, lower bounds, identification budgets and hitting times
    for the configured class constants, as one JSON-ready document."""
    h = _hardness_from_config(config)
    rate = Polynomial(beta=config.rate_beta, r=config.rate_r)
    gaps = list(config.gaps)
    report = {
        "class_tag": config.class_tag,
        "constants": {"M": config.M, "L": config.L, "mu": config.mu, "R": config.R},
        "K": config.K,
        "T": config.T,
        "eps": config.eps,
        "fmab_upper": _table_upper_bound(config),
        "fmab_lower": fmab_lower_bound(h, config.T, config.K),
        "bfi_lower": bfi_lower_bound(h, config.T, config.K),
        "vicinity_hitting_time": vicinity_hitting_time(h, config.eps),
        "bfi_budget": bfi_budget_bound(gaps, [rate] * len(gaps), config.eps),
        "bfi_budget_rate": {"beta": config.rate_beta, "r": config.rate_r, "gaps": gaps},
    }
    if config.class_tag in ("smooth_convex", "strongly_convex_smooth", "strongly_convex_lipschitz"):
        report["stochastic_upper"] = stochastic_regret_bound(
            config.class_tag, K=config.K, T=config.T, A=config.value_bound_A,
            sigma=config.sigma, R=config.R, L=config.L, mu=config.mu, alpha=config.alpha,
        )
    return report


# ---------------------------------------------------------------------------
# File outputs
# ---------------------------------------------------------------------------


def _write_json(path, doc):
    with open(path, "w") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def arm_value_curves(trace_rows: List[dict], K: int, init_values: Sequence[float]):
    """Forward-fill per-arm current values (and per-arm counts) over rounds."""
    values = list(init_values)
    out = []
    for row in trace_rows:
        values[row["arm"]] = row["value"]
        out.append(list(values))
    return out


def _write_curves(out_dir: str, traces_rows: List[List[dict]], init_values: List[List[float]],
                  f_stars: Optional[List[float]]):
    """Three plot-ready files: cumulative regret, per-arm value, per-arm gap."""
    import csv as _csv

    K = len(init_values[0])
    T = min(len(rows) for rows in traces_rows)
    regret = np.array([[rows[t]["cum_regret"] for t in range(T)] for rows in traces_rows])
    curves = [arm_value_curves(rows, K, iv) for rows, iv in zip(traces_rows, init_values)]
    values = np.array([[c[t] for t in range(T)] for c in curves])  # (reps, T, K)

    with open(os.path.join(out_dir, "curve_regret.csv"), "w", newline="") as handle:
        writer = _csv.writer(handle)
        writer.writerow(["t", "mean", "std", "q10", "q90"])
        for t in range(T):
            col = regret[:, t]
            writer.writerow(
                [t + 1] + [repr(float(v)) for v in
                           (np.mean(col), np.std(col), np.quantile(col, 0.1), np.quantile(col, 0.9))]
            )
    for name, shift in (("curve_values.csv", None), ("curve_gaps.csv", f_stars)):
        if name == "curve_gaps.csv" and f_stars is None:
            continue
        with open(os.path.join(out_dir, name), "w", newline="") as handle:
            writer = _csv.writer(handle)
            writer.writerow(["t", "arm", "mean", "q10", "q90"])
            for t in range(T):
                for arm in range(K):
                    col = values[:, t, arm]
                    if shift is not None:
                        col = col - shift[arm]
                    writer.writerow(
                        [t + 1, arm] + [repr(float(v)) for v in
                                        (np.mean(col), np.quantile(col, 0.1), np.quantile(col, 0.9))]
                    )


def run_experiment(config: ExperimentConfig) -> SummaryStats:
    """Execute all repeats, write artifacts when an output directory is set."""
    out_dir = config.out
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    if config.experiment == "bounds_report":
        report = emit_bounds_report(config)
        stats = SummaryStats(
            experiment="bounds_report", repeats=0, metrics={}, per_repeat=[], extra=report
        )
        if out_dir:
            _write_json(os.path.join(out_dir, "bounds.json"), report)
            _finalize_manifest(config, out_dir)
        return stats

    if config.experiment == "baseline_compare":
        stats = compare_allocators(config)
        if out_dir:
            _write_json(os.path.join(out_dir, "summary.json"), stats.to_dict())
            _finalize_manifest(config, out_dir)
        return stats

    if config.experiment == "mab_reduction":
        per_repeat = []
        curves = []
        for rep in range(config.repeats):
            trace_f, trace_r, metrics = run_mab_reduction(config, config.seed_for(rep))
            curves.append(metrics.pop("functional_mean_regret_curve"))
            per_repeat.append(metrics)
            if out_dir:
                trace_f.to_csv(os.path.join(out_dir, f"trace_functional_rep{rep:03d}.csv"))
                trace_r.to_csv(os.path.join(out_dir, f"trace_rucb_rep{rep:03d}.csv"))
        mean_curve = np.mean(np.array(curves), axis=0)
        checkpoints = _half_horizon_checkpoints(config.T)
        stats = summarize("mab_reduction", per_repeat)
        stats.extra["mean_regret_checkpoints"] = {
            str(t): float(mean_curve[t - 1]) for t in checkpoints
        }
        if out_dir:
            _write_json(os.path.join(out_dir, "summary.json"), stats.to_dict())
            _finalize_manifest(config, out_dir)
        return stats

    runner = REPEAT_RUNNERS[config.experiment]
    per_repeat = []
    traces_rows: List[List[dict]] = []
    init_values: List[List[float]] = []
    f_stars = None
    for rep in range(config.repeats):
        outcome = runner(config, config.seed_for(rep))
        trace, state, init_vals, metrics = outcome
        pull_counts = metrics.pop("pull_counts", None)
        if pull_counts is not None:
            metrics.update({f"pulls_arm{i}": int(c) for i, c in enumerate(pull_counts)})
        per_repeat.append(metrics)
        rows = [
            dict(zip(flcb.TRACE_COLUMNS, row)) for row in trace.rows()
        ]
        traces_rows.append(rows)
        init_values.append(list(init_vals))
        f_stars = [arm.f_star for arm in state.arms]
        if out_dir:
            trace.to_csv(os.path.join(out_dir, f"trace_rep{rep:03d}.csv"))
    stats = summarize(config.experiment, per_repeat)
    if out_dir:
        if config.experiment != "bfi_synthetic":
            _write_curves(out_dir, traces_rows, init_values, f_stars)
        _write_json(os.path.join(out_dir, "summary.json"), stats.to_dict())
        _finalize_manifest(config, out_dir)
    return stats


def _half_horizon_checkpoints(T: int) -> List[int]:
    return [T // 2, 5 * T // 8, 3 * T // 4, 7 * T // 8, T]


def _finalize_manifest(config: ExperimentConfig, out_dir: str):
    artifacts = {}
    for name in sorted(os.listdir(out_dir)):
        if name == "manifest.json":
            continue
        path = os.path.join(out_dir, name)
        if os.path.isfile(path):
            artifacts[name] = _sha256(path)
    manifest = {
        "config": config.to_dict(),
        "seeds": [config.seed_for(rep) for rep in range(config.repeats)],
        "artifacts": artifacts,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
