"""Comparison allocators: round-robin, rung-based elimination (with and
without bracket restarts), and the robust index policies for the
one-dimensional reward-estimation reduction under heavy-tailed noise."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .flcb import Arm, RegretTrace, StepEvent
from .oracles import NoiseModel, sample_reward
from .rates import rate_eval


@dataclass
class SelectionResult:
    winner: int
    pulls_used: int
    pull_counts: List[int]


def _arm_event(t: int, i: int, arm: Arm, f_star: Optional[float]) -> StepEvent:
    g = rate_eval(arm.rate, arm.k) if arm.rate is not None else math.nan
    lcb = arm.current_value - g if arm.rate is not None else math.nan
    regret = arm.current_value - f_star if f_star is not None else math.nan
    return StepEvent(t=t, arm=i, k_arm=arm.k, value=arm.current_value, g_value=g,
                     lcb=lcb, step_regret=regret)


def round_robin(arms: Sequence[Arm], T: int) -> RegretTrace:
    """Cyclic allocation control baseline; same trace schema as the allocator."""
    arms = list(arms)
    if T < len(arms):
        raise ValueError(f"need T >= number of arms, got T={T}, K={len(arms)}")
    f_stars = [arm.f_star for arm in arms]
    f_star = min(f_stars) if all(v is not None for v in f_stars) else None
    trace = RegretTrace()
    for t in range(1, T + 1):
        i = (t - 1) % len(arms)
        arms[i].pull()
        trace.append(_arm_event(t, i, arms[i], f_star))
    if f_star is not None:
        best = min(range(len(arms)), key=lambda j: arms[j].optimizer.best_value_seen)
        trace.final_r_b = arms[best].f_star - f_star
    return trace


def successive_halving(arms: Sequence[Arm], budget: int, eta: int = 2) -> SelectionResult:
    """Rung-based elimination keeping the top ceil(n/eta) arms by best value.

    Eliminated arms are never pulled again; leftover budget goes to the sole
    survivor.  Total pulls never exceed the budget.
    """
    arms = list(arms)
    n = len(arms)
    if budget < n:
        raise ValueError(f"budget {budget} is smaller than the number of arms {n}")
    if eta < 2:
        raise ValueError(f"eta must be at least 2, got {eta}")
    n_rungs = max(1, math.ceil(math.log(n, eta)))
    survivors = list(range(n))
    used = 0
    while len(survivors) > 1 and used < budget:
        per_arm = max(1, budget // (len(survivors) * n_rungs))
        for i in survivors:
            for _ in range(per_arm):
                if used >= budget:
                    break
                arms[i].pull()
                used += 1
        ranked = sorted(survivors, key=lambda j: (arms[j].optimizer.best_value_seen, j))
        survivors = sorted(ranked[: math.ceil(len(survivors) / eta)])
    winner = min(survivors, key=lambda j: (arms[j].optimizer.best_value_seen, j))
    while used < budget:
        arms[winner].pull()
        used += 1
    return SelectionResult(winner=winner, pulls_used=used, pull_counts=[a.k for a in arms])


def hyperband(
    arms: Sequence[Arm],
    budget: int,
    eta: int = 2,
    rng: Optional[np.random.Generator] = None,
) -> SelectionResult:
    """Bracket loop: split the budget over s = s_max..0, each bracket an
    elimination run over n_s arms; the winner is the best final value seen."""
    arms = list(arms)
    n = len(arms)
    if budget < n:
        raise ValueError(f"budget {budget} is smaller than the number of arms {n}")
    s_max = max(0, math.floor(math.log(n, eta)))
    bracket_budget = budget // (s_max + 1)
    used = 0
    for s in range(s_max, -1, -1):
        # the most exploratory bracket (s = s_max) spans all arms; lower
        # brackets run fewer arms on more pulls each
        n_s = min(n, max(1, math.ceil(n * (s_max + 1) / ((s + 1) * eta ** (s_max - s)))))
        if rng is not None and n_s < n:
            subset = sorted(rng.choice(n, size=n_s, replace=False).tolist())
        else:
            subset = list(range(n_s))
        remaining = budget - used
        # a bracket needs at least one pull per participating arm; when the
        # budget only covers one bracket, exactly one executes
        this_budget = min(max(bracket_budget, n_s), remaining)
        if this_budget < n_s:
            break
        result = successive_halving([arms[i] for i in subset], this_budget, eta)
        used += result.pulls_used
    pulled = [j for j in range(n) if arms[j].k > 0]
    winner = min(pulled, key=lambda j: (arms[j].optimizer.best_value_seen, j))
    return SelectionResult(winner=winner, pulls_used=used, pull_counts=[a.k for a in arms])


# ---------------------------------------------------------------------------
# Robust index policies for the reward-estimation reduction
# ---------------------------------------------------------------------------


def median_of_means(samples: Sequence[float], block_size: int = 1) -> float:
    """Split the sample stream into contiguous blocks, average each, take the
    median.  Block size 1 degenerates to the plain sample median, which is the
    right call under Cauchy noise (block means of a Cauchy do not concentrate)."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    if block_size < 1:
        raise ValueError("block size must be >= 1")
    n_blocks = math.ceil(len(samples) / block_size)
    means = [
        float(np.mean(samples[b * block_size : (b + 1) * block_size])) for b in range(n_blocks)
    ]
    return float(np.median(means))


class StreamingMedianOfMeans:
    """Incremental median-of-means over a sample stream.

    Completed block means are kept sorted; the running partial block is
    folded in virtually, so each push and each estimate costs O(log n).
    Agrees exactly with median_of_means on the same prefix.
    """

    def __init__(self, block_size: int = 1):
        if block_size < 1:
            raise ValueError("block size must be >= 1")
        self.block_size = block_size
        self._means: List[float] = []  # sorted completed-block means
        self._partial_sum = 0.0
        self._partial_count = 0
        self.n = 0

    def push(self, x: float):
        self.n += 1
        self._partial_sum += x
        self._partial_count += 1
        if self._partial_count == self.block_size:
            bisect.insort(self._means, self._partial_sum / self.block_size)
            self._partial_sum = 0.0
            self._partial_count = 0

    def estimate(self) -> float:
        if self.n == 0:
            raise ValueError("need at least one sample")
        if self._partial_count == 0:
            return _sorted_median(self._means, len(self._means), None, 0)
        partial_mean = self._partial_sum / self._partial_count
        pos = bisect.bisect(self._means, partial_mean)
        return _sorted_median(self._means, len(self._means) + 1, partial_mean, pos)


def _sorted_median(values: List[float], n: int, extra: Optional[float], extra_pos: int) -> float:
    def at(i: int) -> float:
        if extra is None:
            return values[i]
        if i < extra_pos:
            return values[i]
        if i == extra_pos:
            return extra
        return values[i - 1]

    mid = n // 2
    if n % 2 == 1:
        return at(mid)
    return 0.5 * (at(mid - 1) + at(mid))


@dataclass
class _ReductionArm:
    mu: float
    x: float = 0.0
    n: int = 0
    rewards: Optional[StreamingMedianOfMeans] = None
    value_estimates: Optional[StreamingMedianOfMeans] = None


def functional_mab_reduction(
    mu_means: Sequence[float],
    noise: NoiseModel,
    C: float = 2.0,
    block_size: int = 1,
    T: int = 1000,
    rng: Optional[np.random.Generator] = None,
    robust_updates: bool = True,
    x0: float = 0.5,
) -> RegretTrace:
    """Reward estimation as one-dimensional quadratic surrogates.

    Each arm holds f(x) = x^2/2 - x*mu with minimum -mu^2/2.  On a pull the
    surrogate takes a gradient step with step size 1/n; with robust_updates
    the gradient uses the arm's median-of-means reward estimate (a raw
    heavy-tailed draw never concentrates the iterate), without it the raw
    sampled reward.  The arm index is the median-of-means of the per-pull
    value estimates x^2/2 - x*(mu + xi) minus an exploration bonus
    C/sqrt(n).  The trace records reward regret against the largest mean.

    x0 is the surrogates' common start; nonzero, so the first sweep's value
    estimates already separate the arms.
    """
    if rng is None:
        rng = np.random.default_rng()
    arms = [
        _ReductionArm(
            mu=m,
            x=x0,
            rewards=StreamingMedianOfMeans(block_size),
            value_estimates=StreamingMedianOfMeans(block_size),
        )
        for m in mu_means
    ]
    K = len(arms)
    if T < K:
        raise ValueError(f"need T >= number of arms, got T={T}, K={K}")
    mu_best = max(mu_means)
    trace = RegretTrace()

    def pull(i: int):
        arm = arms[i]
        reward = sample_reward(arm.mu, noise, rng)
        arm.value_estimates.push(0.5 * arm.x**2 - arm.x * reward)
        arm.rewards.push(reward)
        arm.n += 1
        eta = 1.0 / arm.n
        target = arm.rewards.estimate() if robust_updates else reward
        arm.x = arm.x - eta * (arm.x - target)

    def index(i: int) -> float:
        arm = arms[i]
        return arm.value_estimates.estimate() - C / math.sqrt(arm.n)

    for t in range(1, T + 1):
        if t <= K:
            i = t - 1  # one initialization sweep
        else:
            i = min(range(K), key=lambda j: (index(j), j))
        pull(i)
        arm = arms[i]
        est = arm.value_estimates.estimate()
        bonus = C / math.sqrt(arm.n)
        trace.append(
            StepEvent(t=t, arm=i, k_arm=arm.n, value=est, g_value=bonus,
                      lcb=est - bonus, step_regret=mu_best - arm.mu)
        )
    return trace


def rucb_median(
    mu_means: Sequence[float],
    noise: NoiseModel,
    T: int = 1000,
    rng: Optional[np.random.Generator] = None,
    C: float = 2.0,
    block_size: int = 1,
) -> RegretTrace:
    """Robust UCB on rewards: median-of-means estimate plus a C/sqrt(n) bonus."""
    if rng is None:
        rng = np.random.default_rng()
    arms = [_ReductionArm(mu=m, rewards=StreamingMedianOfMeans(block_size)) for m in mu_means]
    K = len(arms)
    if T < K:
        raise ValueError(f"need T >= number of arms, got T={T}, K={K}")
    mu_best = max(mu_means)
    trace = RegretTrace()
    for t in range(1, T + 1):
        if t <= K:
            i = t - 1
        else:
            i = max(
                range(K),
                key=lambda j: (
                    arms[j].rewards.estimate() + C / math.sqrt(arms[j].n),
                    -j,
                ),
            )
        arm = arms[i]
        reward = sample_reward(arm.mu, noise, rng)
        arm.rewards.push(reward)
        arm.n += 1
        est = arm.rewards.estimate()
        bonus = C / math.sqrt(arm.n)
        trace.append(
            StepEvent(t=t, arm=i, k_arm=arm.n, value=est, g_value=bonus,
                      lcb=est + bonus, step_regret=mu_best - arm.mu)
        )
    return trace
