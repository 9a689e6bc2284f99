"""Lower-confidence-bound budget allocation over certified arms (F-LCB).

Each arm couples a problem, a one-step optimizer and its rate certificate.
The arm's index is an optimistic estimate of its optimal value: the last
observed objective minus the certificate at the current pull count.  Every
round the arm with the smallest index advances one optimizer step; with a
positive tolerance the run stops as soon as the played arm's certificate
drops below half the tolerance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .optimizers import certified_rate, make_optimizer
from .oracles import FirstOrderOracle, GaussianGradient, GaussianValue
from .problems import Problem
from .rates import Heuristic, RateFunction, rate_eval

TRACE_COLUMNS = ("t", "arm", "k_arm", "value", "g_value", "lcb", "step_regret", "cum_regret")


class AllocatorStoppedError(RuntimeError):
    """select_arm/step called after the stopping rule fired."""


class CertificateViolationError(AssertionError):
    """A per-round certificate check failed in a deterministic run."""


@dataclass
class Arm:
    problem: Problem
    optimizer: object
    rate: RateFunction
    name: str = ""
    k: int = 0
    current_value: float = math.nan
    lcb: float = math.nan
    initial_value: float = math.nan
    use_best_value: bool = False  # heuristic mode tracks the running best observation

    def pull(self) -> float:
        self.optimizer.step()
        self.k = self.optimizer.k
        self.current_value = (
            self.optimizer.best_value_seen if self.use_best_value else self.optimizer.reported_value
        )
        if self.k == 1:
            self.initial_value = self.optimizer.initial_value
        self.lcb = self.current_value - rate_eval(self.rate, self.k)
        return self.current_value

    @property
    def f_star(self) -> Optional[float]:
        return self.problem.f_star


@dataclass
class StepEvent:
    t: int
    arm: int
    k_arm: int
    value: float
    g_value: float
    lcb: float
    step_regret: float


@dataclass
class AllocatorState:
    arms: List[Arm]
    delta: float = 0.0
    eps: float = 0.0
    t: int = 0
    stopped: Optional[int] = None

    @property
    def f_star(self) -> Optional[float]:
        values = [arm.f_star for arm in self.arms]
        if any(v is None for v in values):
            return None
        return min(values)

    @property
    def is_deterministic(self) -> bool:
        for arm in self.arms:
            oracle = getattr(arm.optimizer, "oracle", None)
            noise = getattr(oracle, "noise", None)
            if isinstance(noise, (GaussianGradient, GaussianValue)) and noise.sigma > 0:
                return False
        return True

    @property
    def pull_counts(self) -> List[int]:
        return [arm.k for arm in self.arms]


def init(
    problems: Sequence[Problem],
    optimizers,
    delta: float = 0.0,
    eps: float = 0.0,
    *,
    noise=None,
    rng: Optional[np.random.Generator] = None,
    x0s=None,
    rate_scale: float = 1.0,
    optimizer_params: Optional[dict] = None,
) -> AllocatorState:
    """Build arms and run the initialization pass (one step per arm, k_i = 1).

    optimizers may be one name, a list of names, or prebuilt optimizer
    instances (then noise/x0s/params are ignored for those arms).
    """
    problems = list(problems)
    if isinstance(optimizers, str):
        optimizers = [optimizers] * len(problems)
    optimizers = list(optimizers)
    if len(optimizers) != len(problems):
        raise ValueError("need one optimizer (name or instance) per problem")
    if rng is None:
        rng = np.random.default_rng()
    params = dict(optimizer_params or {})
    arms = []
    for i, (problem, opt) in enumerate(zip(problems, optimizers)):
        if isinstance(opt, str):
            oracle = FirstOrderOracle(problem, noise=noise, rng=np.random.default_rng(rng.integers(2**63)))
            x0 = None if x0s is None else x0s[i]
            opt = make_optimizer(opt, problem, oracle, x0=x0, rate_scale=rate_scale, **params)
        rate = certified_rate(opt, delta)
        arms.append(Arm(problem=problem, optimizer=opt, rate=rate, name=problem.id))
    state = AllocatorState(arms=arms, delta=delta, eps=eps)
    for arm in state.arms:
        arm.pull()
    return state


def init_from_arms(arms: Sequence[Arm], delta: float = 0.0, eps: float = 0.0) -> AllocatorState:
    """Initialization pass over prebuilt arms."""
    state = AllocatorState(arms=list(arms), delta=delta, eps=eps)
    for arm in state.arms:
        if arm.k == 0:
            arm.pull()
    return state


def heuristic_rate_mode(state: AllocatorState) -> AllocatorState:
    """Switch every arm to the envelope 2 f(x^1) / sqrt(k) over its best observation."""
    for arm in state.arms:
        arm.rate = Heuristic(scale=2.0 * arm.initial_value)
        arm.use_best_value = True
        arm.current_value = arm.optimizer.best_value_seen
        arm.lcb = arm.current_value - rate_eval(arm.rate, arm.k)
    return state


def select_arm(state: AllocatorState) -> int:
    """Index of the arm with the smallest lower confidence bound (ties: lowest index)."""
    if state.stopped is not None:
        raise AllocatorStoppedError("allocator already stopped")
    return int(np.argmin([arm.lcb for arm in state.arms]))


def step(state: AllocatorState) -> StepEvent:
    """One allocation round: advance the argmin-LCB arm and update its index."""
    return step_from(state, select_arm(state))


@dataclass
class RegretTrace:
    events: List[StepEvent] = field(default_factory=list)
    cum_regret: List[float] = field(default_factory=list)
    final_r_b: Optional[float] = None

    def append(self, event: StepEvent):
        prev = self.cum_regret[-1] if self.cum_regret else 0.0
        inc = event.step_regret if math.isfinite(event.step_regret) else 0.0
        self.events.append(event)
        self.cum_regret.append(prev + inc)

    @property
    def total_regret(self) -> float:
        return self.cum_regret[-1] if self.cum_regret else 0.0

    def rows(self):
        for event, cum in zip(self.events, self.cum_regret):
            yield (
                event.t, event.arm, event.k_arm, event.value, event.g_value,
                event.lcb, event.step_regret, cum,
            )

    def to_csv(self, path):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(TRACE_COLUMNS)
            for row in self.rows():
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])

    def arm_pulls(self, n_arms: int) -> List[int]:
        counts = [0] * n_arms
        for event in self.events:
            counts[event.arm] += 1
        return counts


def read_trace_csv(path) -> List[dict]:
    """Parse a trace CSV back into typed row dicts."""
    rows = []
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            rows.append(
                {
                    "t": int(record["t"]),
                    "arm": int(record["arm"]),
                    "k_arm": int(record["k_arm"]),
                    "value": float(record["value"]),
                    "g_value": float(record["g_value"]),
                    "lcb": float(record["lcb"]),
                    "step_regret": float(record["step_regret"]),
                    "cum_regret": float(record["cum_regret"]),
                }
            )
    return rows


class _CertificateLedger:
    """Per-round certificate checks for deterministic runs."""

    def __init__(self, state: AllocatorState):
        self.f_star = state.f_star
        # the init pass already consumed one certificate term per arm
        self.bound = sum(rate_eval(arm.rate, 1) for arm in state.arms)

    def before_pull(self, state: AllocatorState, i: int):
        if self.f_star is None:
            return
        arm = state.arms[i]
        slack = 1e-9 * max(1.0, abs(arm.current_value))
        if arm.current_value - self.f_star > rate_eval(arm.rate, arm.k) + slack:
            raise CertificateViolationError(
                f"arm {i}: value {arm.current_value} exceeds f* + g({arm.k})"
            )

    def after_pull(self, state: AllocatorState, i: int, trace: RegretTrace):
        if self.f_star is None:
            return
        arm = state.arms[i]
        self.bound += rate_eval(arm.rate, arm.k)
        if trace.total_regret > self.bound * (1.0 + 1e-9) + 1e-12:
            raise CertificateViolationError(
                f"cumulative regret {trace.total_regret} exceeds the certificate sum {self.bound}"
            )


def run_fmab(state: AllocatorState, T: int, check: Optional[bool] = None) -> RegretTrace:
    """Run T allocation rounds (fewer if a positive tolerance fires the stop).

    check (default: on for deterministic runs with known optima) asserts the
    per-round certificate inequality and the cumulative-regret envelope.
    """
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    if check is None:
        check = state.is_deterministic and state.f_star is not None and state.delta == 0.0
    ledger = _CertificateLedger(state) if check else None
    trace = RegretTrace()
    for _ in range(T):
        if state.stopped is not None:
            break
        i = select_arm(state)
        if ledger is not None:
            ledger.before_pull(state, i)
        event = step_from(state, i)
        trace.append(event)
        if ledger is not None:
            ledger.after_pull(state, i, trace)
    f_star = state.f_star
    if f_star is not None:
        winner = state.stopped if state.stopped is not None else select_winner(state)
        trace.final_r_b = state.arms[winner].f_star - f_star
    return trace


def step_from(state: AllocatorState, i: int) -> StepEvent:
    """Advance a specific arm (the round bookkeeping of step, selection fixed)."""
    arm = state.arms[i]
    value = arm.pull()
    g_new = rate_eval(arm.rate, arm.k)
    state.t += 1
    if state.eps > 0 and g_new < state.eps / 2.0:
        state.stopped = i
    f_star = state.f_star
    step_regret = value - f_star if f_star is not None else math.nan
    return StepEvent(
        t=state.t, arm=i, k_arm=arm.k, value=value, g_value=g_new, lcb=arm.lcb,
        step_regret=step_regret,
    )


def select_winner(state: AllocatorState) -> int:
    """The arm a budget-limited run returns: current argmin of the indices."""
    return int(np.argmin([arm.lcb for arm in state.arms]))


@dataclass
class BfiResult:
    arm: int
    rounds_used: int
    r_b: Optional[float]
    budget_limited: bool
    trace: RegretTrace


def run_bfi(state: AllocatorState, eps: Optional[float] = None, T_max: int = 10_000) -> BfiResult:
    """Run until the stopping rule fires or the budget runs out.

    Returns the chosen arm, rounds used, and its identification regret when
    the optima are known; a budget-limited run returns the current argmin-LCB
    arm with the flag set.
    """
    if eps is not None:
        if eps <= 0:
            raise ValueError(f"identification needs eps > 0, got {eps}")
        state.eps = eps
    if state.eps <= 0:
        raise ValueError("identification needs a positive eps")
    start = state.t
    trace = run_fmab(state, T_max)
    rounds = state.t - start
    if state.stopped is not None:
        winner = state.stopped
        budget_limited = False
    else:
        winner = select_winner(state)
        budget_limited = True
    f_star = state.f_star
    r_b = state.arms[winner].f_star - f_star if f_star is not None else None
    return BfiResult(arm=winner, rounds_used=rounds, r_b=r_b, budget_limited=budget_limited, trace=trace)
