"""Base optimization algorithms with certified per-step suboptimality envelopes.

Every optimizer exposes one-step iteration (one oracle call per step) plus the
rate function it certifies for its problem class.  Reported iterates are the
points whose observed values feed the allocator's confidence bounds:

* projected subgradient descent reports its running best point,
* accelerated descent enforces monotonicity with a reject-and-restart safeguard,
* the triple-averaging subgradient method reports its averaged point,
* the stochastic accelerated method reports its averaged iterate.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .oracles import FirstOrderOracle, GaussianGradient
from .problems import Problem, Unbounded, project
from .rates import Exponential, InverseQuadratic, Polynomial, RateFunction


class IncompatibleOptimizerError(ValueError):
    """Optimizer requires class constants the problem does not provide."""


def projected_step(problem: Problem, x: np.ndarray, eta: float, gradient: np.ndarray) -> np.ndarray:
    """One projected (sub)gradient update x <- P(x - eta * g)."""
    return project(problem.feasible, np.asarray(x, float) - eta * np.asarray(gradient, float))


class _BaseOptimizer:
    """Shared bookkeeping: step counter, reported point, observed-value minimum."""

    name = "base"

    def __init__(self, problem: Problem, oracle: FirstOrderOracle, x0=None, rate_scale: float = 1.0):
        if oracle.problem is not problem:
            raise ValueError("oracle must be bound to the same problem")
        self.problem = problem
        self.oracle = oracle
        if x0 is None:
            from .problems import default_x0

            x0 = default_x0(problem)
        self.x0 = project(problem.feasible, np.asarray(x0, dtype=float))
        self.rate_scale = float(rate_scale)
        self.k = 0
        self.reported_x = np.array(self.x0)
        self.reported_value = math.nan
        self.best_value_seen = math.inf
        self.initial_value = math.nan

    def _record(self, x: np.ndarray, observed: float):
        self.k += 1
        self.reported_x = x
        self.reported_value = observed
        if observed < self.best_value_seen:
            self.best_value_seen = observed
        if self.k == 1:
            self.initial_value = observed

    def step(self) -> float:
        raise NotImplementedError

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        raise NotImplementedError

    def _dist0(self) -> float:
        """Distance from the initializer to the minimizer, nominal R/2 fallback."""
        if self.problem.x_star is not None:
            d = float(np.linalg.norm(self.x0 - self.problem.x_star))
            if d > 0:
                return d
        return 0.5 * self.problem.fclass.R


class ProjectedSubgradient(_BaseOptimizer):
    """Projected (sub)gradient descent with a certified step schedule.

    schedule "lipschitz": eta_k = R / (M sqrt(k)), envelope M R / sqrt(k).
    schedule "strongly_convex": eta_k = 2 / (mu (k+1)), envelope M^2 / (mu k).
    "auto" picks strongly_convex whenever mu > 0.
    """

    name = "pgd"

    def __init__(self, problem, oracle, x0=None, schedule: str = "auto", rate_scale: float = 1.0):
        super().__init__(problem, oracle, x0, rate_scale)
        fc = problem.fclass
        if schedule == "auto":
            schedule = "strongly_convex" if fc.mu > 0 else "lipschitz"
        if schedule == "lipschitz":
            if not math.isfinite(fc.M):
                raise IncompatibleOptimizerError("lipschitz schedule needs a finite M")
        elif schedule == "strongly_convex":
            if fc.mu <= 0:
                raise IncompatibleOptimizerError("strongly_convex schedule needs mu > 0")
            if not math.isfinite(fc.M):
                raise IncompatibleOptimizerError("the M^2/(mu k) envelope needs a finite M")
        else:
            raise ValueError(f"unknown schedule {schedule!r}")
        self.schedule = schedule
        self.z = np.array(self.x0)  # raw search iterate; reported point is the running best

    def _eta(self, s: int) -> float:
        fc = self.problem.fclass
        if self.schedule == "lipschitz":
            return fc.R / (fc.M * math.sqrt(s))
        return 2.0 / (fc.mu * (s + 1))

    def step(self) -> float:
        s = self.k + 1
        g = self.oracle.query(self.z).gradient
        self.z = projected_step(self.problem, self.z, self._eta(s), g)
        observed = self.oracle.observe_value(self.z)
        if observed <= self.best_value_seen or self.k == 0:
            self._record(np.array(self.z), observed)
        else:
            self._record(self.reported_x, self.reported_value)
        return self.reported_value

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        fc = self.problem.fclass
        if self.schedule == "lipschitz":
            return Polynomial(beta=self.rate_scale * fc.M * fc.R, r=0.5)
        return Polynomial(beta=self.rate_scale * fc.M**2 / fc.mu, r=1.0)


class AcceleratedGradient(_BaseOptimizer):
    """Two-sequence accelerated descent with a monotone reject-and-restart safeguard.

    The candidate point is accepted only if it does not increase the observed
    value; otherwise the reported point is kept and the momentum is refreshed.
    Certifies 2 L ||x0 - x*||^2 / ((k+2)(k+3)) on smooth convex problems and
    R^2 exp(-k / sqrt(kappa)) when the problem is also strongly convex.
    """

    name = "agd"

    def __init__(self, problem, oracle, x0=None, rate_scale: float = 1.0):
        super().__init__(problem, oracle, x0, rate_scale)
        fc = problem.fclass
        if not math.isfinite(fc.L):
            raise IncompatibleOptimizerError("accelerated descent needs a finite smoothness L")
        self.x = np.array(self.x0)
        self.x_val = self.oracle.observe_value(self.x)
        self.y = np.array(self.x0)
        self.t_mom = 1.0

    def step(self) -> float:
        fc = self.problem.fclass
        g = self.oracle.query(self.y).gradient
        cand = projected_step(self.problem, self.y, 1.0 / fc.L, g)
        cand_val = self.oracle.observe_value(cand)
        if cand_val <= self.x_val:
            prev = self.x
            self.x = cand
            self.x_val = cand_val
            if fc.mu > 0:
                root_kappa = math.sqrt(fc.kappa)
                beta = (root_kappa - 1.0) / (root_kappa + 1.0)
                self.y = self.x + beta * (self.x - prev)
            else:
                t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * self.t_mom**2))
                self.y = self.x + ((self.t_mom - 1.0) / t_next) * (self.x - prev)
                self.t_mom = t_next
        else:
            self.t_mom = 1.0
            self.y = np.array(self.x)
        self._record(np.array(self.x), self.x_val)
        return self.reported_value

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        fc = self.problem.fclass
        if fc.mu > 0:
            return Exponential(amp=self.rate_scale * fc.R**2, tau=math.sqrt(fc.kappa))
        return InverseQuadratic(amp=self.rate_scale * 2.0 * fc.L * self._dist0() ** 2)


class TripleAveragingSubgradient(_BaseOptimizer):
    """Quasi-monotone subgradient method with three averaging sequences.

    Maintains the accumulated subgradient sum, the regularized mirror points
    it induces, and the running average of query points, which is the
    reported iterate.  Certifies M R / sqrt(k) on bounded domains.
    """

    name = "triple_avg"

    def __init__(self, problem, oracle, x0=None, rate_scale: float = 1.0, beta0: Optional[float] = None):
        super().__init__(problem, oracle, x0, rate_scale)
        fc = problem.fclass
        if not math.isfinite(fc.M):
            raise IncompatibleOptimizerError("subgradient averaging needs a finite M")
        if isinstance(problem.feasible, Unbounded):
            raise IncompatibleOptimizerError("subgradient averaging needs a bounded feasible set")
        self.beta0 = beta0 if beta0 is not None else math.sqrt(2.0) * fc.M / fc.R
        self.z_sum = np.zeros(problem.dim)  # accumulated subgradients
        self.x_query = np.array(self.x0)
        self.x_avg = np.array(self.x0)

    def step(self) -> float:
        s = self.k + 1
        g = self.oracle.query(self.x_query).gradient
        self.z_sum = self.z_sum + g
        beta_s = self.beta0 * math.sqrt(s + 1)
        v = project(self.problem.feasible, self.x0 - self.z_sum / beta_s)
        self.x_avg = self.x_query if s == 1 else ((s - 1) * self.x_avg + self.x_query) / s
        self.x_query = (s * self.x_avg + v) / (s + 1)
        observed = self.oracle.observe_value(self.x_avg)
        self._record(np.array(self.x_avg), observed)
        return self.reported_value

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        fc = self.problem.fclass
        return Polynomial(beta=self.rate_scale * fc.M * fc.R, r=0.5)


class StochasticAccelerated(_BaseOptimizer):
    """Accelerated stochastic update reporting the averaged iterate.

    Queries the gradient at the usual interpolation of the fast and averaged
    sequences, takes a projected step with eta_t = 1 / (gamma sqrt(t)), and
    certifies (2 gamma R + 4 sqrt(2) (M^2 + sigma^2) / (3 gamma)) / sqrt(k),
    with a log(1/delta) factor attached when a confidence level is requested.
    """

    name = "sagd"

    def __init__(self, problem, oracle, x0=None, rate_scale: float = 1.0, gamma: float = 1.0):
        super().__init__(problem, oracle, x0, rate_scale)
        if not isinstance(oracle.noise, GaussianGradient):
            raise IncompatibleOptimizerError("stochastic accelerated descent needs gradient noise")
        if gamma <= 0:
            raise IncompatibleOptimizerError("gamma must be positive")
        fc = problem.fclass
        if not (math.isfinite(fc.M) or math.isfinite(fc.L)):
            raise IncompatibleOptimizerError("needs a finite M or L for the rate constant")
        self.gamma = float(gamma)
        self.x_fast = np.array(self.x0)
        self.x_avg = np.array(self.x0)

    @property
    def sigma(self) -> float:
        return self.oracle.noise.sigma

    def _grad_bound(self) -> float:
        fc = self.problem.fclass
        if math.isfinite(fc.M):
            return fc.M
        return fc.L * fc.R  # smooth fallback: gradient norm bound over the nominal domain

    def step(self) -> float:
        t = self.k + 1
        alpha = 2.0 / (t + 1)
        x_md = (1.0 - alpha) * self.x_avg + alpha * self.x_fast
        g = self.oracle.query(x_md).gradient
        eta = 1.0 / (self.gamma * math.sqrt(t))
        self.x_fast = projected_step(self.problem, self.x_fast, eta, g)
        self.x_avg = (1.0 - alpha) * self.x_avg + alpha * self.x_fast
        observed = self.oracle.observe_value(self.x_avg)
        self._record(np.array(self.x_avg), observed)
        return self.reported_value

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        fc = self.problem.fclass
        M = self._grad_bound()
        beta = 2.0 * self.gamma * fc.R + (4.0 * math.sqrt(2.0) / 3.0) * (
            M**2 + self.sigma**2
        ) / self.gamma
        if delta > 0:
            return Polynomial(beta=self.rate_scale * beta, r=0.5, conf="log", delta=delta)
        return Polynomial(beta=self.rate_scale * beta, r=0.5)


class ScriptedOptimizer:
    """An arm whose reported values follow a prescribed schedule.

    Useful as a synthetic certified arm: with value(k) = f* + theta * g(k)
    for theta in (0, 1], it is g-bounded by construction.
    """

    name = "scripted"

    def __init__(self, problem: Problem, rate: RateFunction, theta: float = 1.0,
                 value_fn: Optional[Callable[[int], float]] = None):
        if problem.f_star is None and value_fn is None:
            raise ValueError("scripted arms need a known optimum or an explicit schedule")
        self.problem = problem
        self.oracle = FirstOrderOracle(problem)
        self._rate = rate
        self.theta = theta
        self.value_fn = value_fn
        self.k = 0
        self.reported_x = np.zeros(problem.dim)
        self.reported_value = math.nan
        self.best_value_seen = math.inf
        self.initial_value = math.nan

    def step(self) -> float:
        self.k += 1
        self.oracle.query_count += 1  # scripted arms consume their budget notionally
        if self.value_fn is not None:
            value = float(self.value_fn(self.k))
        else:
            value = self.problem.f_star + self.theta * self._rate.eval(self.k)
        self.reported_value = value
        if value < self.best_value_seen:
            self.best_value_seen = value
        if self.k == 1:
            self.initial_value = value
        return value

    def certified_rate(self, delta: float = 0.0) -> RateFunction:
        return self._rate


OPTIMIZERS = {
    "pgd": ProjectedSubgradient,
    "agd": AcceleratedGradient,
    "triple_avg": TripleAveragingSubgradient,
    "sagd": StochasticAccelerated,
}


def make_optimizer(name: str, problem: Problem, oracle: FirstOrderOracle, x0=None, **params):
    """Build a named optimizer ('pgd', 'agd', 'triple_avg', 'sagd')."""
    try:
        cls = OPTIMIZERS[name]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}; choose from {sorted(OPTIMIZERS)}") from None
    return cls(problem, oracle, x0=x0, **params)


def certified_rate(optimizer, delta: float = 0.0) -> RateFunction:
    """The rate function this optimizer certifies for its problem, delta baked in."""
    return optimizer.certified_rate(delta)
