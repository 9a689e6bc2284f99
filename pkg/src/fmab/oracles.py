"""Exact and noisy zero-/first-order oracles with per-arm call accounting.

A first-order query returns the objective value and a (possibly perturbed)
gradient.  Deterministic runs observe exact losses; gradient noise is the
default stochastic channel, with noisy value observation available as an
opt-in.  Heavy-tailed rewards for the one-dimensional reduction are sampled
by the inverse-CDF transform so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .problems import Problem, _as_vector


@dataclass(frozen=True)
class GaussianGradient:
    """Per-coordinate gradient perturbation (sigma / sqrt(dim)) * N(0, 1)."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class GaussianValue:
    """Additive N(0, sigma^2) noise on observed objective values."""

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class Cauchy:
    """Standard-Cauchy-shaped reward noise with the given scale."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")


NoiseModel = Optional[Union[GaussianGradient, GaussianValue, Cauchy]]


@dataclass
class OracleReply:
    value: float
    gradient: Optional[np.ndarray]
    query_count: int


class FirstOrderOracle:
    """Stateful per-arm oracle: one query per base-optimizer step.

    samples_per_step > 1 averages that many noise draws inside a single
    query (the query still counts once).
    """

    def __init__(
        self,
        problem: Problem,
        noise: NoiseModel = None,
        rng: Optional[np.random.Generator] = None,
        samples_per_step: int = 1,
    ):
        if isinstance(noise, Cauchy):
            raise ValueError("Cauchy noise is a zero-order reward model; use sample_reward")
        if samples_per_step < 1:
            raise ValueError("samples_per_step must be >= 1")
        self.problem = problem
        self.noise = noise
        self.rng = rng if rng is not None else np.random.default_rng()
        self.samples_per_step = int(samples_per_step)
        self.query_count = 0

    def query(self, x) -> OracleReply:
        x = _as_vector(x, self.problem.dim)
        self.query_count += 1
        value = self.problem.value(x)
        grad = self.problem.subgradient(x)
        if isinstance(self.noise, GaussianGradient) and self.noise.sigma > 0:
            scale = self.noise.sigma / math.sqrt(self.problem.dim)
            draws = self.rng.standard_normal((self.samples_per_step, self.problem.dim))
            grad = grad + scale * draws.mean(axis=0)
        elif isinstance(self.noise, GaussianValue) and self.noise.sigma > 0:
            draws = self.rng.standard_normal(self.samples_per_step)
            value = value + self.noise.sigma * float(draws.mean())
        return OracleReply(value=value, gradient=grad, query_count=self.query_count)

    def observe_value(self, x) -> float:
        """Loss observation for the played point; does not count as a query.

        Exact unless the value-noise opt-in is active.
        """
        x = _as_vector(x, self.problem.dim)
        value = self.problem.value(x)
        if isinstance(self.noise, GaussianValue) and self.noise.sigma > 0:
            value = value + self.noise.sigma * float(self.rng.standard_normal())
        return value


def query_first_order(
    problem: Problem, x, noise: NoiseModel = None, rng: Optional[np.random.Generator] = None
) -> OracleReply:
    """One-shot first-order query (query_count is 1: a fresh oracle)."""
    return FirstOrderOracle(problem, noise, rng).query(x)


def cauchy_from_uniform(u: float, scale: float = 1.0) -> float:
    """Quantile transform: u in (0, 1) -> scale * tan(pi * (u - 1/2))."""
    return scale * math.tan(math.pi * (u - 0.5))


def sample_reward(mu_arm: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """Zero-order reward mu_arm + xi, with xi drawn from the noise model."""
    if noise is None:
        return mu_arm
    if isinstance(noise, Cauchy):
        return mu_arm + cauchy_from_uniform(rng.uniform(), noise.scale)
    if isinstance(noise, (GaussianValue, GaussianGradient)):
        return mu_arm + noise.sigma * rng.standard_normal()
    raise TypeError(f"unsupported reward noise model {noise!r}")
