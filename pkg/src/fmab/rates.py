"""Convergence-rate certificates and the regret/budget bound calculators built on them.

A rate function g(k) (or g(k, delta) with a confidence factor) upper-bounds the
suboptimality of a certified optimizer after k steps.  This module provides the
evaluable/invertible rate envelopes, per-class hardness functions, and the
closed-form upper/lower regret bounds and identification budgets used by the
allocator and the bounds reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

CONF_NONE = "none"
CONF_LOG = "log"


class RateConfigError(ValueError):
    """Invalid rate parameters (e.g. log(1/delta) factor with delta=0)."""


class MixedExponentsError(ValueError):
    """Polynomial rates with different exponents fed to a common-exponent bound."""


def _conf_factor(conf: str, delta: float) -> float:
    if conf == CONF_NONE:
        return 1.0
    if conf == CONF_LOG:
        if not 0.0 < delta < 1.0:
            raise RateConfigError(
                f"log(1/delta) confidence factor needs delta in (0, 1), got {delta}"
            )
        return math.log(1.0 / delta)
    raise RateConfigError(f"unknown confidence kind {conf!r}")


def _refine_inverse(rate: "RateFunction", eps: float, guess: int) -> int:
    # Fix floating-point drift in closed-form inverses: walk to the exact
    # smallest k with eval(k) <= eps.  eval is nonincreasing.
    k = max(1, guess)
    while rate.eval(k) > eps:
        k += 1
    while k > 1 and rate.eval(k - 1) <= eps:
        k -= 1
    return k


@dataclass(frozen=True)
class Polynomial:
    """g(k) = beta * c(delta) / k**r."""

    beta: float
    r: float
    conf: str = CONF_NONE
    delta: float = 0.0

    def __post_init__(self):
        if self.beta <= 0:
            raise RateConfigError(f"beta must be positive, got {self.beta}")
        if self.r <= 0:
            raise RateConfigError(f"exponent r must be positive, got {self.r}")
        _conf_factor(self.conf, self.delta)

    def eval(self, k: float) -> float:
        if k < 1:
            raise ValueError(f"rate functions are defined for k >= 1, got {k}")
        return self.beta * _conf_factor(self.conf, self.delta) / k**self.r

    def inverse(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        c = self.beta * _conf_factor(self.conf, self.delta)
        guess = math.ceil((c / eps) ** (1.0 / self.r))
        return _refine_inverse(self, eps, guess)


@dataclass(frozen=True)
class Exponential:
    """g(k) = amp * c(delta) * exp(-k / tau); amp is a squared-diameter scale."""

    amp: float
    tau: float
    conf: str = CONF_NONE
    delta: float = 0.0

    def __post_init__(self):
        if self.amp <= 0 or self.tau <= 0:
            raise RateConfigError(f"amp and tau must be positive, got {self.amp}, {self.tau}")
        _conf_factor(self.conf, self.delta)

    def eval(self, k: float) -> float:
        if k < 1:
            raise ValueError(f"rate functions are defined for k >= 1, got {k}")
        return self.amp * _conf_factor(self.conf, self.delta) * math.exp(-k / self.tau)

    def inverse(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        c = self.amp * _conf_factor(self.conf, self.delta)
        guess = math.ceil(self.tau * math.log(max(c / eps, 1.0)))
        return _refine_inverse(self, eps, guess)


@dataclass(frozen=True)
class InverseQuadratic:
    """g(k) = amp / ((k + 2) * (k + 3)), the accelerated-descent envelope."""

    amp: float
    conf: str = CONF_NONE
    delta: float = 0.0

    def __post_init__(self):
        if self.amp <= 0:
            raise RateConfigError(f"amp must be positive, got {self.amp}")
        _conf_factor(self.conf, self.delta)

    def eval(self, k: float) -> float:
        if k < 1:
            raise ValueError(f"rate functions are defined for k >= 1, got {k}")
        return self.amp * _conf_factor(self.conf, self.delta) / ((k + 2.0) * (k + 3.0))

    def inverse(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        c = self.amp * _conf_factor(self.conf, self.delta)
        # (k+2)(k+3) >= c/eps  <=>  k >= (-5 + sqrt(1 + 4c/eps)) / 2
        guess = math.ceil((-5.0 + math.sqrt(1.0 + 4.0 * c / eps)) / 2.0)
        return _refine_inverse(self, eps, guess)


@dataclass(frozen=True)
class Heuristic:
    """g(k) = scale / sqrt(k); scale is twice the first observed objective value."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise RateConfigError(
                f"heuristic rate needs a positive scale (first value > 0), got {self.scale}"
            )

    def eval(self, k: float) -> float:
        if k < 1:
            raise ValueError(f"rate functions are defined for k >= 1, got {k}")
        return self.scale / math.sqrt(k)

    def inverse(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        guess = math.ceil((self.scale / eps) ** 2)
        return _refine_inverse(self, eps, guess)


@dataclass(frozen=True)
class MaxOf:
    """Pointwise maximum of two rate functions."""

    first: "RateFunction"
    second: "RateFunction"

    def eval(self, k: float) -> float:
        return max(self.first.eval(k), self.second.eval(k))

    def inverse(self, eps: float) -> int:
        if eps <= 0:
            raise ValueError(f"eps must be positive, got {eps}")
        guess = max(self.first.inverse(eps), self.second.inverse(eps))
        return _refine_inverse(self, eps, guess)


RateFunction = Union[Polynomial, Exponential, InverseQuadratic, Heuristic, MaxOf]


def rate_eval(rate: RateFunction, k: float) -> float:
    """Value of the certificate after k steps (k >= 1)."""
    return rate.eval(k)


def rate_inverse(rate: RateFunction, eps: float) -> int:
    """Smallest integer k with rate_eval(rate, k) <= eps."""
    return rate.inverse(eps)


# ---------------------------------------------------------------------------
# Identification budgets and cumulative-regret upper bounds
# ---------------------------------------------------------------------------


def bfi_budget_bound(gaps, rates, eps: float) -> int:
    """Worst-case number of rounds to certify an eps-optimal arm.

    gaps[i] is f_i^* - f^* (the best arm has gap 0); rates[i] is arm i's
    certificate.  Returns 1 + sum_i inverse_i(max(gap_i - eps/2, eps/2)).
    """
    gaps = list(gaps)
    rates = list(rates)
    if len(gaps) != len(rates):
        raise ValueError("gaps and rates must have one entry per arm")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not any(g == 0 for g in gaps):
        raise ValueError("one gap must be exactly 0 (the best arm)")
    total = 1
    for gap, rate in zip(gaps, rates):
        target = max(gap - eps / 2.0, eps / 2.0)
        total += rate.inverse(target)
    return total


def fmab_upper_bound(rates, tau: float) -> float:
    """Cumulative-regret upper bound for polynomial rates sharing one exponent.

    Cases: r in (0,1) -> (sum beta^(1/r))^r * tau^(1-r); r = 1 ->
    (sum beta) * log tau; r > 1 -> (sum beta) * r / (r - 1).
    """
    rates = list(rates)
    if not rates:
        raise ValueError("need at least one rate")
    if not all(isinstance(g, Polynomial) for g in rates):
        raise TypeError("fmab_upper_bound takes Polynomial rates only")
    r = rates[0].r
    if any(abs(g.r - r) > 1e-12 for g in rates):
        raise MixedExponentsError("all rates must share the same exponent r")
    betas = [g.beta * _conf_factor(g.conf, g.delta) for g in rates]
    if r < 1.0:
        return sum(b ** (1.0 / r) for b in betas) ** r * tau ** (1.0 - r)
    if r == 1.0:
        return sum(betas) * math.log(tau)
    return sum(betas) * r / (r - 1.0)


def exponential_sum_bound(rates) -> float:
    """Cumulative-regret bound sum_i amp_i / (exp(1/tau_i) - 1) for Exponential rates."""
    rates = list(rates)
    if not all(isinstance(g, Exponential) for g in rates):
        raise TypeError("exponential_sum_bound takes Exponential rates only")
    return sum(
        g.amp * _conf_factor(g.conf, g.delta) / (math.exp(1.0 / g.tau) - 1.0) for g in rates
    )


# ---------------------------------------------------------------------------
# Class-wide hardness functions and minimax lower bounds
# ---------------------------------------------------------------------------

CONVEX_LIPSCHITZ = "convex_lipschitz"
SMOOTH_CONVEX = "smooth_convex"
STRONGLY_CONVEX_LIPSCHITZ = "strongly_convex_lipschitz"
STRONGLY_CONVEX_SMOOTH = "strongly_convex_smooth"

HARDNESS_TAGS = (
    CONVEX_LIPSCHITZ,
    SMOOTH_CONVEX,
    STRONGLY_CONVEX_LIPSCHITZ,
    STRONGLY_CONVEX_SMOOTH,
)


@dataclass(frozen=True)
class HardnessFunction:
    """Per-oracle-call minimax suboptimality floor for a problem class."""

    tag: str
    M: float = math.nan
    L: float = math.nan
    mu: float = math.nan
    R: float = math.nan
    constant_scale: float = 1.0

    def __post_init__(self):
        if self.tag not in HARDNESS_TAGS:
            raise ValueError(f"unknown class tag {self.tag!r}")
        needed = {
            CONVEX_LIPSCHITZ: ("M", "R"),
            SMOOTH_CONVEX: ("L", "R"),
            STRONGLY_CONVEX_LIPSCHITZ: ("M", "mu"),
            STRONGLY_CONVEX_SMOOTH: ("L", "mu", "R"),
        }[self.tag]
        for name in needed:
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"class {self.tag} needs finite positive {name}")

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    def eval(self, s: float) -> float:
        """The floor after s oracle calls (s >= 1)."""
        if s < 1:
            raise ValueError(f"hardness is defined for s >= 1, got {s}")
        c = self.constant_scale
        if self.tag == CONVEX_LIPSCHITZ:
            return c * self.M * self.R / math.sqrt(s)
        if self.tag == SMOOTH_CONVEX:
            return c * self.L * self.R**2 / s**2
        if self.tag == STRONGLY_CONVEX_LIPSCHITZ:
            return c * self.M**2 / (self.mu * s)
        return c * self.R**2 * math.exp(-s / math.sqrt(self.kappa))


def hardness_eval(h: HardnessFunction, s: float) -> float:
    return h.eval(s)


def hardness_G(h: HardnessFunction, m: int) -> float:
    """Prefix sum G(m) = sum_{s=1..m} of the hardness floor; G(0) = 0."""
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    return sum(h.eval(s) for s in range(1, m + 1))


def allocation_infimum(h: HardnessFunction, T: int, K: int) -> float:
    """inf over allocations (k_1..k_K >= 0, sum = T) of sum_i G(k_i), by DP."""
    if T < 1 or K < 1:
        raise ValueError("need T >= 1 and K >= 1")
    G = [0.0] * (T + 1)
    for m in range(1, T + 1):
        G[m] = G[m - 1] + h.eval(m)
    best = G[:]  # one arm
    for _ in range(1, K):
        nxt = [min(best[t - m] + G[m] for m in range(t + 1)) for t in range(T + 1)]
        best = nxt
    return best[T]


def fmab_lower_bound(h: HardnessFunction, T: int, K: int) -> float:
    """Minimax cumulative-regret floor: inf over budget splits of summed G.

    G is concave whenever the per-call floor is nonincreasing, so the infimum
    concentrates all pulls on one arm and equals G(T); a DP fallback covers
    any non-concave floor.
    """
    if T < 1 or K < 1:
        raise ValueError("need T >= 1 and K >= 1")
    increments = [h.eval(s) for s in range(1, min(T, 10_000) + 1)]
    concave = all(b <= a + 1e-15 for a, b in zip(increments, increments[1:]))
    if concave or K == 1:
        return hardness_G(h, T)
    return allocation_infimum(h, T, K)


def bfi_lower_bound(h: HardnessFunction, T: int, K: int) -> float:
    """Minimax identification-regret floor: the hardness floor at T/K calls."""
    if T < K:
        raise ValueError(f"need T >= K, got T={T}, K={K}")
    return h.eval(T / K)


def vicinity_hitting_time(h: HardnessFunction, eps: float) -> int:
    """Smallest integer t with the hardness floor at t at most eps."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    c = h.constant_scale
    # closed-form initial guesses, then exact refinement against eval
    if h.tag == CONVEX_LIPSCHITZ:
        guess = math.ceil((c * h.M * h.R / eps) ** 2)
    elif h.tag == SMOOTH_CONVEX:
        guess = math.ceil(math.sqrt(c * h.L * h.R**2 / eps))
    elif h.tag == STRONGLY_CONVEX_LIPSCHITZ:
        guess = math.ceil(c * h.M**2 / (h.mu * eps))
    else:
        guess = math.ceil(math.sqrt(h.kappa) * math.log(max(c * h.R**2 / eps, 1.0)))
    t = max(1, guess)
    while h.eval(t) > eps:
        t += 1
    while t > 1 and h.eval(t - 1) <= eps:
        t -= 1
    return t


# ---------------------------------------------------------------------------
# Stochastic-case regret formulas (bound calculation only; the clipped
# optimizers behind them are not part of this artifact)
# ---------------------------------------------------------------------------


def stochastic_regret_bound(
    tag: str,
    *,
    K: int,
    T: int,
    A: float,
    sigma: float,
    R: float = math.nan,
    L: float = math.nan,
    mu: float = math.nan,
    alpha: float = 2.0,
) -> float:
    """Regret formula for the stochastic setting, by problem class tag."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    log_term = math.log(A * K * T)
    if tag == SMOOTH_CONVEX:
        return max(K * L * R**2, alpha * sigma * R * K ** (1 - 1 / alpha) * T ** (1 / alpha) * log_term)
    if tag == STRONGLY_CONVEX_SMOOTH:
        return max(
            K * math.sqrt(L / mu),
            (sigma**2 / mu) * K ** (2 * (alpha - 1) / alpha) * T ** (2 / alpha - 1) * log_term,
        )
    if tag == STRONGLY_CONVEX_LIPSCHITZ:
        return math.sqrt(K * T) * sigma * R * log_term
    raise ValueError(f"no stochastic regret formula for class tag {tag!r}")
