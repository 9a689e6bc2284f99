"""Synthetic convex problem instances with analytically known optima.

Each instance carries its feasible set, its function-class constants
(mu, L, M, R) and, for every synthetic family, the exact minimum and
minimizer, so rate certificates and regret can be checked without any
numerical optimization in the loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class DimensionMismatchError(ValueError):
    """Query point dimension does not match the problem dimension."""


class InvalidInstanceError(ValueError):
    """Instance parameters violate a construction precondition."""


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.shape != (dim,):
        raise DimensionMismatchError(f"expected a vector of dim {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


# ---------------------------------------------------------------------------
# Feasible sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise InvalidInstanceError("box bounds must have matching shapes")
        if np.any(self.lower > self.upper):
            raise InvalidInstanceError("box needs lower <= upper coordinatewise")

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise InvalidInstanceError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def project(self, x: np.ndarray) -> np.ndarray:
        shift = x - self.center
        norm = float(np.linalg.norm(shift))
        if norm <= self.radius:
            return np.array(x, dtype=float)
        return self.center + shift * (self.radius / norm)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol


@dataclass(frozen=True)
class Unbounded:
    """No constraint; carries a nominal diameter so R-based rates stay evaluable."""

    nominal_diameter: float
    dim: int = 0  # informational only

    def __post_init__(self):
        if self.nominal_diameter <= 0:
            raise InvalidInstanceError("nominal diameter must be positive")

    @property
    def diameter(self) -> float:
        return self.nominal_diameter

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.array(x, dtype=float)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return True


FeasibleSet = Box | Ball | Unbounded


def project(feasible: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection onto the feasible set."""
    x = np.asarray(x, dtype=float)
    if isinstance(feasible, (Box, Ball)) and x.shape != (feasible.dim,):
        raise DimensionMismatchError(
            f"expected a vector of dim {feasible.dim}, got shape {x.shape}"
        )
    return feasible.project(x)


# ---------------------------------------------------------------------------
# Function-class constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionClass:
    """(mu, L, M, R) constants; use math.inf for an absent L or M."""

    mu: float
    L: float
    M: float
    R: float

    def __post_init__(self):
        if self.mu < 0:
            raise InvalidInstanceError("mu must be nonnegative")
        if self.L <= 0 or self.M <= 0:
            raise InvalidInstanceError("L and M must be positive (inf if absent)")
        if not (math.isfinite(self.L) or math.isfinite(self.M)):
            raise InvalidInstanceError("at least one of L, M must be finite")
        if self.R <= 0 or not math.isfinite(self.R):
            raise InvalidInstanceError("diameter R must be finite and positive")

    @property
    def kappa(self) -> float:
        """Condition number L/mu; defined only when both are finite and mu > 0."""
        if self.mu <= 0 or not math.isfinite(self.L):
            return math.nan
        return self.L / self.mu


# ---------------------------------------------------------------------------
# Problem instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Problem:
    """A convex objective with feasible set, class constants and (optionally)
    its known minimum.  Subclasses implement value/subgradient closed forms."""

    id: str
    dim: int
    feasible: FeasibleSet
    fclass: FunctionClass
    f_star: Optional[float] = None
    x_star: Optional[np.ndarray] = None

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def known_opt(self) -> bool:
        return self.f_star is not None


@dataclass(frozen=True)
class SqrtQuadratic(Problem):
    """f(x) = sqrt(1 + (x - x*)^T diag(sigma) (x - x*)) + c; smooth, L = max sigma."""

    sigma: np.ndarray = field(default=None)
    c: float = 0.0

    def value(self, x) -> float:
        u = _as_vector(x, self.dim) - self.x_star
        q = float(np.dot(self.sigma * u, u))
        return math.sqrt(1.0 + q) + self.c

    def subgradient(self, x) -> np.ndarray:
        u = _as_vector(x, self.dim) - self.x_star
        q = float(np.dot(self.sigma * u, u))
        return self.sigma * u / math.sqrt(1.0 + q)


@dataclass(frozen=True)
class MaxAffine(Problem):
    """f(x) = max_k (a_k . x + b_k) + c with mirrored slope pairs; minimum c at x*."""

    slopes: np.ndarray = field(default=None)  # (p, dim)
    offsets: np.ndarray = field(default=None)  # (p,)
    c: float = 0.0

    def _piece_values(self, x: np.ndarray) -> np.ndarray:
        return self.slopes @ x + self.offsets

    def value(self, x) -> float:
        x = _as_vector(x, self.dim)
        return float(np.max(self._piece_values(x))) + self.c

    def subgradient(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        j = int(np.argmax(self._piece_values(x)))  # lowest index wins ties
        return np.array(self.slopes[j], dtype=float)


@dataclass(frozen=True)
class QuadraticArm(Problem):
    """f(x) = (x - mu_arm)^2 / 2 - mu_arm^2 / 2 on the line; minimum -mu^2/2."""

    mu_arm: float = 0.0

    def value(self, x) -> float:
        x = _as_vector(x, 1)
        return 0.5 * float(x[0] - self.mu_arm) ** 2 - 0.5 * self.mu_arm**2

    def subgradient(self, x) -> np.ndarray:
        x = _as_vector(x, 1)
        return np.array([x[0] - self.mu_arm])


@dataclass(frozen=True)
class BlackBox(Problem):
    """External evaluator adapter: closed forms supplied as callables."""

    value_fn: Callable[[np.ndarray], float] = field(default=None)
    grad_fn: Callable[[np.ndarray], np.ndarray] = field(default=None)

    def value(self, x) -> float:
        return float(self.value_fn(_as_vector(x, self.dim)))

    def subgradient(self, x) -> np.ndarray:
        return np.asarray(self.grad_fn(_as_vector(x, self.dim)), dtype=float)


def evaluate(problem: Problem, x) -> float:
    """Exact objective value at x."""
    return problem.value(x)


def subgradient(problem: Problem, x) -> np.ndarray:
    """A subgradient at x (the exact gradient where the objective is smooth)."""
    return problem.subgradient(x)


# ---------------------------------------------------------------------------
# Instance factories
# ---------------------------------------------------------------------------


def make_smooth_convex(
    dim: int,
    x_star,
    c: float,
    rng_seed=None,
    *,
    sigma=None,
    nominal_diameter: Optional[float] = None,
    id: str = "sqrt_quadratic",
) -> SqrtQuadratic:
    """Random smooth instance: sigma_1 = 1, sigma_i = exp(-5 xi) with xi ~ U[0,1].

    Pass sigma explicitly to pin the curvatures.  Runs unconstrained; the
    nominal diameter defaults to twice the distance from the origin to x*
    plus a unit margin, which covers the zero initializer.
    """
    if dim < 1:
        raise InvalidInstanceError(f"dim must be >= 1, got {dim}")
    x_star = _as_vector(x_star, dim)
    rng = np.random.default_rng(rng_seed)
    if sigma is None:
        sigma = np.ones(dim)
        if dim > 1:
            sigma[1:] = np.exp(-5.0 * rng.uniform(size=dim - 1))
    else:
        sigma = _as_vector(sigma, dim)
        if np.any(sigma <= 0):
            raise InvalidInstanceError("sigma entries must be positive")
    if nominal_diameter is None:
        nominal_diameter = 2.0 * (float(np.linalg.norm(x_star)) + 1.0)
    L = float(np.max(sigma))
    # gradient norm is at most sqrt(max sigma) everywhere
    M = math.sqrt(L)
    fclass = FunctionClass(mu=0.0, L=L, M=M, R=nominal_diameter)
    return SqrtQuadratic(
        id=id,
        dim=dim,
        feasible=Unbounded(nominal_diameter, dim),
        fclass=fclass,
        f_star=1.0 + c,
        x_star=x_star,
        sigma=sigma,
        c=c,
    )


def make_max_affine(
    dim: int,
    p: int,
    x_star,
    c: float,
    bound: float,
    rng_seed=None,
    *,
    slope_scale: float = 1.0,
    id: str = "max_affine",
) -> MaxAffine:
    """Random piecewise-linear instance on the box [-bound, bound]^dim.

    ceil(p/2) random slopes are generated and mirrored (+a, -a), and offsets
    make every piece vanish at x*, so 0 lies in the subdifferential there and
    the minimum is exactly c.  Slope norms are uniform in
    [slope_scale/2, slope_scale].
    """
    if dim < 1:
        raise InvalidInstanceError(f"dim must be >= 1, got {dim}")
    if p < 2:
        raise InvalidInstanceError(f"need at least two pieces, got {p}")
    x_star = _as_vector(x_star, dim)
    if np.any(np.abs(x_star) >= bound):
        raise InvalidInstanceError("x_star must lie strictly inside the box")
    rng = np.random.default_rng(rng_seed)
    half = (p + 1) // 2
    directions = rng.normal(size=(half, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    norms = rng.uniform(0.5 * slope_scale, slope_scale, size=(half, 1))
    base = directions * norms
    slopes = np.vstack([base, -base])
    offsets = -slopes @ x_star
    M = float(np.max(np.linalg.norm(slopes, axis=1)))
    lower = np.full(dim, -bound)
    upper = np.full(dim, bound)
    feasible = Box(lower, upper)
    fclass = FunctionClass(mu=0.0, L=math.inf, M=M, R=feasible.diameter)
    return MaxAffine(
        id=id,
        dim=dim,
        feasible=feasible,
        fclass=fclass,
        f_star=c,
        x_star=x_star,
        slopes=slopes,
        offsets=offsets,
        c=c,
    )


def make_quadratic_arm(mu_arm: float, *, id: str = "quadratic_arm") -> QuadraticArm:
    """One-dimensional reward-estimation surrogate with minimum -mu^2/2 at mu.

    The nominal domain is a ball around the origin covering the minimizer with
    a unit margin, which supplies finite M and R for rate bookkeeping.
    """
    radius = abs(mu_arm) + 1.0
    fclass = FunctionClass(mu=1.0, L=1.0, M=radius + abs(mu_arm), R=2.0 * radius)
    return QuadraticArm(
        id=id,
        dim=1,
        feasible=Unbounded(2.0 * radius, 1),
        fclass=fclass,
        f_star=-0.5 * mu_arm**2,
        x_star=np.array([mu_arm]),
        mu_arm=mu_arm,
    )


# ---------------------------------------------------------------------------
# Serialization (byte-stable given identical construction)
# ---------------------------------------------------------------------------


def _feasible_to_dict(feasible: FeasibleSet) -> dict:
    if isinstance(feasible, Box):
        return {"set": "box", "lower": feasible.lower.tolist(), "upper": feasible.upper.tolist()}
    if isinstance(feasible, Ball):
        return {"set": "ball", "center": feasible.center.tolist(), "radius": feasible.radius}
    return {"set": "unbounded", "diameter": feasible.nominal_diameter, "dim": feasible.dim}


def _feasible_from_dict(d: dict) -> FeasibleSet:
    if d["set"] == "box":
        return Box(np.array(d["lower"]), np.array(d["upper"]))
    if d["set"] == "ball":
        return Ball(np.array(d["center"]), d["radius"])
    return Unbounded(d["diameter"], d.get("dim", 0))


def problem_to_json(problem: Problem) -> str:
    doc = {
        "id": problem.id,
        "dim": problem.dim,
        "feasible": _feasible_to_dict(problem.feasible),
        "fclass": {
            "mu": problem.fclass.mu,
            "L": None if math.isinf(problem.fclass.L) else problem.fclass.L,
            "M": None if math.isinf(problem.fclass.M) else problem.fclass.M,
            "R": problem.fclass.R,
        },
        "f_star": problem.f_star,
        "x_star": None if problem.x_star is None else np.asarray(problem.x_star).tolist(),
    }
    if isinstance(problem, SqrtQuadratic):
        doc["kind"] = "sqrt_quadratic"
        doc["sigma"] = problem.sigma.tolist()
        doc["c"] = problem.c
    elif isinstance(problem, MaxAffine):
        doc["kind"] = "max_affine"
        doc["slopes"] = problem.slopes.tolist()
        doc["offsets"] = problem.offsets.tolist()
        doc["c"] = problem.c
    elif isinstance(problem, QuadraticArm):
        doc["kind"] = "quadratic_arm"
        doc["mu_arm"] = problem.mu_arm
    else:
        raise TypeError(f"{type(problem).__name__} instances do not serialize")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def problem_from_json(text: str) -> Problem:
    doc = json.loads(text)
    feasible = _feasible_from_dict(doc["feasible"])
    fc = doc["fclass"]
    fclass = FunctionClass(
        mu=fc["mu"],
        L=math.inf if fc["L"] is None else fc["L"],
        M=math.inf if fc["M"] is None else fc["M"],
        R=fc["R"],
    )
    x_star = None if doc["x_star"] is None else np.array(doc["x_star"])
    common = dict(
        id=doc["id"],
        dim=doc["dim"],
        feasible=feasible,
        fclass=fclass,
        f_star=doc["f_star"],
        x_star=x_star,
    )
    kind = doc["kind"]
    if kind == "sqrt_quadratic":
        return SqrtQuadratic(sigma=np.array(doc["sigma"]), c=doc["c"], **common)
    if kind == "max_affine":
        return MaxAffine(
            slopes=np.array(doc["slopes"]), offsets=np.array(doc["offsets"]), c=doc["c"], **common
        )
    if kind == "quadratic_arm":
        return QuadraticArm(mu_arm=doc["mu_arm"], **common)
    raise ValueError(f"unknown problem kind {kind!r}")


def default_x0(problem: Problem) -> np.ndarray:
    """Canonical initializer: box midpoint, ball center, or the origin."""
    if isinstance(problem.feasible, Box):
        return 0.5 * (problem.feasible.lower + problem.feasible.upper)
    if isinstance(problem.feasible, Ball):
        return np.array(problem.feasible.center, dtype=float)
    return np.zeros(problem.dim)
