"""Shared synthetic instance builders for the test suite."""

import math

import numpy as np

from fmab.problems import Ball, BlackBox, Box, FunctionClass, MaxAffine


def abs_value_problem(c=0.5, bound=4.0, M=1.0, R=None):
    """f(x) = M|x| + c on [-bound, bound]; the classic nonsmooth 1-d testbed."""
    feas = Box(np.array([-bound]), np.array([bound]))
    R = feas.diameter if R is None else R
    return MaxAffine(
        id="abs", dim=1, feasible=feas,
        fclass=FunctionClass(mu=0.0, L=math.inf, M=M, R=R),
        f_star=c, x_star=np.array([0.0]),
        slopes=np.array([[M], [-M]]), offsets=np.array([0.0, 0.0]), c=c,
    )


def composite_sc_lipschitz(rng, dim=5, mu=1.0, box_half=2.0, c=0.3):
    """max-affine plus (mu/2)||x - x*||^2 on a box: strongly convex, Lipschitz."""
    x_star = rng.uniform(-0.5 * box_half, 0.5 * box_half, size=dim)
    dirs = rng.normal(size=(3, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    base = dirs * rng.uniform(0.25, 0.5, size=(3, 1))
    slopes = np.vstack([base, -base])

    def value_fn(x):
        u = x - x_star
        return float(np.max(slopes @ u)) + 0.5 * mu * float(u @ u) + c

    def grad_fn(x):
        u = x - x_star
        return slopes[int(np.argmax(slopes @ u))] + mu * u

    feas = Box(np.full(dim, -box_half), np.full(dim, box_half))
    corner_dist = math.sqrt(
        sum(max(abs(-box_half - s), abs(box_half - s)) ** 2 for s in x_star)
    )
    M = float(np.max(np.linalg.norm(slopes, axis=1))) + mu * corner_dist
    return BlackBox(
        id="sc_lip", dim=dim, feasible=feas,
        fclass=FunctionClass(mu=mu, L=math.inf, M=M, R=feas.diameter),
        f_star=c, x_star=x_star, value_fn=value_fn, grad_fn=grad_fn,
    )


def diag_quadratic_sc_smooth(rng, dim=8, kappa=10.0, L=1.0, c=0.2):
    """Diagonal quadratic with spectrum [L/kappa, L] on a ball around the origin."""
    evals = np.linspace(L / kappa, L, dim)
    x_star = rng.normal(size=dim)
    x_star /= np.linalg.norm(x_star)
    x_star *= rng.uniform(0.5, 1.0)

    def value_fn(x):
        u = x - x_star
        return 0.5 * float(evals @ (u * u)) + c

    def grad_fn(x):
        return evals * (x - x_star)

    radius = 2.0 * float(np.linalg.norm(x_star))
    return BlackBox(
        id="sc_smooth", dim=dim, feasible=Ball(np.zeros(dim), radius),
        fclass=FunctionClass(mu=float(evals[0]), L=L, M=math.inf, R=2.0 * radius),
        f_star=c, x_star=x_star, value_fn=value_fn, grad_fn=grad_fn,
    )
