"""Functional multi-armed bandits: optimistic iteration-budget allocation
across optimizers with certified convergence rates, plus identification
budgets, regret bound calculators, and baseline allocators."""

from . import baselines, flcb, harness, optimizers, oracles, problems, rates

__all__ = ["baselines", "flcb", "harness", "optimizers", "oracles", "problems", "rates"]
__version__ = "0.1.0"
