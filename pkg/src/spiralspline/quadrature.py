"""Composite Simpson rule helpers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureConfig:
    """Per-segment composite Simpson resolution.

    ``simpson_subintervals`` is the starting count; the refiner doubles it up
    to ``max_subintervals`` when the measured residual is too large.
    """

    simpson_subintervals: int = 4
    max_subintervals: int = 1024

    def __post_init__(self):
        m, cap = self.simpson_subintervals, self.max_subintervals
        if m < 4 or m % 2 or cap % 2:
            raise ValueError("Simpson subinterval counts must be even and at least 4")
        if m > cap:
            raise ValueError("simpson_subintervals exceeds max_subintervals")

    def scaled(self, factor: int) -> "QuadratureConfig":
        m = self.simpson_subintervals * factor
        return QuadratureConfig(m, max(m, self.max_subintervals))


@lru_cache(maxsize=64)
def _unit_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(0.0, 1.0, m + 1)
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w /= 3.0 * m
    nodes.setflags(write=False)
    w.setflags(write=False)
    return nodes, w


def simpson_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the m-subinterval composite Simpson rule on [0, 1].

    Scale both by the interval length to integrate over [0, L].
    """
    if m < 2 or m % 2:
        raise ValueError("m must be a positive even integer")
    return _unit_rule(m)


def simpson(f, a: float, b: float, m: int) -> float:
    """Integrate a vectorised scalar function over [a, b]."""
    nodes, w = simpson_rule(m)
    return float((b - a) * np.dot(w, f(a + (b - a) * nodes)))
