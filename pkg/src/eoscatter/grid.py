"""Interior grid family, material coefficients, and spatial stencils.

The scatterer occupies [a0, a1] and all evolved fields live on N interior
nodes only; boundary values enter through separately evolved traces. A single
parameter epsilon slides the node placement between two natural layouts:

* epsilon = 1: nodes at cell midpoints of an N-cell partition (spacing
  dx = (a1-a0)/N, half-cell gap at each end) — the production layout, whose
  node weights make the boundary-update sums plain midpoint rules;
* epsilon = 0: nodes of a uniform (N+1)-interval partition, i.e. the gap to
  each boundary equals the interior spacing.

In between, dx interpolates linearly between those two spacings and the edge
gaps shrink accordingly (they are equal at both ends only at epsilon 0 and 1;
the mismatch in between is O(dx/N)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Interior node layout on [a0, a1] with N nodes and family parameter epsilon."""

    a0: float
    a1: float
    n: int
    epsilon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a0) and math.isfinite(self.a1)):
            raise ValueError("a0 and a1 must be finite")
        if not self.a1 > self.a0:
            raise ValueError("a1 must be greater than a0")
        if self.n < 4:
            raise ValueError("N must be >= 4")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")

    @property
    def length(self) -> float:
        return self.a1 - self.a0

    @cached_property
    def dx(self) -> float:
        n, eps = self.n, self.epsilon
        return (n + eps) / (n * (n + 1.0)) * self.length

    @cached_property
    def x(self) -> np.ndarray:
        """Node positions x_i = a0 + (i + 1 - epsilon/2) dx, i = 0..N-1."""
        i = np.arange(self.n, dtype=float)
        out = self.a0 + (i + 1.0 - 0.5 * self.epsilon) * self.dx
        out.setflags(write=False)
        return out

    @property
    def gap_a0(self) -> float:
        """Distance from a0 to the first node."""
        return (1.0 - 0.5 * self.epsilon) * self.dx

    @property
    def gap_a1(self) -> float:
        """Distance from the last node to a1."""
        return self.a1 - float(self.x[-1])


@dataclass(frozen=True)
class Material1:
    """Coefficients of the one-way model: interior speed c1, exterior speed c0,
    and the response law j_t = (alpha - beta*rho)*phi - gamma*j."""

    c1: float
    c0: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not self.c1 > 0.0:
            raise ValueError("c1 must be positive")
        if not self.c0 > 0.0:
            raise ValueError("c0 must be positive")
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class Material2:
    """Coefficients of the two-way model: cross-coupling pairs (mu, nu) inside
    and outside, same response law as Material1. Speeds are derived,
    c = sqrt(mu*nu)."""

    mu1: float
    nu1: float
    mu0: float
    nu0: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("mu1", "nu1", "mu0", "nu0"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def c1(self) -> float:
        return math.sqrt(self.mu1 * self.nu1)

    @property
    def c0(self) -> float:
        return math.sqrt(self.mu0 * self.nu0)


def _d1_weights(s0, s1, s2, at=0.0):
    # derivative at `at` of the quadratic through abscissae s0 < s1 < s2
    w0 = ((at - s1) + (at - s2)) / ((s0 - s1) * (s0 - s2))
    w1 = ((at - s0) + (at - s2)) / ((s1 - s0) * (s1 - s2))
    w2 = ((at - s0) + (at - s1)) / ((s2 - s0) * (s2 - s1))
    return np.array([w0, w1, w2])


def _d2_weights(s0, s1, s2):
    w0 = 2.0 / ((s0 - s1) * (s0 - s2))
    w1 = 2.0 / ((s1 - s0) * (s1 - s2))
    w2 = 2.0 / ((s2 - s0) * (s2 - s1))
    return np.array([w0, w1, w2])


class SpatialOps:
    """Second-order derivative stencils on a GridSpec.

    Interior nodes use central differences (the interior spacing is uniform).
    The edge nodes differ by field kind:

    * trace-closed fields (amplitudes whose boundary values are known) use the
      3-point interpolant through {boundary point, edge node, first
      neighbour}; the weights depend on the edge gap and reduce to the classic
      half-spacing forms at epsilon = 1;
    * confined fields (material response, defined on interior nodes only) use
      one-sided 3-point rules that never touch the boundary.

    Every rule is exact on quadratics.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.dx = grid.dx
        dx = grid.dx
        # trace-closed edges: left points {a0, x0, x1}, right {x_{n-2}, x_{n-1}, a1}
        self.wl1 = _d1_weights(-grid.gap_a0, 0.0, dx)
        self.wl2 = _d2_weights(-grid.gap_a0, 0.0, dx)
        self.wr1 = _d1_weights(-dx, 0.0, grid.gap_a1)
        self.wr2 = _d2_weights(-dx, 0.0, grid.gap_a1)

    def d1_closed(self, u: np.ndarray, u_a0: float, u_a1: float) -> np.ndarray:
        """First derivative of a field with known boundary values u_a0, u_a1."""
        dx = self.dx
        out = np.empty_like(u)
        out[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
        w = self.wl1
        out[0] = w[0] * u_a0 + w[1] * u[0] + w[2] * u[1]
        w = self.wr1
        out[-1] = w[0] * u[-2] + w[1] * u[-1] + w[2] * u_a1
        return out

    def d2_closed(self, u: np.ndarray, u_a0: float, u_a1: float) -> np.ndarray:
        """Second derivative of a field with known boundary values."""
        dx = self.dx
        out = np.empty_like(u)
        out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
        w = self.wl2
        out[0] = w[0] * u_a0 + w[1] * u[0] + w[2] * u[1]
        w = self.wr2
        out[-1] = w[0] * u[-2] + w[1] * u[-1] + w[2] * u_a1
        return out

    def d1_confined(self, u: np.ndarray) -> np.ndarray:
        """First derivative of a field that exists only on the interior nodes."""
        dx = self.dx
        out = np.empty_like(u)
        out[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
        out[0] = (4.0 * u[1] - 3.0 * u[0] - u[2]) / (2.0 * dx)
        out[-1] = -(4.0 * u[-2] - 3.0 * u[-1] - u[-3]) / (2.0 * dx)
        return out
