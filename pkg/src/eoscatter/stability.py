"""Eigenvalue stability analysis of the interior steppers.

The boundary traces enter the interior update only through the closed edge
stencils, so with fixed (zero) boundary data the homogeneous one-step map is
a dense linear operator.  This module assembles that propagator matrix by
probing the actual stencil operators, computes spectral radii, and locates
the stable window of time steps

    tau1(epsilon) * dx / c1  <  dt  <  tau2(epsilon) * dx / c1

by scanning and bisecting on the spectral radius.  The current stays out of
the analysis: the field update is studied with the reaction coupling
switched off, which is the part of the scheme that carries the CFL-type
restriction.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, SpatialOps

RHO_MARGIN = 1e-9          # stable means spectral radius < 1 - RHO_MARGIN
DEFAULT_BISECT_TOL = 1e-4  # relative width of the bisected transition bracket
DEFAULT_SCAN_POINTS = 64
DEFAULT_DT_MAX_FACTOR = 1.25


class EigenSolverError(RuntimeError):
    """Raised when the dense eigenvalue solve does not converge."""


# ---------------------------------------------------------------------------
# homogeneous steppers (boundary data explicit, reaction coupling dropped)
# ---------------------------------------------------------------------------

def advection_step(phi, ops: SpatialOps, c: float, dt: float,
                   u_a0: float = 0.0, u_a1: float = 0.0):
    """One second-order step of the one-way equation phi_t = c*phi_x."""
    d1 = ops.d1_closed(phi, u_a0, u_a1)
    d2 = ops.d2_closed(phi, u_a0, u_a1)
    return phi + dt * c * d1 + 0.5 * (dt * c) ** 2 * d2


def wave_pair_step(phi, psi, ops: SpatialOps, mu1: float, nu1: float,
                   dt: float, bc=(0.0, 0.0, 0.0, 0.0)):
    """One second-order step of the coupled pair phi_t = mu1*psi_x,
    psi_t = nu1*phi_x (current dropped).  ``bc`` holds the fixed boundary
    values (phi_a0, phi_a1, psi_a0, psi_a1)."""
    p_a0, p_a1, s_a0, s_a1 = bc
    c2 = mu1 * nu1
    half = 0.5 * dt * dt * c2
    new_phi = phi + dt * mu1 * ops.d1_closed(psi, s_a0, s_a1) \
        + half * ops.d2_closed(phi, p_a0, p_a1)
    new_psi = psi + dt * nu1 * ops.d1_closed(phi, p_a0, p_a1) \
        + half * ops.d2_closed(psi, s_a0, s_a1)
    return new_phi, new_psi


# ---------------------------------------------------------------------------
# propagator assembly
# ---------------------------------------------------------------------------

_DIFF_CACHE: dict = {}


def _diff_matrices(grid: GridSpec):
    """Dense matrices of the two closed stencil operators (zero boundary
    data), probed column-by-column so any stencil change shows up here."""
    key = (grid.a0, grid.a1, grid.n, grid.epsilon)
    hit = _DIFF_CACHE.get(key)
    if hit is not None:
        return hit
    ops = SpatialOps(grid)
    n = grid.n
    d1 = np.empty((n, n))
    d2 = np.empty((n, n))
    e = np.zeros(n)
    for k in range(n):
        e[k] = 1.0
        d1[:, k] = ops.d1_closed(e, 0.0, 0.0)
        d2[:, k] = ops.d2_closed(e, 0.0, 0.0)
        e[k] = 0.0
    if len(_DIFF_CACHE) > 8:
        _DIFF_CACHE.clear()
    _DIFF_CACHE[key] = (d1, d2)
    return d1, d2


@dataclass(frozen=True)
class Propagator:
    """One-step homogeneous propagator matrix with its provenance."""

    matrix: np.ndarray
    model: int
    n: int
    epsilon: float
    dt: float
    speed: float  # c1, or sqrt(mu1*nu1) for the two-field model

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


def _advection_matrix(grid: GridSpec, c: float, dt: float) -> np.ndarray:
    d1, d2 = _diff_matrices(grid)
    n = grid.n
    return np.eye(n) + (dt * c) * d1 + 0.5 * (dt * c) ** 2 * d2


def _pair_matrix(grid: GridSpec, mu1: float, nu1: float, dt: float) -> np.ndarray:
    d1, d2 = _diff_matrices(grid)
    n = grid.n
    diag = np.eye(n) + 0.5 * dt * dt * (mu1 * nu1) * d2
    m = np.empty((2 * n, 2 * n))
    m[:n, :n] = diag
    m[:n, n:] = dt * mu1 * d1
    m[n:, :n] = dt * nu1 * d1
    m[n:, n:] = diag
    return m


def assemble_propagator(model: int, grid: GridSpec, mat, dt: float) -> Propagator:
    """Dense one-step matrix of the homogeneous stepper on ``grid``."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if model == 1:
        matrix = _advection_matrix(grid, mat.c1, dt)
    elif model == 2:
        matrix = _pair_matrix(grid, mat.mu1, mat.nu1, dt)
    else:
        raise ValueError("model must be 1 or 2")
    return Propagator(matrix=matrix, model=model, n=grid.n,
                      epsilon=grid.epsilon, dt=dt, speed=mat.c1)


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a dense (generally nonsymmetric) matrix."""
    matrix = m.matrix if isinstance(m, Propagator) else np.asarray(m)
    try:
        eig = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue solve failed: {exc}") from exc
    return float(np.max(np.abs(eig)))


# ---------------------------------------------------------------------------
# stability window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StabilityDomain:
    """Stable window of time steps at one grid stretching, in units of
    dx/c1.  ``tau1``/``tau2`` are NaN when no stable window was found."""

    model: int
    epsilon: float
    n: int
    tau1: float
    tau2: float
    samples: tuple = field(default_factory=tuple)  # (dt*c1/dx, spectral radius)

    @property
    def empty(self) -> bool:
        return math.isnan(self.tau1)


def stability_radius(model: int, grid: GridSpec, mat, dt: float) -> float:
    """Spectral radius of the one-step propagator, evaluated for the window
    search.

    For the two-field model the 2N x 2N propagator is exactly similar to the
    direct sum of the two one-field propagators at signed speeds +-c with
    c^2 = mu1*nu1 (scale the second field by sqrt(nu1/mu1) and take sums and
    differences), so its radius equals the larger of the two N x N branch
    radii.  The branch form is what gets eigensolved: near the CFL edge the
    assembled matrix is close to a defective shift and a direct dense solve
    of the doubled system returns eigenvalues with O(1) errors, while the
    branches stay as well-conditioned as the one-field problem.
    """
    if model == 1:
        return spectral_radius(_advection_matrix(grid, mat.c1, dt))
    if model == 2:
        c = math.sqrt(mat.mu1 * mat.nu1)
        return max(spectral_radius(_advection_matrix(grid, +c, dt)),
                   spectral_radius(_advection_matrix(grid, -c, dt)))
    raise ValueError("model must be 1 or 2")


def _is_stable(model, grid, mat, dt) -> tuple[bool, float]:
    rho = stability_radius(model, grid, mat, dt)
    return rho < 1.0 - RHO_MARGIN, rho


def _bisect_edge(model, grid, mat, dt_bad, dt_good, tol) -> float:
    """Refine a stable/unstable transition; returns the bracket midpoint.
    ``dt_bad`` may be 0 (the dt -> 0 limit is classified unstable because the
    propagator tends to the identity, radius 1)."""
    while abs(dt_good - dt_bad) > tol * 0.5 * (dt_good + dt_bad):
        mid = 0.5 * (dt_bad + dt_good)
        if _is_stable(model, grid, mat, mid)[0]:
            dt_good = mid
        else:
            dt_bad = mid
    return 0.5 * (dt_bad + dt_good)


def stability_bounds(model: int, grid: GridSpec, mat, *,
                     dt_max_factor: float = DEFAULT_DT_MAX_FACTOR,
                     scan_points: int = DEFAULT_SCAN_POINTS,
                     bisect_tol: float = DEFAULT_BISECT_TOL) -> StabilityDomain:
    """Scan dt in (0, dt_max_factor*dx/c1], classify each point by spectral
    radius, and bisect the edges of the widest contiguous stable run."""
    if scan_points < 16:
        raise ValueError("scan_points must be >= 16")
    c = mat.c1
    dt_unit = grid.dx / c
    dts = dt_unit * dt_max_factor * np.arange(1, scan_points + 1) / scan_points
    flags, samples = [], []
    for dt in dts:
        ok, rho = _is_stable(model, grid, mat, dt)
        flags.append(ok)
        samples.append((dt * c / grid.dx, rho))

    # widest contiguous stable run of scan points
    best = None
    k = 0
    while k < scan_points:
        if flags[k]:
            start = k
            while k < scan_points and flags[k]:
                k += 1
            if best is None or (k - start) > (best[1] - best[0]):
                best = (start, k - 1)
        else:
            k += 1
    if best is None:
        return StabilityDomain(model, grid.epsilon, grid.n,
                               math.nan, math.nan, tuple(samples))
    lo_idx, hi_idx = best
    if lo_idx > 0:
        dt1 = _bisect_edge(model, grid, mat, dts[lo_idx - 1], dts[lo_idx],
                           bisect_tol)
    else:
        # The window reaches the smallest scanned step, so no lower
        # transition was observed.  Report the scan floor rather than
        # bisecting against dt -> 0: the propagator tends to the identity
        # there, its radius creeps up to 1, and the margin rule would turn
        # that limit into a spurious "edge" at a margin-dependent spot.
        dt1 = dts[0]
    if hi_idx < scan_points - 1:
        dt2 = _bisect_edge(model, grid, mat, dts[hi_idx + 1], dts[hi_idx],
                           bisect_tol)
    else:
        dt2 = dts[hi_idx]  # window truncated by the scan range, same idea
    return StabilityDomain(model, grid.epsilon, grid.n,
                           dt1 * c / grid.dx, dt2 * c / grid.dx,
                           tuple(samples))


def _worker_count(n_jobs: int) -> int:
    env = os.environ.get("EOS_THREADS", "").strip()
    if env:
        cap = max(1, int(env))
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_jobs))


def scan_stability(model: int, mat, n: int, epsilons, **search) -> list[StabilityDomain]:
    """Stability window per grid stretching, for re-plotting the window as a
    function of epsilon.  Work is farmed over a thread pool (the eigensolves
    release the interpreter lock); EOS_THREADS caps the width."""
    epsilons = [float(e) for e in epsilons]
    for e in epsilons:
        if not 0.0 <= e <= 1.0:
            raise ValueError("epsilon values must lie in [0, 1]")

    def one(eps: float) -> StabilityDomain:
        grid = GridSpec(a0=0.0, a1=1.0, n=n, epsilon=eps)
        return stability_bounds(model, grid, mat, **search)

    workers = _worker_count(len(epsilons))
    if workers == 1:
        return [one(e) for e in epsilons]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, epsilons))


# ---------------------------------------------------------------------------
# structure checks and soundness probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionReport:
    """Even/odd split of the one-field propagator and the block structure of
    the two-field one.

    With M(c) the one-field matrix at signed speed c, the split
    m_even = (M(c)+M(-c))/2, m_odd = (M(c)-M(-c))/(2c) recovers the
    advection-free and pure-advection parts.  The two-field propagator at
    matched speed (mu1*nu1 = c^2) is then the block matrix
    [[m_even, mu1*m_odd], [nu1*m_odd, m_even]].
    """

    m_even: np.ndarray
    m_odd: np.ndarray
    split_residual: float       # max |M(+-c) - (m_even +- c*m_odd)|
    block_error: float          # max |M2 - block reconstruction|
    odd_interior_diag: float    # max |diag(m_odd)| over interior rows


def decomposition_check(grid: GridSpec, mat2, dt: float) -> DecompositionReport:
    """Verify the two-field propagator is built from the one-field blocks."""
    c = math.sqrt(mat2.mu1 * mat2.nu1)
    m_plus = _advection_matrix(grid, +c, dt)
    m_minus = _advection_matrix(grid, -c, dt)
    m_even = 0.5 * (m_plus + m_minus)
    m_odd = (m_plus - m_minus) / (2.0 * c)
    split_residual = max(
        float(np.max(np.abs(m_plus - (m_even + c * m_odd)))),
        float(np.max(np.abs(m_minus - (m_even - c * m_odd)))),
    )
    n = grid.n
    recon = np.empty((2 * n, 2 * n))
    recon[:n, :n] = m_even
    recon[:n, n:] = mat2.mu1 * m_odd
    recon[n:, :n] = mat2.nu1 * m_odd
    recon[n:, n:] = m_even
    m2 = _pair_matrix(grid, mat2.mu1, mat2.nu1, dt)
    block_error = float(np.max(np.abs(m2 - recon)))
    odd_diag = float(np.max(np.abs(np.diag(m_odd)[1:-1]))) if n > 2 else 0.0
    return DecompositionReport(m_even=m_even, m_odd=m_odd,
                               split_residual=split_residual,
                               block_error=block_error,
                               odd_interior_diag=odd_diag)


def fixed_point(grid: GridSpec, mat, dt: float,
                u_a0: float, u_a1: float) -> np.ndarray:
    """Constant profile the one-field iteration settles on under constant
    boundary data: the solution of (I - M) u = b, where b is the affine part
    the boundary stencils inject."""
    m = _advection_matrix(grid, mat.c1, dt)
    z = np.zeros(grid.n)
    b = advection_step(z, SpatialOps(grid), mat.c1, dt, u_a0, u_a1)
    return np.linalg.solve(np.eye(grid.n) - m, b)


def homogeneous_run(model: int, grid: GridSpec, mat, dt: float, steps: int,
                    seed: int = 0) -> np.ndarray:
    """Sup-norm envelope of a homogeneous run from random data: array of
    max|state| at every step (index 0 is the initial state)."""
    rng = np.random.default_rng(seed)
    ops = SpatialOps(grid)
    env = np.empty(steps + 1)
    if model == 1:
        phi = rng.standard_normal(grid.n)
        env[0] = np.max(np.abs(phi))
        for k in range(steps):
            phi = advection_step(phi, ops, mat.c1, dt)
            env[k + 1] = np.max(np.abs(phi))
    elif model == 2:
        phi = rng.standard_normal(grid.n)
        psi = rng.standard_normal(grid.n)
        env[0] = max(np.max(np.abs(phi)), np.max(np.abs(psi)))
        for k in range(steps):
            phi, psi = wave_pair_step(phi, psi, ops, mat.mu1, mat.nu1, dt)
            env[k + 1] = max(np.max(np.abs(phi)), np.max(np.abs(psi)))
    else:
        raise ValueError("model must be 1 or 2")
    return env
