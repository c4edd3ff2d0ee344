"""External source terms and their retarded boundary integrals.

The scattering runs are driven by a current source localized to the right
of the computational domain.  What the right boundary sees is a line
integral of that source along the incoming characteristic, cut off by the
causal cone: samples earlier than the start time contribute nothing.

Two source representations are provided -- an analytic space-time Gaussian
pulse and a tabulated rectangular grid with bilinear interpolation.  Any
object with a ``support`` attribute ``(x_lo, x_hi)`` and a vectorized
``__call__(x, t)`` works in their place.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .grid import Material1, Material2

#: Absolute floor added to the relative convergence test, so that integrals
#: which are numerically nothing terminate immediately.  Deliberately down at
#: the subnormal scale: an incident trace can be legitimately tiny (the deep
#: tail ahead of a pulse) and still needs full relative accuracy, so any
#: fatter floor would silently cap the precision of small values.
ABS_FLOOR = 1e-300

DEFAULT_REL_TOL = 1e-10

DEFAULT_PANEL_CAP = 1 << 23


class QuadratureError(RuntimeError):
    """Panel doubling hit the cap before the tolerance was reached."""


@dataclass(frozen=True)
class GaussianSource:
    """Separable pulse ``amplitude * exp(-space_rate*(x-x_center)**2 - time_rate*(t-t_center)**2)``.

    ``support`` defaults to six e-folding widths either side of the spatial
    center; the truncated tails are below 1e-15 of the peak.
    """

    amplitude: float
    x_center: float
    space_rate: float
    t_center: float
    time_rate: float
    support: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.space_rate <= 0.0 or self.time_rate <= 0.0:
            raise ValueError("Gaussian decay rates must be positive")
        if self.support is None:
            half = 6.0 / math.sqrt(self.space_rate)
            object.__setattr__(
                self, "support", (self.x_center - half, self.x_center + half)
            )
        elif self.support[1] <= self.support[0]:
            raise ValueError("support interval must have positive length")

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return self.amplitude * np.exp(
            -self.space_rate * (x - self.x_center) ** 2
            - self.time_rate * (t - self.t_center) ** 2
        )


@dataclass(frozen=True)
class TabulatedSource:
    """Source sampled on a rectangular ``(x, t)`` grid, bilinear in between.

    Queries outside the sampled rectangle evaluate to zero, so the spatial
    sample range doubles as the compact support.
    """

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or t.ndim != 1 or x.size < 2 or t.size < 2:
            raise ValueError("need at least a 2x2 sample grid")
        if np.any(np.diff(x) <= 0.0) or np.any(np.diff(t) <= 0.0):
            raise ValueError("sample coordinates must be strictly increasing")
        if v.shape != (x.size, t.size):
            raise ValueError(
                f"values shape {v.shape} does not match grid "
                f"({x.size}, {t.size})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        for name, arr in (("x", x), ("t", t), ("values", v)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    @classmethod
    def from_csv(cls, path) -> "TabulatedSource":
        """Load samples from a CSV file with header row ``x,t,value``."""
        xs, ts, vals = [], [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["x", "t", "value"]:
                raise ValueError("expected CSV header 'x,t,value'")
            for row in reader:
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != 3:
                    raise ValueError(f"malformed CSV row: {row!r}")
                xs.append(float(row[0]))
                ts.append(float(row[1]))
                vals.append(float(row[2]))
        x = np.unique(np.asarray(xs))
        t = np.unique(np.asarray(ts))
        grid = np.full((x.size, t.size), np.nan)
        ix = np.searchsorted(x, xs)
        it = np.searchsorted(t, ts)
        grid[ix, it] = vals
        if np.any(np.isnan(grid)):
            raise ValueError("CSV samples do not cover a full rectangular grid")
        return cls(x=x, t=t, values=grid)

    def __call__(self, x, t):
        xq, tq = np.broadcast_arrays(
            np.asarray(x, dtype=float), np.asarray(t, dtype=float)
        )
        inside = (
            (xq >= self.x[0])
            & (xq <= self.x[-1])
            & (tq >= self.t[0])
            & (tq <= self.t[-1])
        )
        ix = np.clip(np.searchsorted(self.x, xq, side="right") - 1, 0, self.x.size - 2)
        it = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, self.t.size - 2)
        fx = (xq - self.x[ix]) / (self.x[ix + 1] - self.x[ix])
        ft = (tq - self.t[it]) / (self.t[it + 1] - self.t[it])
        val = (
            self.values[ix, it] * (1.0 - fx) * (1.0 - ft)
            + self.values[ix + 1, it] * fx * (1.0 - ft)
            + self.values[ix, it + 1] * (1.0 - fx) * ft
            + self.values[ix + 1, it + 1] * fx * ft
        )
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)


def _composite_midpoint(f, lo: float, hi: float, panels: int) -> float:
    width = (hi - lo) / panels
    mids = lo + width * (np.arange(panels) + 0.5)
    return float(np.sum(f(mids))) * width


def characteristic_integral(
    source,
    a1: float,
    c0: float,
    t0: float,
    t: float,
    rel_tol: float = DEFAULT_REL_TOL,
    panel_cap: int = DEFAULT_PANEL_CAP,
) -> float:
    """Integrate the source along the incoming characteristic through ``(a1, t)``.

    Evaluates ``integral of source(x', t - (x' - a1)/c0) dx'`` over the
    overlap of the source support with the causal interval
    ``[a1, a1 + c0*(t - t0)]``; for ``t <= t0`` the cone is empty and the
    result is exactly zero.  Composite-midpoint panels are doubled until two
    successive estimates agree to ``rel_tol`` relatively (with an absolute
    floor of ``ABS_FLOOR``); exceeding ``panel_cap`` raises
    :class:`QuadratureError` carrying the last achieved difference.
    """
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    if c0 <= 0.0:
        raise ValueError("c0 must be positive")
    lo = max(a1, source.support[0])
    hi = min(source.support[1], a1 + c0 * (t - t0))
    if hi <= lo:
        return 0.0

    def integrand(xp):
        return source(xp, t - (xp - a1) / c0)

    panels = 8
    prev = _composite_midpoint(integrand, lo, hi, panels)
    diff = math.inf
    while panels < panel_cap:
        panels *= 2
        cur = _composite_midpoint(integrand, lo, hi, panels)
        diff = abs(cur - prev)
        if diff <= ABS_FLOOR + rel_tol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(
        f"midpoint refinement stalled at {panels} panels with step-to-step "
        f"change {diff:.3e} (rel_tol={rel_tol:g})"
    )


def incident_trace(
    source,
    a1: float,
    mat: Material1,
    t0: float,
    t: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """Right-boundary potential trace driven purely by the external source."""
    return characteristic_integral(source, a1, mat.c0, t0, t, rel_tol) / mat.c0


def incident_pair(
    source,
    a1: float,
    mat: Material2,
    t0: float,
    t: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> tuple[float, float]:
    """Right-boundary trace pair for the two-potential model.

    Both components share one retarded integral, so their ratio is exactly
    ``nu0 / c0``.
    """
    base = characteristic_integral(source, a1, mat.c0, t0, t, rel_tol)
    phi = base / (2.0 * mat.c0)
    return phi, mat.nu0 * phi / mat.c0
