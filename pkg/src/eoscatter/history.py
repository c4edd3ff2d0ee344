"""Uniformly sampled time histories with quadratic read-back.

The boundary update rules need field values at retarded times that generally
fall between time levels. A DelayBuffer keeps a sliding window of samples at
t0 + k*dt and answers queries with the quadratic through the three samples
bracketing the query time, which is exact at the knots and for any quadratic
in time. Query times at or before t0 read back as exactly zero — nothing
existed before the switch-on time.
"""

from __future__ import annotations

import math

import numpy as np


class HistoryError(ValueError):
    """A query fell outside the usable part of a DelayBuffer."""


class DelayBuffer:
    """Ring buffer over time levels t0 + k*dt holding scalar or array samples.

    Parameters
    ----------
    t0, dt : time origin and level spacing.
    window : seconds of history that must stay addressable. Samples older
        than the newest level minus this window may be dropped.
    shape : shape of one sample; () for a scalar trace, (2,) for a trace
        pair, (N,) for a nodal field.
    """

    def __init__(self, t0: float, dt: float, window: float, shape=()):
        if dt <= 0.0:
            raise ValueError("dt must be positive")
        if window < 0.0:
            raise ValueError("window must be nonnegative")
        self.t0 = float(t0)
        self.dt = float(dt)
        self.shape = tuple(shape)
        self._cap = int(math.ceil(window / dt)) + 4
        self._data = np.zeros((self._cap,) + self.shape)
        self._levels = 0  # total samples appended so far

    @property
    def levels(self) -> int:
        return self._levels

    @property
    def latest_t(self) -> float:
        if self._levels == 0:
            raise HistoryError("empty history")
        return self.t0 + (self._levels - 1) * self.dt

    @property
    def oldest_level(self) -> int:
        return max(0, self._levels - self._cap)

    def append(self, value) -> None:
        """Append the sample for the next time level."""
        arr = np.asarray(value, dtype=float)
        if arr.shape != self.shape:
            raise ValueError(f"sample shape {arr.shape} != buffer shape {self.shape}")
        self._data[self._levels % self._cap] = arr
        self._levels += 1

    # -- internals ---------------------------------------------------------

    def _bracket(self, r):
        """Clip the level index below floor(r) into [1, levels-2]."""
        m = np.floor(r).astype(int)
        return np.clip(m, 1, self._levels - 2)

    def _check_upper(self, t_max: float) -> None:
        tol = 1e-9 * self.dt
        if t_max > self.latest_t + tol:
            raise HistoryError(
                f"query at t={t_max!r} is beyond the newest sample t={self.latest_t!r}"
            )

    def _check_lower(self, level_min: int) -> None:
        if level_min < self.oldest_level:
            raise HistoryError(
                f"query needs level {level_min}, older than the retained window "
                f"(oldest kept: {self.oldest_level})"
            )

    def _weights(self, r, m):
        s = r - (m - 1)
        w0 = 0.5 * (s - 1.0) * (s - 2.0)
        w1 = -s * (s - 2.0)
        w2 = 0.5 * s * (s - 1.0)
        return w0, w1, w2

    def _row(self, level):
        return level % self._cap

    def _few_samples(self, r):
        # fewer than 3 samples exist: interpolate through all of them
        if self._levels == 1:
            return self._data[0] * 0.0
        v0, v1 = self._data[0], self._data[1]
        s = np.clip(r, 0.0, 1.0)
        return (1.0 - s) * v0 + s * v1

    # -- queries -----------------------------------------------------------

    def query(self, t: float):
        """Value of the stored series at time t (whole sample)."""
        t = float(t)
        if t <= self.t0:
            return np.zeros(self.shape) if self.shape else 0.0
        r = (t - self.t0) / self.dt
        self._check_upper(t)
        if self._levels < 3:
            out = self._few_samples(r)
            return out if self.shape else float(out)
        m = int(self._bracket(np.asarray(r)))
        self._check_lower(m - 1)
        w0, w1, w2 = self._weights(r, m)
        out = (
            w0 * self._data[self._row(m - 1)]
            + w1 * self._data[self._row(m)]
            + w2 * self._data[self._row(m + 1)]
        )
        return out if self.shape else float(out)

    def query_each(self, times) -> np.ndarray:
        """Per-component read of a nodal history: component i at times[i].

        Only defined for 1-D sample shapes. Entries with times[i] <= t0 are 0.
        """
        if len(self.shape) != 1:
            raise ValueError("query_each needs a 1-D sample shape")
        t = np.asarray(times, dtype=float)
        if t.shape != self.shape:
            raise ValueError("times must have one entry per component")
        live = t > self.t0
        out = np.zeros(self.shape)
        if not live.any():
            return out
        t_max = float(t[live].max())
        r = (t - self.t0) / self.dt
        self._check_upper(t_max)
        if self._levels < 3:
            if self._levels == 2:
                s = np.clip(r, 0.0, 1.0)
                vals = (1.0 - s) * self._data[0] + s * self._data[1]
                out[live] = vals[live]
            return out
        m = self._bracket(r)
        self._check_lower(int(m[live].min()) - 1)
        w0, w1, w2 = self._weights(r, m)
        cols = np.arange(self.shape[0])
        vals = (
            w0 * self._data[self._row(m - 1), cols]
            + w1 * self._data[self._row(m), cols]
            + w2 * self._data[self._row(m + 1), cols]
        )
        out[live] = vals[live]
        return out
