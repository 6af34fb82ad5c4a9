"""Synthetic observation series: masking, subsampling, noise, mollifiers.

Observed fields live on the run's grid with NaN marking cells outside the
observation window.  The deterministic noise model is the oscillatory field
eps^(r-alpha) cos(x/eps + alpha pi/2): the formal alpha-th derivative of
eps^r cos(x/eps), small in a weak norm while order-one in L2 for alpha > 0.
"""
from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .grid import Grid1D


@dataclass(frozen=True)
class NoiseSpec:
    """Deterministic oscillatory observation noise (optionally a seeded
    uniform field for robustness experiments; that variant carries no
    theoretical weight)."""

    epsilon: float
    r: float = 1.0
    alpha: float = 0.0
    kind: str = "oscillatory"
    seed: int | None = None

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError("alpha must lie in [0, 1/2)")
        if self.kind not in ("oscillatory", "uniform"):
            raise ValueError(f"unknown noise kind {self.kind!r}")


def noise_field(spec: NoiseSpec, grid: Grid1D) -> np.ndarray:
    """Noise values at cell centers."""
    x = grid.centers
    if spec.kind == "oscillatory":
        amp = spec.epsilon ** (spec.r - spec.alpha)
        return amp * np.cos(x / spec.epsilon + spec.alpha * math.pi / 2.0)
    rng = np.random.default_rng(spec.seed)
    return spec.epsilon * rng.uniform(-1.0, 1.0, size=grid.n_cells)


def noise_l2_closed_form(spec: NoiseSpec) -> float:
    """L2([0,1]) norm of the oscillatory noise, (eps^(r-a)/2) sqrt(2 + eps sin(2/eps))."""
    amp = spec.epsilon ** (spec.r - spec.alpha)
    return 0.5 * amp * math.sqrt(2.0 + spec.epsilon * math.sin(2.0 / spec.epsilon))


@dataclass
class ObservationSeries:
    """Time-stamped observed fields; masked-out cells hold NaN."""

    times: np.ndarray
    fields: np.ndarray  # shape (n_times, n_cells)
    mask: np.ndarray  # shape (n_cells,), bool
    grid: Grid1D

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.fields = np.asarray(self.fields, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("observation times must be strictly increasing")
        if self.fields.shape != (len(self.times), self.grid.n_cells):
            raise ValueError("fields shape must be (n_times, n_cells)")

    def field_at(self, k: int) -> np.ndarray:
        return self.fields[k]


def sample_observations(
    truth,
    times,
    mask_interval: tuple[float, float] | None = None,
    noise: NoiseSpec | None = None,
    clamp_nonnegative: bool = False,
) -> ObservationSeries:
    """Extract an observation series from a recorded truth trajectory.

    ``truth`` must expose ``trajectory_times`` and ``trajectory_fields``
    (states recorded at every solver step); each requested time picks the
    nearest recorded state.  Where observed, the noise field is added;
    ``clamp_nonnegative`` truncates negative noisy values (used for water
    depths, which the observer rejects if negative).
    """
    rec_t = np.asarray(truth.trajectory_times, dtype=float)
    rec_f = np.asarray(truth.trajectory_fields, dtype=float)
    if rec_t.size == 0:
        raise ValueError("truth run carries no recorded trajectory")
    grid = truth.grid
    times = np.atleast_1d(np.asarray(times, dtype=float))
    span_tol = 1e-9 * max(1.0, abs(rec_t[-1]))
    if np.any(times < rec_t[0] - span_tol) or np.any(times > rec_t[-1] + span_tol):
        raise ValueError("requested observation time outside the recorded span")
    if mask_interval is None:
        mask = np.ones(grid.n_cells, dtype=bool)
    else:
        mask = grid.interval_mask(*mask_interval)
    idx = np.searchsorted(rec_t, times)
    idx = np.clip(idx, 1, len(rec_t) - 1)
    take_left = np.abs(times - rec_t[idx - 1]) <= np.abs(rec_t[idx] - times)
    idx = np.where(take_left, idx - 1, idx)
    fields = rec_f[idx].copy()
    if noise is not None:
        fields = fields + noise_field(noise, grid)[None, :]
        if clamp_nonnegative:
            fields = np.maximum(fields, 0.0)
    fields[:, ~mask] = np.nan
    return ObservationSeries(times, fields, mask, grid)


def interpolate_in_time(series: ObservationSeries, t: float) -> np.ndarray:
    """Piecewise-linear interpolation of the series at time t (per cell)."""
    times = series.times
    tol = 1e-9 * max(1.0, abs(times[-1]))
    if t < times[0] - tol or t > times[-1] + tol:
        raise ValueError(f"time {t} outside the observation span")
    t = min(max(t, times[0]), times[-1])
    k = int(np.searchsorted(times, t, side="right")) - 1
    k = min(max(k, 0), len(times) - 2) if len(times) > 1 else 0
    if len(times) == 1:
        return series.fields[0].copy()
    t0, t1 = times[k], times[k + 1]
    w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
    return (1.0 - w) * series.fields[k] + w * series.fields[k + 1]


@dataclass(frozen=True)
class Mollifier:
    """Raised-cosine averaging kernel of half-width sigma, unit integral."""

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")

    def value(self, s):
        """Kernel value phi_sigma(s) = (1/sigma) * (1 + cos(pi s/sigma)) / 2 on
        [-sigma, sigma], zero outside."""
        s = np.asarray(s, dtype=float) / self.sigma
        out = np.where(np.abs(s) <= 1.0, (1.0 + np.cos(np.pi * s)) / 2.0, 0.0) / self.sigma
        if out.ndim == 0:
            return float(out)
        return out


def mollified_gain(series: ObservationSeries, mollifier: Mollifier, t: float):
    """Total kernel weight at time t and the contributing observations.

    Returns ``(weight, pairs)`` where pairs lists ``(k, w_k, field_k)`` for
    every observation time within the kernel support; the solver pairs each
    entry with its own stored state snapshot at that time.
    """
    w = mollifier.value(t - series.times)
    pairs = [
        (int(k), float(w[k]), series.fields[k]) for k in np.nonzero(w > 0.0)[0]
    ]
    return float(np.sum(w)), pairs


@dataclass(frozen=True)
class ObservabilityResult:
    observable: bool
    t_min: float
    x_inf: float


def observability_check(speed: float, interval: tuple[float, float], horizon: float
                        ) -> ObservabilityResult:
    """Observability of constant-speed transport on the periodic unit interval
    observed on [a, b] over [0, horizon].

    The minimal horizon is (1 - (b - a)) / |speed| (the slowest characteristic
    must wrap into the window); ``x_inf`` is the least time any characteristic
    spends inside [a, b], in closed form.
    """
    a, b = interval
    if not 0.0 < a < b < 1.0:
        raise ValueError("interval must satisfy 0 < a < b < 1")
    if horizon < 0.0:
        raise ValueError("horizon must be nonnegative")
    width = b - a
    c = abs(speed)
    if c == 0.0:
        return ObservabilityResult(False, math.inf, 0.0)
    t_min = (1.0 - width) / c
    dist = c * horizon
    wraps = math.floor(dist)
    frac = dist - wraps
    x_inf = (wraps * width + max(0.0, frac - (1.0 - width))) / c
    return ObservabilityResult(horizon > t_min, t_min, x_inf)


# --- CSV round trip ---------------------------------------------------------


def save_series_csv(series: ObservationSeries, path: str):
    """Write the series as rows (t, cell_index, value); absent cells omitted."""
    tmp_fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(tmp_fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "cell_index", "value"])
            for k, t in enumerate(series.times):
                row_values = series.fields[k]
                for i in np.nonzero(np.isfinite(row_values))[0]:
                    writer.writerow([repr(float(t)), int(i), repr(float(row_values[i]))])
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load_series_csv(path: str, grid: Grid1D) -> ObservationSeries:
    times: list[float] = []
    rows: list[np.ndarray] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "cell_index", "value"]:
            raise ValueError(f"unexpected header {header}")
        for t_str, i_str, v_str in reader:
            t = float(t_str)
            if not times or t != times[-1]:
                times.append(t)
                rows.append(np.full(grid.n_cells, np.nan))
            rows[-1][int(i_str)] = float(v_str)
    fields = np.asarray(rows)
    mask = np.any(np.isfinite(fields), axis=0) if len(rows) else np.zeros(grid.n_cells, bool)
    return ObservationSeries(np.asarray(times), fields, mask, grid)
