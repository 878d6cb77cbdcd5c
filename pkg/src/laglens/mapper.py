"""Map delay-equation trajectories onto the slow diffusion picture.

A time ``t`` is sent to a pseudo-space coordinate ``s = strain * t`` with
``strain = (1 + a1/T + a2/T^2) / T`` and a slow time ``z = t / T^3``.
In these coordinates ``y(t) ~ r^s exp(l0 z) Y(s, z)`` with ``Y`` solving the
periodic heat equation of :mod:`laglens.diffusion`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dde import Trajectory, fmt, sample_history
from .diffusion import wrapped_heat_kernel
from .errors import DegenerateAnchor, InvalidInput, NoPeaks, NotLocalized, RowOutOfRange


@dataclass(frozen=True)
class AsymptoticCoefficients:
    r: float
    a1: float
    a2: float
    l0: float
    l1: float

    def strain(self, T: float) -> float:
        return (1.0 + self.a1 / T + self.a2 / (T * T)) / T


def coefficients(r: float) -> AsymptoticCoefficients:
    if not r > 0:
        raise InvalidInput(f"r must be positive, got {r}")
    lr = math.log(r)
    a2 = 1.0 + lr
    return AsymptoticCoefficients(r=r, a1=-1.0, a2=a2, l0=-0.5 * lr * lr, l1=1.0 + lr - a2)


def strain(r: float, T: float) -> float:
    return coefficients(r).strain(T)


@dataclass(frozen=True)
class MappedPoint:
    t: float
    s: float
    z: float
    row: int
    col: float


def map_time(t: float, r: float, T: float, period: float | None = None) -> MappedPoint:
    P = T + 1.0 if period is None else period
    row, col = _row_col(t, P)
    return MappedPoint(t=t, s=strain(r, T) * t, z=t / T ** 3, row=row, col=col)


def _row_col(t: float, P: float) -> tuple[int, float]:
    row = math.floor(t / P)
    col = (t - row * P) / P
    if col >= 1.0:
        row, col = row + 1, 0.0
    elif col < 0.0:
        col = 0.0
    return row, col


def prefactor(r: float, T: float, t):
    """``r^s exp(l0 z)`` with ``s = strain * t`` and ``z = t / T^3``."""
    c = coefficients(r)
    s = c.strain(T) * np.asarray(t, dtype=float)
    out = np.exp(math.log(r) * s + c.l0 * np.asarray(t, dtype=float) / T ** 3)
    return float(out) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# pseudo-spatiotemporal reshaping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReshapedGrid:
    period: float
    rows: list[list[tuple[float, float]]]
    first_row: int = 0
    row_times: list[np.ndarray] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(t, col, y)`` arrays of row ``j``."""
        i = j - self.first_row
        if not 0 <= i < len(self.rows):
            raise RowOutOfRange(f"row {j} not in [{self.first_row}, {self.first_row + len(self.rows) - 1}]")
        cols, ys = zip(*self.rows[i]) if self.rows[i] else ((), ())
        return self.row_times[i], np.array(cols), np.array(ys)

    def flatten(self) -> np.ndarray:
        return np.array([y for row in self.rows for _, y in row])


def reshape(traj: Trajectory, period: float) -> ReshapedGrid:
    """Cut ``traj`` into rows of length ``period``: ``row = floor(t/P)``, ``col = (t mod P)/P``."""
    if not period > 0:
        raise InvalidInput(f"period must be positive, got {period}")
    rows: list[list[tuple[float, float]]] = []
    times: list[list[float]] = []
    first = None
    current = None
    for t, y in zip(traj.t, traj.y):
        j, col = _row_col(float(t), period)
        if first is None:
            first = current = j
            rows.append([])
            times.append([])
        while j > current:
            rows.append([])
            times.append([])
            current += 1
        rows[-1].append((col, float(y)))
        times[-1].append(float(t))
    return ReshapedGrid(period, rows, first, [np.array(ts) for ts in times])


def write_spatiotemporal_csv(grid: ReshapedGrid, r: float, T: float, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    k = strain(r, T)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "s", "y"])
        for i, row in enumerate(grid.rows):
            for t, (col, y) in zip(grid.row_times[i], row):
                w.writerow([grid.first_row + i, fmt(col), fmt(k * t), fmt(y)])
    return path


# ---------------------------------------------------------------------------
# peaks and envelopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeakList:
    t: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return self.t.size

    def __iter__(self):
        return iter(zip(self.t.tolist(), self.y.tolist()))

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.t)


def extract_peaks(traj: Trajectory, guard: float = 0.0, threshold: float = 0.0) -> PeakList:
    """Local maxima ``y[i-1] < y[i] >= y[i+1]`` past ``guard`` and above ``threshold``.

    Each maximum is refined to the vertex of the parabola through its three
    samples.
    """
    if guard < 0:
        raise InvalidInput("guard must be >= 0")
    y = traj.y
    t = traj.t
    mid = y[1:-1]
    idx = np.nonzero((y[:-2] < mid) & (mid >= y[2:]))[0] + 1
    idx = idx[(t[idx] > guard) & (y[idx] > threshold)]
    if idx.size == 0:
        raise NoPeaks(f"no local maxima above {threshold} after t={guard}")
    a, b, c = y[idx - 1], y[idx], y[idx + 1]
    curv = a - 2.0 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(curv != 0.0, 0.5 * (a - c) / curv, 0.0)
    off = np.clip(off, -0.5, 0.5)
    tp = t[idx] + off * traj.h
    yp = b - 0.25 * (a - c) * off
    return PeakList(tp, yp)


def recurrence_index(t_peak, t0: float, period: float):
    """Number of feedback round trips since the initial pulse at ``-t0``."""
    return np.rint((np.asarray(t_peak) + t0) / period).astype(int)


@dataclass(frozen=True)
class Envelope:
    """``C * g(t)`` with ``g = 1/sqrt(t+t0)`` for ``r == 1`` and
    ``g = r^(t (1/(T+1) + ln r / T^3)) / sqrt(t+t0)`` otherwise."""

    r: float
    T: float
    t0: float
    constant: float

    def shape(self, t):
        t = np.asarray(t, dtype=float)
        base = 1.0 / np.sqrt(t + self.t0)
        if self.r != 1.0:
            lr = math.log(self.r)
            base = base * np.exp(lr * t * (1.0 / (self.T + 1.0) + lr / self.T ** 3))
        return base

    def __call__(self, t):
        out = self.constant * self.shape(t)
        return float(out) if np.ndim(t) == 0 else out

    def t_min(self) -> float | None:
        """Time of the envelope minimum (``r > 1`` only)."""
        if self.r <= 1.0:
            return None
        lr = math.log(self.r)
        growth = lr * (1.0 / (self.T + 1.0) + lr / self.T ** 3)
        return 1.0 / (2.0 * growth) - self.t0


def envelope_prediction(r: float, T: float, t0: float, anchor: tuple[float, float]) -> Envelope:
    """Peak envelope with its constant fixed so that it passes through ``anchor``."""
    ta, ya = anchor
    if not ya > 0:
        raise DegenerateAnchor(f"anchor value must be positive, got {ya}")
    if not ta + t0 > 0:
        raise DegenerateAnchor("anchor lies before the source time -t0")
    env = Envelope(r, T, t0, 1.0)
    return Envelope(r, T, t0, ya / float(env.shape(ta)))


def envelope_least_squares(r: float, T: float, t0: float, peaks: PeakList) -> Envelope:
    """Envelope whose constant minimises the squared misfit over all peaks."""
    g = Envelope(r, T, t0, 1.0).shape(peaks.t)
    if np.any(~np.isfinite(g)):
        raise DegenerateAnchor("peaks before the source time -t0")
    return Envelope(r, T, t0, float(np.dot(g, peaks.y) / np.dot(g, g)))


def write_peaks_csv(peaks: PeakList, env: Envelope, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pred = env(peaks.t)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_peak", "y_peak", "envelope_pred", "rel_err"])
        for tp, yp, pp in zip(peaks.t, peaks.y, pred):
            w.writerow([fmt(tp), fmt(yp), fmt(pp), fmt((yp - pp) / pp)])
    return path


# ---------------------------------------------------------------------------
# DDE row vs diffusion Green function
# ---------------------------------------------------------------------------

def profile_width(history: Callable[[float], float], T: float, n: int = 8193) -> float:
    """Full width at 1/e of the maximum of ``|history|`` on ``[-T, 0]``."""
    s, v = sample_history(history, T, n)
    a = np.abs(v)
    peak = a.max()
    if peak == 0:
        return 0.0
    above = np.nonzero(a >= peak / math.e)[0]
    return float(s[above[-1]] - s[above[0]])


@dataclass(frozen=True)
class ProfileComparison:
    row: int
    dz: float
    l2_err: float
    linf_err: float
    peak_col_err: float
    raw_l2_err: float
    raw_linf_err: float
    t_center: float
    col: np.ndarray = field(repr=False)
    y_scaled: np.ndarray = field(repr=False)
    y_predicted: np.ndarray = field(repr=False)

    def report(self) -> dict:
        return {
            "row": self.row,
            "dz": self.dz,
            "l2_err": self.l2_err,
            "linf_err": self.linf_err,
            "peak_col_err": self.peak_col_err,
            "raw_l2_err": self.raw_l2_err,
            "raw_linf_err": self.raw_linf_err,
            "t_center": self.t_center,
        }


def _circular_distance(a: float, b: float) -> float:
    d = (a - b) % 1.0
    return min(d, 1.0 - d)


def compare_profiles(traj: Trajectory, r: float, T: float, t0: float, row: int,
                     period: float | None = None,
                     history: Callable[[float], float] | None = None) -> ProfileComparison:
    """Compare row ``row`` of the reshaped trajectory with the diffusion Green function.

    The row is divided by :func:`prefactor`, normalised to unit mass in ``s``
    and compared against the wrapped kernel centred on the image of the
    initial pulse (``s = -t0 * strain``). ``dz`` is measured from the source
    time ``-t0`` to the time at which the pulse centre crosses the row.
    Errors ``l2_err`` and ``linf_err`` are relative to the kernel's own norms.

    Raises
    ------
    RowOutOfRange
        If the trajectory does not cover the whole row.
    NotLocalized
        If the history's 1/e full width exceeds ``T / 4``.
    """
    P = T + 1.0 if period is None else period
    history = history if history is not None else getattr(traj.problem, "history", None)
    if history is not None:
        width = profile_width(history, T)
        if width > T / 4.0:
            raise NotLocalized(f"initial profile width {width:.4g} exceeds T/4 = {T / 4:.4g}")
    if row < 0 or (row + 1) * P > traj.t_last + traj.h or row * P < traj.t0:
        raise RowOutOfRange(f"row {row} (t in [{row * P:.6g}, {(row + 1) * P:.6g})) "
                            f"is not covered by the trajectory")
    grid = reshape(traj, P)
    t, col, y = grid.row(row)

    k = strain(r, T)
    scaled = y / prefactor(r, T, t)
    ds = k * traj.h
    mass = scaled.sum() * ds
    if not mass > 0:
        raise NotLocalized(f"row {row} carries no positive mass")
    Y = scaled / mass

    # time at which the pulse centre, s = -t0*k + integer, is nearest the row middle
    t_mid = (row + 0.5) * P
    n_pass = round((t_mid + t0) * k)
    t_center = n_pass / k - t0
    dz = (t_center + t0) / T ** 3
    if not dz > 0:
        raise RowOutOfRange(f"row {row} precedes the first return of the pulse")
    pred = wrapped_heat_kernel(k * t, -t0 * k, dz)

    diff = Y - pred
    raw_l2 = math.sqrt(float(np.sum(diff * diff)) * ds)
    raw_linf = float(np.max(np.abs(diff)))
    l2 = raw_l2 / math.sqrt(float(np.sum(pred * pred)) * ds)
    linf = raw_linf / float(np.max(pred))

    col_peak_obs = float(col[int(np.argmax(Y))])
    col_peak_pred = _row_col(t_center, P)[1]
    return ProfileComparison(
        row=row, dz=dz, l2_err=l2, linf_err=linf,
        peak_col_err=_circular_distance(col_peak_obs, col_peak_pred),
        raw_l2_err=raw_l2, raw_linf_err=raw_linf, t_center=t_center,
        col=col, y_scaled=Y, y_predicted=pred,
    )


def write_profile_csv(cmp: ProfileComparison, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["col", "y_scaled", "y_predicted"])
        for c, a, b in zip(cmp.col, cmp.y_scaled, cmp.y_predicted):
            w.writerow([fmt(c), fmt(a), fmt(b)])
    return path


# ---------------------------------------------------------------------------
# square-wave diagnostics (cubic model)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SquareWaveStats:
    plateau_high: float
    plateau_low: float
    period: float
    lock_in_time: float
    crossings: np.ndarray = field(repr=False)

    def report(self) -> dict:
        return {"plateau_high": self.plateau_high, "plateau_low": self.plateau_low,
                "period": self.period, "lock_in_time": self.lock_in_time}


def upward_crossings(traj: Trajectory) -> np.ndarray:
    """Linearly interpolated times where ``y`` crosses zero going up."""
    y, t = traj.y, traj.t
    i = np.nonzero((y[:-1] < 0.0) & (y[1:] >= 0.0))[0]
    return t[i] - y[i] * traj.h / (y[i + 1] - y[i])


def square_wave_stats(traj: Trajectory, after: float, rel_tol: float = 0.01) -> SquareWaveStats:
    """Plateau levels (medians of each sign) and period for ``t > after``.

    ``lock_in_time`` is the first upward crossing from which every later
    crossing interval stays within ``rel_tol`` of the settled period.
    """
    sel = traj.t > after
    ys = traj.y[sel]
    if not (np.any(ys > 0) and np.any(ys < 0)):
        raise NoPeaks(f"no sign changes after t={after}")
    tc = upward_crossings(traj)
    late = tc[tc > after]
    if late.size < 2:
        raise NoPeaks(f"fewer than two upward crossings after t={after}")
    period = float(np.mean(np.diff(late)))
    gaps = np.diff(tc)
    bad = np.nonzero(np.abs(gaps - period) > rel_tol * period)[0]
    lock = float(tc[bad[-1] + 1]) if bad.size else float(tc[0])
    return SquareWaveStats(
        plateau_high=float(np.median(ys[ys > 0])),
        plateau_low=float(np.median(ys[ys < 0])),
        period=period,
        lock_in_time=lock,
        crossings=tc,
    )
