"""Fixed-step method-of-steps integration of scalar delay equations.

Two models are supported::

    linear:  y'(t) = -y(t) + r * y(t - T)
    cubic:   y'(t) =  y(t) - y(t - T) - y(t)**3

The step is ``h = T / m`` so every multiple of the delay is a grid node and
each delayed RK4 stage lands either on a stored node or on the midpoint of an
already completed step. Midpoints are filled by cubic Hermite interpolation.
On the first interval the history function is called directly.

New models plug in by providing a frozen dataclass with ``name``, ``params()``
and ``rhs(y, y_delayed)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _quad

from .errors import HorizonTooShort, InvalidInput, NonFiniteState, OutOfRange

BLOWUP_THRESHOLD = 1e12
MIN_STEPS_PER_DELAY = 16


# ---------------------------------------------------------------------------
# models and histories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearDecayFeedback:
    r: float

    name = "linear"

    def params(self) -> dict:
        return {"r": self.r}

    def rhs(self, y: float, yd: float) -> float:
        return -y + self.r * yd


@dataclass(frozen=True)
class CubicCounterexample:
    name = "cubic"

    def params(self) -> dict:
        return {}

    def rhs(self, y: float, yd: float) -> float:
        # -y' + y = y(t-T) + y^3
        return y - yd - y * y * y


@dataclass(frozen=True)
class GaussianHistory:
    """``amp * exp(-((t - center) / width)**2)``."""

    amp: float
    center: float
    width: float = 1.0

    def __call__(self, t: float) -> float:
        x = (t - self.center) / self.width
        return self.amp * math.exp(-x * x)

    @property
    def spec(self) -> str:
        return f"gaussian:{self.amp!r},{self.center!r},{self.width!r}"


@dataclass(frozen=True)
class SineMixHistory:
    """``0.1 sin(t) - 0.02 cos(3t)``, the history used for the cubic model."""

    def __call__(self, t: float) -> float:
        return 0.1 * math.sin(t) - 0.02 * math.cos(3.0 * t)

    @property
    def spec(self) -> str:
        return "sine-mix"


@dataclass(frozen=True)
class ConstantHistory:
    value: float

    def __call__(self, t: float) -> float:
        return self.value

    @property
    def spec(self) -> str:
        return f"constant:{self.value!r}"


def parse_history(text: str):
    """Parse ``gaussian:<amp>,<center>,<width>``, ``sine-mix`` or ``constant:<c>``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "gaussian":
            parts = [float(p) for p in rest.split(",")]
            if len(parts) not in (2, 3):
                raise ValueError
            hist = GaussianHistory(*parts)
            if hist.width <= 0:
                raise InvalidInput("gaussian width must be positive")
            return hist
        if kind == "sine-mix" and not rest:
            return SineMixHistory()
        if kind == "constant":
            return ConstantHistory(float(rest))
    except ValueError as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"cannot parse history {text!r}") from None
    raise InvalidInput(f"unknown history {text!r}")


# ---------------------------------------------------------------------------
# problem / config / trajectory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DdeProblem:
    model: LinearDecayFeedback | CubicCounterexample
    T: float
    history: Callable[[float], float]
    t_end: float

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise InvalidInput(f"delay T must be positive, got {self.T}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise InvalidInput(f"t_end must be positive, got {self.t_end}")
        if not callable(self.history):
            raise InvalidInput("history must be callable")

    def summary(self) -> dict:
        return {
            "model": self.model.name,
            **self.model.params(),
            "T": self.T,
            "t_end": self.t_end,
            "history": getattr(self.history, "spec", repr(self.history)),
        }


@dataclass(frozen=True)
class SolverConfig:
    steps_per_delay: int = 512
    interpolation: str = "cubic_hermite"
    transient_guard: float = 0.0

    def __post_init__(self):
        m = self.steps_per_delay
        if isinstance(m, bool) or int(m) != m or m < MIN_STEPS_PER_DELAY:
            raise InvalidInput(
                f"steps_per_delay must be an integer >= {MIN_STEPS_PER_DELAY}, got {m}")
        if self.interpolation != "cubic_hermite":
            raise InvalidInput(f"unsupported interpolation {self.interpolation!r}")
        if self.transient_guard < 0:
            raise InvalidInput("transient_guard must be >= 0")

    def step(self, T: float) -> float:
        return T / self.steps_per_delay


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled solution ``y[k] = y(t0 + k*h)`` with nodal derivatives."""

    t0: float
    h: float
    y: np.ndarray
    dy: np.ndarray
    problem: DdeProblem | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        dy = np.asarray(self.dy, dtype=float)
        if y.ndim != 1 or y.shape != dy.shape:
            raise InvalidInput("samples and derivative samples must have equal length")
        if y.size == 0:
            raise InvalidInput("empty trajectory")
        y.setflags(write=False)
        dy.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "dy", dy)

    def __len__(self) -> int:
        return self.y.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.y.size)

    @property
    def t_last(self) -> float:
        return self.t0 + self.h * (self.y.size - 1)

    def __call__(self, t):
        return dense_eval(self, t)


# ---------------------------------------------------------------------------
# Hermite dense output
# ---------------------------------------------------------------------------

def hermite(theta, h, ya, yb, ma, mb):
    """Cubic Hermite interpolant on a cell of width ``h`` at fraction ``theta``."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * ya + h * (h10 * ma + h11 * mb) + h01 * yb


def _hermite_mid(h: float, ya: float, yb: float, ma: float, mb: float) -> float:
    return 0.5 * (ya + yb) + 0.125 * h * (ma - mb)


def dense_eval(traj: Trajectory, t):
    """Evaluate the piecewise cubic Hermite interpolant of ``traj`` at ``t``.

    Exact at the nodes and C^1 across them. Accepts scalars or arrays.
    """
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    n = traj.y.size
    lo, hi = traj.t0, traj.t_last
    # one-ulp slack at the ends so t_last computed elsewhere is accepted
    tol = 4 * np.finfo(float).eps * max(abs(lo), abs(hi), 1.0)
    if np.any(tt < lo - tol) or np.any(tt > hi + tol) or np.any(np.isnan(tt)):
        bad = tt[(tt < lo - tol) | (tt > hi + tol) | np.isnan(tt)][0]
        raise OutOfRange(f"t={bad} outside stored span [{lo}, {hi}]")
    if n == 1:
        out = np.full_like(tt, traj.y[0])
        return float(out[0]) if scalar else out
    x = (tt - lo) / traj.h
    k = np.clip(np.floor(x).astype(int), 0, n - 2)
    theta = np.clip(x - k, 0.0, 1.0)
    out = hermite(theta, traj.h, traj.y[k], traj.y[k + 1], traj.dy[k], traj.dy[k + 1])
    # nodal values returned verbatim
    on_node = theta == 0.0
    out[on_node] = traj.y[k[on_node]]
    at_end = theta == 1.0
    out[at_end] = traj.y[k[at_end] + 1]
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# integrators
# ---------------------------------------------------------------------------

def _n_steps(problem: DdeProblem, h: float) -> int:
    if problem.t_end < h:
        raise HorizonTooShort(f"t_end={problem.t_end} is shorter than one step h={h}")
    return int(math.floor(problem.t_end / h * (1 + 1e-12)))


def _check(value: float, k: int, h: float) -> None:
    if not math.isfinite(value) or abs(value) > BLOWUP_THRESHOLD:
        raise NonFiniteState(f"sample at t={k * h:.6g} is {value!r} (blow-up)")


def integrate(problem: DdeProblem, config: SolverConfig | None = None) -> Trajectory:
    """Integrate ``problem`` on ``[0, t_end]`` with classical RK4 at ``h = T/m``.

    Raises
    ------
    NonFiniteState
        If a sample becomes non-finite or exceeds 1e12 in magnitude.
    HorizonTooShort
        If ``t_end < h``.
    """
    config = config or SolverConfig()
    m = int(config.steps_per_delay)
    h = config.step(problem.T)
    n = _n_steps(problem, h)
    f = problem.model.rhs
    psi = problem.history

    y = [0.0] * (n + 1)
    dy = [0.0] * (n + 1)

    def delayed(k: int, c: float) -> float:
        # y((k + c) h - T); index arithmetic keeps lookups on the grid
        j = k - m
        if c == 1.0:
            return y[j + 1] if j + 1 >= 0 else psi((j + 1) * h)
        if j < 0:
            return psi((j + c) * h)
        if c == 0.0:
            return y[j]
        return _hermite_mid(h, y[j], y[j + 1], dy[j], dy[j + 1])

    yk = float(psi(0.0))
    _check(yk, 0, h)
    y[0] = yk
    half = 0.5 * h
    for k in range(n):
        d_mid = delayed(k, 0.5)
        k1 = f(yk, delayed(k, 0.0))
        dy[k] = k1
        k2 = f(yk + half * k1, d_mid)
        k3 = f(yk + half * k2, d_mid)
        k4 = f(yk + h * k3, delayed(k, 1.0))
        yk = yk + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(yk, k + 1, h)
        y[k + 1] = yk
    dy[n] = f(y[n], delayed(n, 0.0))
    return Trajectory(0.0, h, np.array(y), np.array(dy), problem,
                      meta={"method": "rk4", "steps_per_delay": m})


def linear_oracle_integrate(problem: DdeProblem, config: SolverConfig | None = None,
                            tol: float = 1e-12) -> Trajectory:
    """Independent reference solution for the linear model.

    Each step is advanced with the variation-of-constants formula

        y(t_{k+1}) = y(t_k) e^{-h} + r * int_{t_k}^{t_{k+1}} e^{-(t_{k+1}-u)} yhat(u - T) du

    where ``yhat`` is the history on the first interval and the piecewise
    cubic Hermite interpolant of the oracle's own previous interval after
    that. The integral is computed by adaptive Gauss-Kronrod quadrature.
    """
    if not isinstance(problem.model, LinearDecayFeedback):
        raise InvalidInput("linear_oracle_integrate requires the linear model")
    config = config or SolverConfig()
    m = int(config.steps_per_delay)
    h = config.step(problem.T)
    n = _n_steps(problem, h)
    r = problem.model.r
    psi = problem.history
    decay = math.exp(-h)

    y = np.empty(n + 1)
    dy = np.empty(n + 1)
    y[0] = psi(0.0)
    _check(y[0], 0, h)

    def delayed_node(k: int) -> float:
        j = k - m
        return y[j] if j >= 0 else psi(j * h)

    for k in range(n):
        j = k - m
        dy[k] = -y[k] + r * delayed_node(k)
        if r == 0.0:
            forcing = 0.0
        else:
            if j < 0:
                base = j * h

                def g(v, base=base):
                    return math.exp(v - h) * psi(base + v)
            else:
                ya, yb, ma, mb = y[j], y[j + 1], dy[j], dy[j + 1]

                def g(v, ya=ya, yb=yb, ma=ma, mb=mb):
                    return math.exp(v - h) * hermite(v / h, h, ya, yb, ma, mb)
            forcing, _ = _quad.quad(g, 0.0, h, epsabs=tol, epsrel=tol, limit=100)
        y[k + 1] = y[k] * decay + r * forcing
        _check(y[k + 1], k + 1, h)
    dy[n] = -y[n] + r * delayed_node(n)
    return Trajectory(0.0, h, y, dy, problem,
                      meta={"method": "variation_of_constants", "steps_per_delay": m})


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles."""
    return f"{x:.17g}"


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "y"])
        for t, v in zip(traj.t, traj.y):
            w.writerow([fmt(t), fmt(v)])
    return path


def read_trajectory_csv(path: str | Path, problem: DdeProblem | None = None) -> Trajectory:
    """Load a ``t,y`` CSV.

    With ``problem`` the nodal derivatives are recomputed from the model
    (exact); without it they are estimated by second-order differences.
    """
    t, y = _read_ty(path)
    if t.size < 2:
        raise InvalidInput(f"{path}: need at least two samples")
    h = (t[-1] - t[0]) / (t.size - 1)
    if problem is not None:
        m = int(round(problem.T / h))
        yd = np.array([y[k - m] if k >= m else problem.history(t[k] - problem.T)
                       for k in range(t.size)])
        dy = np.array([problem.model.rhs(a, b) for a, b in zip(y, yd)])
    else:
        dy = np.gradient(y, h, edge_order=2)
    return Trajectory(float(t[0]), float(h), y, dy, problem, meta={"source": str(path)})


def _read_ty(path) -> tuple[np.ndarray, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "y"]:
        raise InvalidInput(f"{path}: expected header 't,y'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    if data.size == 0:
        raise InvalidInput(f"{path}: no samples")
    return data[:, 0], data[:, 1]


def sample_history(history: Callable[[float], float], T: float,
                   n: int = 4097) -> tuple[np.ndarray, np.ndarray]:
    s = np.linspace(-T, 0.0, n)
    return s, np.array([history(v) for v in s])


def max_abs_diff(a: Trajectory, b: Trajectory, t_max: float | None = None) -> float:
    """Max |a - b| over the nodes of the coarser trajectory (grids must nest)."""
    coarse, fine = (a, b) if a.h >= b.h else (b, a)
    ratio = int(round(coarse.h / fine.h))
    if not math.isclose(ratio * fine.h, coarse.h, rel_tol=1e-12):
        raise InvalidInput("grids do not nest")
    n = min(coarse.y.size, (fine.y.size - 1) // ratio + 1)
    if t_max is not None:
        n = min(n, int(math.floor(t_max / coarse.h * (1 + 1e-12))) + 1)
    return float(np.max(np.abs(coarse.y[:n] - fine.y[: n * ratio : ratio][:n])))


__all__: Sequence[str] = (
    "LinearDecayFeedback", "CubicCounterexample", "GaussianHistory", "SineMixHistory",
    "ConstantHistory", "parse_history", "DdeProblem", "SolverConfig", "Trajectory",
    "dense_eval", "hermite", "integrate", "linear_oracle_integrate",
    "write_trajectory_csv", "read_trajectory_csv", "sample_history", "max_abs_diff", "fmt",
)
