"""Characteristic roots of ``lambda + 1 = r exp(-lambda T)``.

Roots are computed in the scaled variable ``u = lambda T`` where the equation
reads ``g(u) = u/T + 1 - r exp(-u) = 0``. Branch ``n`` is the root whose
imaginary part lies in the strip ``(2 pi n - pi, 2 pi n + pi]``; for ``r = 1``
it coincides with ``T (lambda + 1) = W_n(T e^T)``.
"""
from __future__ import annotations

import cmath
import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .dde import fmt
from .errors import BranchEscape, DomainError, InvalidInput, NoConvergence

NEWTON_TOL = 1e-14
NEWTON_MAXITER = 50
RESIDUAL_BOUND = 1e-12
TWO_PI = 2.0 * math.pi


class AsymptoticWindowWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpectrumRoot:
    n: int
    lambda_exact: complex
    lambda_asym: complex
    residual: float
    u: complex
    iterations: int = 0
    outside_asymptotic_window: bool = False

    @property
    def asym_error(self) -> float:
        return abs(self.lambda_exact - self.lambda_asym)


@dataclass(frozen=True)
class SpectrumRequest:
    r: float
    T: float
    n_max: int

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidInput(f"r must be positive, got {self.r}")
        if not self.T > 0:
            raise InvalidInput(f"T must be positive, got {self.T}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise InvalidInput(f"n_max must be a non-negative integer, got {self.n_max}")

    @property
    def in_window(self) -> bool:
        return TWO_PI * self.n_max < self.T


def asymptotic_root(r: float, T: float, n: int, squared_log: bool = False) -> complex:
    """Large-delay approximation of branch ``n``.

    For ``r == 1`` the resummed form ``-2 n^2 pi^2 / T^3 + 2 i n pi / (T + 1)``
    is returned; otherwise :func:`asymptotic_root_expanded`.
    """
    if r == 1.0:
        return complex(-2.0 * n * n * math.pi ** 2 / T ** 3, TWO_PI * n / (T + 1.0))
    return asymptotic_root_expanded(r, T, n, squared_log)


def asymptotic_root_expanded(r: float, T: float, n: int, squared_log: bool = False) -> complex:
    """The bracketed expansion, term by term and never resummed::

        (1/T) [ -ln r / (2T^2) - 2 n^2 pi^2 / T^2
                + (ln r + 2 i n pi)(1 - 1/T + (1 + ln r)/T^2) ]

    ``squared_log=True`` replaces the first term by ``-(ln r)^2 / (2T^2)``,
    which is what a direct fixed-point expansion of the characteristic
    equation produces. Both agree at ``r = 1``.
    """
    lr = math.log(r)
    shift = lr * lr if squared_log else lr
    bracket = (-shift / (2 * T * T) - 2.0 * n * n * math.pi ** 2 / (T * T)
               + complex(lr, TWO_PI * n) * (1.0 - 1.0 / T + (1.0 + lr) / (T * T)))
    return bracket / T


def characteristic_residual(lam: complex, r: float, T: float) -> float:
    return abs(lam + 1.0 - r * cmath.exp(-lam * T))


def in_branch_strip(u: complex, n: int) -> bool:
    return TWO_PI * n - math.pi < u.imag <= TWO_PI * n + math.pi


def exact_root(r: float, T: float, n: int) -> SpectrumRoot:
    """Newton iteration on ``g(u) = u/T + 1 - r e^{-u}`` seeded asymptotically.

    Raises
    ------
    NoConvergence
        If ``|g| >= 1e-14`` after 50 iterations.
    BranchEscape
        If the converged root leaves the strip of branch ``n``.
    """
    if not r > 0 or not T > 0:
        raise InvalidInput("r and T must be positive")
    n = int(n)
    lam_asym = asymptotic_root(r, T, n)
    u = lam_asym * T
    it = 0
    g = u / T + 1.0 - r * cmath.exp(-u)
    while abs(g) >= NEWTON_TOL:
        if it == NEWTON_MAXITER:
            raise NoConvergence(
                f"branch {n}: |g|={abs(g):.3e} after {NEWTON_MAXITER} Newton iterations")
        e = r * cmath.exp(-u)
        u = u - g / (1.0 / T + e)
        g = u / T + 1.0 - r * cmath.exp(-u)
        it += 1
    if not in_branch_strip(u, n):
        raise BranchEscape(f"branch {n}: converged Im(u)={u.imag:.6g} left its strip")
    lam = u / T
    return SpectrumRoot(
        n=n,
        lambda_exact=lam,
        lambda_asym=lam_asym,
        residual=characteristic_residual(lam, r, T),
        u=u,
        iterations=it,
        outside_asymptotic_window=TWO_PI * abs(n) >= T,
    )


def lambert_residual(w: complex, T: float) -> float:
    """Distance of ``w + Ln w - T - ln T`` from ``2 pi i Z``.

    Zero exactly when ``w e^w = T e^T`` on some branch; ``T e^T`` itself is
    never formed.
    """
    if w == 0:
        raise DomainError("w = 0 has no logarithm")
    d = complex(w) + cmath.log(w) - T - math.log(T)
    k = round(d.imag / TWO_PI)
    return abs(complex(d.real, d.imag - TWO_PI * k))


def lambert_identity_check(root: SpectrumRoot, T: float) -> float:
    """Check that ``T (1 + lambda)`` solves ``w e^w = T e^T`` (``r = 1`` roots).

    The trivial root ``lambda = 0`` is refused with :class:`DomainError`.
    """
    if root.u == 0:
        raise DomainError("the lambda = 0 root is excluded from the Lambert check")
    return lambert_residual(T + root.u, T)


def spectrum(request: SpectrumRequest) -> list[SpectrumRoot]:
    """All branches ``-n_max .. n_max`` sorted by branch index."""
    if not request.in_window:
        warnings.warn(
            f"2*pi*n_max = {TWO_PI * request.n_max:.4g} >= T = {request.T}: "
            "outer roots are flagged outside_asymptotic_window",
            AsymptoticWindowWarning, stacklevel=2)
    # exact_root errors already carry the branch index
    return [exact_root(request.r, request.T, n)
            for n in range(-request.n_max, request.n_max + 1)]


def spacing(roots: list[SpectrumRoot]) -> list[float]:
    """Imaginary-part gaps between consecutive branches."""
    return [b.lambda_exact.imag - a.lambda_exact.imag for a, b in zip(roots, roots[1:])]


SPECTRUM_HEADER = ["n", "re_exact", "im_exact", "re_asym", "im_asym",
                   "residual", "asym_error", "outside_window"]


def write_spectrum_csv(roots: list[SpectrumRoot], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_HEADER)
        for rt in roots:
            w.writerow([rt.n, fmt(rt.lambda_exact.real), fmt(rt.lambda_exact.imag),
                        fmt(rt.lambda_asym.real), fmt(rt.lambda_asym.imag),
                        fmt(rt.residual), fmt(rt.asym_error),
                        int(rt.outside_asymptotic_window)])
    return path
