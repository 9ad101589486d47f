"""Finite-scale Lyapunov exponents, complexified profiles and acceleration."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle, log_norm_grid
from .reduction import pairwise_mean

TOL_CONVEX = 1e-3
TOL_EVEN = 1e-6
QUANTIZATION_SUSPECT = 0.1
DEFAULT_WINDOW = (0.01, 0.05)


def theta_grid(n_theta: int) -> np.ndarray:
    if n_theta < 64 or n_theta & (n_theta - 1):
        raise ValueError("n_theta must be a power of two >= 64")
    return np.arange(n_theta) / n_theta


def phase_values(coc: Cocycle, m: int, eps: float, n_theta: int, threads=None) -> np.ndarray:
    """``u_m(theta_j + i eps) = log||M_m|| / m`` on the uniform grid ``theta_j = j / n_theta``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return log_norm_grid(coc, theta_grid(n_theta), eps, m, threads=threads)[0] / m


def finite_lyapunov(coc: Cocycle, m: int, eps: float = 0.0, n_theta: int = 2048,
                    threads=None) -> float:
    """Grid quadrature of ``(1/m) int log||M_m(theta + i eps)|| dtheta``."""
    return float(pairwise_mean(phase_values(coc, m, eps, n_theta, threads)))


def lyapunov_sequence(coc: Cocycle, m: int, eps: float = 0.0, n_theta: int = 2048,
                      threads=None):
    """``(L_m, L_2m)``; the infinite-scale exponent is reported, never extrapolated."""
    return (finite_lyapunov(coc, m, eps, n_theta, threads),
            finite_lyapunov(coc, 2 * m, eps, n_theta, threads))


@dataclass(frozen=True)
class LyapunovProfile:
    epsilons: tuple
    values: tuple
    m: int
    n_theta: int
    energy: complex

    def second_differences(self) -> np.ndarray:
        """Divided second differences (scaled to unit spacing of the local stencil)."""
        e = np.asarray(self.epsilons)
        v = np.asarray(self.values)
        if len(e) < 3:
            return np.zeros(0)
        left = (v[1:-1] - v[:-2]) / (e[1:-1] - e[:-2])
        right = (v[2:] - v[1:-1]) / (e[2:] - e[1:-1])
        return (right - left) * 0.5 * (e[2:] - e[:-2])

    def is_convex(self, tol=TOL_CONVEX) -> bool:
        return bool(np.all(self.second_differences() >= -tol))

    def evenness_defect(self) -> float:
        """``max |L(eps) - L(-eps)|`` over mirrored pairs present in the profile."""
        table = dict(zip(self.epsilons, self.values))
        gaps = [abs(v - table[-e]) for e, v in table.items() if e > 0 and -e in table]
        return max(gaps, default=0.0)

    def is_even(self, tol=TOL_EVEN) -> bool:
        return self.evenness_defect() <= tol


@dataclass(frozen=True)
class AccelerationEstimate:
    slope: float
    nearest_integer: int
    residual: float
    window: tuple

    @property
    def quantization_suspect(self) -> bool:
        return self.residual > QUANTIZATION_SUSPECT

    def to_json(self) -> dict:
        return {"slope": self.slope, "nearest_integer": self.nearest_integer,
                "residual": self.residual, "window": list(self.window),
                "quantization_suspect": self.quantization_suspect}


def profile(coc: Cocycle, m: int, eps_list, n_theta: int = 2048, threads=None) -> LyapunovProfile:
    eps = [float(e) for e in eps_list]
    if eps != sorted(eps):
        raise ValueError("eps_list must be sorted")
    values = tuple(finite_lyapunov(coc, m, e, n_theta, threads) for e in eps)
    return LyapunovProfile(tuple(eps), values, m, n_theta, complex(coc.energy))


def acceleration(coc: Cocycle, m: int, window=DEFAULT_WINDOW, n_points: int = 5,
                 n_theta: int = 2048, threads=None) -> AccelerationEstimate:
    """Least-squares slope of ``L_m(eps)`` against ``2 pi eps`` inside ``window``."""
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < eps_min < eps_max")
    if n_points < 3:
        raise ValueError("n_points must be >= 3")
    eps = np.linspace(lo, hi, n_points)
    prof = profile(coc, m, eps, n_theta, threads)
    slope = float(np.polyfit(2 * math.pi * eps, np.asarray(prof.values), 1)[0])
    nearest = int(round(slope))
    return AccelerationEstimate(slope, nearest, abs(slope - nearest), (lo, hi))


def _affine_residual(x, y) -> float:
    if len(x) < 3:
        return 0.0
    coef = np.polyfit(x, y, 1)
    return float(np.max(np.abs(np.polyval(coef, x) - y)))


def linearity_window(prof: LyapunovProfile, tol: float) -> float:
    """Largest ``eps`` such that the profile on ``(0, eps]`` is affine within ``tol``.

    Prefixes of three or more positive points are tested; 0 is returned when
    even the shortest of them fails.
    """
    pos = [(e, v) for e, v in zip(prof.epsilons, prof.values) if e > 0]
    if len(pos) < 4:
        raise ValueError("profile needs at least 4 points with eps > 0")
    x = np.array([e for e, _ in pos])
    y = np.array([v for _, v in pos])
    best = 0.0
    for j in range(3, len(x) + 1):
        if _affine_residual(x[:j], y[:j]) <= tol:
            best = float(x[j - 1])
    return best
