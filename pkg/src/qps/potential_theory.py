"""Green's function of the annulus ``1/R < |z| < R`` and Riesz masses of ``u_m``.

The Green's function is ``G_R(z, w) = log|z - w| / (2 pi) + Gamma_R(z, w)``
with ``Gamma_R`` built from the image products of the method of images.  It
vanishes on both boundary circles and is non-positive inside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cocycle import Cocycle
from .errors import CoincidentPoints
from .lyapunov import finite_lyapunov
from .reduction import pairwise_mean

TWO_PI = 2.0 * math.pi
DEFAULT_TRUNCATION = 1e-16
TOL_NEGATIVE = 1e-3


@dataclass(frozen=True)
class AnnulusGreen:
    R: float
    truncation_tol: float = DEFAULT_TRUNCATION

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError("R must exceed 1")
        if not 0 < self.truncation_tol < 1:
            raise ValueError("truncation_tol must lie in (0, 1)")

    @property
    def K(self) -> int:
        """Number of image factors kept; the first dropped one deviates from 1 by ``< R**(-4K)``."""
        return max(1, math.ceil(math.log(1.0 / self.truncation_tol) / (4.0 * math.log(self.R))))

    def contains(self, z) -> bool:
        return 1.0 / self.R <= abs(z) <= self.R


@dataclass(frozen=True)
class CircleAverage:
    quadrature: float
    closed_form: float

    @property
    def discrepancy(self) -> float:
        return abs(self.quadrature - self.closed_form)


@dataclass(frozen=True)
class FourierCoefficient:
    closed_form: complex
    quadrature: complex
    bound: float

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form - self.quadrature)


@dataclass(frozen=True)
class RieszMassEstimate:
    eps_band: tuple
    mass: float
    slope_values: dict
    fd_step: float
    m: int

    def is_nonnegative(self, tol=TOL_NEGATIVE) -> bool:
        return self.mass >= -tol

    def to_json(self) -> dict:
        return {"eps_band": list(self.eps_band), "mass": self.mass, "fd_step": self.fd_step,
                "m": self.m, "slopes": {str(k): v for k, v in self.slope_values.items()}}


def gamma(g: AnnulusGreen, z, w):
    """Harmonic part ``Gamma_R(z, w)``; vectorised over ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    w = complex(w)
    R = g.R
    log_r = math.log(R)
    k = np.arange(1, g.K + 1, dtype=np.float64)
    outer = R ** (-4.0 * k)
    inner = R ** (-(4.0 * k - 2.0))
    zz = z[..., None]
    num = (np.log(np.abs(1.0 - outer * (zz / w))) + np.log(np.abs(1.0 - outer * (w / zz)))).sum(-1)
    den = (np.log(np.abs(1.0 - inner * (w * np.conj(zz))))
           + np.log(np.abs(1.0 - inner / (np.conj(zz) * w)))).sum(-1)
    lead = np.log(np.abs(z) / R) * math.log(abs(w) / R) / (4.0 * math.pi * log_r)
    return lead + (num - den - log_r) / TWO_PI


def green(g: AnnulusGreen, z, w):
    """``G_R(z, w)``; raises :class:`CoincidentPoints` when ``|z - w| < 1e-14``."""
    za = np.asarray(z, dtype=np.complex128)
    dist = np.abs(za - complex(w))
    if np.any(dist < 1e-14):
        raise CoincidentPoints("z and w coincide")
    out = np.log(dist) / TWO_PI + gamma(g, za, w)
    return float(out) if out.ndim == 0 else out


def circle_average_closed_form(g: AnnulusGreen, r: float, w) -> float:
    """``2 pi int G_R(r e(theta), w) dtheta``, branch chosen by ``|w|`` against ``r``."""
    R = g.R
    aw = abs(w)
    if aw >= r:
        return math.log(r * R) * math.log(aw / R) / (2.0 * math.log(R))
    return math.log(r / R) * math.log(aw * R) / (2.0 * math.log(R))


def _circle(r, n_quad):
    return r * np.exp(1j * TWO_PI * np.arange(n_quad) / n_quad)


def circle_average(g: AnnulusGreen, r: float, w, n_quad: int = 2048) -> CircleAverage:
    """Uniform-grid quadrature of ``2 pi int G_R(r e(theta), w) dtheta`` next to its closed form."""
    if not 1.0 / g.R <= r <= g.R:
        raise ValueError("r must lie in [1/R, R]")
    quad = TWO_PI * float(pairwise_mean(green(g, _circle(r, n_quad), w)))
    return CircleAverage(quad, circle_average_closed_form(g, r, w))


def gamma_average_closed_form(g: AnnulusGreen, r: float, w) -> float:
    R = g.R
    return (math.log(r / R) * math.log(abs(w) / R) / (4.0 * math.pi * math.log(R))
            - math.log(R) / TWO_PI)


def gamma_average(g: AnnulusGreen, r: float, w, n_quad: int = 2048) -> CircleAverage:
    quad = float(pairwise_mean(gamma(g, _circle(r, n_quad), w)))
    return CircleAverage(quad, gamma_average_closed_form(g, r, w))


def green_fourier_closed_form(g: AnnulusGreen, k: int, w) -> complex:
    """Closed-form ``k``-th coefficient of ``theta -> 2 pi G_R(e(theta), w)``, ``k != 0``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    a = abs(k)
    r = abs(w)
    phi = math.atan2(complex(w).imag, complex(w).real) / TWO_PI
    R = g.R
    direct = -min(r, 1.0 / r) ** a
    # image sum: sum_l (R^{-4 l a} - R^{-(4l-2) a}) (r^a + r^-a), summed in closed form
    images = R ** (-a) * (r ** a + r ** (-a)) / (R ** a + R ** (-a))
    return complex(np.exp(-1j * TWO_PI * k * phi) * (direct + images) / (2.0 * a))


def green_fourier(g: AnnulusGreen, k: int, w, n_quad: int = 4096) -> FourierCoefficient:
    """Closed form, FFT quadrature and the bound ``(1 + R^-|k|) / (2|k|)``.

    Quadrature is spectrally accurate when ``|w|`` stays away from 1; the
    aliasing error is of order ``min(|w|, 1/|w|)**n_quad``.
    """
    if abs(k) >= n_quad // 2:
        raise ValueError("|k| must be below n_quad / 2")
    samples = TWO_PI * green(g, _circle(1.0, n_quad), w)
    quad = complex(np.fft.fft(samples)[k % n_quad] / n_quad)
    bound = (1.0 + g.R ** (-abs(k))) / (2.0 * abs(k))
    return FourierCoefficient(green_fourier_closed_form(g, k, w), quad, bound)


def _slope(coc, m, eps, h, n_theta, threads):
    return (finite_lyapunov(coc, m, eps + h, n_theta, threads)
            - finite_lyapunov(coc, m, eps - h, n_theta, threads)) / (2.0 * h)


def riesz_mass(coc: Cocycle, m: int, eps_band, n_theta: int = 2048, fd_step=None,
               threads=None) -> RieszMassEstimate:
    """Riesz mass of ``u_m`` on ``{eps_1 < |log|z|| / 2 pi < eps_2}`` from circle-average slopes.

    With ``L' = dL_m/deps`` by central differences the mass is
    ``[L'(eps_2) - L'(eps_1) + L'(-eps_1) - L'(-eps_2)] / (2 pi)``.  For
    ``eps_1 = 0`` the band includes the unit circle and the mass is
    ``[L'(eps_2) - L'(-eps_2)] / (2 pi)``.  The default step is an eighth of
    the band width, capped at ``eps_1 / 2`` so no stencil crosses the unit circle.
    """
    e1, e2 = (float(e) for e in eps_band)
    if not 0 <= e1 < e2:
        raise ValueError("need 0 <= eps_1 < eps_2")
    if fd_step is None:
        h = (e2 - e1) / 8.0 if e1 == 0 else min((e2 - e1) / 8.0, e1 / 2.0)
    else:
        h = float(fd_step)
    if h <= 0:
        raise ValueError("fd_step must be positive")
    if e1 > 0 and h >= e1:
        raise ValueError("fd_step must be smaller than eps_1")
    points = [e2, -e2] if e1 == 0 else [e2, e1, -e1, -e2]
    slopes = {e: _slope(coc, m, e, h, n_theta, threads) for e in points}
    if e1 == 0:
        mass = (slopes[e2] - slopes[-e2]) / TWO_PI
    else:
        mass = (slopes[e2] - slopes[e1] + slopes[-e1] - slopes[-e2]) / TWO_PI
    return RieszMassEstimate((e1, e2), float(mass), slopes, h, m)
