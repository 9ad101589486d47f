"""Phase fields, their Fourier spectra, deviation sets and the seven-band decomposition.

A :class:`PhaseField` holds ``u_m(theta_j + i eps) = log||M_m|| / m`` on the
uniform grid ``theta_j = j / n_theta``.  Its mean is computed by the same
pairwise reduction as :func:`qps.lyapunov.finite_lyapunov`, so the two agree
bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .arithmetic import Frequency, denominators, fejer_multiplier, torus_norm
from .cocycle import Cocycle, log_norm_grid, one_step_log_norm_bound
from .lyapunov import theta_grid
from .reduction import pairwise_mean, pairwise_sum

FEJER_MODES = ("exact", "spectral", "nearest")
DEFAULT_DECAY_C = 10.0
# cap on Q * n_theta * m transfer steps before exact smoothing falls back to nearest-grid
EXACT_BUDGET = 4_000_000_000


@dataclass(frozen=True)
class PhaseField:
    values: np.ndarray
    m: int
    n_theta: int
    eps: float
    energy: complex
    cocycle: Cocycle | None = dc_field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def mean(self) -> float:
        return float(pairwise_mean(self.values))

    @property
    def thetas(self) -> np.ndarray:
        return theta_grid(self.n_theta)

    def replace_values(self, values) -> "PhaseField":
        return PhaseField(values, self.m, self.n_theta, self.eps, self.energy, self.cocycle)


@dataclass(frozen=True)
class FourierSpectrum:
    """Coefficients ``u_hat(k)`` for ``-n/2 <= k < n/2`` stored in increasing ``k``."""

    coefficients: np.ndarray
    n_theta: int
    source: dict = dc_field(default_factory=dict)

    @property
    def ks(self) -> np.ndarray:
        n = self.n_theta
        return np.arange(-n // 2, n // 2)

    def __getitem__(self, k: int) -> complex:
        n = self.n_theta
        if not -n // 2 <= k < n // 2:
            raise IndexError(k)
        return complex(self.coefficients[k + n // 2])


@dataclass(frozen=True)
class ComplexDeviation:
    measure: float
    threshold: float
    eta: float
    eta_bound: float
    eta_compliant: bool


@dataclass(frozen=True)
class BandDecomposition:
    bands: tuple
    sup_norms: tuple
    delta: float
    Q: int
    n: int
    q_n: int
    q_n1: int
    beta_n: float
    cutoff: float
    scale_mismatch: bool
    completeness_residual: float
    u7_l2: float
    mode: str

    def to_json(self) -> dict:
        return {"delta": self.delta, "Q": self.Q, "n": self.n, "q_n": self.q_n,
                "q_n1": self.q_n1, "beta_n": self.beta_n, "scale_mismatch": self.scale_mismatch,
                "band_sup_norms": list(self.sup_norms),
                "completeness_residual": self.completeness_residual, "u7_l2": self.u7_l2}


@dataclass(frozen=True)
class DecayReport:
    C_fit: float
    violations: tuple
    C_default: float
    kappa: float
    delta: float
    R: float

    def to_json(self) -> dict:
        return {"C_fit": self.C_fit, "violations": list(self.violations)}


def sample_field(coc: Cocycle, m: int, eps: float = 0.0, n_theta: int = 2048,
                 threads=None) -> PhaseField:
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = log_norm_grid(coc, theta_grid(n_theta), eps, m, threads=threads)[0] / m
    return PhaseField(vals, m, n_theta, float(eps), complex(coc.energy), coc)


def fourier(field: PhaseField) -> FourierSpectrum:
    """``u_hat(k) = (1/n) sum_j u_j exp(-2 pi i k j / n)``."""
    n = field.n_theta
    coef = np.fft.fftshift(np.fft.fft(field.values)) / n
    return FourierSpectrum(coef, n, {"m": field.m, "eps": field.eps,
                                     "energy": [field.energy.real, field.energy.imag]})


def deviation_measure(field: PhaseField, t: float) -> float:
    """Grid fraction of ``|u - mean| > t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    dev = np.abs(field.values - field.mean)
    return float(np.count_nonzero(dev > t)) / field.n_theta


def lower_deviation_measure(field: PhaseField, level: float) -> float:
    """Grid fraction of ``u < level``."""
    return float(np.count_nonzero(field.values < level)) / field.n_theta


def eta_smallness_bound(m, kappa, beta_n, C, delta) -> float:
    return math.exp(-2.0 * m * (kappa * beta_n + 2.0 * C * delta))


def deviation_measure_complex(coc: Cocycle, m: int, t: float, n_theta: int = 2048, *,
                              kappa=1.0, beta_n=0.0, C=1.0, delta=0.01,
                              threads=None) -> ComplexDeviation:
    """One-sided deviation ``mes{u_{m, E + i eta} < t}`` at the cocycle's complex energy.

    ``eta = Im E`` is taken as given; ``eta_compliant`` records whether it meets
    ``|eta| <= exp(-2m (kappa beta_n + 2 C delta))`` for the supplied constants.
    """
    eta = float(np.imag(coc.energy))
    fld = sample_field(coc, m, 0.0, n_theta, threads)
    bound = eta_smallness_bound(m, kappa, beta_n, C, delta)
    return ComplexDeviation(lower_deviation_measure(fld, t), float(t), eta, bound,
                            abs(eta) <= bound)


def fejer_weights(Q: int) -> np.ndarray:
    j = np.arange(-Q + 1, Q)
    return (Q - np.abs(j)) / (Q * Q)


def fejer_smooth(field: PhaseField, Q: int, freq: Frequency, mode: str = "exact",
                 threads=None) -> PhaseField:
    """``sum_{|j|<Q} (Q - |j|) / Q**2 * u(theta + j omega)`` on the field's grid.

    ``exact`` recomputes the transfer products at every shifted phase,
    ``spectral`` multiplies the grid spectrum by ``F_Q(k)``, ``nearest``
    resamples the stored values at the nearest grid point.  ``exact`` falls
    back to ``nearest`` when the field carries no cocycle.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    if mode not in FEJER_MODES:
        raise ValueError(f"mode must be one of {FEJER_MODES}")
    if Q == 1:
        return field.replace_values(field.values)
    n = field.n_theta
    if mode == "exact" and (field.cocycle is None
                            or (2 * Q - 1) * n * field.m > EXACT_BUDGET):
        mode = "nearest"
    if mode == "spectral":
        ks = np.fft.fftfreq(n, 1.0 / n).astype(np.int64)
        mult = fejer_multiplier(Q, ks, freq)
        return field.replace_values(np.fft.ifft(np.fft.fft(field.values) * mult).real)
    shifts = np.arange(-Q + 1, Q)
    if mode == "exact":
        coc = field.cocycle
        if coc.frequency.frac_bits != freq.frac_bits:
            raise ValueError("field was sampled at a different frequency")
        stack = log_norm_grid(coc, field.thetas, field.eps, field.m, starts=shifts,
                              threads=threads) / field.m
    else:
        idx = np.arange(n)
        offsets = np.array([round((int(s) * freq.frac_bits % 2 ** 128) * n / 2 ** 128)
                            for s in shifts])
        stack = field.values[(idx[None, :] + offsets[:, None]) % n]
    weighted = stack * fejer_weights(Q)[:, None]
    return field.replace_values(pairwise_sum(weighted, axis=0))


def match_scale(freq: Frequency, m: int, delta: float):
    """Index ``n`` with ``delta^-2 (beta_n + 1) q_n <= m < delta^-2 (beta_n + 1) q_{n+1}``.

    ``beta_n = log(q_{n+1}) / q_n`` is the finite-scale exponent.  Returns
    ``(n, q_n, q_{n+1}, beta_n, mismatch)``; when no index qualifies the one
    with the smallest relative violation is returned with ``mismatch`` set.
    """
    qs = [q for q in denominators(freq) if q > 0]
    best, best_gap = None, math.inf
    for i in range(len(qs) - 1):
        q, q1 = qs[i], qs[i + 1]
        beta = math.log(q1) / q
        scale = (beta + 1.0) / delta ** 2
        lo, hi = scale * q, scale * q1
        if lo <= m < hi:
            return i, q, q1, beta, False
        gap = (lo - m) / m if m < lo else (m - hi) / m + 1e-300
        if gap < best_gap:
            best, best_gap = (i, q, q1, beta, True), gap
        if lo > m:
            break
    return best


def band_masks(ks, delta, q_n, q_n1, cutoff):
    """Disjoint index sets for bands 2..6, assigned in that order of precedence.

    The printed ranges overlap for some ``(q_n, q_{n+1})``; each mode goes to
    the first band whose range contains it, so every nonzero mode below
    ``cutoff`` lands in exactly one band.
    """
    a = np.abs(ks)
    nz = a > 0
    ell_max = q_n1 // (4 * q_n)
    b2 = nz & (a <= delta ** -2)
    b3 = (a > delta ** -2) & (a < q_n)
    on_lattice = (a % q_n == 0)
    b4 = on_lattice & (a >= q_n) & (a <= ell_max * q_n)
    b5 = ~on_lattice & (a > q_n) & (a < (ell_max + 1) * q_n) if ell_max >= 1 else np.zeros_like(nz)
    b6 = (a >= q_n1 / 4.0) & (a < cutoff)
    masks, taken = [], np.zeros_like(nz)
    for b in (b2, b3, b4, b5, b6):
        b = b & ~taken
        masks.append(b)
        taken |= b
    return masks


def band_decomposition(field: PhaseField, freq: Frequency, delta: float,
                       mode: str = "exact", threads=None) -> BandDecomposition:
    """``u - mean = U_1 + ... + U_7`` with ``U_1 = u - u^(Q)``, ``Q = floor(delta m)``.

    Bands 2..6 are inverse transforms of ``u_hat(k) F_Q(k)`` on their index
    sets.  The upper edge ``exp(4 delta^4 m)`` usually lies beyond the grid, so
    ``U_7`` is taken as what remains of ``u - mean``; its L2 norm is reported.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    m, n_theta = field.m, field.n_theta
    n, q_n, q_n1, beta_n, mismatch = match_scale(freq, m, delta)
    Q = max(1, int(math.floor(delta * m)))
    expo = 4.0 * delta ** 4 * m
    cutoff = math.exp(expo) if expo < 700 else math.inf

    centred = field.values - field.mean
    smooth = fejer_smooth(field, Q, freq, mode, threads)
    u1 = field.values - smooth.values

    ks = np.fft.fftfreq(n_theta, 1.0 / n_theta).astype(np.int64)
    coef = np.fft.fft(field.values) * fejer_multiplier(Q, ks, freq)
    bands = [u1]
    for mask in band_masks(ks, delta, q_n, q_n1, cutoff):
        bands.append(np.fft.ifft(np.where(mask, coef, 0.0)).real)
    u7 = centred - np.sum(bands, axis=0)
    bands.append(u7)
    residual = float(np.max(np.abs(np.sum(bands, axis=0) - centred)))
    sups = tuple(float(np.max(np.abs(b))) for b in bands)
    u7_l2 = float(math.sqrt(pairwise_mean(u7 * u7)))
    return BandDecomposition(tuple(bands), sups, float(delta), Q, n, q_n, q_n1, beta_n,
                             cutoff, mismatch, residual, u7_l2, mode)


def decay_check(spectrum: FourierSpectrum, kappa: float, R: float, delta: float,
                k_range=(2, 200), C_default: float = DEFAULT_DECAY_C) -> DecayReport:
    """Fit ``C`` in ``|u_hat(k)| <= (kappa + delta) / |k| + C R^(-|k|/2)`` over ``k_range``.

    Both ``k`` and ``-k`` are scanned, up to the last mode the grid resolves.
    ``C_fit`` is the smallest constant that works; ``violations`` lists the
    ``k`` that fail with ``C_default``.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    k_lo, k_hi = k_range
    k_hi = min(k_hi, spectrum.n_theta // 2 - 1)
    c_fit = 0.0
    bad = []
    log_r = math.log(R)
    for k in range(k_lo, k_hi + 1):
        for kk in (k, -k):
            excess = abs(spectrum[kk]) - (kappa + delta) / k
            if excess <= 0:
                continue
            c_fit = max(c_fit, math.exp(math.log(excess) + 0.5 * k * log_r))
            if excess > C_default * math.exp(-0.5 * k * log_r):
                bad.append(kk)
    return DecayReport(c_fit, tuple(bad), C_default, kappa, delta, R)


def shift_defect(coc: Cocycle, m: int, eps: float = 0.0, n_theta: int = 2048,
                 threads=None) -> float:
    """``m * max_j |u(theta_j) - u(theta_j + omega)|`` with both sides computed exactly."""
    grid = log_norm_grid(coc, theta_grid(n_theta), eps, m, starts=(0, 1), threads=threads)
    return float(np.max(np.abs(grid[0] - grid[1])))


@dataclass(frozen=True)
class ShiftConstant:
    measured: float
    analytic_bound: float
    m: int

    @property
    def within_bound(self) -> bool:
        return self.measured <= 2.0 * self.analytic_bound


def measure_cv1(coc: Cocycle, m: int, eps: float = 0.0, n_theta: int = 2048,
                threads=None) -> ShiftConstant:
    """Empirical shift constant ``C_{v,1}`` next to the analytic value ``2 sup log||M_E||``.

    The analytic value covers ``sup log||M_E|| + sup log||M_E^{-1}||``; the two
    norms coincide for unimodular matrices.
    """
    measured = shift_defect(coc, m, eps, n_theta, threads)
    return ShiftConstant(measured, 2.0 * one_step_log_norm_bound(coc, eps), m)


def small_k_check(spectrum: FourierSpectrum, freq: Frequency, m: int, cv1: float, k_max: int = 20):
    """``|u_hat(k)| * 4 m ||k omega|| / C_{v,1}`` for ``1 <= |k| <= k_max``; each ratio should be <= 1."""
    out = {}
    for k in range(1, k_max + 1):
        for kk in (k, -k):
            out[kk] = abs(spectrum[kk]) * 4.0 * m * torus_norm(kk, freq) / cv1
    return out
