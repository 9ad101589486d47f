"""Finite-volume Dirichlet spectra, the IDS, Thouless formula and resolvent diagonals.

Eigenvalue counting is exact Sturm counting; eigenvalues themselves are
obtained by bisection on the count.  Determinants follow the ``det(z - H)``
convention of :func:`qps.cocycle.three_term_log_det`, so the resolvent
``G = (H - z)^{-1}`` picks up a minus sign in every Cramer ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .arithmetic import Frequency, orbit_phases
from .cocycle import Potential, RENORM
from .errors import ResolutionFloor, TooCloseToSpectrum
from .reduction import pairwise_sum

EIG_TOL = 1e-10
DEFAULT_EXCLUSION = 1e-6


@dataclass(frozen=True)
class FiniteOperator:
    """Dirichlet restriction of the operator to ``[0, N-1]`` with unit hopping."""

    diagonal: np.ndarray
    theta: float = 0.0
    provenance: str = ""

    def __post_init__(self):
        diag = np.array(self.diagonal, dtype=np.float64)
        diag.setflags(write=False)
        object.__setattr__(self, "diagonal", diag)

    @property
    def size(self) -> int:
        return len(self.diagonal)

    @classmethod
    def from_potential(cls, potential: Potential, freq: Frequency, theta: float, N: int):
        phases = orbit_phases(freq, 0, N)
        diag = potential.evaluate(theta + phases).real
        return cls(diag, theta, f"{potential.name};omega={freq.value:.15g}")

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return bisect_eigenvalues(self.diagonal)

    def dense(self, z=0.0) -> np.ndarray:
        """``H - z`` as a dense matrix."""
        n = self.size
        mat = np.diag(self.diagonal.astype(np.complex128) - z)
        idx = np.arange(n - 1)
        mat[idx, idx + 1] = 1.0
        mat[idx + 1, idx] = 1.0
        return mat


@dataclass(frozen=True)
class IDSCurve:
    energies: np.ndarray
    counts: np.ndarray
    N: int
    operator: FiniteOperator | None = field(default=None, repr=False, compare=False)

    @property
    def values(self) -> np.ndarray:
        return self.counts / self.N


@dataclass(frozen=True)
class HolderFit:
    etas: tuple
    increments: tuple
    exponent: float
    r_squared: float
    N: int
    energy: float

    def to_json(self) -> dict:
        return {"E": self.energy, "etas": list(self.etas),
                "increments": list(self.increments), "exponent": self.exponent,
                "r_squared": self.r_squared}


def eigen_counts(op: FiniteOperator, energies) -> np.ndarray:
    """Number of eigenvalues strictly below each energy."""
    energies = np.ascontiguousarray(np.atleast_1d(energies), dtype=np.float64)
    return kernels.sturm_counts(np.ascontiguousarray(op.diagonal), energies)


def eigen_count(op: FiniteOperator, E: float) -> int:
    return int(eigen_counts(op, [E])[0])


def bisect_eigenvalues(diag, tol=EIG_TOL) -> np.ndarray:
    """All eigenvalues by simultaneous bisection on the Sturm count.

    The ``j``-th eigenvalue is the infimum of energies with more than ``j``
    eigenvalues strictly below; brackets shrink until their width is at most
    ``tol * (1 + |E|)``.
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    n = len(diag)
    lo = np.full(n, diag.min() - 2.0 - 1e-9)
    hi = np.full(n, diag.max() + 2.0 + 1e-9)
    target = np.arange(n)
    while True:
        active = (hi - lo) > tol * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
        if not active.any():
            break
        mid = 0.5 * (lo[active] + hi[active])
        above = kernels.sturm_counts(diag, np.ascontiguousarray(mid)) > target[active]
        idx = np.nonzero(active)[0]
        hi[idx[above]] = mid[above]
        lo[idx[~above]] = mid[~above]
    return 0.5 * (lo + hi)


def ids_curve(coc, theta: float, N: int, energy_grid) -> IDSCurve:
    """Counting function of the Dirichlet restriction at phase ``theta`` on a sorted grid.

    The cocycle energy is ignored; only its potential and frequency matter.
    """
    op = FiniteOperator.from_potential(coc.potential, coc.frequency, theta, N)
    return operator_ids_curve(op, energy_grid)


def operator_ids_curve(op: FiniteOperator, energy_grid) -> IDSCurve:
    grid = np.asarray(energy_grid, dtype=np.float64)
    if np.any(np.diff(grid) < 0):
        raise ValueError("energy grid must be sorted")
    return IDSCurve(grid, eigen_counts(op, grid), op.size, op)


def thouless_lyapunov(curve, E: float, exclusion: float = DEFAULT_EXCLUSION) -> float:
    """``(1/N) sum_j log|E - E_j|`` over the Dirichlet eigenvalues.

    Eigenvalues within ``exclusion`` of ``E`` are replaced by the mean of
    ``log|x|`` over ``|x| < exclusion``, i.e. ``log(exclusion) - 1``, which is
    the integrable contribution of a locally flat density there.
    """
    op = curve.operator if isinstance(curve, IDSCurve) else curve
    if op is None:
        raise ValueError("curve carries no operator to extract eigenvalues from")
    if exclusion <= 0:
        raise ValueError("exclusion must be positive")
    dist = np.abs(float(E) - op.eigenvalues)
    near = dist < exclusion
    n_near = int(near.sum())
    if n_near > 0.05 * op.size:
        raise TooCloseToSpectrum(f"{n_near} of {op.size} eigenvalues within {exclusion:g} of E")
    total = pairwise_sum(np.log(dist[~near]))
    total += n_near * (math.log(exclusion) - 1.0)
    return float(total / op.size)


def _prefix_log_dets(diag, z):
    """``log|P_j|`` and phases for the leading blocks ``[0, j-1]``, ``j = 0..n``."""
    n = len(diag)
    logs = np.empty(n + 1)
    phases = np.empty(n + 1, dtype=np.complex128)
    logs[0], phases[0] = 0.0, 1.0
    p_prev, p, acc = 0j, 1 + 0j, 0.0
    for j, dj in enumerate(diag, start=1):
        p_prev, p = p, (z - dj) * p - p_prev
        mag = abs(p)
        if mag > RENORM or (0 < mag < 1.0 / RENORM):
            p_prev, p = p_prev / mag, p / mag
            acc += math.log(mag)
            mag = 1.0
        logs[j] = acc + math.log(mag) if mag > 0 else -math.inf
        phases[j] = p / mag if mag > 0 else 1.0
    return logs, phases


class _Cramer:
    """Cramer-rule access to ``(H - z)^{-1}`` restricted to a window ``[a, b]``."""

    def __init__(self, diag, z, a, b):
        block = np.asarray(diag[a:b + 1])
        self.a, self.b = a, b
        self.left = _prefix_log_dets(block, z)
        self.right = _prefix_log_dets(block[::-1], z)

    def _det(self, lo, hi):
        """``det(z - H)`` on ``[lo, hi]`` when it touches an end of the window."""
        if hi < lo:
            return 0.0, 1 + 0j
        if lo == self.a:
            j = hi - self.a + 1
            return self.left[0][j], self.left[1][j]
        if hi == self.b:
            j = self.b - lo + 1
            return self.right[0][j], self.right[1][j]
        raise ValueError("interior block determinant not tracked")

    def entry(self, i, j):
        """``G(i, j) = -P[a, i-1] P[j+1, b] / P[a, b]`` for ``i <= j``."""
        if i > j:
            i, j = j, i
        l1, p1 = self._det(self.a, i - 1)
        l2, p2 = self._det(j + 1, self.b)
        l0, p0 = self._det(self.a, self.b)
        return -math.exp(l1 + l2 - l0) * p1 * p2 / p0


def green_diagonal(op: FiniteOperator, z: complex, k: int) -> complex:
    """``G(k, k) = <delta_k, (H - z)^{-1} delta_k>`` by Cramer's rule."""
    if not 0 <= k < op.size:
        raise IndexError(k)
    return complex(_Cramer(op.diagonal, complex(z), 0, op.size - 1).entry(k, k))


def green_diagonals(op: FiniteOperator, z: complex) -> np.ndarray:
    """All diagonal resolvent entries from one forward and one backward sweep."""
    z = complex(z)
    n = op.size
    ll, lp = _prefix_log_dets(op.diagonal, z)
    rl, rp = _prefix_log_dets(op.diagonal[::-1], z)
    k = np.arange(n)
    mag = np.exp(ll[k] + rl[n - 1 - k] - ll[n])
    return -mag * lp[k] * rp[n - 1 - k] / lp[n]


def green_trace_bound(op: FiniteOperator, E: float, eta: float):
    """``d_N`` on ``[E - eta, E + eta)`` and its bound ``(2 eta / N) sum_k Im G(k, k)``."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    counts = eigen_counts(op, [E - eta, E + eta])
    d_n = (int(counts[1]) - int(counts[0])) / op.size
    im = green_diagonals(op, complex(E, eta)).imag
    bound = 2.0 * eta * float(pairwise_sum(im)) / op.size
    return d_n, bound


def resolvent_decoupling_check(op: FiniteOperator, z: complex, k: int, a: int, b: int,
                               oracle: str = "cramer") -> float:
    """``|G(k,k) - decoupled expression|`` for the window ``[a, b]`` around ``k``.

    The decoupled expression is the block entry ``G_[a,b](k,k)`` minus the two
    boundary couplings ``G(k, a-1) G_[a,b](a,k)`` and ``G(k, b+1) G_[a,b](b,k)``;
    block entries always come from Cramer's rule.  With ``oracle="cramer"``
    the full-interval entries do too, so ``a = 0, b = N-1`` reproduces the
    direct value exactly.  ``oracle="dense"`` takes them from a dense inverse.
    """
    n = op.size
    if not (0 <= a <= k <= b < n):
        raise ValueError("need 0 <= a <= k <= b < N")
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("Im z must be positive")
    cramer = _Cramer(op.diagonal, z, 0, n - 1)
    if oracle == "dense":
        inv = np.linalg.inv(op.dense(z))
        full = lambda i, j: inv[i, j]
    elif oracle == "cramer":
        full = cramer.entry
    else:
        raise ValueError("oracle must be 'cramer' or 'dense'")
    direct = full(k, k)
    block = cramer if (a, b) == (0, n - 1) else _Cramer(op.diagonal, z, a, b)
    decoupled = block.entry(k, k)
    if a > 0:
        decoupled -= full(k, a - 1) * block.entry(a, k)
    if b < n - 1:
        decoupled -= full(k, b + 1) * block.entry(b, k)
    return float(abs(direct - decoupled))


def dyadic_etas(start=1e-2, count=11, floor=None):
    """``start / 2**k`` for ``k = 0..count-1``, truncated at ``floor``."""
    etas = [start / 2 ** k for k in range(count)]
    if floor is not None:
        etas = [e for e in etas if e >= floor]
    return etas


def holder_fit(potential: Potential, freq: Frequency, theta: float, N: int, E: float,
               eta_list) -> HolderFit:
    """Log-log slope of the eigenvalue-count increment against the window half-width."""
    etas = [float(e) for e in eta_list]
    if len(etas) < 2:
        raise ValueError("need at least two etas")
    for e1, e2 in zip(etas, etas[1:]):
        if not math.isclose(e1, 2 * e2, rel_tol=1e-12):
            raise ValueError("eta_list must be dyadic and decreasing")
    if min(etas) < 4.0 / N:
        raise ValueError("etas below 4/N are below the resolution floor")
    op = FiniteOperator.from_potential(potential, freq, theta, N)
    grid = np.array([E - e for e in etas] + [E + e for e in etas])
    counts = eigen_counts(op, grid)
    n = len(etas)
    inc = (counts[n:] - counts[:n]) / N
    if np.sum(inc < 2.0 / N) > n / 2:
        raise ResolutionFloor(f"{int(np.sum(inc < 2.0 / N))} of {n} increments below 2/N")
    x = np.log(etas)
    y = np.log(np.maximum(inc, 1.0 / N))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return HolderFit(tuple(etas), tuple(float(v) for v in inc), float(slope), r2, N, float(E))
