"""Potentials, Schrödinger transfer matrices and Dirichlet determinants.

The one-step matrix is ``[[E - v(theta), -1], [1, 0]]`` and the m-step
product runs along the orbit ``theta, theta + omega, ..., theta + (m-1) omega``.
All norms are operator norms (largest singular value).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .arithmetic import Frequency, orbit_phases
from .reduction import map_row_chunks

RENORM = 2.0 ** 512
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Potential:
    """Real-analytic potential ``v(theta) = sum_k c_k exp(2 pi i k theta)``.

    ``coeffs`` holds ``(k, c_k)`` pairs for ``-degree <= k <= degree``; the
    coefficients must satisfy ``c_{-k} = conj(c_k)``.
    """

    coeffs: tuple
    name: str = "custom"

    def __post_init__(self):
        table = dict(self.coeffs)
        for k, c in table.items():
            partner = table.get(-k, 0.0)
            if abs(complex(partner) - complex(c).conjugate()) > 1e-14 * (1 + abs(c)):
                raise ValueError(f"coefficient {k} breaks Hermitian symmetry")

    @classmethod
    def from_mapping(cls, mapping, name="custom"):
        """Build from ``{k: c_k}``; missing negative modes are filled by conjugation."""
        table = {}
        for k, c in mapping.items():
            k = int(k)
            table[k] = complex(c)
            if -k not in mapping:
                table[-k] = complex(c).conjugate()
        return cls(tuple(sorted(table.items())), name)

    @classmethod
    def amo(cls, lam):
        """Almost Mathieu potential ``2 lam cos(2 pi theta)``."""
        return cls.from_mapping({1: lam}, name=f"amo:lambda={lam:g}")

    @classmethod
    def zero(cls):
        return cls(((0, 0j),), name="zero")

    @property
    def degree(self) -> int:
        return max((abs(k) for k, c in self.coeffs if c != 0), default=0)

    def sup_bound(self, eps=0.0) -> float:
        """``sum_k |c_k| exp(2 pi |k eps|)``, a bound for ``|v|`` on the strip ``|Im| <= eps``."""
        return sum(abs(c) * math.exp(TWO_PI * abs(k * eps)) for k, c in self.coeffs)

    def evaluate(self, theta, eps=0.0):
        """Vectorised ``v(theta + i eps)``."""
        theta = np.asarray(theta, dtype=np.float64)
        out = np.zeros(theta.shape, dtype=np.complex128)
        for k, c in self.coeffs:
            if c == 0:
                continue
            if k == 0:
                out += c
            else:
                out += (c * math.exp(-TWO_PI * k * eps)) * np.exp(1j * TWO_PI * k * theta)
        return out

    def to_json(self) -> dict:
        return {"coeffs": [{"k": k, "re": c.real, "im": c.imag} for k, c in self.coeffs],
                "name": self.name}

    @classmethod
    def from_json(cls, obj):
        coeffs = tuple(sorted((int(e["k"]), complex(e["re"], e.get("im", 0.0)))
                              for e in obj["coeffs"]))
        return cls(coeffs, obj.get("name", "custom"))


@dataclass(frozen=True)
class Cocycle:
    potential: Potential
    energy: complex
    frequency: Frequency

    def with_energy(self, energy) -> "Cocycle":
        return Cocycle(self.potential, complex(energy), self.frequency)


@dataclass(frozen=True)
class TransferProduct:
    """Overflow-safe m-step product.

    ``normalized_matrix * exp(log_norm)`` is the product.  ``log_abs_det`` is
    ``log |det M_m|`` tracked through a QR (Gram-Schmidt) factorisation at
    every step, which stays accurate when the product is numerically rank one.
    """

    log_norm: float
    normalized_matrix: np.ndarray
    steps: int
    log_scale: float
    log_abs_det: float

    @property
    def exponent(self) -> float:
        return self.log_norm / self.steps

    @property
    def log_abs_det_normalized(self) -> float:
        """``log |det normalized_matrix|``; far below double range once ``log_norm`` is large."""
        return self.log_abs_det - 2.0 * self.log_norm

    def det_reconstruction(self) -> float:
        """``|det normalized_matrix| * exp(2 log_norm)``, i.e. ``|det M_m|``."""
        return math.exp(self.log_abs_det_normalized + 2.0 * self.log_norm)

    def matrix(self) -> np.ndarray:
        """The raw product; overflows for large ``log_norm``."""
        return self.normalized_matrix * math.exp(self.log_norm)


def eval_potential(pot: Potential, theta: float, eps: float = 0.0) -> complex:
    if abs(eps) > 1:
        raise ValueError("|eps| must be <= 1")
    return complex(pot.evaluate(np.array(theta), eps))


def opnorm(mat) -> float:
    """Largest singular value of a 2x2 complex matrix, closed form, overflow-safe."""
    a, b, c, d = (complex(x) for x in np.asarray(mat).ravel())
    s = max(abs(a.real), abs(a.imag), abs(b.real), abs(b.imag),
            abs(c.real), abs(c.imag), abs(d.real), abs(d.imag))
    if s == 0.0:
        return 0.0
    a, b, c, d = a / s, b / s, c / s, d / s
    fro = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det2 = abs(a * d - b * c) ** 2
    return s * math.sqrt(0.5 * (fro + math.sqrt(max(fro * fro - 4.0 * det2, 0.0))))


def transfer_step(coc: Cocycle, theta: float, eps: float = 0.0) -> np.ndarray:
    t = coc.energy - eval_potential(coc.potential, theta, eps)
    return np.array([[t, -1.0], [1.0, 0.0]], dtype=np.complex128)


def orbit_potential(coc: Cocycle, theta, eps, start, count):
    """``v(theta + j omega + i eps)`` for ``j`` in ``[start, start + count)``; rows follow ``theta``."""
    phases = orbit_phases(coc.frequency, start, count)
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    # exp(2 pi i k (theta + phi)) as an outer product of the two factors
    out = np.zeros((len(theta), count), dtype=np.complex128)
    for k, c in coc.potential.coeffs:
        if c == 0:
            continue
        if k == 0:
            out += c
            continue
        row = (c * math.exp(-TWO_PI * k * eps)) * np.exp(1j * TWO_PI * k * theta)
        out += np.multiply.outer(row, np.exp(1j * TWO_PI * k * phases))
    return out


def transfer_product(coc: Cocycle, theta: float, eps: float, m: int) -> TransferProduct:
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = orbit_potential(coc, theta, eps, 0, m)[0]
    E = complex(coc.energy)
    a, b, c, d = 1 + 0j, 0j, 0j, 1 + 0j
    acc = 0.0
    # unitary factor of the running QR factorisation
    qa, qb, qc, qd = 1 + 0j, 0j, 0j, 1 + 0j
    log_det = 0.0
    for v in vals:
        t = E - v
        a, b, c, d = t * a - c, t * b - d, a, b
        if abs(a.real) + abs(a.imag) + abs(b.real) + abs(b.imag) > RENORM:
            nrm = opnorm(((a, b), (c, d)))
            a, b, c, d = a / nrm, b / nrm, c / nrm, d / nrm
            acc += math.log(nrm)
        x1a, x1c = t * qa - qc, qa
        x2b, x2d = t * qb - qd, qb
        r11 = math.hypot(abs(x1a), abs(x1c))
        q1a, q1c = x1a / r11, x1c / r11
        r12 = q1a.conjugate() * x2b + q1c.conjugate() * x2d
        ya, yc = x2b - r12 * q1a, x2d - r12 * q1c
        r22 = math.hypot(abs(ya), abs(yc))
        qa, qc, qb, qd = q1a, q1c, ya / r22, yc / r22
        log_det += math.log(r11) + math.log(r22)
    nrm = opnorm(((a, b), (c, d)))
    normalized = np.array([[a, b], [c, d]], dtype=np.complex128) / nrm
    return TransferProduct(acc + math.log(nrm), normalized, m, acc, log_det)


def log_norm_grid(coc: Cocycle, thetas, eps: float, m: int, starts=(0,), threads=None):
    """``log ||M_m(theta + s omega + i eps)||`` for every ``theta`` and start ``s``.

    Returns shape ``(len(starts), len(thetas))``.  Row blocks may be handed to
    worker threads; results do not depend on the thread count.
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.intp)
    s0 = int(starts.min())
    width = int(starts.max()) - s0 + m
    vals = orbit_potential(coc, thetas, eps, s0, width)
    vre = np.ascontiguousarray(vals.real)
    vim = np.ascontiguousarray(vals.imag)
    rel = np.ascontiguousarray(starts - s0)
    E = complex(coc.energy)

    def block(lo, hi):
        return kernels.grid_log_norms(vre[lo:hi], vim[lo:hi], E.real, E.imag, m, rel)

    return map_row_chunks(block, len(thetas), threads)


def three_term_log_det(diag, z):
    """``det(z - H)`` for the unit-hopping Jacobi matrix with diagonal ``diag``.

    Uses ``P_j = (z - d_{j-1}) P_{j-1} - P_{j-2}`` with joint rescaling of the
    pair ``(P_{j-1}, P_j)``.  Returns ``(log |P|, P / |P|)``; an exactly
    vanishing determinant gives ``(-inf, 1)``.
    """
    z = complex(z)
    p_prev, p = 0j, 1 + 0j
    acc = 0.0
    for dj in diag:
        p_prev, p = p, (z - dj) * p - p_prev
        mag = abs(p)
        if mag > RENORM:
            p_prev, p = p_prev / mag, p / mag
            acc += math.log(mag)
    if p == 0:
        return -math.inf, 1 + 0j
    return acc + math.log(abs(p)), p / abs(p)


def dirichlet_determinant(coc: Cocycle, theta: float, m: int, eps: float = 0.0):
    """``P_m(theta)``, the determinant of ``E`` minus the Dirichlet restriction to ``[0, m-1]``.

    This is the sign convention fixed by the three-term recurrence, under
    which the top-left entry of ``M_m(theta)`` equals ``P_m(theta)``.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 0.0, 1 + 0j
    diag = orbit_potential(coc, theta, eps, 0, m)[0]
    return three_term_log_det(diag, coc.energy)


def one_step_log_norm_bound(coc: Cocycle, eps: float = 0.0) -> float:
    """Analytic bound on ``sup_theta log ||M_E(theta + i eps)||``.

    ``[[t, -1], [1, 0]]`` has norm ``(|t| + sqrt(|t|**2 + 4)) / 2``, increasing in ``|t|``.
    """
    t = abs(coc.energy) + coc.potential.sup_bound(eps)
    return math.log(0.5 * (t + math.sqrt(t * t + 4.0)))


def shift_constant(coc: Cocycle, eps: float = 0.0, n_grid: int = 2048) -> float:
    """``C_v = 2 sup log||M_E|| + 2 sup log||M_E^{-1}||`` over a phase grid.

    For SL(2) matrices ``||M^{-1}|| = ||M||``.
    """
    thetas = np.arange(n_grid) / n_grid
    t = np.abs(coc.energy - coc.potential.evaluate(thetas, eps))
    sup = float(np.max(np.log(0.5 * (t + np.sqrt(t * t + 4.0)))))
    return 4.0 * sup



def dirichlet_values(diag, z) -> np.ndarray:
    """Raw ``P_0 = 1, P_1, ..., P_n`` for the leading blocks; no rescaling, so only for short blocks."""
    z = complex(z)
    out = np.empty(len(diag) + 1, dtype=np.complex128)
    p_prev, p = 0j, 1 + 0j
    out[0] = p
    for j, dj in enumerate(diag, start=1):
        p_prev, p = p, (z - dj) * p - p_prev
        out[j] = p
    return out
