"""Continued fractions, torus norms and the Fejér kernel.

A frequency is stored canonically as its partial quotients together with a
128-bit fixed-point value ``frac_bits / 2**128``.  Multiples ``k * omega mod 1``
are always formed by one exact big-integer product and reduction, never by
accumulating floating-point increments along an orbit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import BudgetExceeded, PrecisionExhausted, RationalDetected

FRAC_BITS = 128
ONE = 1 << FRAC_BITS
# |k| * 2**-128 must stay below 2**-40
MAX_MULTIPLIER = 1 << (FRAC_BITS - 40)
QUOTIENT_LIMIT = 1 << 63
MIN_DEPTH = 48
DEFAULT_DIGIT_BUDGET = 5000

# complete quotients (a + sqrt(b)) / c of periodic tails
GOLDEN_TAIL = (1, 5, 2)
SILVER_TAIL = (1, 2, 1)


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int


@dataclass(frozen=True)
class BetaSequence:
    entries: tuple
    beta_limsup_estimate: float

    def __getitem__(self, n):
        for idx, value in self.entries:
            if idx == n:
                return value
        raise KeyError(n)


@dataclass(frozen=True)
class Frequency:
    """Irrational rotation number.

    Parameters
    ----------
    quotients : tuple of int
        Partial quotients ``(a_1, a_2, ...)`` with ``omega = [a_1, a_2, ...]``.
    frac_bits : int
        ``floor(omega * 2**128)``.
    float_hint : float, optional
        The double the frequency was ingested from, if any.
    """

    quotients: tuple
    frac_bits: int
    float_hint: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.quotients:
            raise ValueError("at least one partial quotient is required")
        if any(int(a) < 1 for a in self.quotients):
            raise ValueError("partial quotients must be >= 1")
        if not 0 < self.frac_bits < ONE:
            raise ValueError("frac_bits must lie in (0, 2**128)")

    @property
    def value(self) -> float:
        return self.frac_bits / ONE

    @classmethod
    def from_quotients(cls, quotients, tail=GOLDEN_TAIL, min_depth=MIN_DEPTH,
                       float_hint=None):
        """Build the irrational ``[a_1, ..., a_N, x]`` with ``x`` a quadratic tail.

        The default tail is the golden complete quotient, i.e. the listed
        quotients are followed by ones.  Those ones are materialised up to
        ``min_depth`` so convergents are available beyond the user prefix.
        """
        quotients = [int(a) for a in quotients]
        if not quotients:
            raise ValueError("empty quotient list")
        if any(a < 1 for a in quotients):
            raise ValueError("partial quotients must be >= 1")
        if tail == GOLDEN_TAIL and len(quotients) < min_depth:
            quotients = quotients + [1] * (min_depth - len(quotients))
        return cls(tuple(quotients), _value_with_tail(quotients, tail), float_hint)

    @classmethod
    def golden(cls, depth=64):
        return cls.from_quotients([1] * depth)

    @classmethod
    def silver(cls, depth=64):
        """``sqrt(2) - 1 = [2, 2, 2, ...]``."""
        return cls.from_quotients([2] * depth, tail=SILVER_TAIL)

    @classmethod
    def from_float(cls, x, depth=40):
        quotients = expand_continued_fraction(x, depth)
        return cls.from_quotients(quotients, float_hint=float(x))

    def to_json(self) -> dict:
        out = {"quotients": list(self.quotients)}
        if self.float_hint is not None:
            out["float_hint"] = self.float_hint
        return out

    @classmethod
    def from_json(cls, obj):
        return cls.from_quotients(obj["quotients"], float_hint=obj.get("float_hint"))


def _value_with_tail(quotients, tail):
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    a0, b0, c0 = tail
    # 64 guard bits beyond the size of the denominators
    scale_bits = FRAC_BITS + 2 * q.bit_length() + 64
    scale = 1 << scale_bits
    x = (a0 * scale + math.isqrt(b0 * scale * scale)) // c0
    num = p * x + p_prev * scale
    den = q * x + q_prev * scale
    return (num << FRAC_BITS) // den


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x, ONE)
    return Fraction(str(x))


def expand_continued_fraction(x, depth, uncertainty=None):
    """Partial quotients of ``x`` in (0, 1).

    ``x`` may be a float, a :class:`fractions.Fraction`, or an int holding a
    128-bit fixed-point value.  Expansion stops early once the propagated
    input uncertainty makes the next quotient ambiguous.

    Raises
    ------
    RationalDetected
        A remainder is exactly zero while still within precision, or a
        quotient exceeds ``2**63``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rem = _as_fraction(x)
    if not 0 < rem < 1:
        raise ValueError("x must lie in (0, 1)")
    if uncertainty is None:
        if isinstance(x, float):
            uncertainty = Fraction(math.ulp(x))
        else:
            uncertainty = Fraction(1, ONE)
    # float upper bound; a Fraction here would square its denominator every step
    err = float(uncertainty)
    out = []
    while len(out) < depth:
        if err >= 2.0 ** -5:
            break
        inv = 1 / rem
        a = math.floor(inv)
        if a > QUOTIENT_LIMIT:
            raise RationalDetected(f"quotient {a} exceeds 2**63 at depth {len(out) + 1}")
        nxt = inv - a
        if nxt == 0:
            raise RationalDetected(f"expansion terminates at depth {len(out) + 1}")
        lo = float(rem) - err
        if lo <= 0:
            break
        out.append(a)
        err = 1.01 * err / lo ** 2
        rem = nxt
    return out


def convergents(freq: Frequency, count: int) -> list[Convergent]:
    if count > len(freq.quotients):
        raise ValueError(f"only {len(freq.quotients)} quotients available")
    out = []
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for n, a in enumerate(freq.quotients[:count], start=1):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(Convergent(n, p, q))
    return out


def denominators(freq: Frequency, count: int | None = None) -> list[int]:
    count = len(freq.quotients) if count is None else count
    return [c.q for c in convergents(freq, count)]


def _check_multiplier(k):
    if abs(k) >= MAX_MULTIPLIER:
        raise PrecisionExhausted(f"|k| = {abs(k)} exceeds the 128-bit fixed-point guard")


def frac_fixed(k: int, freq: Frequency) -> int:
    """``(k * omega mod 1) * 2**128`` as an exact integer."""
    _check_multiplier(k)
    return (k * freq.frac_bits) % ONE


def torus_norm_fixed(k: int, freq: Frequency) -> int:
    r = frac_fixed(k, freq)
    return min(r, ONE - r)


def torus_norm(k: int, freq: Frequency) -> float:
    """``dist(k * omega, Z)``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    return torus_norm_fixed(k, freq) / ONE


def orbit_phases(freq: Frequency, start: int, count: int) -> np.ndarray:
    """``j * omega mod 1`` for ``j = start, ..., start + count - 1`` as doubles."""
    _check_multiplier(start)
    _check_multiplier(start + count)
    w = freq.frac_bits
    return np.array([((j * w) % ONE) / ONE for j in range(start, start + count)],
                    dtype=np.float64)


def beta_sequence(freq: Frequency, count: int | None = None) -> BetaSequence:
    qs = denominators(freq, count)
    if len(qs) < 2:
        raise ValueError("need at least two convergents")
    entries = tuple((n, math.log(qs[n]) / qs[n - 1]) for n in range(1, len(qs)))
    tail = [b for _, b in entries[len(entries) // 2:]]
    return BetaSequence(entries, max(tail))


def make_liouville(target_beta: float, levels: int, seed=(2,), quotient_cap=None,
                   digit_budget=DEFAULT_DIGIT_BUDGET) -> Frequency:
    """Frequency whose finite-scale exponents ``log(q_{n+1}) / q_n`` track ``target_beta``.

    Starting from ``seed``, quotients ``a_{n+1} = ceil(exp(target_beta * q_n) / q_n)``
    are appended until ``levels`` denominators exist.
    """
    if not 0 < target_beta <= 4:
        raise ValueError("target_beta must lie in (0, 4]")
    quotients = [int(a) for a in seed]
    if levels < len(quotients):
        raise ValueError("levels must be at least the seed length")
    qs = denominators(Frequency.from_quotients(quotients, min_depth=0), len(quotients))
    q_prev = qs[-2] if len(qs) > 1 else 1
    q = qs[-1]
    while len(quotients) < levels:
        if quotient_cap is not None and target_beta * q > math.log(float(quotient_cap) * q) + 1:
            a = int(quotient_cap)
            quotients.append(a)
            q_prev, q = q, a * q + q_prev
            continue
        est_digits = (target_beta * q) / math.log(10) + 2 if q.bit_length() < 1000 else math.inf
        if est_digits > digit_budget:
            raise BudgetExceeded(
                f"q_{len(quotients) + 1} needs ~{est_digits:.0f} digits (> {digit_budget})")
        with mpmath.workdps(int(est_digits) + 30):
            a = int(mpmath.ceil(mpmath.exp(mpmath.mpf(target_beta) * q) / q))
        if quotient_cap is not None:
            a = min(a, int(quotient_cap))
        a = max(a, 1)
        quotients.append(a)
        q_prev, q = q, a * q + q_prev
    return Frequency.from_quotients(quotients)


def fejer(Q: int, k: int, freq: Frequency, return_imag=False):
    """``F_Q(k) = sum_{|j|<Q} (Q - |j|) / Q**2 * exp(2 pi i k j omega)`` by direct summation."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    _check_multiplier(k * Q)
    re = 1.0 / Q
    im = 0.0
    for j in range(1, Q):
        weight = (Q - j) / (Q * Q)
        r_pos = frac_fixed(k * j, freq)
        r_neg = frac_fixed(-k * j, freq)
        re += weight * (math.cos(2 * math.pi * r_pos / ONE) + math.cos(2 * math.pi * r_neg / ONE))
        im += weight * (math.sin(2 * math.pi * r_pos / ONE) + math.sin(2 * math.pi * r_neg / ONE))
    if return_imag:
        return re, im
    return re


def fejer_multiplier(Q: int, ks, freq: Frequency) -> np.ndarray:
    """Vectorised ``F_Q(k)`` through ``sin(pi Q x)**2 / (Q sin(pi x))**2``, ``x = k omega``."""
    ks = np.asarray(ks, dtype=np.int64)
    x = np.array([torus_norm_fixed(int(k), freq) / ONE for k in ks])
    out = np.ones_like(x)
    nz = x != 0.0
    s = np.sin(np.pi * x[nz])
    out[nz] = (np.sin(np.pi * Q * x[nz]) / (Q * s)) ** 2
    return out
