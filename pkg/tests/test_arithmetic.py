import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from qps.arithmetic import (ONE, Frequency, beta_sequence, convergents, denominators,
                            expand_continued_fraction, fejer, fejer_multiplier, frac_fixed,
                            make_liouville, torus_norm, torus_norm_fixed)
from qps.errors import BudgetExceeded, PrecisionExhausted, RationalDetected


def test_expand_golden():
    assert expand_continued_fraction((math.sqrt(5) - 1) / 2, 10) == [1] * 10


def test_expand_silver():
    assert expand_continued_fraction(math.sqrt(2) - 1, 5) == [2] * 5


def test_expand_dyadic_rational():
    with pytest.raises(RationalDetected):
        expand_continued_fraction(0.15625, 10)


def test_expand_roundtrip():
    x = 0.7236067977
    qs = expand_continued_fraction(x, 40)
    f = Frequency.from_quotients(qs, float_hint=x)
    assert abs(f.value - x) < 16 * math.ulp(x)


def test_expand_roundtrip_random():
    rng = np.random.default_rng(11)
    for x in rng.uniform(0.01, 0.99, 300):
        x = float(x)
        assert abs(Frequency.from_float(x).value - x) < 1e-12


def test_silver_value():
    with mpmath.workdps(40):
        exact = mpmath.sqrt(2) - 1
        assert abs(Frequency.silver().value - exact) <= math.ulp(0.4)


def test_frac_bits_golden_exact():
    with mpmath.workdps(60):
        exact = int(mpmath.floor((mpmath.sqrt(5) - 1) / 2 * mpmath.mpf(2) ** 128))
    assert abs(Frequency.golden().frac_bits - exact) <= 1


def test_convergents_golden(golden):
    assert [c.q for c in convergents(golden, 5)] == [1, 2, 3, 5, 8]


def test_convergents_quotients():
    f = Frequency.from_quotients([2, 2, 2, 2])
    assert [c.q for c in convergents(f, 4)] == [2, 5, 12, 29]


def test_convergents_against_fraction_oracle():
    qs = [3, 1, 4, 1, 5, 9, 2, 6]
    f = Frequency.from_quotients(qs)
    for n, c in enumerate(convergents(f, len(qs)), start=1):
        x = Fraction(0)
        for a in reversed(qs[:n]):
            x = 1 / (a + x)
        assert Fraction(c.p, c.q) == x
        assert math.gcd(c.p, c.q) == 1


def test_convergent_determinant(golden):
    cs = convergents(Frequency.from_quotients([1, 3, 2, 7, 1, 1, 4]), 30)
    for c0, c1 in zip(cs, cs[1:]):
        assert abs(c1.p * c0.q - c0.p * c1.q) == 1


def test_convergents_count_guard(golden):
    with pytest.raises(ValueError):
        convergents(golden, len(golden.quotients) + 1)


def test_torus_norm_golden():
    assert abs(torus_norm(1, Frequency.golden()) - (3 - math.sqrt(5)) / 2) < 1e-16


def test_torus_norm_symmetric(golden):
    for k in (1, 7, 1000, 123456789):
        assert torus_norm_fixed(k, golden) == torus_norm_fixed(-k, golden)


def test_torus_norm_guard(golden):
    with pytest.raises(PrecisionExhausted):
        torus_norm(2 ** 100, golden)


def test_torus_norm_at_convergents():
    f = Frequency.from_quotients([1, 2, 1, 3, 2, 1, 1, 5])
    qs = denominators(f, 12)
    for q, q1 in zip(qs, qs[1:]):
        assert 1 / (2 * q1) < torus_norm(q, f) < 1 / q1


def test_best_approximation_exhaustive():
    f = Frequency.from_quotients([2, 1, 3, 1, 1, 2])
    qs = denominators(f, 14)
    for q, q1 in zip(qs, qs[1:]):
        if q1 > 2000:
            break
        best = min(torus_norm_fixed(j, f) for j in range(1, q1))
        assert torus_norm_fixed(q, f) == best


def test_beta_golden(golden):
    beta = beta_sequence(golden, 12)
    qs = denominators(golden, 12)
    n = qs.index(13) + 1
    assert beta[n] == pytest.approx(math.log(21) / 13, abs=1e-15)
    assert abs(beta[n] - 0.2342) < 1e-4
    tail = [b for _, b in beta.entries[3:]]
    assert all(b1 < b0 for b0, b1 in zip(tail, tail[1:]))
    assert beta_sequence(golden).beta_limsup_estimate < 1e-5


def test_liouville_construction():
    f = make_liouville(1.0, 3)
    assert denominators(f, 3) == [2, 9, 8111]
    assert beta_sequence(f, 3)[2] == pytest.approx(math.log(8111) / 9, abs=1e-12)
    assert abs(beta_sequence(f, 3)[2] - 1.0) < 1e-3


def test_liouville_hits_target():
    f = make_liouville(1.0, 4)
    betas = [b for _, b in beta_sequence(f, 4).entries]
    assert any(abs(b - 1.0) < 0.1 for b in betas)


def test_liouville_capped_is_bounded_type():
    f = make_liouville(0.5, 30, quotient_cap=1)
    assert set(f.quotients[1:]) == {1}
    assert beta_sequence(f).beta_limsup_estimate < 1e-3


def test_liouville_budget():
    with pytest.raises(BudgetExceeded):
        make_liouville(3.0, 9)


def test_fejer_zero_mode(golden):
    for Q in (1, 2, 17, 100):
        assert fejer(Q, 0, golden) == pytest.approx(1.0, abs=1e-14)


def test_fejer_two_terms(golden):
    for k in (1, 3, 8, 21):
        x = frac_fixed(k, golden) / ONE
        assert fejer(2, k, golden) == pytest.approx((1 + math.cos(2 * math.pi * x)) / 2, abs=1e-15)


def test_fejer_bounds_and_imaginary(golden):
    for Q in (3, 10, 55):
        for k in range(-40, 41):
            re, im = fejer(Q, k, golden, return_imag=True)
            assert abs(im) < 1e-12
            if k:
                nrm = torus_norm(k, golden)
                assert -1e-14 <= re <= min(1.0, 2.0 / (1 + Q * Q * nrm * nrm)) + 1e-14


def test_fejer_multiplier_matches_direct(golden):
    ks = list(range(-30, 31))
    mult = fejer_multiplier(13, ks, golden)
    for k, v in zip(ks, mult):
        assert v == pytest.approx(fejer(13, k, golden), abs=1e-12)


def test_frequency_json_roundtrip():
    f = Frequency.from_float(0.3183098861837907)
    assert Frequency.from_json(f.to_json()) == f
    assert f.to_json()["float_hint"] == 0.3183098861837907
