import math

import numpy as np
import pytest

from qps.arithmetic import fejer_multiplier
from qps.cocycle import Cocycle, Potential
from qps.ldt import (PhaseField, band_decomposition, band_masks, decay_check, deviation_measure,
                     deviation_measure_complex, fejer_smooth, fourier, lower_deviation_measure,
                     match_scale, measure_cv1, sample_field, small_k_check)
from qps.lyapunov import finite_lyapunov, linearity_window, profile


@pytest.fixture(scope="module")
def field3(amo3):
    return sample_field(amo3, 500, 0.0, 2048)


@pytest.fixture(scope="module")
def smooth_field(golden):
    # subcritical field: analytic in theta with a wide strip, so grid aliasing is negligible
    return sample_field(Cocycle(Potential.amo(0.5), 0j, golden), 60, 0.0, 512)


def _const(value, n=256):
    return PhaseField(np.full(n, value), 1, n, 0.0, 0j)


def test_free_field_zero(free):
    assert np.all(sample_field(free, 100, 0.0, 128).values == 0.0)


def test_field_mean_matches_finite_lyapunov(amo3, field3):
    assert field3.mean == finite_lyapunov(amo3, 500, 0.0, 2048)
    assert abs(field3.mean - math.log(3)) < 0.05


def test_grid_convergence(amo3, field3):
    assert abs(sample_field(amo3, 500, 0.0, 4096).mean - field3.mean) < 1e-3


def test_field_is_read_only(field3):
    with pytest.raises(ValueError):
        field3.values[0] = 1.0


def test_fourier_constant():
    spectrum = fourier(_const(2.5))
    assert spectrum[0] == pytest.approx(2.5)
    rest = np.delete(np.abs(spectrum.coefficients), 128)
    assert rest.max() < 1e-12


def test_fourier_cosine():
    n = 256
    f = PhaseField(np.cos(2 * np.pi * np.arange(n) / n), 1, n, 0.0, 0j)
    spectrum = fourier(f)
    assert spectrum[1] == pytest.approx(0.5, abs=1e-14)
    assert spectrum[-1] == pytest.approx(0.5, abs=1e-14)
    mask = np.ones(n, bool)
    mask[[n // 2 - 1, n // 2 + 1]] = False
    assert np.abs(spectrum.coefficients[mask]).max() < 1e-12
    with pytest.raises(IndexError):
        spectrum[n // 2]


def test_fourier_one_over_k(field3):
    spectrum = fourier(field3)
    ks = spectrum.ks
    nz = ks != 0
    c_v2 = float(np.max(np.abs(ks[nz]) * np.abs(spectrum.coefficients[nz])))
    assert math.isfinite(c_v2) and c_v2 < 10


def test_parseval(field3):
    spectrum = fourier(field3)
    lhs = float(np.sum(np.abs(spectrum.coefficients) ** 2))
    rhs = float(np.mean(field3.values ** 2))
    assert abs(lhs - rhs) <= 1e-10


def test_deviation_measure_limits(field3):
    assert deviation_measure(field3, 0.0) > 0.99
    top = float(np.max(np.abs(field3.values - field3.mean)))
    assert deviation_measure(field3, top) == 0.0
    with pytest.raises(ValueError):
        deviation_measure(field3, -1.0)


def test_deviation_monotone_in_t(field3):
    ts = np.linspace(0, 0.2, 41)
    vals = [deviation_measure(field3, t) for t in ts]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_complex_deviation_real_limit(amo3):
    dev = deviation_measure_complex(amo3, 200, 1.0, 512)
    fld = sample_field(amo3, 200, 0.0, 512)
    assert dev.measure == lower_deviation_measure(fld, 1.0)
    assert dev.eta == 0.0 and dev.eta_compliant


def test_complex_deviation_flags_large_eta(amo3):
    dev = deviation_measure_complex(amo3.with_energy(1j), 100, 1.0, 256)
    assert not dev.eta_compliant
    assert 0.0 <= dev.measure <= 1.0


def test_complex_deviation_amo4(golden):
    coc = Cocycle(Potential.amo(4.0), complex(0, 1e-8), golden)
    level = finite_lyapunov(coc.with_energy(0j), 800, 0.0, 2048) - 0.3
    assert deviation_measure_complex(coc, 800, level, 2048).measure < 0.02


def test_fejer_identity_and_constant(golden, field3):
    assert np.array_equal(fejer_smooth(field3, 1, golden).values, field3.values)
    c = _const(1.25)
    for mode in ("exact", "spectral", "nearest"):
        assert np.allclose(fejer_smooth(c, 7, golden, mode).values, 1.25, atol=1e-14)


def test_fejer_exact_convolution_theorem(golden, smooth_field):
    Q = 8
    smoothed = fejer_smooth(smooth_field, Q, golden, "exact")
    lhs = fourier(smoothed).coefficients
    spectrum = fourier(smooth_field)
    rhs = spectrum.coefficients * fejer_multiplier(Q, spectrum.ks, golden)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_fejer_nearest_convolution_theorem(golden, smooth_field):
    Q = 8
    lhs = fourier(fejer_smooth(smooth_field, Q, golden, "nearest")).coefficients
    spectrum = fourier(smooth_field)
    rhs = spectrum.coefficients * fejer_multiplier(Q, spectrum.ks, golden)
    assert np.max(np.abs(lhs - rhs)) < 1e-3


def test_fejer_exact_agrees_with_orbit_average(golden, amo3):
    fld = sample_field(amo3, 40, 0.0, 64)
    out = fejer_smooth(fld, 3, golden, "exact").values
    from qps.cocycle import transfer_product
    from qps.arithmetic import ONE, frac_fixed
    th = fld.thetas[5]
    ref = 0.0
    for j in range(-2, 3):
        ref += (3 - abs(j)) / 9 * transfer_product(amo3, th + frac_fixed(j, golden) / ONE, 0.0, 40).exponent
    assert out[5] == pytest.approx(ref, abs=1e-12)


def test_fejer_guards(golden, field3):
    with pytest.raises(ValueError):
        fejer_smooth(field3, 0, golden)
    with pytest.raises(ValueError):
        fejer_smooth(field3, 3, golden, "cubic")


def test_match_scale_golden(golden):
    n, q, q1, beta, mismatch = match_scale(golden, 987, 0.3)
    assert (q, q1) == (55, 89) and not mismatch
    assert beta == pytest.approx(math.log(89) / 55)
    scale = (beta + 1) / 0.09
    assert scale * q <= 987 < scale * q1


def test_band_masks_disjoint():
    ks = np.arange(-1024, 1024)
    masks = band_masks(ks, 0.3, 55, 89, 1e9)
    total = np.sum(masks, axis=0)
    assert total.max() == 1
    assert np.array_equal(total == 1, ks != 0)


def test_band_constant_field(golden):
    bd = band_decomposition(_const(0.7, 512), golden, 0.3, "spectral")
    assert max(bd.sup_norms) < 1e-14


def test_band_completeness_and_tail(golden, smooth_field):
    m, delta = smooth_field.m, 0.3
    bd = band_decomposition(smooth_field, golden, delta, "exact")
    assert bd.completeness_residual < 1e-8
    spectrum = fourier(smooth_field)
    nz = spectrum.ks != 0
    c_v2 = float(np.max(np.abs(spectrum.ks[nz]) * np.abs(spectrum.coefficients[nz])))
    assert bd.u7_l2 <= math.sqrt(2) * c_v2 * math.exp(-2 * delta ** 4 * m)


def test_band_supercritical_spectral(golden):
    coc = Cocycle(Potential.amo(4.0), 0j, golden)
    fld = sample_field(coc, 987, 0.0, 2048)
    bd = band_decomposition(fld, golden, 0.3, "spectral")
    assert bd.completeness_residual < 1e-8
    assert bd.Q == 296 and bd.q_n == 55
    # the cutoff exp(4 delta^4 m) lies beyond the grid, so nothing is left for U_7
    assert bd.u7_l2 < 1e-12


def test_chebyshev_closure(golden, smooth_field):
    bd = band_decomposition(smooth_field, golden, 0.3, "exact")
    head = float(np.max(np.abs(np.sum(bd.bands[:6], axis=0))))
    for s in (1e-4, 1e-3, 1e-2):
        measure = deviation_measure(smooth_field, head + s)
        assert measure <= bd.u7_l2 ** 2 / s ** 2 + 1e-15


def test_decay_zero_field():
    report = decay_check(fourier(_const(0.0)), 1, 2.0, 0.1)
    assert report.C_fit == 0.0 and not report.violations


def test_decay_amo3(amo3, field3):
    prof = profile(amo3, 500, np.linspace(0.0, 0.2, 11), 1024)
    R = math.exp(2 * math.pi * linearity_window(prof, 1e-3))
    report = decay_check(fourier(field3), 1, R, 0.1, (2, 200), 10.0)
    assert math.isfinite(report.C_fit)
    assert report.violations == ()


def test_small_k(amo3, field3):
    cv1 = measure_cv1(amo3, 500, 0.0, 2048)
    assert cv1.within_bound
    ratios = small_k_check(fourier(field3), amo3.frequency, 500, cv1.measured, 20)
    assert len(ratios) == 40
    assert max(ratios.values()) <= 1.0
