import math

import numpy as np
import pytest
from scipy.linalg import eigvalsh_tridiagonal

from qps.cocycle import Cocycle, Potential
from qps.errors import ResolutionFloor, TooCloseToSpectrum
from qps.ids import (FiniteOperator, bisect_eigenvalues, dyadic_etas, eigen_count, eigen_counts,
                     green_diagonal, green_diagonals, green_trace_bound, holder_fit, ids_curve,
                     operator_ids_curve, resolvent_decoupling_check, thouless_lyapunov)
from qps.lyapunov import finite_lyapunov


def _random_op(rng, n, scale=2.0):
    return FiniteOperator(rng.normal(size=n) * scale)


def test_free_three_sites():
    assert eigen_count(FiniteOperator(np.zeros(3)), 0.0) == 1


def test_counts_outside_spectrum():
    rng = np.random.default_rng(1)
    op = _random_op(rng, 40)
    vmax = np.max(np.abs(op.diagonal))
    assert eigen_count(op, -2 - vmax - 1e-9) == 0
    assert eigen_count(op, 2 + vmax + 1e-9) == 40


def test_sturm_matches_diagonalisation():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 201))
        op = _random_op(rng, n, rng.uniform(0.1, 5))
        eig = eigvalsh_tridiagonal(op.diagonal, np.ones(n - 1)) if n > 1 else op.diagonal
        energies = np.sort(rng.uniform(-9, 9, 200))
        oracle = np.searchsorted(np.sort(eig), energies, side="left")
        assert np.array_equal(eigen_counts(op, energies), oracle)


def test_bisection_eigenvalues():
    rng = np.random.default_rng(3)
    op = _random_op(rng, 150)
    ref = np.linalg.eigvalsh(op.dense().real)
    assert np.max(np.abs(op.eigenvalues - ref)) < 1e-9
    assert np.max(np.abs(bisect_eigenvalues(np.zeros(7)) - 2 * np.cos(np.arange(7, 0, -1) * np.pi / 8))) < 1e-9


def test_free_ids_arcsine(free):
    N = 1024
    grid = np.linspace(-1.99, 1.99, 399)
    curve = ids_curve(free, 0.0, N, grid)
    arcsine = 1 - np.arccos(grid / 2) / np.pi
    assert np.max(np.abs(curve.values - arcsine)) <= 2 / N


def test_ids_monotone_bounded(amo3):
    curve = ids_curve(amo3, 0.3, 512, np.linspace(-9, 9, 301))
    assert np.all(np.diff(curve.counts) >= 0)
    assert curve.values.min() >= 0 and curve.values.max() <= 1


def test_ids_phase_stability(amo3):
    N = 2048
    grid = np.linspace(-8, 8, 801)
    a = ids_curve(amo3, 0.0, N, grid).counts
    b = ids_curve(amo3, 0.37, N, grid).counts
    assert np.max(np.abs(a - b)) <= 10


def test_ids_grid_guard():
    with pytest.raises(ValueError):
        operator_ids_curve(FiniteOperator(np.zeros(4)), [1.0, 0.0])


def test_thouless_free():
    op = FiniteOperator(np.zeros(2048))
    assert abs(thouless_lyapunov(op, 3.0) - math.log((3 + math.sqrt(5)) / 2)) < 0.02


def test_thouless_far_energy(amo3):
    curve = ids_curve(amo3, 0.0, 512, [0.0])
    assert abs(thouless_lyapunov(curve, 100.0) - math.log(100)) < 0.01


def test_thouless_matches_transfer_matrices(amo3):
    op = FiniteOperator.from_potential(amo3.potential, amo3.frequency, 0.0, 2048)
    assert abs(thouless_lyapunov(op, 0.0) - finite_lyapunov(amo3, 1000, 0.0, 2048)) < 0.05


def test_thouless_too_close():
    op = FiniteOperator(np.zeros(10) + 0.5)
    with pytest.raises(TooCloseToSpectrum):
        thouless_lyapunov(op, float(op.eigenvalues[4]), exclusion=0.5)


def test_green_scalar():
    op = FiniteOperator([1.5])
    z = 0.2 + 0.3j
    assert green_diagonal(op, z, 0) == pytest.approx(1 / (1.5 - z), rel=1e-15)


def test_green_matches_dense_inverse():
    rng = np.random.default_rng(4)
    for _ in range(30):
        n = int(rng.integers(1, 51))
        op = _random_op(rng, n)
        z = complex(rng.uniform(-3, 3), rng.uniform(1e-3, 1))
        inv = np.diag(np.linalg.inv(op.dense(z)))
        diag = green_diagonals(op, z)
        assert np.max(np.abs(diag - inv) / np.abs(inv)) < 1e-9
        k = int(rng.integers(0, n))
        assert abs(green_diagonal(op, z, k) - inv[k]) <= 1e-9 * abs(inv[k])


def test_green_herglotz_and_bound():
    rng = np.random.default_rng(5)
    for _ in range(20):
        op = _random_op(rng, 60)
        eta = float(10 ** rng.uniform(-4, 0))
        g = green_diagonals(op, complex(rng.uniform(-4, 4), eta))
        assert np.all(g.imag > 0)
        assert np.all(np.abs(g) <= 1 / eta * (1 + 1e-12))


def test_green_index_guard():
    with pytest.raises(IndexError):
        green_diagonal(FiniteOperator(np.zeros(3)), 1j, 3)


def test_trace_bound_scalar():
    d_n, bound = green_trace_bound(FiniteOperator([0.0]), 0.0, 1.0)
    assert d_n == 1.0
    assert bound == pytest.approx(2.0)


def test_trace_bound_free():
    d_n, bound = green_trace_bound(FiniteOperator(np.zeros(512)), 0.0, 0.01)
    assert d_n <= bound + 1e-12


def test_trace_bound_amo(amo3):
    rng = np.random.default_rng(6)
    op = FiniteOperator.from_potential(amo3.potential, amo3.frequency, 0.0, 1024)
    for _ in range(20):
        d_n, bound = green_trace_bound(op, rng.uniform(-8, 8), 10 ** rng.uniform(-3, -0.5))
        assert d_n <= bound + 1e-12


def test_decoupling_degenerate_window():
    rng = np.random.default_rng(7)
    op = _random_op(rng, 40)
    assert resolvent_decoupling_check(op, 0.1 + 0.2j, 17, 0, 39) == 0.0


def test_decoupling_dense_oracle():
    rng = np.random.default_rng(8)
    op = _random_op(rng, 64)
    assert resolvent_decoupling_check(op, 0.3 + 0.05j, 30, 20, 40, oracle="dense") < 1e-9


def test_decoupling_scan():
    rng = np.random.default_rng(9)
    op = _random_op(rng, 64)
    z = 0.3 + 0.05j
    for k in range(64):
        a, b = max(0, k - 16), min(63, k + 16)
        assert resolvent_decoupling_check(op, z, k, a, b, oracle="dense") < 1e-8
        assert resolvent_decoupling_check(op, z, k, a, b) < 1e-8


def test_decoupling_guards():
    op = FiniteOperator(np.zeros(8))
    with pytest.raises(ValueError):
        resolvent_decoupling_check(op, 0.1 + 0.1j, 5, 6, 7)
    with pytest.raises(ValueError):
        resolvent_decoupling_check(op, 0.1, 5, 0, 7)


def test_holder_free_laplacian(free):
    N = 8192
    fit = holder_fit(free.potential, free.frequency, 0.0, N, 0.0, dyadic_etas(floor=4 / N))
    assert abs(fit.exponent - 1) <= 0.1


def test_holder_amo(amo3):
    N = 8192
    fit = holder_fit(amo3.potential, amo3.frequency, 0.0, N, 0.0, dyadic_etas(floor=4 / N))
    assert fit.exponent >= 0.1
    assert fit.r_squared >= 0.8
    assert all(b <= a for a, b in zip(fit.increments, fit.increments[1:]))


def test_holder_outside_spectrum(amo3):
    N = 2048
    with pytest.raises(ResolutionFloor):
        holder_fit(amo3.potential, amo3.frequency, 0.0, N, 20.0, dyadic_etas(floor=4 / N))


def test_holder_guards(amo3):
    with pytest.raises(ValueError):
        holder_fit(amo3.potential, amo3.frequency, 0.0, 1024, 0.0, [1e-2, 3e-3])
    with pytest.raises(ValueError):
        holder_fit(amo3.potential, amo3.frequency, 0.0, 1024, 0.0, [4e-3, 2e-3])
