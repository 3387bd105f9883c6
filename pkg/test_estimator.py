"""
Test suite for the OAC estimator algebra
LMMSE coefficient, full / reduced MSE, boundary values and the analytic gradient
"""

import math

import numpy as np
import pytest

from estimator import (
    Allocation,
    Scenario,
    full_mse,
    lmmse_coefficient,
    mse_gradient,
    mse_max,
    mse_min,
    reduced_mse,
)


def random_scenario(rng, K=None, M=None):
    K = K or int(rng.integers(1, 5))
    M = int(rng.integers(0, 4)) if M is None else M
    weights = rng.uniform(0.2, 1.0, size=K + M)
    eta = tuple(weights / weights.sum())
    return Scenario(K=K, M=M, eta=eta, N0=float(rng.uniform(0.5, 4.0)),
                    Pc=float(rng.uniform(1.0, 20.0)), Pt=float(rng.uniform(1.0, 20.0)))


def central_difference(scenario, g, n_sig, step=1e-6):
    fd = np.zeros_like(g)
    for k in range(g.size):
        up, down = g.copy(), g.copy()
        up[k] += step
        down[k] -= step
        fd[k] = (reduced_mse(scenario, up, n_sig) - reduced_mse(scenario, down, n_sig)) / (2 * step)
    return fd


def test_scenario_validation():
    """Rejects bad sizes, transmissivities and powers"""
    with pytest.raises(ValueError):
        Scenario(K=0, M=1, eta=(1.0,))
    with pytest.raises(ValueError):
        Scenario(K=2, M=1, eta=(0.5, 0.5))
    with pytest.raises(ValueError):
        Scenario(K=1, M=1, eta=(0.7, 0.7))
    with pytest.raises(ValueError):
        Scenario(K=1, M=1, eta=(1.0, 0.0))
    with pytest.raises(ValueError):
        Scenario(K=1, M=1, eta=(0.6, 0.4), N0=0.0)
    with pytest.raises(ValueError):
        Scenario(K=1, M=1, eta=(0.6, 0.4), Pc=float('inf'))
    print("✓ Scenario validation")


def test_scenario_split_rule():
    scenario = Scenario.from_split(4, 2)
    assert scenario.eta_oac.tolist() == pytest.approx([0.15] * 4)
    assert scenario.eta_comm.tolist() == pytest.approx([0.2, 0.2])
    assert abs(scenario.n_sig_max - 4.0) < 1e-12
    assert abs(scenario.gamma_cap - 6.0) < 1e-12
    alone = Scenario.from_split(2, 0, oac_share=1.0, comm_share=0.0)
    assert alone.n_sig_max == 0.0


def test_allocation_feasibility(reference_scenario):
    Allocation(g=[10.0, 0.0], n_sig=4.0).check_feasible(reference_scenario)
    with pytest.raises(ValueError):
        Allocation(g=[10.5, 0.0], n_sig=0.0).check_feasible(reference_scenario)
    with pytest.raises(ValueError):
        Allocation(g=[1.0, 1.0], n_sig=4.5).check_feasible(reference_scenario)
    with pytest.raises(ValueError):
        Allocation(g=[1.0, 1.0, 1.0], n_sig=0.0).check_feasible(reference_scenario)


def test_lmmse_coefficient_worked_values(single_device_scenario):
    assert lmmse_coefficient(single_device_scenario, [0.0], 0.0) == 0.0
    h = lmmse_coefficient(single_device_scenario, [10.0], 0.0)
    assert abs(h - math.sqrt(6) / 8) < 1e-14
    assert abs(h - 0.306186) < 1e-6

    # eta_1 g_1 = 4 with vanishing noise: matched filter 2/4
    quiet = Scenario(K=1, M=1, eta=(0.4, 0.6), N0=1e-12)
    assert abs(lmmse_coefficient(quiet, [10.0], 0.0) - 0.5) < 1e-9
    print(f"✓ h* = {h:.6f}")


def test_full_mse_worked_values(single_device_scenario, reference_scenario):
    sc = single_device_scenario
    assert full_mse(sc, Allocation(g=[7.0], n_sig=1.0, h=0.0)) == 1.0
    assert full_mse(reference_scenario, Allocation(g=[3.0, 9.0], n_sig=2.0, h=0.0)) == 2.0

    h = lmmse_coefficient(sc, [10.0], 0.0)
    assert abs(full_mse(sc, Allocation(g=[10.0], n_sig=0.0, h=h)) - 0.25) < 1e-12

    for h in (0.3, -1.2, 0.5 + 0.5j):
        alloc = Allocation(g=[0.0, 0.0], n_sig=0.0, h=h)
        assert abs(full_mse(reference_scenario, alloc) - (2 + 2 * abs(h) ** 2)) < 1e-12


def test_reduced_mse_worked_values(single_device_scenario, reference_scenario):
    assert reduced_mse(single_device_scenario, [0.0], 3.0) == 1.0
    assert abs(reduced_mse(single_device_scenario, [10.0], 0.0) - 0.25) < 1e-14
    assert abs(reduced_mse(reference_scenario, [10.0, 10.0], 0.0) - 0.5) < 1e-14


def test_boundary_values(single_device_scenario, reference_scenario):
    """MSE_min at full OAC power, MSE_max = K"""
    assert abs(mse_min(single_device_scenario) - 0.25) < 1e-14
    assert abs(mse_min(reference_scenario) - 0.5) < 1e-14
    tiny = Scenario(K=2, M=2, eta=(0.3, 0.3, 0.2, 0.2), Pc=1e-12)
    assert abs(mse_min(tiny) - 2.0) < 1e-9

    assert mse_max(single_device_scenario) == 1.0
    assert mse_max(Scenario.from_split(4, 2)) == 4.0
    assert mse_max(reference_scenario) == reduced_mse(reference_scenario, [0.0, 0.0], 3.7)
    print("✓ MSE_min / MSE_max boundary values")


def test_full_equals_reduced_at_lmmse():
    rng = np.random.default_rng(11)
    for _ in range(200):
        sc = random_scenario(rng)
        g = rng.uniform(0.0, sc.Pc, size=sc.K)
        n_sig = float(rng.uniform(0.0, sc.n_sig_max)) if sc.M else 0.0
        h = lmmse_coefficient(sc, g, n_sig)
        alloc = Allocation(g=g, n_sig=n_sig, h=h)
        assert abs(full_mse(sc, alloc) - reduced_mse(sc, g, n_sig)) < 1e-12
    print("✓ full MSE at h* equals reduced MSE (200 random cases)")


def test_lmmse_is_optimal():
    rng = np.random.default_rng(12)
    for _ in range(100):
        sc = random_scenario(rng)
        g = rng.uniform(0.0, sc.Pc, size=sc.K)
        n_sig = float(rng.uniform(0.0, sc.n_sig_max)) if sc.M else 0.0
        h = lmmse_coefficient(sc, g, n_sig)
        best = full_mse(sc, Allocation(g=g, n_sig=n_sig, h=h))
        for delta in rng.normal(0.0, 0.3, size=5):
            assert full_mse(sc, Allocation(g=g, n_sig=n_sig, h=h + delta)) >= best - 1e-12
        step = 1e-6
        slope = (full_mse(sc, Allocation(g=g, n_sig=n_sig, h=h + step))
                 - full_mse(sc, Allocation(g=g, n_sig=n_sig, h=h - step))) / (2 * step)
        assert abs(slope) < 1e-8


def test_full_power_is_optimal_without_interference():
    """With n_sig = 0 no interior point beats g = Pc on a 0.05 Pc grid"""
    for eta in [(0.3, 0.3, 0.2, 0.2), (0.5, 0.1, 0.4), (0.05, 0.7, 0.25)]:
        sc = Scenario(K=2, M=len(eta) - 2, eta=eta, N0=2.0, Pc=10.0)
        best = mse_min(sc)
        levels = np.linspace(0.0, sc.Pc, 21)
        for g1 in levels:
            for g2 in levels:
                assert reduced_mse(sc, [g1, g2], 0.0) >= best - 1e-12

    rng = np.random.default_rng(13)
    for K, M in [(2, 2), (2, 4), (4, 2), (4, 4)]:
        for Pc in (5.0, 10.0, 20.0):
            sc = Scenario.from_split(K, M, Pc=Pc, Pt=Pc)
            for g in rng.uniform(0.0, Pc, size=(50, K)):
                assert reduced_mse(sc, g, 0.0) >= mse_min(sc) - 1e-12
    print("✓ Full OAC power optimal at n_sig = 0")


def test_common_scaling_never_hurts():
    """reduced_mse(t g, 0) is non-increasing in t for any scenario"""
    rng = np.random.default_rng(16)
    for _ in range(200):
        sc = random_scenario(rng)
        g = rng.uniform(0.0, sc.Pc, size=sc.K)
        previous = math.inf
        for t in np.linspace(0.05, 1.0, 20):
            value = reduced_mse(sc, t * g, 0.0)
            assert value <= previous + 1e-12
            previous = value


def test_mse_bounds_and_interference():
    rng = np.random.default_rng(14)
    for _ in range(200):
        sc = random_scenario(rng, M=int(rng.integers(1, 4)))
        g = rng.uniform(0.0, sc.Pc, size=sc.K)
        values = [reduced_mse(sc, g, n) for n in np.linspace(0.0, sc.n_sig_max, 6)]
        assert all(0.0 <= v <= sc.K + 1e-12 for v in values)
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    for K, M in [(2, 2), (2, 4), (4, 2), (4, 4)]:
        sc = Scenario.from_split(K, M)
        for _ in range(50):
            g = rng.uniform(0.0, sc.Pc, size=K)
            n_sig = float(rng.uniform(0.0, sc.n_sig_max))
            assert mse_min(sc) - 1e-12 <= reduced_mse(sc, g, n_sig) <= K + 1e-12


def test_gradient_worked_values(single_device_scenario, reference_scenario):
    for g1 in (0.1, 2.0, 5.0, 10.0):
        assert mse_gradient(single_device_scenario, [g1], 0.0)[0] < 0

    grad = mse_gradient(reference_scenario, [5.0, 5.0], 1.0)
    fd = central_difference(reference_scenario, np.array([5.0, 5.0]), 1.0)
    assert np.all(np.abs(grad - fd) <= 1e-5 * np.abs(fd))
    assert grad[0] == grad[1]

    symmetric = Scenario.from_split(4, 2)
    grad = mse_gradient(symmetric, [3.0] * 4, 2.0)
    assert np.all(grad == grad[0])
    print(f"✓ Gradient at (5, 5): {grad}")


def test_gradient_matches_finite_difference():
    """100 random interior points per scenario, relative error < 1e-5"""
    rng = np.random.default_rng(15)
    for K, M in [(2, 2), (2, 4), (4, 2), (4, 4), (3, 1)]:
        sc = Scenario.from_split(K, M) if (K, M) != (3, 1) else \
            Scenario(K=3, M=1, eta=(0.35, 0.15, 0.1, 0.4))
        for _ in range(100):
            g = rng.uniform(0.05 * sc.Pc, 0.95 * sc.Pc, size=K)
            n_sig = float(rng.uniform(0.0, sc.n_sig_max))
            grad = mse_gradient(sc, g, n_sig)
            fd = central_difference(sc, g, n_sig)
            rel = np.abs(grad - fd) / np.maximum(np.abs(fd), 1e-3)
            assert np.all(rel < 1e-5), f"K={K} M={M} g={g}: {grad} vs {fd}"
    print("✓ Gradient matches central differences at 500 points")


def test_gradient_lifts_zero_powers(reference_scenario):
    grad = mse_gradient(reference_scenario, [0.0, 5.0], 1.0)
    assert np.all(np.isfinite(grad))
    assert grad[0] < 0


if __name__ == '__main__':
    print("\nRunning Estimator Test Suite")
    print("=" * 60)
    reference = Scenario(K=2, M=2, eta=(0.3, 0.3, 0.2, 0.2))
    single = Scenario(K=1, M=1, eta=(0.6, 0.4))
    test_scenario_validation()
    test_scenario_split_rule()
    test_allocation_feasibility(reference)
    test_lmmse_coefficient_worked_values(single)
    test_full_mse_worked_values(single, reference)
    test_reduced_mse_worked_values(single, reference)
    test_boundary_values(single, reference)
    test_full_equals_reduced_at_lmmse()
    test_lmmse_is_optimal()
    test_full_power_is_optimal_without_interference()
    test_common_scaling_never_hurts()
    test_mse_bounds_and_interference()
    test_gradient_worked_values(single, reference)
    test_gradient_matches_finite_difference()
    test_gradient_lifts_zero_powers(reference)
    print("=" * 60)
    print("ALL TESTS PASSED ✓")
