"""Accelerated kernels against their plain-numpy twins."""

import os
import subprocess
import sys

import numpy as np

from dressedgf import _kernels


def _random_mode_data(rng, n):
    weights = rng.normal(size=n) + 1j * rng.normal(size=n)
    energies = np.sort(rng.uniform(-2.0, 2.0, n))
    return weights, energies


def test_resolvent_sum_matches_numpy():
    rng = np.random.default_rng(11)
    for _ in range(40):
        n = int(rng.integers(1, 40))
        weights, energies = _random_mode_data(rng, n)
        z = complex(rng.uniform(-3, 3), rng.uniform(0.01, 1.0))
        got = _kernels.resolvent_sum(weights, energies, z)
        ref = _kernels.resolvent_sum_numpy(weights, energies, z)
        assert abs(got - ref) < 1e-12 * max(1.0, abs(ref))


def test_resolvent_sum_squared_matches_numpy():
    rng = np.random.default_rng(12)
    for _ in range(40):
        n = int(rng.integers(1, 40))
        weights, energies = _random_mode_data(rng, n)
        z = complex(rng.uniform(-3, 3), rng.uniform(0.01, 1.0))
        got = _kernels.resolvent_sum_squared(weights, energies, z)
        ref = _kernels.resolvent_sum_squared_numpy(weights, energies, z)
        assert abs(got - ref) < 1e-12 * max(1.0, abs(ref))


def test_resolvent_sum_grid_matches_numpy():
    rng = np.random.default_rng(13)
    weights, energies = _random_mode_data(rng, 25)
    grid = np.linspace(2.5, 4.0, 101)
    got = _kernels.resolvent_sum_grid(weights, energies, grid)
    ref = _kernels.resolvent_sum_grid_numpy(weights, energies, grid)
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


def test_pole_function_grid_matches_numpy():
    rng = np.random.default_rng(14)
    weights = np.abs(rng.normal(size=20)) + 0.01
    energies = np.sort(rng.uniform(-2.0, 2.0, 20))
    grid = np.linspace(2.1, 5.0, 200)
    for omega0, g in [(2.5, 0.3), (-3.0, 0.7)]:
        slope, offset = 1.0 / g**2, -omega0 / g**2
        got = _kernels.pole_function_grid(weights, energies, grid, slope, offset)
        ref = _kernels.pole_function_grid_numpy(weights, energies, grid, slope, offset)
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)


def test_bisect_pole_function_matches_numpy():
    rng = np.random.default_rng(15)
    weights = np.abs(rng.normal(size=10)) + 0.05
    energies = np.sort(rng.uniform(-1.5, 1.5, 10))
    omega0, g = 2.2, 0.4
    slope, offset = 1.0 / g**2, -omega0 / g**2
    lo, hi = 1.6, 6.0
    root_a = _kernels.bisect_pole_function(
        weights, energies, slope, offset, lo, hi, 1e-13, 200
    )
    root_b = _kernels.bisect_pole_function_numpy(
        weights, energies, slope, offset, lo, hi, 1e-13, 200
    )
    assert abs(root_a - root_b) < 1e-12
    # the returned midpoint really is a root of the increasing pole function
    val = slope * root_a + offset - _kernels.resolvent_sum_numpy(
        weights.astype(np.complex128), energies, complex(root_a)
    ).real
    assert abs(val) < 1e-9


def test_env_flag_disables_numba():
    code = (
        "import dressedgf._kernels as k; "
        "print(k.NUMBA_ENABLED); "
        "print(abs(k.resolvent_sum("
        "__import__('numpy').array([1.0+0j]), "
        "__import__('numpy').array([0.0]), 2.0+0j) - 0.5) < 1e-15)"
    )
    env = dict(os.environ, DRESSEDGF_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    lines = out.stdout.split()
    assert lines[0] == "False"
    assert lines[1] == "True"
