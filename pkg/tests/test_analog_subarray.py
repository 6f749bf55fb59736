import logging

import numpy as np
import pytest

from dram.analog_subarray import AnalogSubarray, NoiseConfig, SubarrayGeometry, charge_share, sense
from errors.result import PudError, Result

GEOMETRY = SubarrayGeometry()


def test_charge_share_single_full_cell():
    assert charge_share([1.0], GEOMETRY) == pytest.approx(0.55, abs=5e-4)


def test_charge_share_eight_row_majority():
    assert charge_share([1, 1, 1, 0, 0, 0.5, 1, 0], GEOMETRY) == pytest.approx(0.5294, abs=5e-4)


def test_charge_share_neutral_cells_any_geometry():
    geometry = SubarrayGeometry(c_cell=12.0, c_bitline=99.0)
    assert charge_share([0.5] * 8, geometry) == pytest.approx(0.5, abs=1e-12)


def test_charge_share_is_weighted_mean(rng):
    values = rng.random(7)
    v = charge_share(values, GEOMETRY)
    lhs = v * (len(values) * GEOMETRY.c_cell + GEOMETRY.c_bitline)
    rhs = GEOMETRY.c_cell * values.sum() + GEOMETRY.c_bitline * GEOMETRY.v_precharge
    assert abs(lhs - rhs) < 1e-12


def test_charge_share_permutation_invariant(rng):
    values = rng.random(8)
    assert charge_share(values, GEOMETRY) == pytest.approx(charge_share(values[::-1], GEOMETRY), abs=1e-15)


def test_charge_share_monotone(rng):
    values = rng.random(8)
    bumped = values.copy()
    bumped[3] = min(1.0, bumped[3] + 0.1)
    assert charge_share(bumped, GEOMETRY) >= charge_share(values, GEOMETRY)


def test_charge_share_vectorized_over_columns():
    cells = np.array([[1.0, 0.0, 0.5], [1.0, 0.0, 0.5]])
    voltages = charge_share(cells, GEOMETRY)
    assert voltages.shape == (3,)
    assert voltages[2] == pytest.approx(0.5)


def test_charge_share_empty_is_usage_error():
    with pytest.raises(PudError) as info:
        charge_share([], GEOMETRY)
    assert info.value.result == Result.InvalidArgument


@pytest.mark.parametrize("voltage,tau,expected", [
    (0.55, 0.5, 1),
    (0.5294, 0.55, 0),
    (0.5, 0.5, 0),
])
def test_sense_noiseless(voltage, tau, expected):
    assert sense(voltage, tau, NoiseConfig.noiseless()) == expected


def test_sense_noise_reproducible():
    noise = NoiseConfig(sigma_sense=0.01)
    v = np.full(1000, 0.5)
    first = sense(v, 0.5, noise, np.random.default_rng(3))
    second = sense(v, 0.5, noise, np.random.default_rng(3))
    assert np.array_equal(first, second)
    assert 0.4 < first.mean() < 0.6


def test_write_row_exact_bits(subarray_factory):
    sub = subarray_factory(n_cols=6)
    sub.write_row(20, np.ones(6))
    assert np.all(sub.read_row(20) == 1.0)
    pattern = np.array([0, 1, 0, 1, 0, 1])
    sub.write_row(21, pattern)
    assert np.array_equal(sub.read_row(21), pattern.astype(float))


def test_write_row_cell_noise_bounded():
    sub = AnalogSubarray(SubarrayGeometry(n_cols=20000), noise=NoiseConfig(sigma_sense=0.0, sigma_cell=0.01, seed=5))
    sub.write_row(30, np.ones(20000))
    values = sub.read_row(30)
    assert np.all((values >= 0.0) & (values <= 1.0))
    assert np.mean(values >= 0.95) > 0.9999


def test_write_row_rejects_bad_row_and_length(subarray_factory):
    sub = subarray_factory(n_cols=4)
    with pytest.raises(PudError) as info:
        sub.write_row(512, np.zeros(4))
    assert info.value.result == Result.InvalidIndex
    with pytest.raises(PudError) as info:
        sub.write_row(3, np.zeros(5))
    assert info.value.result == Result.InvalidShape


def test_row_copy_ideal(subarray_factory, rng):
    sub = subarray_factory(n_cols=64)
    bits = rng.integers(0, 2, 64)
    sub.write_row(40, bits)
    sub.row_copy(40, 41)
    assert np.array_equal(sub.read_row(41), bits.astype(float))
    assert sub.precharged
    assert sub.counters["row_copy"] == 1


def test_row_copy_corrupted_by_high_threshold(subarray_factory):
    sub = subarray_factory(n_cols=2, tau=[0.5, 0.56])
    sub.write_row(40, np.ones(2))
    sub.row_copy(40, 41)
    assert list(sub.read_row(41)) == [1.0, 0.0]


def test_lossless_copy_ignores_threshold(subarray_factory):
    sub = subarray_factory(n_cols=2, tau=[0.5, 0.56], sigma_sense=0.05)
    sub.write_row(40, np.ones(2))
    sub.row_copy(40, 41, sensed=False)
    assert list(sub.read_row(41)) == [1.0, 1.0]


def test_row_copy_rejects_self_and_range(subarray_factory):
    sub = subarray_factory()
    with pytest.raises(PudError) as info:
        sub.row_copy(5, 5)
    assert info.value.result == Result.NotPermitted
    with pytest.raises(PudError) as info:
        sub.row_copy(5, 9999)
    assert info.value.result == Result.InvalidIndex


def test_frac_contraction(subarray_factory):
    sub = subarray_factory(n_cols=3)
    sub.write_row(50, np.array([1, 0, 1]))
    sub.frac(50)
    assert list(sub.read_row(50)) == [0.75, 0.25, 0.75]
    sub.frac(50, times=5)
    assert sub.read_row(50)[0] == pytest.approx(0.5 + 0.5 ** 7)
    assert abs(sub.read_row(50)[0] - 0.5) < 0.01
    assert sub.counters["frac"] == 6


def test_frac_fixed_point(subarray_factory):
    sub = subarray_factory(n_cols=2)
    sub.cells[50] = 0.5
    sub.frac(50, times=9)
    assert np.all(sub.read_row(50) == 0.5)


def test_frac_custom_factor():
    sub = AnalogSubarray(SubarrayGeometry(n_cols=1), noise=NoiseConfig.noiseless(), contraction_f=0.25)
    sub.write_row(60, [1])
    sub.frac(60, times=2)
    assert sub.read_row(60)[0] == pytest.approx(0.5 + 0.5 * 0.25 ** 2)


def test_simra_all_ones_restores(subarray_factory):
    sub = subarray_factory(n_cols=4)
    for row in range(8):
        sub.write_row(row, np.ones(4))
    result = sub.simra(range(8))
    assert np.all(result == 1)
    assert np.all(sub.cells[:8] == 1.0)
    assert sub.precharged


@pytest.mark.parametrize("tau,expected", [(0.5, 1), (0.55, 0)])
def test_simra_worked_example(subarray_factory, tau, expected):
    sub = subarray_factory(n_cols=1, tau=tau)
    for row, value in enumerate([1, 1, 1, 0, 0, 0.5, 1, 0]):
        sub.cells[row] = value
    assert sub.simra(range(8))[0] == expected
    assert np.all(sub.cells[:8, 0] == float(expected))


def test_simra_needs_two_rows(subarray_factory):
    sub = subarray_factory()
    with pytest.raises(PudError) as info:
        sub.simra([3])
    assert info.value.result == Result.InvalidArgument


def test_simra_full_restore_with_noise(subarray_factory, rng):
    sub = subarray_factory(n_cols=128, sigma_sense=0.01, seed=9)
    sub.cells[:8] = rng.random((8, 128))
    sub.simra(range(8))
    assert np.all(np.isin(sub.cells[:8], (0.0, 1.0)))


def test_simra_reproducible_under_seed(subarray_factory, rng):
    charges = rng.random((8, 256))
    results = []
    for _ in range(2):
        sub = subarray_factory(n_cols=256, sigma_sense=0.01, seed=42)
        sub.cells[:8] = charges
        results.append(sub.simra(range(8)))
    assert np.array_equal(*results)


def test_invalid_geometry():
    with pytest.raises(PudError) as info:
        AnalogSubarray(SubarrayGeometry(c_cell=0.0))
    assert info.value.result == Result.InvalidGeometry
    with pytest.raises(PudError):
        SubarrayGeometry(v_precharge=1.5).validate()


def test_unusual_row_count_warns(caplog):
    with caplog.at_level(logging.WARNING, logger='PudSim'):
        SubarrayGeometry(n_rows=64, n_cols=4).validate()
    assert "64" in caplog.text


def test_invalid_contraction_factor():
    with pytest.raises(PudError):
        AnalogSubarray(SubarrayGeometry(n_cols=1), contraction_f=1.0)
