import itertools

import numpy as np
import pytest

from calibration.calibration import CalibrationTable, majority
from dram.analog_subarray import AnalogSubarray, NoiseConfig, SubarrayGeometry, charge_share
from errors.result import PudError, Result
from pud.pud_exec import (FracConfig, LadderEntry, MajExecutor, MajPlan, OffsetLadder, OpCost,
                          and_op, correctable_range, enumerate_ladder, maj3, majority_voltage, or_op)

from conftest import B300, T210

GEOMETRY = SubarrayGeometry()


def test_ladder_without_frac_has_four_levels():
    ladder = enumerate_ladder(FracConfig(0, 0, 0))
    assert list(ladder.offsets) == [-1.5, -0.5, 0.5, 1.5]


def test_ladder_210_is_evenly_spaced():
    ladder = enumerate_ladder(T210, 0.5)
    expected = [-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875]
    assert np.allclose(ladder.offsets, expected, atol=1e-12)
    assert np.allclose(np.diff(ladder.offsets), 0.25)


def test_ladder_222_has_four_levels():
    ladder = enumerate_ladder(FracConfig(2, 2, 2), 0.5)
    assert np.allclose(ladder.offsets, [-0.375, -0.125, 0.125, 0.375])


@pytest.mark.parametrize("frac", ["0,0,0", "1,1,1", "2,2,2", "2,1,0", "3,2,1", "2,2,1"])
def test_ladder_symmetry(frac):
    ladder = enumerate_ladder(FracConfig.parse(frac))
    offsets = ladder.offsets
    assert np.allclose(offsets, -offsets[::-1], atol=1e-12)
    assert np.all(np.diff(offsets) > 1e-9)
    weights = [0.5 ** k for k in FracConfig.parse(frac).counts]
    for entry in ladder.entries:
        value = sum((b - 0.5) * w for b, w in zip(entry.pattern, weights))
        assert value == pytest.approx(entry.offset, abs=1e-12)


def test_ladder_patterns_are_complementary():
    ladder = enumerate_ladder(T210)
    for low, high in zip(ladder.entries, reversed(ladder.entries)):
        assert tuple(1 - b for b in low.pattern) == high.pattern


def test_mid_level_nearest_zero_lower_index():
    assert enumerate_ladder(T210).mid_level() == 3
    assert enumerate_ladder(FracConfig(0, 0, 0)).mid_level() == 1


def test_correctable_range_210():
    band = correctable_range(enumerate_ladder(T210), GEOMETRY)
    assert band.contiguous
    assert band.tau_min == pytest.approx(0.4191, abs=1e-3)
    assert band.tau_max == pytest.approx(0.5809, abs=1e-3)


def test_correctable_range_222():
    band = correctable_range(enumerate_ladder(FracConfig(2, 2, 2)), GEOMETRY)
    assert band.contiguous
    assert band.tau_min == pytest.approx(0.4485, abs=1e-3)
    assert band.tau_max == pytest.approx(0.5515, abs=1e-3)


def test_correctable_range_single_neutral_entry():
    ladder = OffsetLadder(T210, 0.5, (LadderEntry((0, 0, 0), 0.0),))
    band = correctable_range(ladder, GEOMETRY)
    assert band.intervals == ((pytest.approx(0.4706, abs=1e-4), pytest.approx(0.5294, abs=1e-4)),)


def test_correctable_range_same_for_maj3():
    ladder = enumerate_ladder(T210)
    assert correctable_range(ladder, GEOMETRY, x=3) == correctable_range(ladder, GEOMETRY, x=5)


def test_gapped_range_detected():
    ladder = OffsetLadder(T210, 0.5, (LadderEntry((0, 0, 0), -1.5), LadderEntry((1, 1, 1), 1.5)))
    band = correctable_range(ladder, GEOMETRY)
    assert not band.contiguous
    assert len(band.intervals) == 2
    assert not band.contains(0.5)


def test_offset_voltage_matches_charge_share():
    ladder = enumerate_ladder(T210)
    step = GEOMETRY.charge_step(8)
    for entry in ladder.entries:
        calib = [0.5 + (b - 0.5) * 0.5 ** k for b, k in zip(entry.pattern, T210.counts)]
        for ones in range(6):
            operands = [1.0] * ones + [0.0] * (5 - ones)
            v = charge_share(operands + calib, GEOMETRY)
            assert v == pytest.approx(majority_voltage(ones, 0.0, GEOMETRY) + entry.offset * step, abs=1e-12)
            assert v == pytest.approx(majority_voltage(ones, entry.offset, GEOMETRY), abs=1e-12)


@pytest.mark.parametrize("x", [3, 5])
@pytest.mark.parametrize("mode", ["baseline", "calibrated"])
def test_ideal_majority_oracle(subarray_factory, executor_factory, exhaustive, x, mode):
    executor = executor_factory(subarray_factory(n_cols=4), x=x, mode=mode)
    assert not exhaustive(executor).any()


def test_exec_maj_per_column_inputs(subarray_factory, executor_factory):
    combos = np.array(list(itertools.product((0, 1), repeat=5)), dtype=np.uint8).T
    executor = executor_factory(subarray_factory(n_cols=32), mode="calibrated")
    assert np.array_equal(executor.exec_maj(combos), majority(combos))


def test_clear_minority_gives_zero(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=1), mode="baseline")
    assert executor.exec_maj(np.array([[1], [1], [0], [0], [0]]))[0] == 0


def test_baseline_fails_on_high_threshold(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=1, tau=0.55), mode="baseline")
    assert executor.exec_maj(np.array([[1], [1], [1], [0], [0]]))[0] == 0


def test_calibration_pattern_fixes_high_threshold(subarray_factory, executor_factory):
    sub = subarray_factory(n_cols=1, tau=0.55)
    executor = executor_factory(sub, mode="calibrated", levels=7)
    assert executor.table.offsets[0] == pytest.approx(0.875)
    assert executor.exec_maj(np.array([[1], [1], [1], [0], [0]]))[0] == 1


@pytest.mark.parametrize("mode,frac", [("calibrated", T210), ("baseline", B300)])
def test_maj5_primitive_count(subarray_factory, executor_factory, mode, frac):
    sub = subarray_factory(n_cols=2)
    executor = executor_factory(sub, mode=mode, frac=frac)
    sub.reset_counters()
    executor.exec_maj(np.zeros((5, 2), dtype=np.uint8))
    assert executor.cost == OpCost(row_copy=8, frac=3, simra=1)


def test_maj3_truth_table(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=1), x=3)
    for a, b, c in itertools.product((0, 1), repeat=3):
        assert maj3(executor, a, b, c)[0] == int(a + b + c >= 2)


def test_and_or_truth_tables(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=1), x=3)
    for a, b in itertools.product((0, 1), repeat=2):
        assert and_op(executor, a, b)[0] == (a & b)
        assert or_op(executor, a, b)[0] == (a | b)


def test_complemented_inputs_with_flipped_pattern(subarray_factory, executor_factory):
    combos = np.array(list(itertools.product((0, 1), repeat=5)), dtype=np.uint8).T
    for level in range(8):
        direct = executor_factory(subarray_factory(n_cols=32), levels=level).exec_maj(combos)
        flipped = executor_factory(subarray_factory(n_cols=32), levels=7 - level).exec_maj(1 - combos)
        assert np.array_equal(flipped, 1 - direct)


def test_monotone_in_inputs(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=1, tau=0.53))
    for combo in itertools.product((0, 1), repeat=5):
        base = executor.exec_maj(np.array(combo).reshape(5, 1))[0]
        for i in range(5):
            if combo[i] == 0:
                raised = list(combo)
                raised[i] = 1
                assert executor.exec_maj(np.array(raised).reshape(5, 1))[0] >= base


def test_calibrated_mode_requires_table(subarray_factory):
    executor = MajExecutor(subarray_factory(n_cols=2), MajPlan(mode="calibrated"))
    with pytest.raises(PudError) as info:
        executor.exec_maj(np.zeros((5, 2)))
    assert info.value.result == Result.MissingCalibration


def test_baseline_rejects_fracs_on_other_rows(subarray_factory):
    with pytest.raises(PudError) as info:
        MajExecutor(subarray_factory(), MajPlan(mode="baseline", frac_config=T210))
    assert info.value.result == Result.InvalidArgument


def test_table_geometry_mismatch(subarray_factory):
    table = CalibrationTable.initial(T210, 0.5, 5)
    with pytest.raises(PudError) as info:
        MajExecutor(subarray_factory(n_cols=4), MajPlan(), table)
    assert info.value.result == Result.GeometryMismatch


def test_wrong_input_shape(subarray_factory, executor_factory):
    executor = executor_factory(subarray_factory(n_cols=4))
    with pytest.raises(PudError) as info:
        executor.exec_maj(np.zeros((3, 4)))
    assert info.value.result == Result.InvalidShape


def test_frac_config_parse_and_limits():
    assert FracConfig.parse("2, 1, 0") == T210
    assert FracConfig.parse("3,2,1").total == 6
    with pytest.raises(PudError):
        FracConfig(11, 0, 0)
    with pytest.raises(PudError):
        FracConfig.parse("1,2")


def test_sensed_copies_expose_copy_errors(subarray_factory):
    sub = subarray_factory(n_cols=1, tau=0.56)
    plan = MajPlan(mode="baseline", frac_config=B300, sensed_copies=True)
    executor = MajExecutor(sub, plan)
    # Единицы не переживают копирование при τ > 0.55
    assert executor.exec_maj(np.ones((5, 1)))[0] == 0


def test_table_for_other_majority_width_rejected(subarray_factory):
    table = CalibrationTable.initial(T210, 0.5, 4, x=3)
    with pytest.raises(PudError) as info:
        MajExecutor(subarray_factory(n_cols=4), MajPlan(x=5), table)
    assert info.value.result == Result.GeometryMismatch


def test_table_for_other_contraction_rejected():
    subarray = AnalogSubarray(SubarrayGeometry(n_cols=4), noise=NoiseConfig.noiseless(), contraction_f=0.7)
    with pytest.raises(PudError) as info:
        MajExecutor(subarray, MajPlan(), CalibrationTable.initial(T210, 0.5, 4))
    assert info.value.result == Result.GeometryMismatch
    executor = MajExecutor(subarray, MajPlan(), CalibrationTable.initial(T210, 0.7, 4))
    assert executor.table.contraction_f == 0.7


def test_op_cost_supports_only_accumulation():
    assert OpCost(8, 3, 1) + OpCost(1, 0, 0) == OpCost(9, 3, 1)
    assert not hasattr(OpCost, "__sub__")
