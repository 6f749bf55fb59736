import itertools

import numpy as np
import pytest

from calibration.calibration import CalibrationTable, majority
from dram.analog_subarray import AnalogSubarray, NoiseConfig, SubarrayGeometry
from pud.pud_exec import FracConfig, MajExecutor, MajPlan

T210 = FracConfig(2, 1, 0)
B300 = FracConfig(3, 0, 0)


def make_subarray(n_cols=8, tau=None, sigma_sense=0.0, sigma_cell=0.0, seed=0, n_rows=512):
    geometry = SubarrayGeometry(n_rows=n_rows, n_cols=n_cols)
    if tau is not None:
        tau = np.broadcast_to(np.asarray(tau, dtype=np.float64), (n_cols,))
    return AnalogSubarray(geometry, tau=tau, noise=NoiseConfig(sigma_sense, sigma_cell, seed))


def make_executor(subarray, x=5, mode="calibrated", frac=None, levels=None):
    frac = frac or (T210 if mode == "calibrated" else B300)
    plan = MajPlan(x=x, frac_config=frac, mode=mode)
    table = None
    if mode == "calibrated":
        table = CalibrationTable.initial(frac, subarray.contraction_f, subarray.n_cols, x=x)
        if levels is not None:
            table = CalibrationTable(frac, subarray.contraction_f,
                                     np.broadcast_to(levels, (subarray.n_cols,)), x=x)
    return MajExecutor(subarray, plan, table)


def exhaustive_error_flags(executor):
    """Флаги столбцов, ошибающихся хотя бы на одном из 2^x входов."""
    x = executor.plan.x
    n_cols = executor.subarray.n_cols
    flags = np.zeros(n_cols, dtype=bool)
    for combo in itertools.product((0, 1), repeat=x):
        inputs = np.repeat(np.array(combo, dtype=np.uint8)[:, None], n_cols, axis=1)
        flags |= executor.exec_maj(inputs) != majority(inputs)
    return flags


def error_free_levels(tau, frac=T210, x=5):
    """Уровни лестницы, на которых столбец с порогом tau безошибочен (перебор)."""
    ladder_size = len(CalibrationTable.initial(frac, 0.5, 1).ladder)
    good = set()
    for level in range(ladder_size):
        executor = make_executor(make_subarray(n_cols=1, tau=tau), x=x, frac=frac, levels=level)
        if not exhaustive_error_flags(executor)[0]:
            good.add(level)
    return good


@pytest.fixture
def subarray_factory():
    return make_subarray


@pytest.fixture
def executor_factory():
    return make_executor


@pytest.fixture
def exhaustive():
    return exhaustive_error_flags


@pytest.fixture
def level_oracle():
    return error_free_levels


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
