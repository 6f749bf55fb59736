"""
Итеративный подбор уровня калибровки для каждого столбца и сохранение
таблицы калибровки в файл.

На каждой итерации шаблоны таблицы записываются в строки хранения,
выполняется серия MAJx со случайными входами, и для каждого столбца
считается смещение доли единиц. Столбец, выдающий 1 слишком часто,
опускается на уровень вниз, слишком редко - поднимается вверх.
"""

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from typing_extensions import Literal, TypeAlias

import config
from dram.analog_subarray import AnalogSubarray
from errors.result import PudError, Result
from pud.pud_exec import FracConfig, MajExecutor, MajPlan, OffsetLadder, enumerate_ladder

logger = logging.getLogger('PudSim')

BiasReference: TypeAlias = Literal["expected", "raw"]
BIAS_REFERENCES = ("expected", "raw")


@dataclass(frozen=True)
class CalibParams:
    """
    Параметры калибровки

    bias_reference:
        'expected' - смещение считается относительно доли единиц в
        правильных ответах тех же испытаний;
        'raw' - относительно 0.5.
    """
    n_iterations: int = 20
    samples_per_iteration: int = 512
    bias_threshold: float = 0.05
    bias_reference: BiasReference = "expected"
    seed: int = 0

    def validate(self) -> None:
        if self.n_iterations <= 0 or self.samples_per_iteration <= 0:
            raise PudError(Result.InvalidSettings,
                           f"итерации и выборки должны быть положительными: "
                           f"{self.n_iterations}, {self.samples_per_iteration}")
        if not 0.0 < self.bias_threshold < 0.5:
            raise PudError(Result.InvalidSettings, f"порог смещения вне (0, 0.5): {self.bias_threshold}")
        if self.bias_reference not in BIAS_REFERENCES:
            raise PudError(Result.InvalidSettings, f"неизвестная опора смещения: {self.bias_reference}")


class CalibrationTable:
    """
    Уровень лестницы смещений для каждого столбца

    Шаблоны не хранятся отдельно, а всегда берутся из лестницы по уровням,
    поэтому согласованность уровней и шаблонов сохраняется автоматически.
    """

    def __init__(self, frac_config: FracConfig, contraction_f: float, levels, x: int = 5):
        self.frac_config = frac_config
        self.contraction_f = float(contraction_f)
        self.x = x
        self.ladder: OffsetLadder = enumerate_ladder(frac_config, contraction_f)
        levels = np.array(levels, dtype=np.int64)
        if levels.ndim != 1:
            raise PudError(Result.InvalidShape, "уровни калибровки должны быть вектором")
        if levels.size and (levels.min() < 0 or levels.max() >= len(self.ladder)):
            raise PudError(Result.InvalidIndex,
                           f"уровни калибровки вне [0, {len(self.ladder) - 1}]")
        self.levels = levels

    @classmethod
    def initial(cls, frac_config: FracConfig, contraction_f: float, n_cols: int, x: int = 5) -> "CalibrationTable":
        """Таблица, где каждый столбец стоит на среднем уровне лестницы."""
        ladder = enumerate_ladder(frac_config, contraction_f)
        return cls(frac_config, contraction_f, np.full(n_cols, ladder.mid_level()), x=x)

    @property
    def n_cols(self) -> int:
        return int(self.levels.shape[0])

    @property
    def patterns(self) -> np.ndarray:
        """Матрица (n_cols × 3) битов для строк хранения."""
        return self.ladder.patterns[self.levels]

    @property
    def offsets(self) -> np.ndarray:
        return self.ladder.offsets[self.levels]

    def __eq__(self, other):
        return (isinstance(other, CalibrationTable)
                and self.frac_config == other.frac_config
                and self.contraction_f == other.contraction_f
                and self.x == other.x
                and np.array_equal(self.levels, other.levels))

    def __repr__(self):
        return f"CalibrationTable(frac={self.frac_config}, f={self.contraction_f}, n_cols={self.n_cols}, x={self.x})"


class SamplingResult(NamedTuple):
    outputs: np.ndarray
    expected: np.ndarray


def random_inputs(rng: np.random.Generator, x: int, n_cols: int) -> np.ndarray:
    """Равномерно случайные входные биты (x × n_cols)."""
    return rng.integers(0, 2, size=(x, n_cols), dtype=np.uint8)


def majority(inputs: np.ndarray) -> np.ndarray:
    """Правильный ответ MAJx по столбцам."""
    return (inputs.sum(axis=0) > inputs.shape[0] // 2).astype(np.uint8)


def get_bias(outputs, expected=None):
    """
    Смещение доли единиц в выходах

    Args:
        outputs: Выходы испытаний; вектор для одного столбца или матрица
            (испытания × столбцы)
        expected: Правильные ответы тех же испытаний; без них опорой служит 0.5

    Returns:
        float или вектор смещений: в [-0.5, 0.5] относительно 0.5,
        в [-1, 1] относительно правильных ответов
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    if outputs.size == 0:
        raise PudError(Result.InvalidArgument, "пустой набор выходов")
    reference = 0.5 if expected is None else np.asarray(expected, dtype=np.float64).mean(axis=0)
    bias = outputs.mean(axis=0) - reference
    if np.ndim(bias) == 0:
        return float(bias)
    return bias


def majx_sampling(executor: MajExecutor, n_samples: int, rng: np.random.Generator) -> SamplingResult:
    """
    Выполняет n_samples операций MAJx со случайными входами

    Returns:
        SamplingResult: Выходы и правильные ответы, матрицы (n_samples × n_cols)
    """
    x = executor.plan.x
    n_cols = executor.subarray.n_cols
    outputs = np.empty((n_samples, n_cols), dtype=np.uint8)
    expected = np.empty((n_samples, n_cols), dtype=np.uint8)
    for i in range(n_samples):
        inputs = random_inputs(rng, x, n_cols)
        expected[i] = majority(inputs)
        outputs[i] = executor.exec_maj(inputs)
    return SamplingResult(outputs, expected)


def calibrate(subarray: AnalogSubarray, plan: MajPlan, params: CalibParams = CalibParams(),
              rng: Optional[np.random.Generator] = None) -> CalibrationTable:
    """
    Подбирает уровень калибровки для каждого столбца подмассива

    Пороги и шум берутся из самого подмассива.

    Args:
        subarray: Подмассив с профилем порогов
        plan: План MAJx в калиброванном режиме
        params: Параметры калибровки
        rng: Генератор входов (по умолчанию из params.seed)

    Returns:
        CalibrationTable: Итоговая таблица
    """
    params.validate()
    if plan.mode != "calibrated":
        raise PudError(Result.InvalidArgument, "калибровка требует план в калиброванном режиме")
    table = CalibrationTable.initial(plan.frac_config, subarray.contraction_f, subarray.n_cols, x=plan.x)
    n_levels = len(table.ladder)
    if n_levels < 2:
        raise PudError(Result.LadderTooSmall, f"лестница {plan.frac_config} содержит {n_levels} уровень")
    rng = rng if rng is not None else np.random.default_rng(params.seed)
    executor = MajExecutor(subarray, plan, table)

    start = time.perf_counter()
    levels = table.levels.copy()
    for iteration in range(params.n_iterations):
        table = CalibrationTable(plan.frac_config, subarray.contraction_f, levels, x=plan.x)
        executor.store_calibration(table)
        sampling = majx_sampling(executor, params.samples_per_iteration, rng)
        expected = sampling.expected if params.bias_reference == "expected" else None
        bias = get_bias(sampling.outputs, expected)

        down = bias > params.bias_threshold
        up = bias < -params.bias_threshold
        levels = np.clip(levels - down + up, 0, n_levels - 1)
        logger.debug(f"Итерация калибровки {iteration + 1}/{params.n_iterations}: "
                     f"вниз {int(down.sum())}, вверх {int(up.sum())}")

    table = CalibrationTable(plan.frac_config, subarray.contraction_f, levels, x=plan.x)
    executor.store_calibration(table)
    elapsed = time.perf_counter() - start
    logger.info(f"Калибровка {subarray.n_cols} столбцов (Frac {plan.frac_config}) завершена за {elapsed:.2f} с")
    return table


def save_table(table: CalibrationTable, path: str) -> None:
    """
    Сохраняет таблицу калибровки в JSON

    Args:
        table: Таблица калибровки
        path: Путь к файлу
    """
    document = {
        "format_version": config.CALIBRATION_FORMAT_VERSION,
        "kind": config.CALIBRATION_KIND,
        "frac_config": list(table.frac_config.counts),
        "contraction_f": table.contraction_f,
        "maj_inputs": table.x,
        "n_cols": table.n_cols,
        "levels": [int(level) for level in table.levels],
    }
    try:
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.exists(directory):
            os.makedirs(directory)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(document, f)
            f.write("\n")
    except OSError as e:
        raise PudError(Result.FileIOFailure, f"{path}: {e}")
    logger.info(f"Таблица калибровки сохранена: {path}")


def load_table(path: str, n_cols: Optional[int] = None) -> CalibrationTable:
    """
    Загружает таблицу калибровки; шаблоны пересчитываются по лестнице

    Args:
        path: Путь к файлу
        n_cols: Ожидаемое число столбцов

    Raises:
        PudError: FileNotFound, InvalidFormat, InvalidVersion или GeometryMismatch
    """
    if not os.path.isfile(path):
        raise PudError(Result.FileNotFound, path)
    try:
        with open(path, encoding='utf-8') as f:
            document = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise PudError(Result.InvalidFormat, f"{path}: {e}")
    except OSError as e:
        raise PudError(Result.FileIOFailure, f"{path}: {e}")

    if not isinstance(document, dict) or document.get("kind") != config.CALIBRATION_KIND:
        raise PudError(Result.InvalidFormat, f"{path}: это не таблица калибровки")
    version = document.get("format_version")
    if version != config.CALIBRATION_FORMAT_VERSION:
        raise PudError(Result.InvalidVersion, f"{path}: версия формата {version!r}")

    try:
        frac_config = FracConfig(*[int(c) for c in document["frac_config"]])
        contraction_f = float(document["contraction_f"])
        x = int(document.get("maj_inputs", 5))
        stored_cols = int(document["n_cols"])
        levels = list(document["levels"])
    except (KeyError, TypeError, ValueError) as e:
        raise PudError(Result.InvalidFormat, f"{path}: {e}")
    if not all(isinstance(level, int) and not isinstance(level, bool) for level in levels):
        raise PudError(Result.InvalidFormat, f"{path}: уровни должны быть целыми числами")

    if len(levels) != stored_cols:
        raise PudError(Result.InvalidFormat, f"{path}: {len(levels)} уровней при n_cols={stored_cols}")
    if n_cols is not None and stored_cols != n_cols:
        raise PudError(Result.GeometryMismatch, f"{path}: таблица на {stored_cols} столбцов, ожидалось {n_cols}")
    try:
        table = CalibrationTable(frac_config, contraction_f, levels, x=x)
    except PudError as e:
        raise PudError(Result.InvalidFormat, f"{path}: {e.details}")
    logger.info(f"Таблица калибровки загружена: {path}")
    return table
