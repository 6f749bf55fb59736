"""
Поведенческая модель одного подмассива DRAM на уровне зарядов.

Все напряжения и заряды нормированы на V_DD и лежат в [0, 1]. Модель
реализует три примитива с нарушением таймингов: RowCopy, Frac и SiMRA.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from errors.result import PudError, Result

logger = logging.getLogger('PudSim')

# Рекомендуемый диапазон числа строк в подмассиве
RECOMMENDED_ROWS = (256, 1024)

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class SubarrayGeometry:
    """Геометрия подмассива и ёмкости ячейки и битовой линии (фФ)."""
    n_rows: int = 512
    n_cols: int = 8192
    c_cell: float = 30.0
    c_bitline: float = 270.0
    v_precharge: float = 0.5

    def validate(self) -> None:
        """
        Проверяет геометрию

        Raises:
            PudError: InvalidGeometry при недопустимых значениях
        """
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise PudError(Result.InvalidGeometry,
                           f"размеры должны быть положительными: {self.n_rows}x{self.n_cols}")
        if self.c_cell <= 0 or self.c_bitline <= 0:
            raise PudError(Result.InvalidGeometry,
                           f"ёмкости должны быть положительными: c_cell={self.c_cell}, c_bitline={self.c_bitline}")
        if not 0.0 <= self.v_precharge <= 1.0:
            raise PudError(Result.InvalidGeometry, f"v_precharge вне [0, 1]: {self.v_precharge}")
        low, high = RECOMMENDED_ROWS
        if not low <= self.n_rows <= high:
            logger.warning(f"Число строк {self.n_rows} вне типичного диапазона [{low}, {high}]")

    def charge_step(self, n_active: int = 8) -> float:
        """Вклад единицы заряда одной ячейки в напряжение битовой линии при n_active строках."""
        return self.c_cell / (n_active * self.c_cell + self.c_bitline)


@dataclass(frozen=True)
class NoiseConfig:
    """Шумы: гауссов шум на каждое срабатывание усилителя и шум записи ячейки."""
    sigma_sense: float = 1e-4
    sigma_cell: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.sigma_sense < 0 or self.sigma_cell < 0:
            raise PudError(Result.InvalidArgument,
                           f"σ должны быть неотрицательными: sense={self.sigma_sense}, cell={self.sigma_cell}")

    @classmethod
    def noiseless(cls, seed: int = 0) -> "NoiseConfig":
        return cls(sigma_sense=0.0, sigma_cell=0.0, seed=seed)


def charge_share(cell_values: ArrayLike, geometry: SubarrayGeometry) -> Union[float, np.ndarray]:
    """
    Напряжение битовой линии после разделения заряда.

    V = (c_cell·Σv + c_bitline·v_precharge) / (n·c_cell + c_bitline)

    Args:
        cell_values: Заряды ячеек; одномерный список для одного столбца или
            матрица (строки × столбцы) для всех столбцов сразу
        geometry: Геометрия подмассива

    Returns:
        float для одного столбца или вектор напряжений по столбцам

    Raises:
        PudError: InvalidArgument при пустом списке ячеек
    """
    values = np.asarray(cell_values, dtype=np.float64)
    if values.ndim == 0 or values.shape[0] == 0:
        raise PudError(Result.InvalidArgument, "charge_share требует хотя бы одну ячейку")
    n = values.shape[0]
    voltage = (geometry.c_cell * values.sum(axis=0) + geometry.c_bitline * geometry.v_precharge) \
        / (n * geometry.c_cell + geometry.c_bitline)
    if np.ndim(voltage) == 0:
        return float(voltage)
    return voltage


def sense(voltage: ArrayLike, tau: ArrayLike, noise: NoiseConfig,
          rng: Optional[np.random.Generator] = None) -> Union[int, np.ndarray]:
    """
    Срабатывание усилителя считывания: 1 тогда и только тогда, когда V + ε > τ.

    Равенство даёт 0. При sigma_sense = 0 генератор не используется.

    Args:
        voltage: Напряжение битовой линии (скаляр или вектор)
        tau: Порог усилителя (скаляр или вектор той же длины)
        noise: Параметры шума
        rng: Генератор случайных чисел

    Returns:
        int для скаляра или вектор uint8
    """
    v = np.asarray(voltage, dtype=np.float64)
    if noise.sigma_sense > 0:
        if rng is None:
            rng = np.random.default_rng(noise.seed)
        v = v + rng.normal(0.0, noise.sigma_sense, size=np.broadcast(v, np.asarray(tau)).shape)
    bits = (v > np.asarray(tau, dtype=np.float64)).astype(np.uint8)
    if bits.ndim == 0:
        return int(bits)
    return bits


class AnalogSubarray:
    """
    Подмассив DRAM: матрица зарядов, пороги усилителей по столбцам и
    примитивы RowCopy, Frac и SiMRA.

    Состояние однопоточное. Каждый примитив открывает строки и завершается
    предзарядом, поэтому между операциями open_rows пуст. Счётчик counters
    учитывает выполненные примитивы (row_copy, frac, simra); запись с хоста
    не учитывается.
    """

    def __init__(self, geometry: SubarrayGeometry = SubarrayGeometry(),
                 tau: Optional[ArrayLike] = None,
                 noise: NoiseConfig = NoiseConfig(),
                 contraction_f: float = 0.5,
                 rng: Optional[np.random.Generator] = None):
        geometry.validate()
        noise.validate()
        if not 0.0 < contraction_f < 1.0:
            raise PudError(Result.InvalidArgument, f"коэффициент сжатия Frac вне (0, 1): {contraction_f}")

        self.geometry = geometry
        self.noise = noise
        self.contraction_f = float(contraction_f)
        self.rng = rng if rng is not None else np.random.default_rng(noise.seed)

        self.cells = np.zeros((geometry.n_rows, geometry.n_cols), dtype=np.float64)
        self.open_rows: set = set()
        self.counters: Counter = Counter()
        self.tau = np.full(geometry.n_cols, 0.5)
        if tau is not None:
            self.set_profile(tau)

    @property
    def n_rows(self) -> int:
        return self.geometry.n_rows

    @property
    def n_cols(self) -> int:
        return self.geometry.n_cols

    @property
    def precharged(self) -> bool:
        return not self.open_rows

    def set_profile(self, tau: ArrayLike) -> None:
        """Устанавливает пороги усилителей по столбцам."""
        tau = np.asarray(getattr(tau, "tau", tau), dtype=np.float64)
        if tau.shape != (self.n_cols,):
            raise PudError(Result.GeometryMismatch,
                           f"профиль порогов длины {tau.shape}, ожидалось {self.n_cols}")
        self.tau = tau.copy()

    def reset_counters(self) -> None:
        self.counters.clear()

    def _check_row(self, row: int) -> int:
        if not isinstance(row, (int, np.integer)) or not 0 <= row < self.n_rows:
            raise PudError(Result.InvalidIndex, f"строка {row} вне [0, {self.n_rows})")
        return int(row)

    def _check_precharged(self) -> None:
        if not self.precharged:
            raise PudError(Result.NotPermitted, f"подмассив не предзаряжен: открыты строки {sorted(self.open_rows)}")

    def _activate(self, rows: Iterable[int]) -> None:
        self._check_precharged()
        self.open_rows = set(rows)

    def precharge(self) -> None:
        self.open_rows = set()

    def write_row(self, row: int, bits: ArrayLike) -> None:
        """
        Запись логических битов в строку с хоста

        Args:
            row: Индекс строки
            bits: Вектор битов длины n_cols
        """
        row = self._check_row(row)
        self._check_precharged()
        values = np.asarray(bits, dtype=np.float64)
        if values.shape != (self.n_cols,):
            raise PudError(Result.InvalidShape, f"длина вектора {values.shape}, ожидалось {self.n_cols}")
        if self.noise.sigma_cell > 0:
            values = np.clip(values + self.rng.normal(0.0, self.noise.sigma_cell, self.n_cols), 0.0, 1.0)
        self.cells[row] = values

    def read_row(self, row: int) -> np.ndarray:
        """Копия зарядов строки."""
        return self.cells[self._check_row(row)].copy()

    def read_bits(self, row: int) -> np.ndarray:
        """Логическое значение строки, прочитанное хостом без ошибок."""
        return (self.cells[self._check_row(row)] > 0.5).astype(np.uint8)

    def row_copy(self, src: int, dst: int, sensed: bool = True) -> None:
        """
        RowCopy: ACT src, затем ACT dst через усилитель считывания

        При sensed=True значение проходит через реальный усилитель столбца
        (порог τ_c и шум), иначе используется идеальный порог 0.5 без шума.
        Исходная строка восстанавливается тем же значением.

        Raises:
            PudError: InvalidIndex при неверных индексах, NotPermitted при src == dst
        """
        src = self._check_row(src)
        dst = self._check_row(dst)
        if src == dst:
            raise PudError(Result.NotPermitted, f"копирование строки {src} в саму себя")
        self._activate((src,))
        voltage = charge_share(self.cells[src:src + 1], self.geometry)
        if sensed:
            bits = sense(voltage, self.tau, self.noise, self.rng)
        else:
            bits = sense(voltage, 0.5, NoiseConfig.noiseless())
        self.open_rows.add(dst)
        self.cells[src] = bits
        self.cells[dst] = bits
        self.precharge()
        self.counters["row_copy"] += 1

    def frac(self, row: int, times: int = 1) -> None:
        """Frac: каждое применение сжимает заряд к нейтральному уровню, v <- 0.5 + f·(v - 0.5)."""
        row = self._check_row(row)
        if times < 0:
            raise PudError(Result.InvalidArgument, f"отрицательное число Frac: {times}")
        for _ in range(times):
            self._activate((row,))
            self.cells[row] = 0.5 + self.contraction_f * (self.cells[row] - 0.5)
            self.precharge()
            self.counters["frac"] += 1

    def simra(self, rows: Iterable[int]) -> np.ndarray:
        """
        SiMRA: одновременная активация строк, разделение заряда и считывание

        Все ячейки активированных строк перезаписываются результатом.

        Args:
            rows: Индексы строк (не меньше двух)

        Returns:
            np.ndarray: Вектор результата длины n_cols (uint8)
        """
        rows = sorted({self._check_row(r) for r in rows})
        if len(rows) < 2:
            raise PudError(Result.InvalidArgument, f"SiMRA требует не менее 2 строк, получено {len(rows)}")
        self._activate(rows)
        voltage = charge_share(self.cells[rows], self.geometry)
        result = sense(voltage, self.tau, self.noise, self.rng)
        self.cells[rows] = result
        self.precharge()
        self.counters["simra"] += 1
        return result
