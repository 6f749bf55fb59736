"""
Выполнение операций MAJ3/MAJ5 над подмассивом в базовом и калиброванном
режимах, перечисление лестниц смещений и аналитический диапазон порогов,
исправимых лестницей.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import Literal, TypeAlias

import config
from dram.analog_subarray import AnalogSubarray, SubarrayGeometry
from errors.result import PudError, Result

if TYPE_CHECKING:
    from calibration.calibration import CalibrationTable

logger = logging.getLogger('PudSim')

MajMode: TypeAlias = Literal["baseline", "calibrated"]
MAJ_MODES = ("baseline", "calibrated")

# Больше 10 Frac уровень неотличим от нейтрального
MAX_FRAC = 10
# Допуск при слиянии одинаковых смещений
OFFSET_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class FracConfig:
    """Число Frac, применяемых к калибровочным строкам 1..3."""
    x: int
    y: int = 0
    z: int = 0

    def __post_init__(self):
        for count in self.counts:
            if not isinstance(count, (int, np.integer)) or not 0 <= count <= MAX_FRAC:
                raise PudError(Result.InvalidArgument, f"число Frac должно быть в [0, {MAX_FRAC}]: {self.counts}")

    @property
    def counts(self) -> Tuple[int, int, int]:
        return (self.x, self.y, self.z)

    @property
    def total(self) -> int:
        return self.x + self.y + self.z

    @property
    def label(self) -> str:
        return ",".join(str(c) for c in self.counts)

    @classmethod
    def parse(cls, text: str) -> "FracConfig":
        """Разбирает строку вида '2,1,0'."""
        try:
            counts = [int(part) for part in str(text).replace(" ", "").split(",")]
        except ValueError:
            raise PudError(Result.InvalidArgument, f"некорректная конфигурация Frac: {text!r}")
        if len(counts) != 3:
            raise PudError(Result.InvalidArgument, f"ожидалось три числа Frac: {text!r}")
        return cls(*counts)

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class LadderEntry:
    pattern: Tuple[int, int, int]
    offset: float


@dataclass(frozen=True)
class OffsetLadder:
    """
    Упорядоченные по возрастанию смещения калибровочных строк.

    Смещение - суммарное отклонение заряда калибровочных строк от
    нейтрального, Σ(v_j - 0.5), в единицах заряда ячейки.
    """
    frac_config: FracConfig
    contraction_f: float
    entries: Tuple[LadderEntry, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([entry.offset for entry in self.entries])

    @property
    def patterns(self) -> np.ndarray:
        """Матрица (уровни × 3) битовых шаблонов."""
        return np.array([entry.pattern for entry in self.entries], dtype=np.uint8)

    def mid_level(self) -> int:
        """Уровень со смещением, ближайшим к нулю; при равенстве берётся меньший индекс."""
        return int(np.argmin(np.abs(self.offsets)))


def enumerate_ladder(frac_config: FracConfig, contraction_f: float = 0.5) -> OffsetLadder:
    """
    Перебирает все 8 шаблонов калибровочных строк и строит лестницу смещений

    Строка, записанная битом b и прошедшая k операций Frac, отклоняется от
    нейтрального заряда на (b - 0.5)·f^k. Совпадающие смещения сливаются;
    для положительного смещения сохраняется лексикографически наибольший
    шаблон, для остальных - наименьший, что сохраняет симметрию
    шаблон/инверсия.

    Args:
        frac_config: Конфигурация Frac
        contraction_f: Коэффициент сжатия Frac

    Returns:
        OffsetLadder: Лестница смещений
    """
    if not 0.0 < contraction_f < 1.0:
        raise PudError(Result.InvalidArgument, f"коэффициент сжатия вне (0, 1): {contraction_f}")
    weights = [contraction_f ** k for k in frac_config.counts]
    candidates = []
    for pattern in itertools.product((0, 1), repeat=3):
        offset = sum((bit - 0.5) * w for bit, w in zip(pattern, weights))
        candidates.append((offset, pattern))
    candidates.sort()

    groups: List[List[Tuple[float, Tuple[int, int, int]]]] = []
    for offset, pattern in candidates:
        if groups and abs(offset - groups[-1][0][0]) <= OFFSET_MERGE_TOL:
            groups[-1].append((offset, pattern))
        else:
            groups.append([(offset, pattern)])

    entries = []
    for group in groups:
        offset = group[0][0]
        patterns = [pattern for _, pattern in group]
        chosen = max(patterns) if offset > OFFSET_MERGE_TOL else min(patterns)
        entries.append(LadderEntry(pattern=chosen, offset=offset))
    return OffsetLadder(frac_config=frac_config, contraction_f=contraction_f, entries=tuple(entries))


def majority_voltage(n_ones: int, offset: float, geometry: SubarrayGeometry, n_operands: int = 5) -> float:
    """
    Напряжение битовой линии без шума при SiMRA восьми строк: n_ones единиц
    среди операндов, остальные нули, калибровочные строки со смещением offset.
    """
    n_calib = len(config.CALIB_ROWS)
    total_charge = n_ones + 0.5 * n_calib + offset
    n_active = n_operands + n_calib
    return (geometry.c_cell * total_charge + geometry.c_bitline * geometry.v_precharge) \
        / (n_active * geometry.c_cell + geometry.c_bitline)


@dataclass(frozen=True)
class CorrectableRange:
    """Объединение интервалов порогов, исправимых лестницей."""
    intervals: Tuple[Tuple[float, float], ...]
    contiguous: bool

    @property
    def tau_min(self) -> float:
        return self.intervals[0][0]

    @property
    def tau_max(self) -> float:
        return self.intervals[-1][1]

    def contains(self, tau: float) -> bool:
        return any(lo <= tau < hi for lo, hi in self.intervals)


def _ones_threshold(x: int) -> Tuple[int, int]:
    """Число единиц среди пяти операндов SiMRA для граничных входов MAJx."""
    padding_ones = (5 - x) // 2
    high = math.ceil(x / 2) + padding_ones
    return high - 1, high


def correctable_range(ladder: OffsetLadder, geometry: SubarrayGeometry = SubarrayGeometry(),
                      x: int = 5) -> CorrectableRange:
    """
    Пороги, при которых хотя бы один уровень лестницы даёт безошибочный MAJx

    Для уровня со смещением o столбец безошибочен при τ ∈ [V_lo + o·s, V_hi + o·s),
    где V_lo, V_hi - напряжения без шума для ⌈x/2⌉-1 и ⌈x/2⌉ единиц,
    s = c_cell / (8·c_cell + c_bitline).

    Returns:
        CorrectableRange: Слитые интервалы и признак непрерывности
    """
    if len(ladder) == 0:
        raise PudError(Result.LadderTooSmall, "пустая лестница смещений")
    if x not in (3, 5):
        raise PudError(Result.InvalidArgument, f"поддерживаются MAJ3 и MAJ5, получено MAJ{x}")
    ones_lo, ones_hi = _ones_threshold(x)
    v_lo = majority_voltage(ones_lo, 0.0, geometry)
    v_hi = majority_voltage(ones_hi, 0.0, geometry)
    step = geometry.charge_step(len(config.SIMRA_ROWS))

    bands = sorted((v_lo + o * step, v_hi + o * step) for o in ladder.offsets)
    merged = [list(bands[0])]
    for lo, hi in bands[1:]:
        if lo <= merged[-1][1] + 1e-12:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return CorrectableRange(intervals=tuple((lo, hi) for lo, hi in merged), contiguous=len(merged) == 1)


@dataclass(frozen=True)
class OpCost:
    """Число примитивов, выданных операцией."""
    row_copy: int = 0
    frac: int = 0
    simra: int = 0

    def __add__(self, other: "OpCost") -> "OpCost":
        return OpCost(self.row_copy + other.row_copy, self.frac + other.frac, self.simra + other.simra)

    @property
    def total(self) -> int:
        return self.row_copy + self.frac + self.simra

    def as_dict(self) -> dict:
        return {"row_copy": self.row_copy, "frac": self.frac, "simra": self.simra}

    @classmethod
    def from_counters(cls, counters) -> "OpCost":
        return cls(counters.get("row_copy", 0), counters.get("frac", 0), counters.get("simra", 0))


@dataclass(frozen=True)
class RowLayout:
    """Назначение строк подмассива."""
    simra_rows: Tuple[int, ...] = config.SIMRA_ROWS
    operand_rows: Tuple[int, ...] = config.OPERAND_ROWS
    calib_rows: Tuple[int, ...] = config.CALIB_ROWS
    calib_storage_rows: Tuple[int, ...] = config.CALIB_STORAGE_ROWS
    const_zero_row: int = config.CONST_ZERO_ROW
    const_one_row: int = config.CONST_ONE_ROW
    staging_rows: Tuple[int, ...] = config.STAGING_ROWS
    scratch_start: int = config.SCRATCH_START_ROW

    def validate(self, n_rows: int) -> None:
        if len(self.simra_rows) != 8 or set(self.operand_rows) | set(self.calib_rows) != set(self.simra_rows):
            raise PudError(Result.InvalidSettings, "строки SiMRA должны состоять из 5 операндов и 3 калибровочных")
        if set(self.simra_rows) & set(self.calib_storage_rows):
            raise PudError(Result.InvalidSettings, "строки хранения калибровки пересекаются со строками SiMRA")
        if n_rows <= self.scratch_start:
            raise PudError(Result.InvalidGeometry,
                           f"подмассиву из {n_rows} строк не хватает служебных строк ({self.scratch_start})")

    def capacity_overhead(self, n_rows: int) -> float:
        """Доля строк, отданных под хранение калибровки."""
        return len(self.calib_storage_rows) / n_rows


@dataclass(frozen=True)
class MajPlan:
    """
    План операции MAJx

    Args:
        x: Число входов (3 или 5)
        frac_config: Конфигурация Frac калибровочных строк
        mode: 'baseline' - одна полузаряженная строка, 'calibrated' - шаблоны
            из таблицы калибровки
        sensed_copies: Размещать операнды реальным RowCopy через усилители
            столбцов, а не идеальной передачей
    """
    x: int = 5
    frac_config: FracConfig = field(default_factory=lambda: FracConfig(2, 1, 0))
    mode: MajMode = "calibrated"
    layout: RowLayout = field(default_factory=RowLayout)
    sensed_copies: bool = False

    def validate(self, geometry: SubarrayGeometry) -> None:
        if self.x not in (3, 5):
            raise PudError(Result.InvalidArgument, f"поддерживаются MAJ3 и MAJ5, получено MAJ{self.x}")
        if self.mode not in MAJ_MODES:
            raise PudError(Result.InvalidArgument, f"неизвестный режим: {self.mode}")
        if self.mode == "baseline" and (self.frac_config.y or self.frac_config.z):
            raise PudError(Result.InvalidArgument,
                           f"базовый режим применяет Frac только к первой строке: {self.frac_config}")
        self.layout.validate(geometry.n_rows)

    @property
    def method(self) -> str:
        return self.mode


class MajExecutor:
    """
    Исполнитель MAJx на одном подмассиве

    Константные строки 0 и 1 записываются при создании. Счётчик примитивов
    ведёт подмассив; cost возвращает накопленные значения.
    """

    def __init__(self, subarray: AnalogSubarray, plan: MajPlan,
                 table: Optional["CalibrationTable"] = None):
        plan.validate(subarray.geometry)
        self.subarray = subarray
        self.plan = plan
        self.layout = plan.layout
        self.table = None

        n_cols = subarray.n_cols
        subarray.write_row(self.layout.const_zero_row, np.zeros(n_cols, dtype=np.uint8))
        subarray.write_row(self.layout.const_one_row, np.ones(n_cols, dtype=np.uint8))
        if table is not None:
            self.store_calibration(table)

    @property
    def cost(self) -> OpCost:
        return OpCost.from_counters(self.subarray.counters)

    def store_calibration(self, table: "CalibrationTable") -> None:
        """Записывает шаблоны калибровки в строки хранения."""
        if table.n_cols != self.subarray.n_cols:
            raise PudError(Result.GeometryMismatch,
                           f"таблица на {table.n_cols} столбцов, подмассив на {self.subarray.n_cols}")
        if table.frac_config != self.plan.frac_config:
            raise PudError(Result.GeometryMismatch,
                           f"таблица для Frac {table.frac_config}, план для {self.plan.frac_config}")
        if table.x != self.plan.x:
            raise PudError(Result.GeometryMismatch, f"таблица для MAJ{table.x}, план для MAJ{self.plan.x}")
        if not math.isclose(table.contraction_f, self.subarray.contraction_f, abs_tol=1e-12):
            raise PudError(Result.GeometryMismatch,
                           f"таблица для f={table.contraction_f}, подмассив с f={self.subarray.contraction_f}")
        patterns = table.patterns
        for j, row in enumerate(self.layout.calib_storage_rows):
            self.subarray.write_row(row, patterns[:, j])
        self.table = table

    def _place(self, src: int, dst: int) -> None:
        self.subarray.row_copy(src, dst, sensed=self.plan.sensed_copies)

    def _load_calibration_rows(self) -> None:
        layout = self.layout
        counts = self.plan.frac_config.counts
        if self.plan.mode == "baseline":
            # Полузаряженная строка из 1 и константы 1 и 0
            sources = (layout.const_one_row, layout.const_one_row, layout.const_zero_row)
        else:
            if self.table is None:
                raise PudError(Result.MissingCalibration, "калиброванный режим требует таблицу калибровки")
            sources = layout.calib_storage_rows
        for src, dst, times in zip(sources, layout.calib_rows, counts):
            self._place(src, dst)
            self.subarray.frac(dst, times)

    def exec_rows(self, input_rows: Sequence[int]) -> np.ndarray:
        """
        MAJx над строками подмассива

        Операнды копируются в строки SiMRA, калибровочные строки загружаются
        и дробятся, затем выполняется SiMRA. Для MAJ3 два оставшихся операнда
        берутся из константных строк 0 и 1.

        Args:
            input_rows: Индексы строк с входами (x штук)

        Returns:
            np.ndarray: Результат по столбцам (uint8)
        """
        if len(input_rows) != self.plan.x:
            raise PudError(Result.InvalidArgument, f"MAJ{self.plan.x} ожидает {self.plan.x} входов, получено {len(input_rows)}")
        sources = list(input_rows)
        if self.plan.x == 3:
            sources += [self.layout.const_zero_row, self.layout.const_one_row]
        for src, dst in zip(sources, self.layout.operand_rows):
            self._place(src, dst)
        self._load_calibration_rows()
        return self.subarray.simra(self.layout.simra_rows)

    def exec_maj(self, inputs) -> np.ndarray:
        """
        MAJx над битами, переданными хостом

        Args:
            inputs: Матрица (x × n_cols) входных битов

        Returns:
            np.ndarray: Результат по столбцам (uint8)
        """
        inputs = np.asarray(inputs, dtype=np.uint8)
        if inputs.ndim != 2 or inputs.shape != (self.plan.x, self.subarray.n_cols):
            raise PudError(Result.InvalidShape,
                           f"входы формы {inputs.shape}, ожидалось ({self.plan.x}, {self.subarray.n_cols})")
        staging = self.layout.staging_rows[:self.plan.x]
        for row, bits in zip(staging, inputs):
            self.subarray.write_row(row, bits)
        return self.exec_rows(staging)

    def copy_result(self, dst: int) -> None:
        """Переносит результат последней SiMRA в строку dst."""
        self._place(self.layout.simra_rows[0], dst)


def _broadcast_bits(values, n_cols: int) -> np.ndarray:
    bits = np.asarray(values, dtype=np.uint8)
    return np.broadcast_to(bits, (n_cols,))


def maj3(executor: MajExecutor, a, b, c) -> np.ndarray:
    """MAJ3(a, b, c) = MAJ5(a, b, c, 0, 1); требует план с x = 3."""
    if executor.plan.x != 3:
        raise PudError(Result.InvalidArgument, "maj3 требует план MAJ3")
    n = executor.subarray.n_cols
    return executor.exec_maj(np.stack([_broadcast_bits(v, n) for v in (a, b, c)]))


def and_op(executor: MajExecutor, a, b) -> np.ndarray:
    return maj3(executor, a, b, 0)


def or_op(executor: MajExecutor, a, b) -> np.ndarray:
    return maj3(executor, a, b, 1)
