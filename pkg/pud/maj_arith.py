"""
Бит-последовательная арифметика на графах большинства по столбцам
подмассива: полный сумматор, 8-битное сложение и умножение.

Операнды хранятся в двухпроводном виде (бит и его инверсия в отдельных
строках), так как в немодифицированной DRAM нет инвертора. Инверсии
распространяются через двойственность MAJ: ¬MAJ(a, b, c) = MAJ(¬a, ¬b, ¬c).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from calibration.calibration import CalibrationTable
from dram.analog_subarray import AnalogSubarray, NoiseConfig, SubarrayGeometry
from errors.result import PudError, Result
from pud.pud_exec import FracConfig, MajExecutor, MajMode, MajPlan, OpCost

logger = logging.getLogger('PudSim')

ARITH_OPS = ("maj3", "maj5", "add8", "mul8")


class RowAllocator:
    """Простой распределитель свободных строк подмассива."""

    def __init__(self, start: int, stop: int):
        self.free_rows = list(range(start, stop))

    def malloc(self, count: int = 1) -> List[int]:
        """
        Выделяет count строк

        Raises:
            PudError: AllocationFailure, если свободных строк не хватает
        """
        if count > len(self.free_rows):
            raise PudError(Result.AllocationFailure,
                           f"запрошено {count} строк, свободно {len(self.free_rows)}")
        rows, self.free_rows = self.free_rows[:count], self.free_rows[count:]
        return rows

    def free(self, rows: Sequence[int]) -> None:
        self.free_rows = sorted(set(self.free_rows) | set(rows))

    @property
    def available(self) -> int:
        return len(self.free_rows)


@dataclass(frozen=True)
class ColumnOperand:
    """Число в столбцах: строки битов от младшего к старшему и строки инверсий."""
    width: int
    rows_value: Tuple[int, ...]
    rows_complement: Tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.rows_value) != self.width:
            raise PudError(Result.InvalidArgument, f"ширина {self.width} не совпадает с числом строк")
        if self.rows_complement and len(self.rows_complement) != self.width:
            raise PudError(Result.InvalidArgument, "число строк инверсий не совпадает с шириной")
        if set(self.rows_value) & set(self.rows_complement):
            raise PudError(Result.InvalidArgument, "строки значения и инверсии пересекаются")

    @property
    def dual_rail(self) -> bool:
        return bool(self.rows_complement)

    @property
    def rows(self) -> Tuple[int, ...]:
        return self.rows_value + self.rows_complement


class AdderBit(NamedTuple):
    sum: int
    sum_n: Optional[int]
    carry: int
    carry_n: int


class MajArithmetic:
    """
    Арифметика поверх исполнителя MAJ

    Каждая операция большинства выполняется через SiMRA и копирует результат
    в выделенную строку. План исполнителя должен быть MAJ5; MAJ3 строится как
    MAJ5 с константами 0 и 1.
    """

    def __init__(self, executor: MajExecutor):
        if executor.plan.x != 5:
            raise PudError(Result.InvalidArgument, "арифметике нужен план MAJ5")
        self.executor = executor
        self.subarray = executor.subarray
        self.layout = executor.layout
        self.allocator = RowAllocator(self.layout.scratch_start, self.subarray.n_rows)
        self.zero = self.layout.const_zero_row
        self.one = self.layout.const_one_row

    def load(self, values, width: int = 8, dual_rail: bool = True) -> ColumnOperand:
        """
        Записывает беззнаковые числа (по одному на столбец) в строки

        Args:
            values: Вектор чисел длины n_cols или одно число для всех столбцов
            width: Разрядность
            dual_rail: Записывать ли инверсии
        """
        n_cols = self.subarray.n_cols
        values = np.broadcast_to(np.asarray(values, dtype=np.uint64), (n_cols,))
        if np.any(values >= (1 << width)):
            raise PudError(Result.InvalidArgument, f"значения не помещаются в {width} бит")
        rows_value = self.allocator.malloc(width)
        rows_complement = self.allocator.malloc(width) if dual_rail else []
        for i in range(width):
            bits = ((values >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
            self.subarray.write_row(rows_value[i], bits)
            if dual_rail:
                self.subarray.write_row(rows_complement[i], 1 - bits)
        return ColumnOperand(width, tuple(rows_value), tuple(rows_complement))

    def read(self, operand: ColumnOperand) -> np.ndarray:
        """Читает числа операнда по столбцам."""
        result = np.zeros(self.subarray.n_cols, dtype=np.uint64)
        for i, row in enumerate(operand.rows_value):
            result |= self.subarray.read_bits(row).astype(np.uint64) << np.uint64(i)
        return result

    def free(self, operand: ColumnOperand) -> None:
        self.allocator.free(operand.rows)

    def _maj(self, rows: Sequence[int]) -> int:
        """MAJ5 над строками с сохранением результата в новую строку."""
        if len(rows) == 3:
            rows = list(rows) + [self.zero, self.one]
        dst = self.allocator.malloc(1)[0]
        self.executor.exec_rows(rows)
        self.executor.copy_result(dst)
        return dst

    def full_adder(self, a: int, a_n: int, b: int, b_n: int, c: int, c_n: int,
                   with_sum_complement: bool = False) -> AdderBit:
        """
        Полный сумматор: перенос = MAJ3(a, b, c), его инверсия = MAJ3(¬a, ¬b, ¬c),
        сумма = MAJ5(a, b, c, ¬перенос, ¬перенос)

        Args:
            a, a_n, b, b_n, c, c_n: Строки входов и их инверсий
            with_sum_complement: Вычислить также ¬сумма = MAJ5(¬a, ¬b, ¬c, перенос, перенос)

        Returns:
            AdderBit: Строки суммы, её инверсии (или None), переноса и его инверсии
        """
        carry = self._maj((a, b, c))
        carry_n = self._maj((a_n, b_n, c_n))
        total = self._maj((a, b, c, carry_n, carry_n))
        total_n = self._maj((a_n, b_n, c_n, carry, carry)) if with_sum_complement else None
        return AdderBit(total, total_n, carry, carry_n)

    def add(self, a: ColumnOperand, b: ColumnOperand, carry_in: int = 0,
            dual_rail: bool = False) -> ColumnOperand:
        """
        Сложение с последовательным переносом; результат на один бит шире

        Args:
            a, b: Двухпроводные операнды одной ширины
            carry_in: Входной перенос (0 или 1)
            dual_rail: Вычислять ли инверсии битов результата
        """
        if a.width != b.width:
            raise PudError(Result.InvalidArgument, f"ширины операндов различаются: {a.width} и {b.width}")
        if not (a.dual_rail and b.dual_rail):
            raise PudError(Result.InvalidArgument, "сложению нужны двухпроводные операнды")
        c, c_n = (self.one, self.zero) if carry_in else (self.zero, self.one)
        sums, sums_n = [], []
        intermediate_carries = []
        for i in range(a.width):
            bit = self.full_adder(a.rows_value[i], a.rows_complement[i],
                                  b.rows_value[i], b.rows_complement[i],
                                  c, c_n, with_sum_complement=dual_rail)
            sums.append(bit.sum)
            if dual_rail:
                sums_n.append(bit.sum_n)
            if i:
                intermediate_carries += [c, c_n]
            c, c_n = bit.carry, bit.carry_n
        self.allocator.free(intermediate_carries)
        if dual_rail:
            return ColumnOperand(a.width + 1, tuple(sums + [c]), tuple(sums_n + [c_n]))
        self.allocator.free([c_n])
        return ColumnOperand(a.width + 1, tuple(sums + [c]))

    def add8(self, a: ColumnOperand, b: ColumnOperand) -> ColumnOperand:
        """8-битное сложение, 9-битный результат."""
        if a.width != 8 or b.width != 8:
            raise PudError(Result.InvalidArgument, "add8 ожидает 8-битные операнды")
        return self.add(a, b)

    def mul8(self, a: ColumnOperand, b: ColumnOperand) -> ColumnOperand:
        """
        8-битное умножение сдвигом и сложением, 16-битный результат

        Частичные произведения - AND(a_j, b_i) = MAJ3(a_j, b_i, 0) с инверсией
        OR(¬a_j, ¬b_i) = MAJ3(¬a_j, ¬b_i, 1). Накопитель складывается с каждым
        следующим частичным произведением восемью полными сумматорами.
        """
        if a.width != 8 or b.width != 8:
            raise PudError(Result.InvalidArgument, "mul8 ожидает 8-битные операнды")
        if not (a.dual_rail and b.dual_rail):
            raise PudError(Result.InvalidArgument, "умножению нужны двухпроводные операнды")
        width = a.width

        partials = []
        for i in range(width):
            value = [self._maj((a.rows_value[j], b.rows_value[i], self.zero)) for j in range(width)]
            complement = [self._maj((a.rows_complement[j], b.rows_complement[i], self.one)) for j in range(width)]
            partials.append(ColumnOperand(width, tuple(value), tuple(complement)))

        acc_value = list(partials[0].rows_value)
        acc_complement = list(partials[0].rows_complement)
        for i in range(1, width):
            upper_value = acc_value[i:i + width]
            upper_complement = acc_complement[i:i + width]
            if len(upper_value) < width:
                # Старший бит накопителя ещё не вычислен
                upper_value.append(self.zero)
                upper_complement.append(self.one)
            upper = ColumnOperand(width, tuple(upper_value), tuple(upper_complement))
            partial_sum = self.add(upper, partials[i], dual_rail=True)
            self.allocator.free([r for r in upper.rows if r not in (self.zero, self.one)])
            self.free(partials[i])
            acc_value = acc_value[:i] + list(partial_sum.rows_value)
            acc_complement = acc_complement[:i] + list(partial_sum.rows_complement)

        self.allocator.free(acc_complement)
        return ColumnOperand(2 * width, tuple(acc_value))


@lru_cache(maxsize=None)
def op_cost(op: str, frac_config: FracConfig = FracConfig(2, 1, 0), mode: MajMode = "calibrated") -> OpCost:
    """
    Точное число примитивов операции, полученное прогоном графа на
    подмассиве из одного столбца

    Args:
        op: 'maj3', 'maj5', 'add8' или 'mul8'
        frac_config: Конфигурация Frac
        mode: Режим MAJ
    """
    if op not in ARITH_OPS:
        raise PudError(Result.InvalidArgument, f"неизвестная операция: {op}")
    geometry = SubarrayGeometry(n_rows=512, n_cols=1)
    subarray = AnalogSubarray(geometry, noise=NoiseConfig.noiseless())
    x = 3 if op == "maj3" else 5
    plan = MajPlan(x=x, frac_config=frac_config, mode=mode)
    table = None
    if mode == "calibrated":
        table = CalibrationTable.initial(frac_config, subarray.contraction_f, 1, x=x)
    executor = MajExecutor(subarray, plan, table)

    if op in ("maj3", "maj5"):
        subarray.reset_counters()
        executor.exec_maj(np.zeros((x, 1), dtype=np.uint8))
        return executor.cost

    arith = MajArithmetic(executor)
    a = arith.load(0)
    b = arith.load(0)
    subarray.reset_counters()
    if op == "add8":
        arith.add8(a, b)
    else:
        arith.mul8(a, b)
    cost = executor.cost
    logger.debug(f"Стоимость {op} (Frac {frac_config}, {mode}): {cost.as_dict()}")
    return cost
