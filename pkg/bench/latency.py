"""
Модель задержек примитивов и расчёт пропускной способности.

Пропускная способность = число безошибочных столбцов на аппаратном масштабе
× параллельные банки × каналы / задержка операции.
"""

from dataclasses import dataclass

from errors.result import PudError, Result
from pud.pud_exec import OpCost


@dataclass(frozen=True)
class LatencyModel:
    """Задержки примитивов (нс) и параметры параллелизма."""
    t_row_copy: float = 210.0
    t_frac: float = 210.0
    t_simra: float = 210.0
    banks_parallel: int = 16
    channels: int = 4
    cols_per_subarray_hw: int = 65536

    def validate(self) -> None:
        values = (self.t_row_copy, self.t_frac, self.t_simra,
                  self.banks_parallel, self.channels, self.cols_per_subarray_hw)
        if any(v <= 0 for v in values):
            raise PudError(Result.InvalidSettings, f"параметры модели задержек должны быть положительными: {values}")

    def latency_ns(self, cost: OpCost) -> float:
        """Задержка операции, нс."""
        return cost.row_copy * self.t_row_copy + cost.frac * self.t_frac + cost.simra * self.t_simra

    def scaled(self, factor: float) -> "LatencyModel":
        return LatencyModel(self.t_row_copy * factor, self.t_frac * factor, self.t_simra * factor,
                            self.banks_parallel, self.channels, self.cols_per_subarray_hw)


def throughput(error_free_columns: int, n_cols_simulated: int, cost: OpCost,
               model: LatencyModel = LatencyModel()) -> float:
    """
    Пропускная способность, операций в секунду

    Доля безошибочных столбцов в симуляции переносится на аппаратный
    подмассив из cols_per_subarray_hw столбцов.

    Args:
        error_free_columns: Число безошибочных столбцов в симуляции
        n_cols_simulated: Общее число симулированных столбцов
        cost: Число примитивов операции
        model: Модель задержек
    """
    model.validate()
    if n_cols_simulated <= 0:
        raise PudError(Result.InvalidArgument, f"число столбцов должно быть положительным: {n_cols_simulated}")
    if not 0 <= error_free_columns <= n_cols_simulated:
        raise PudError(Result.InvalidArgument,
                       f"безошибочных столбцов {error_free_columns} при {n_cols_simulated} симулированных")
    latency_s = model.latency_ns(cost) * 1e-9
    if latency_s <= 0:
        raise PudError(Result.InvalidArgument, "операция без примитивов")
    hw_columns = error_free_columns * model.cols_per_subarray_hw / n_cols_simulated
    return hw_columns * model.banks_parallel * model.channels / latency_s
