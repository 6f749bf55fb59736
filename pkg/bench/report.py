"""
Отчёт эксперимента и запись CSV с фиксированным порядком столбцов.
"""

import csv
import io
import os
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Union

from errors.result import PudError, Result

CSV_HEADER = (
    "method", "frac_x", "frac_y", "frac_z", "sigma_tau", "sigma_sense", "seed", "n_cols", "n_trials",
    "ecr", "error_free_cols", "new_error_prone", "tput_maj5_ops", "tput_add8_ops", "tput_mul8_ops",
    "capacity_overhead",
)


@dataclass(frozen=True)
class ExperimentReport:
    """Результаты одного плеча эксперимента."""
    method: str
    frac_x: int
    frac_y: int
    frac_z: int
    sigma_tau: float
    sigma_sense: float
    seed: int
    n_cols: int
    n_trials: int
    ecr: float
    error_free_cols: int
    new_error_prone: float
    tput_maj5_ops: float
    tput_add8_ops: float
    tput_mul8_ops: float
    capacity_overhead: float

    def __post_init__(self):
        if not 0.0 <= self.ecr <= 1.0:
            raise PudError(Result.InvalidArgument, f"ECR вне [0, 1]: {self.ecr}")
        if min(self.tput_maj5_ops, self.tput_add8_ops, self.tput_mul8_ops) < 0:
            raise PudError(Result.InvalidArgument, "отрицательная пропускная способность")

    @property
    def error_free_ratio(self) -> float:
        return self.error_free_cols / self.n_cols

    def to_row(self) -> List[str]:
        return [format_value(getattr(self, name)) for name in CSV_HEADER]


def format_value(value) -> str:
    """Детерминированное текстовое представление значения для CSV."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def format_percent(fraction: float) -> str:
    """Доля в процентах с одним знаком после запятой, например '0.6%'."""
    return f"{fraction * 100:.1f}%"


def write_csv(reports: Iterable[ExperimentReport], out: Optional[Union[str, IO[str]]] = None) -> str:
    """
    Записывает отчёты в CSV

    Args:
        reports: Отчёты в порядке вывода
        out: Путь к файлу, открытый поток или None

    Returns:
        str: Текст CSV
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerow(report.to_row())
    text = buffer.getvalue()

    if isinstance(out, str):
        try:
            directory = os.path.dirname(os.path.abspath(out))
            if not os.path.exists(directory):
                os.makedirs(directory)
            with open(out, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise PudError(Result.FileIOFailure, f"{out}: {e}")
    elif out is not None:
        out.write(text)
    return text
