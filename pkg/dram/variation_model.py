"""
Профили порогов усилителей считывания и их дрейф по температуре и времени.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from errors.result import PudError, Result

# Границы, в которых удерживаются пороги
TAU_MIN = 0.01
TAU_MAX = 0.99

SeedLike = Union[int, np.random.SeedSequence, None]


@dataclass(frozen=True, eq=False)
class SenseAmpProfile:
    """Пороги τ_c усилителей по столбцам в единицах V_DD."""
    tau: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=np.float64)
        if tau.ndim != 1:
            raise PudError(Result.InvalidShape, "профиль порогов должен быть вектором")
        if np.any(tau <= 0.0) or np.any(tau >= 1.0):
            raise PudError(Result.InvalidArgument, "пороги должны лежать в (0, 1)")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def n_cols(self) -> int:
        return int(self.tau.shape[0])

    @classmethod
    def ideal(cls, n_cols: int) -> "SenseAmpProfile":
        return cls(np.full(n_cols, 0.5))

    def with_column(self, col: int, tau: float) -> "SenseAmpProfile":
        """Копия профиля с изменённым порогом одного столбца."""
        values = self.tau.copy()
        values[col] = tau
        return SenseAmpProfile(values)

    def __eq__(self, other):
        return isinstance(other, SenseAmpProfile) and np.array_equal(self.tau, other.tau)


@dataclass(frozen=True)
class DriftConfig:
    """
    Модель дрейфа порогов: систематический линейный сдвиг по температуре и
    случайные гауссовы возмущения по температуре и по времени.
    """
    kappa_temp: float = 1e-5
    sigma_temp: float = 1e-5
    sigma_time: float = 5e-5
    t_cal: float = 40.0
    seed: int = 0

    def validate(self) -> None:
        if self.sigma_temp < 0 or self.sigma_time < 0:
            raise PudError(Result.InvalidArgument,
                           f"σ дрейфа должны быть неотрицательными: temp={self.sigma_temp}, time={self.sigma_time}")

    @classmethod
    def zero(cls, t_cal: float = 40.0, seed: int = 0) -> "DriftConfig":
        return cls(kappa_temp=0.0, sigma_temp=0.0, sigma_time=0.0, t_cal=t_cal, seed=seed)


def sample_profile(n_cols: int, sigma_tau: float, seed: SeedLike = None,
                   rng: Optional[np.random.Generator] = None) -> SenseAmpProfile:
    """
    Генерирует профиль порогов: τ_c = clamp(0.5 + N(0, σ_tau), 0.01, 0.99)

    Args:
        n_cols: Число столбцов
        sigma_tau: Стандартное отклонение порога
        seed: Зерно или SeedSequence
        rng: Готовый генератор (имеет приоритет над seed)

    Returns:
        SenseAmpProfile: Профиль порогов
    """
    if sigma_tau < 0:
        raise PudError(Result.InvalidArgument, f"sigma_tau должно быть неотрицательным: {sigma_tau}")
    if n_cols <= 0:
        raise PudError(Result.InvalidGeometry, f"число столбцов должно быть положительным: {n_cols}")
    if sigma_tau == 0:
        return SenseAmpProfile.ideal(n_cols)
    rng = rng if rng is not None else np.random.default_rng(seed)
    tau = 0.5 + rng.normal(0.0, sigma_tau, n_cols)
    return SenseAmpProfile(np.clip(tau, TAU_MIN, TAU_MAX))


def drift_profile(profile: SenseAmpProfile, drift: DriftConfig,
                  temperature: float, elapsed_days: float) -> SenseAmpProfile:
    """
    Дрейф профиля относительно условий калибровки.

    Случайные составляющие берутся из одних и тех же нормальных величин
    для всех условий при данном drift.seed, поэтому отклонение столбца
    растёт монотонно с |ΔT| и с числом дней.

    Args:
        profile: Исходный профиль (не изменяется)
        drift: Параметры дрейфа
        temperature: Температура, °C
        elapsed_days: Время после калибровки, дни

    Returns:
        SenseAmpProfile: Новый профиль
    """
    drift.validate()
    if elapsed_days < 0:
        raise PudError(Result.InvalidArgument, f"отрицательное время: {elapsed_days}")
    delta_t = temperature - drift.t_cal
    rng = np.random.default_rng(drift.seed)
    z_temp = rng.standard_normal(profile.n_cols)
    z_time = rng.standard_normal(profile.n_cols)
    shift = drift.kappa_temp * delta_t \
        + drift.sigma_temp * abs(delta_t) * z_temp \
        + drift.sigma_time * elapsed_days * z_time
    return SenseAmpProfile(np.clip(profile.tau + shift, TAU_MIN, TAU_MAX))
