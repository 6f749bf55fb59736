"""
Эксперименты: измерение доли ошибочных столбцов (ECR), сравнение базового
и калиброванного режимов, развёртка конфигураций Frac и исследование дрейфа.

Все случайные потоки выводятся из SeedSequence([seed, bank, поток, ...]),
поэтому параллельный и последовательный запуски дают одинаковые отчёты.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from bench.latency import LatencyModel, throughput
from bench.report import ExperimentReport
from bench.worker import ExperimentWorker
from calibration.calibration import (CalibParams, CalibrationTable, calibrate, majority,
                                     random_inputs)
from dram.analog_subarray import AnalogSubarray, NoiseConfig, SubarrayGeometry
from dram.variation_model import DriftConfig, SenseAmpProfile, drift_profile, sample_profile
from errors.result import PudError, Result
from pud.maj_arith import op_cost
from pud.pud_exec import FracConfig, MajExecutor, MajMode, MajPlan, RowLayout

logger = logging.getLogger('PudSim')

# Идентификаторы потоков случайных чисел
PROFILE_STREAM = 0
NOISE_STREAM = 1
CALIB_STREAM = 2
MEASURE_STREAM = 3
DRIFT_STREAM = 4
DRIFT_NOISE_STREAM = 5

DEFAULT_SWEEP = (FracConfig(0, 0, 0), FracConfig(1, 1, 1), FracConfig(2, 2, 2),
                 FracConfig(2, 1, 0), FracConfig(3, 2, 1))
DEFAULT_TEMPERATURES = (40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0)
DEFAULT_DAYS = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Полная конфигурация эксперимента."""
    seed: int = 0
    n_cols: int = 8192
    n_rows: int = 512
    banks: int = 1
    n_trials: int = 8192
    workers: int = 0
    c_cell: float = 30.0
    c_bitline: float = 270.0
    v_precharge: float = 0.5
    contraction_f: float = 0.5
    sigma_tau: float = 0.04
    sigma_sense: float = 1e-4
    sigma_cell: float = 0.0
    sensed_copies: bool = False
    x: int = 5
    frac: FracConfig = FracConfig(2, 1, 0)
    baseline_frac: FracConfig = FracConfig(3, 0, 0)
    calib: CalibParams = CalibParams()
    latency: LatencyModel = LatencyModel()
    drift: DriftConfig = DriftConfig()
    fresh_noise: bool = True
    layout: RowLayout = field(default_factory=RowLayout)

    def validate(self) -> None:
        if self.banks <= 0 or self.n_trials <= 0:
            raise PudError(Result.InvalidSettings, f"banks и trials должны быть положительными: "
                                                   f"{self.banks}, {self.n_trials}")
        if self.sigma_tau < 0:
            raise PudError(Result.InvalidSettings, f"sigma_tau должно быть неотрицательным: {self.sigma_tau}")
        self.geometry.validate()
        self.noise.validate()
        self.calib.validate()
        self.latency.validate()
        self.drift.validate()

    @property
    def geometry(self) -> SubarrayGeometry:
        return SubarrayGeometry(self.n_rows, self.n_cols, self.c_cell, self.c_bitline, self.v_precharge)

    @property
    def noise(self) -> NoiseConfig:
        return NoiseConfig(self.sigma_sense, self.sigma_cell, self.seed)

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> "ExperimentConfig":
        """Строит конфигурацию из словаря настроек (config.DEFAULT_SETTINGS)."""
        try:
            return cls(
                seed=int(settings["seed"]),
                n_cols=int(settings["cols"]),
                n_rows=int(settings["rows"]),
                banks=int(settings["banks"]),
                n_trials=int(settings["trials"]),
                workers=int(settings["workers"]),
                c_cell=float(settings["c_cell"]),
                c_bitline=float(settings["c_bitline"]),
                v_precharge=float(settings["v_precharge"]),
                contraction_f=float(settings["contraction_f"]),
                sigma_tau=float(settings["sigma_tau"]),
                sigma_sense=float(settings["sigma_sense"]),
                sigma_cell=float(settings["sigma_cell"]),
                sensed_copies=bool(settings["sensed_copies"]),
                frac=FracConfig.parse(settings["frac"]),
                baseline_frac=FracConfig.parse(settings["baseline_frac"]),
                calib=CalibParams(n_iterations=int(settings["calib_iterations"]),
                                  samples_per_iteration=int(settings["calib_samples"]),
                                  bias_threshold=float(settings["bias_threshold"]),
                                  bias_reference=settings["bias_reference"],
                                  seed=int(settings["seed"])),
                latency=LatencyModel(t_row_copy=float(settings["t_row_copy"]),
                                     t_frac=float(settings["t_frac"]),
                                     t_simra=float(settings["t_simra"]),
                                     banks_parallel=int(settings["banks_parallel"]),
                                     channels=int(settings["channels"]),
                                     cols_per_subarray_hw=int(settings["cols_hw"])),
                drift=DriftConfig(kappa_temp=float(settings["kappa_temp"]),
                                  sigma_temp=float(settings["sigma_temp"]),
                                  sigma_time=float(settings["sigma_time"]),
                                  t_cal=float(settings["t_cal"]),
                                  seed=int(settings["seed"])),
                fresh_noise=bool(settings["fresh_noise"]),
            )
        except KeyError as e:
            raise PudError(Result.InvalidSettings, f"отсутствует настройка {e}")
        except (TypeError, ValueError) as e:
            raise PudError(Result.InvalidSettings, str(e))


def seed_stream(seed: int, *ids: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, *ids])


def stream_rng(seed: int, *ids: int) -> np.random.Generator:
    return np.random.default_rng(seed_stream(seed, *ids))


def bank_profile(cfg: ExperimentConfig, bank: int) -> SenseAmpProfile:
    """Профиль порогов банка; общий для всех режимов одного зерна."""
    return sample_profile(cfg.n_cols, cfg.sigma_tau, seed=seed_stream(cfg.seed, bank, PROFILE_STREAM))


def build_subarray(cfg: ExperimentConfig, profile: SenseAmpProfile,
                   noise_seed: np.random.SeedSequence) -> AnalogSubarray:
    return AnalogSubarray(cfg.geometry, tau=profile.tau, noise=cfg.noise,
                          contraction_f=cfg.contraction_f, rng=np.random.default_rng(noise_seed))


def make_plan(cfg: ExperimentConfig, mode: MajMode, frac: FracConfig) -> MajPlan:
    return MajPlan(x=cfg.x, frac_config=frac, mode=mode, layout=cfg.layout, sensed_copies=cfg.sensed_copies)


class EcrResult(NamedTuple):
    ecr: float
    error_flags: np.ndarray
    n_trials: int

    @property
    def error_free(self) -> int:
        return int((~self.error_flags).sum())


def measure_ecr(executor: MajExecutor, n_trials: int = 8192,
                rng: Optional[np.random.Generator] = None) -> EcrResult:
    """
    Доля столбцов, хотя бы раз ошибившихся на n_trials случайных входах

    Args:
        executor: Исполнитель MAJx (с таблицей калибровки в калиброванном режиме)
        n_trials: Число испытаний
        rng: Генератор входов

    Returns:
        EcrResult: ECR и флаги ошибочных столбцов
    """
    if n_trials <= 0:
        raise PudError(Result.InvalidArgument, f"число испытаний должно быть положительным: {n_trials}")
    rng = rng if rng is not None else np.random.default_rng()
    x = executor.plan.x
    n_cols = executor.subarray.n_cols
    flags = np.zeros(n_cols, dtype=bool)
    for _ in range(n_trials):
        inputs = random_inputs(rng, x, n_cols)
        flags |= executor.exec_maj(inputs) != majority(inputs)
    return EcrResult(float(flags.mean()), flags, n_trials)


class ArmResult(NamedTuple):
    bank: int
    error_flags: np.ndarray
    table: Optional[CalibrationTable]


def run_arm(cfg: ExperimentConfig, mode: MajMode, frac: FracConfig, bank: int,
            table: Optional[CalibrationTable] = None) -> ArmResult:
    """
    Одно плечо эксперимента на одном банке: профиль, калибровка (в
    калиброванном режиме, если таблица не передана) и измерение ECR.
    """
    profile = bank_profile(cfg, bank)
    subarray = build_subarray(cfg, profile, seed_stream(cfg.seed, bank, NOISE_STREAM))
    plan = make_plan(cfg, mode, frac)
    if mode == "calibrated" and table is None:
        table = calibrate(subarray, plan, cfg.calib, rng=stream_rng(cfg.seed, bank, CALIB_STREAM))
    executor = MajExecutor(subarray, plan, table if mode == "calibrated" else None)
    result = measure_ecr(executor, cfg.n_trials, stream_rng(cfg.seed, bank, MEASURE_STREAM))
    logger.debug(f"Банк {bank}, {mode} Frac {frac}: ECR {result.ecr:.4f}")
    return ArmResult(bank, result.error_flags, table)


def make_report(cfg: ExperimentConfig, method: str, mode: MajMode, frac: FracConfig,
                error_flags: np.ndarray, new_error_prone: float = 0.0) -> ExperimentReport:
    """Сводит флаги ошибок всех банков в отчёт с пропускной способностью."""
    n_cols = int(error_flags.size)
    error_free = int((~error_flags).sum())
    tput = {op: throughput(error_free, n_cols, op_cost(op, frac, mode), cfg.latency)
            for op in ("maj5", "add8", "mul8")}
    overhead = cfg.layout.capacity_overhead(cfg.n_rows) if mode == "calibrated" else 0.0
    return ExperimentReport(
        method=method,
        frac_x=frac.x, frac_y=frac.y, frac_z=frac.z,
        sigma_tau=cfg.sigma_tau, sigma_sense=cfg.sigma_sense,
        seed=cfg.seed, n_cols=n_cols, n_trials=cfg.n_trials,
        ecr=float(error_flags.mean()), error_free_cols=error_free,
        new_error_prone=float(new_error_prone),
        tput_maj5_ops=tput["maj5"], tput_add8_ops=tput["add8"], tput_mul8_ops=tput["mul8"],
        capacity_overhead=overhead,
    )


def _pool(results: Dict[Tuple, ArmResult], prefix: Tuple) -> np.ndarray:
    """Объединяет флаги банков одного плеча в порядке номеров банков."""
    keys = sorted(k for k in results if k[:len(prefix)] == prefix)
    return np.concatenate([results[k].error_flags for k in keys])


def run_method(cfg: ExperimentConfig, mode: MajMode, frac: FracConfig,
               worker: Optional[ExperimentWorker] = None) -> ExperimentReport:
    """Одно плечо на всех банках."""
    cfg.validate()
    worker = worker or ExperimentWorker(cfg.workers)
    tasks = {(bank,): partial(run_arm, cfg, mode, frac, bank) for bank in range(cfg.banks)}
    results = worker.run(tasks)
    return make_report(cfg, mode, mode, frac, _pool(results, ()))


def run_table1(cfg: ExperimentConfig, worker: Optional[ExperimentWorker] = None
               ) -> Tuple[ExperimentReport, ExperimentReport]:
    """
    Сравнение базового режима и калиброванного режима на одних и тех же
    профилях порогов

    Returns:
        Tuple: Отчёты (базовый, калиброванный)
    """
    cfg.validate()
    worker = worker or ExperimentWorker(cfg.workers)
    logger.info(f"Сравнение режимов: {cfg.banks} банк(ов) по {cfg.n_cols} столбцов, "
                f"{cfg.n_trials} испытаний, seed={cfg.seed}")
    arms = (("baseline", cfg.baseline_frac), ("calibrated", cfg.frac))
    tasks = {(arm, bank): partial(run_arm, cfg, mode, frac, bank)
             for arm, (mode, frac) in enumerate(arms) for bank in range(cfg.banks)}
    results = worker.run(tasks)
    baseline, calibrated = (make_report(cfg, mode, mode, frac, _pool(results, (arm,)))
                            for arm, (mode, frac) in enumerate(arms))

    logger.warning("Пропускная способность экстраполирована на аппаратный масштаб "
                   f"({cfg.latency.cols_per_subarray_hw} столбцов × {cfg.latency.banks_parallel} банков "
                   f"× {cfg.latency.channels} каналов)")
    if baseline.error_free_cols:
        logger.info(f"Отношение безошибочных столбцов: {calibrated.error_free_cols / baseline.error_free_cols:.3f}")
    return baseline, calibrated


def sweep_frac(cfg: ExperimentConfig, configs: Sequence[FracConfig] = DEFAULT_SWEEP,
               baseline_fracs: Sequence[int] = (), worker: Optional[ExperimentWorker] = None
               ) -> List[ExperimentReport]:
    """
    Развёртка конфигураций Frac: калибровка, ECR и пропускная способность
    для каждой; baseline_fracs добавляет базовые плечи B(x, 0, 0).

    Returns:
        List[ExperimentReport]: Строка на конфигурацию, сначала калиброванные
    """
    cfg.validate()
    worker = worker or ExperimentWorker(cfg.workers)
    arms: List[Tuple[MajMode, FracConfig]] = [("calibrated", frac) for frac in configs]
    arms += [("baseline", FracConfig(x)) for x in baseline_fracs]
    tasks = {(arm, bank): partial(run_arm, cfg, mode, frac, bank)
             for arm, (mode, frac) in enumerate(arms) for bank in range(cfg.banks)}
    results = worker.run(tasks)
    reports = []
    for arm, (mode, frac) in enumerate(arms):
        report = make_report(cfg, mode, mode, frac, _pool(results, (arm,)))
        logger.info(f"{mode} Frac {frac}: ECR {report.ecr:.4f}, MAJ5 {report.tput_maj5_ops / 1e12:.3f} TOPS")
        reports.append(report)
    return reports


class DriftCondition(NamedTuple):
    temperature: float
    days: float
    label: str


def drift_conditions(cfg: ExperimentConfig, temperatures: Sequence[float],
                     days: Sequence[float]) -> List[DriftCondition]:
    """Серия по температуре (дни = 0) и серия по времени (T = t_cal)."""
    conditions = [DriftCondition(float(t), 0.0, f"calibrated/temp={t:g}C") for t in temperatures]
    conditions += [DriftCondition(cfg.drift.t_cal, float(d), f"calibrated/days={d:g}") for d in days]
    return conditions


def _drift_bank(cfg: ExperimentConfig, bank: int, conditions: Sequence[DriftCondition]
                ) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Калибровка при t_cal и повторные измерения при каждом условии."""
    profile = bank_profile(cfg, bank)
    plan = make_plan(cfg, "calibrated", cfg.frac)
    subarray = build_subarray(cfg, profile, seed_stream(cfg.seed, bank, NOISE_STREAM))
    table = calibrate(subarray, plan, cfg.calib, rng=stream_rng(cfg.seed, bank, CALIB_STREAM))
    drift = replace(cfg.drift, seed=int(seed_stream(cfg.seed, bank, DRIFT_STREAM).generate_state(1)[0]))

    def remeasure(tau_profile: SenseAmpProfile, index: Optional[int]) -> np.ndarray:
        if cfg.fresh_noise and index is not None:
            noise_seed = seed_stream(cfg.seed, bank, DRIFT_NOISE_STREAM, index)
        else:
            noise_seed = seed_stream(cfg.seed, bank, DRIFT_NOISE_STREAM)
        state = build_subarray(cfg, tau_profile, noise_seed)
        executor = MajExecutor(state, plan, table)
        return measure_ecr(executor, cfg.n_trials, stream_rng(cfg.seed, bank, MEASURE_STREAM)).error_flags

    calibration_flags = remeasure(profile, None)
    flags = [remeasure(drift_profile(profile, drift, c.temperature, c.days), i)
             for i, c in enumerate(conditions)]
    return calibration_flags, flags


def run_drift(cfg: ExperimentConfig, temperatures: Sequence[float] = DEFAULT_TEMPERATURES,
              days: Sequence[float] = DEFAULT_DAYS, worker: Optional[ExperimentWorker] = None
              ) -> List[ExperimentReport]:
    """
    Калибрует один раз при t_cal и измеряет ECR после дрейфа порогов

    new_error_prone - доля столбцов, безошибочных при условиях калибровки,
    но ошибочных после дрейфа. Первая строка - условия калибровки.

    Returns:
        List[ExperimentReport]: Строки по условиям
    """
    cfg.validate()
    worker = worker or ExperimentWorker(cfg.workers)
    conditions = drift_conditions(cfg, temperatures, days)
    results = worker.run({bank: partial(_drift_bank, cfg, bank, conditions) for bank in range(cfg.banks)})
    banks = sorted(results)
    calibration_flags = np.concatenate([results[b][0] for b in banks])

    reports = [make_report(cfg, "calibrated", "calibrated", cfg.frac, calibration_flags)]
    for i, condition in enumerate(conditions):
        flags = np.concatenate([results[b][1][i] for b in banks])
        new_error_prone = float(np.mean(flags & ~calibration_flags))
        reports.append(make_report(cfg, condition.label, "calibrated", cfg.frac, flags, new_error_prone))
        logger.info(f"{condition.label}: ECR {flags.mean():.4f}, новые ошибочные {new_error_prone:.4%}")
    return reports
