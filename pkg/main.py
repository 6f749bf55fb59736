#!/usr/bin/env python3
"""
Точка входа симулятора операций большинства в DRAM.
Разбирает подкоманды, настраивает логирование и возвращает код выхода.
"""

import argparse
import logging
import sys
import traceback
from typing import Any, Callable, Dict, List, Optional

import config
from errors.result import PudError, Result
from logger.custom_logger import setup_logging, log_system_info

# Ключи настроек, которые задаются общими флагами
FLAG_KEYS = ("seed", "cols", "rows", "sigma_tau", "sigma_sense", "frac", "out", "table",
             "trials", "banks", "workers", "log_to_file", "log_dir", "debug")


def _common_parser() -> argparse.ArgumentParser:
    """Общие флаги; значения по умолчанию не подставляются, чтобы не перекрывать файл настроек."""
    parser = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    parser.add_argument('--config', type=str, help='Файл настроек (JSON ключ/значение)')
    parser.add_argument('--seed', type=int, help='Зерно всех случайных потоков')
    parser.add_argument('--cols', type=int, help='Число столбцов подмассива')
    parser.add_argument('--rows', type=int, help='Число строк подмассива')
    parser.add_argument('--sigma-tau', dest='sigma_tau', type=float, help='σ порогов усилителей, V_DD')
    parser.add_argument('--sigma-sense', dest='sigma_sense', type=float, help='σ шума считывания, V_DD')
    parser.add_argument('--frac', type=str, help='Конфигурация Frac калибровочных строк, например 2,1,0')
    parser.add_argument('--out', type=str, help='Файл CSV для результатов')
    parser.add_argument('--table', type=str, help='Файл таблицы калибровки')
    parser.add_argument('--trials', type=int, help='Число испытаний при измерении ECR')
    parser.add_argument('--banks', type=int, help='Число симулируемых подмассивов')
    parser.add_argument('--workers', type=int, help='Число рабочих потоков (0 - по числу ядер)')
    parser.add_argument('--log-file', dest='log_to_file', action='store_true', help='Включить логирование в файл')
    parser.add_argument('--log-dir', dest='log_dir', type=str, help='Директория для файлов логов')
    parser.add_argument('--debug', action='store_true', help='Включить отладочный режим')
    return parser


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Парсинг аргументов командной строки"""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='pud_sim', parents=[common],
        description='Симулятор операций большинства в DRAM с многоуровневой калибровкой')
    subparsers = parser.add_subparsers(dest='command', metavar='команда')
    subparsers.required = True

    calibrate = subparsers.add_parser('calibrate', parents=[common], help='Калибровка и сохранение таблицы')
    calibrate.add_argument('--maj', type=int, choices=(3, 5), default=5, help='Число входов MAJ')

    ecr = subparsers.add_parser('ecr', parents=[common], help='Измерение доли ошибочных столбцов')
    ecr.add_argument('--method', choices=('baseline', 'calibrated'), default='calibrated', help='Режим MAJ')
    ecr.add_argument('--maj', type=int, choices=(3, 5), default=5, help='Число входов MAJ')

    tput = subparsers.add_parser('throughput', parents=[common], help='Пропускная способность MAJ5/ADD8/MUL8')
    tput.add_argument('--method', choices=('baseline', 'calibrated'), default='calibrated', help='Режим MAJ')
    tput.add_argument('--error-free-ratio', dest='error_free_ratio', type=float, default=None,
                      help='Доля безошибочных столбцов вместо измерения')

    subparsers.add_parser('table1', parents=[common], help='Сравнение базового и калиброванного режимов')

    sweep = subparsers.add_parser('sweep-frac', parents=[common], help='Развёртка конфигураций Frac')
    sweep.add_argument('--configs', type=str, default='0,0,0;1,1,1;2,2,2;2,1,0;3,2,1',
                       help='Конфигурации через ";", например "2,1,0;2,2,2"')
    sweep.add_argument('--baseline-fracs', dest='baseline_fracs', type=str, default='',
                       help='Число Frac для базовых плеч, например "1,3,6"')

    drift = subparsers.add_parser('drift', parents=[common], help='Дрейф по температуре и времени')
    drift.add_argument('--temperatures', type=str, default='40,50,60,70,80,90,100', help='Температуры, °C')
    drift.add_argument('--days', type=str, default='0,1,2,3,4,5,6,7', help='Дни после калибровки')
    drift.add_argument('--fixed-noise', dest='fixed_noise', action='store_true',
                       help='Повторять шум считывания калибровочного измерения')

    subparsers.add_parser('ladder', parents=[common], help='Печать лестницы смещений')

    return parser.parse_args(argv)


def build_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Настройки: значения по умолчанию, затем файл, затем флаги командной строки."""
    settings = config.load_settings(getattr(args, 'config', None))
    for key in FLAG_KEYS:
        if hasattr(args, key):
            settings[key] = getattr(args, key)
    return settings


def _parse_list(text: str, cast: Callable = float, sep: str = ',') -> list:
    try:
        return [cast(part) for part in text.replace(' ', '').split(sep) if part]
    except ValueError:
        raise PudError(Result.InvalidArgument, f"некорректный список: {text!r}")


def _emit_csv(reports, settings: Dict[str, Any]) -> None:
    from bench.report import write_csv

    out = settings.get('out')
    if out:
        write_csv(reports, out)
        logging.getLogger('PudSim').info(f"Результаты записаны: {out}")
    else:
        write_csv(reports, sys.stdout)


def cmd_ladder(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from dram.analog_subarray import SubarrayGeometry
    from pud.pud_exec import FracConfig, correctable_range, enumerate_ladder

    frac = FracConfig.parse(settings['frac'])
    ladder = enumerate_ladder(frac, settings['contraction_f'])
    geometry = SubarrayGeometry(settings['rows'], settings['cols'], settings['c_cell'],
                                settings['c_bitline'], settings['v_precharge'])
    print(f"# Лестница смещений Frac {frac}: {len(ladder)} уровней")
    print("# уровень\tшаблон\tсмещение")
    for level, entry in enumerate(ladder.entries):
        pattern = "".join(str(bit) for bit in entry.pattern)
        print(f"{level}\t{pattern}\t{entry.offset:+.6f}")
    band = correctable_range(ladder, geometry)
    state = "непрерывный" if band.contiguous else "с разрывами"
    print(f"# Исправимые пороги: ({band.tau_min:.4f}, {band.tau_max:.4f}), {state}")
    return 0


def cmd_calibrate(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from dataclasses import replace

    from bench.experiments import (CALIB_STREAM, NOISE_STREAM, ExperimentConfig, bank_profile,
                                   build_subarray, make_plan, seed_stream, stream_rng)
    from bench.report import format_percent
    from calibration.calibration import calibrate, save_table

    cfg = replace(ExperimentConfig.from_settings(settings), x=args.maj)
    cfg.validate()
    subarray = build_subarray(cfg, bank_profile(cfg, 0), seed_stream(cfg.seed, 0, NOISE_STREAM))
    table = calibrate(subarray, make_plan(cfg, "calibrated", cfg.frac), cfg.calib,
                      rng=stream_rng(cfg.seed, 0, CALIB_STREAM))
    path = settings['table'] or 'calibration.json'
    save_table(table, path)

    counts = [int((table.levels == level).sum()) for level in range(len(table.ladder))]
    print(f"Таблица калибровки: {path}")
    print(f"Столбцов по уровням: {counts}")
    print(f"Накладные расходы ёмкости: {format_percent(cfg.layout.capacity_overhead(cfg.n_rows))}")
    return 0


def cmd_ecr(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from dataclasses import replace

    from bench.experiments import ExperimentConfig, make_report, run_arm, run_method
    from calibration.calibration import load_table

    cfg = replace(ExperimentConfig.from_settings(settings), x=args.maj)
    cfg.validate()
    mode = args.method
    frac = cfg.frac if mode == "calibrated" else cfg.baseline_frac
    if mode == "calibrated" and settings['table']:
        table = load_table(settings['table'], n_cols=cfg.n_cols)
        if cfg.banks > 1:
            logging.getLogger('PudSim').warning("Таблица калибровки относится к одному банку, используется банк 0")
        arm = run_arm(cfg, mode, table.frac_config, 0, table=table)
        report = make_report(cfg, mode, mode, table.frac_config, arm.error_flags)
    else:
        report = run_method(cfg, mode, frac)
    print(f"ECR ({mode}, Frac {report.frac_x},{report.frac_y},{report.frac_z}): {report.ecr:.4%}, "
          f"безошибочных столбцов {report.error_free_cols} из {report.n_cols}")
    if settings.get('out'):
        _emit_csv([report], settings)
    return 0


def cmd_throughput(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from bench.experiments import ExperimentConfig, run_method
    from bench.latency import throughput
    from pud.maj_arith import op_cost

    cfg = ExperimentConfig.from_settings(settings)
    cfg.validate()
    mode = args.method
    frac = cfg.frac if mode == "calibrated" else cfg.baseline_frac
    if args.error_free_ratio is not None:
        if not 0.0 <= args.error_free_ratio <= 1.0:
            raise PudError(Result.InvalidArgument, f"доля вне [0, 1]: {args.error_free_ratio}")
        n_cols = cfg.latency.cols_per_subarray_hw
        error_free = int(round(args.error_free_ratio * n_cols))
    else:
        report = run_method(cfg, mode, frac)
        n_cols, error_free = report.n_cols, report.error_free_cols
    for op in ("maj5", "add8", "mul8"):
        cost = op_cost(op, frac, mode)
        ops = throughput(error_free, n_cols, cost, cfg.latency)
        print(f"{op}: {cost.as_dict()}, задержка {cfg.latency.latency_ns(cost):.0f} нс, {ops / 1e12:.3f} TOPS")
    return 0


def cmd_table1(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from bench.experiments import ExperimentConfig, run_table1
    from bench.report import format_percent

    cfg = ExperimentConfig.from_settings(settings)
    baseline, calibrated = run_table1(cfg)
    _emit_csv([baseline, calibrated], settings)
    logger = logging.getLogger('PudSim')
    for report in (baseline, calibrated):
        logger.info(f"{report.method}: ECR {format_percent(report.ecr)}, "
                    f"MAJ5 {report.tput_maj5_ops / 1e12:.2f} TOPS, ADD8 {report.tput_add8_ops / 1e9:.2f} GOPS, "
                    f"MUL8 {report.tput_mul8_ops / 1e9:.2f} GOPS")
    logger.info(f"Накладные расходы ёмкости: {format_percent(calibrated.capacity_overhead)}")
    return 0


def cmd_sweep_frac(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from bench.experiments import ExperimentConfig, sweep_frac
    from pud.pud_exec import FracConfig

    cfg = ExperimentConfig.from_settings(settings)
    configs = [FracConfig.parse(text) for text in _parse_list(args.configs, str, ';')]
    baseline_fracs = _parse_list(args.baseline_fracs, int)
    _emit_csv(sweep_frac(cfg, configs, baseline_fracs), settings)
    return 0


def cmd_drift(settings: Dict[str, Any], args: argparse.Namespace) -> int:
    from dataclasses import replace

    from bench.experiments import ExperimentConfig, run_drift

    cfg = ExperimentConfig.from_settings(settings)
    if args.fixed_noise:
        cfg = replace(cfg, fresh_noise=False)
    reports = run_drift(cfg, _parse_list(args.temperatures), _parse_list(args.days))
    _emit_csv(reports, settings)
    return 0


COMMANDS = {
    'calibrate': cmd_calibrate,
    'ecr': cmd_ecr,
    'throughput': cmd_throughput,
    'table1': cmd_table1,
    'sweep-frac': cmd_sweep_frac,
    'drift': cmd_drift,
    'ladder': cmd_ladder,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Основная функция запуска приложения"""
    args = parse_arguments(argv)
    debug = getattr(args, 'debug', False)
    logger = setup_logging(getattr(args, 'log_to_file', False), getattr(args, 'log_dir', None),
                           logging.DEBUG if debug else logging.INFO)

    # Проверяем успешность импорта библиотек в config
    if not config.IMPORT_SUCCESS:
        error_msg = f"Ошибка импорта библиотек: {config.IMPORT_ERROR}"
        logger.critical(error_msg)
        print(error_msg, file=sys.stderr)
        print("Убедитесь, что установлены необходимые библиотеки:", file=sys.stderr)
        print("pip install numpy psutil typing-extensions", file=sys.stderr)
        return 1

    try:
        settings = build_settings(args)
        logger = setup_logging(settings['log_to_file'], settings['log_dir'],
                               logging.DEBUG if settings['debug'] else logging.INFO)
        log_system_info(logger)
        logger.info(f"Команда: {args.command}")
        return COMMANDS[args.command](settings, args)
    except PudError as e:
        logger.error(f"{args.command}: {e}")
        print(f"Ошибка: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.critical(f"Непредвиденная ошибка: {e}")
        logger.critical(traceback.format_exc())
        print(f"Ошибка: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
