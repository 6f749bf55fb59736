"""
Файл с конфигурационными параметрами и проверкой зависимостей.
"""

import os
import json
import logging
from typing import Dict, Any, Optional

from errors.result import PudError, Result

# Директория конфигурации
CONFIG_DIR = os.path.expanduser("~/.pud_sim")
CONFIG_FILE = os.path.join(CONFIG_DIR, "settings.json")

# Версия приложения
APP_VERSION = "1.0.0"

# Настройки по умолчанию; каждому ключу соответствует флаг командной строки
DEFAULT_SETTINGS = {
    # Эксперимент
    "seed": 0,
    "cols": 8192,
    "rows": 512,
    "banks": 1,
    "trials": 8192,
    "workers": 0,  # 0 - по числу физических ядер
    # Геометрия и физика
    "c_cell": 30.0,
    "c_bitline": 270.0,
    "v_precharge": 0.5,
    "contraction_f": 0.5,
    "sigma_tau": 0.04,
    "sigma_sense": 1e-4,
    "sigma_cell": 0.0,
    "sensed_copies": False,
    # Конфигурации Frac
    "frac": "2,1,0",
    "baseline_frac": "3,0,0",
    # Калибровка
    "calib_iterations": 20,
    "calib_samples": 512,
    "bias_threshold": 0.05,
    "bias_reference": "expected",
    # Модель задержек
    "t_row_copy": 210.0,
    "t_frac": 210.0,
    "t_simra": 210.0,
    "banks_parallel": 16,
    "channels": 4,
    "cols_hw": 65536,
    # Дрейф
    "kappa_temp": 1e-5,
    "sigma_temp": 1e-5,
    "sigma_time": 5e-5,
    "t_cal": 40.0,
    "fresh_noise": True,
    # Файлы
    "out": None,
    "table": None,
    # Логирование
    "log_to_file": False,
    "log_dir": None,
    "debug": False,
}

INT_KEYS = {"seed", "cols", "rows", "banks", "trials", "workers", "calib_iterations", "calib_samples",
            "banks_parallel", "channels", "cols_hw"}
FLOAT_KEYS = {"c_cell", "c_bitline", "v_precharge", "contraction_f", "sigma_tau", "sigma_sense", "sigma_cell",
              "bias_threshold", "t_row_copy", "t_frac", "t_simra", "kappa_temp", "sigma_temp", "sigma_time", "t_cal"}


def _coerce(key: str, value: Any) -> Any:
    """Приводит строковое значение из файла к типу настройки."""
    if isinstance(value, str):
        # Преобразуем строковые значения 'true'/'false' в булевы
        if value.lower() in ['true', 'false']:
            return value.lower() == 'true'
        try:
            if key in INT_KEYS:
                return int(value)
            if key in FLOAT_KEYS:
                return float(value)
        except ValueError:
            raise PudError(Result.InvalidSettings, f"некорректное значение {key}={value!r}")
    if key in INT_KEYS and isinstance(value, float) and value.is_integer():
        return int(value)
    if key in FLOAT_KEYS and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def load_settings(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Загрузка настроек приложения

    Файл - JSON-объект ключ/значение поверх DEFAULT_SETTINGS. Без явного пути
    читается CONFIG_FILE, если он существует.

    Args:
        path: Путь к файлу настроек

    Returns:
        Dict[str, Any]: Словарь с настройками приложения

    Raises:
        PudError: FileNotFound, InvalidFormat или InvalidSettings
    """
    settings_dict = DEFAULT_SETTINGS.copy()
    if path is None:
        if not os.path.exists(CONFIG_FILE):
            return settings_dict
        path = CONFIG_FILE
    elif not os.path.exists(path):
        raise PudError(Result.FileNotFound, path)

    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise PudError(Result.InvalidFormat, f"{path}: {e}")
    except OSError as e:
        raise PudError(Result.FileIOFailure, f"{path}: {e}")
    if not isinstance(data, dict):
        raise PudError(Result.InvalidFormat, f"{path}: ожидался объект ключ/значение")

    for key, value in data.items():
        key = key.replace('-', '_')
        if key not in DEFAULT_SETTINGS:
            logging.getLogger('PudSim').warning(f"Неизвестный ключ настроек пропущен: {key}")
            continue
        settings_dict[key] = _coerce(key, value)
    return settings_dict


def save_settings(settings_dict: Dict[str, Any], path: Optional[str] = None) -> None:
    """
    Сохранение настроек приложения

    Args:
        settings_dict: Словарь с настройками для сохранения
        path: Путь к файлу (по умолчанию CONFIG_FILE)
    """
    path = path or CONFIG_FILE
    try:
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.exists(directory):
            os.makedirs(directory)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(settings_dict, f, indent=2, sort_keys=True)
    except OSError as e:
        logging.getLogger('PudSim').error(f"Ошибка при сохранении настроек: {e}")
        raise PudError(Result.FileIOFailure, f"{path}: {e}")


# Проверка зависимостей
IMPORT_SUCCESS = True
IMPORT_ERROR = ""

try:
    import numpy  # noqa: F401
    import psutil  # noqa: F401
except ImportError as e:
    IMPORT_SUCCESS = False
    IMPORT_ERROR = str(e)

# Раскладка строк подмассива: 8 строк SiMRA (5 операндов + 3 калибровочные),
# 3 строки хранения калибровки, константы и строки для входов
SIMRA_ROWS = (0, 1, 2, 3, 4, 5, 6, 7)
OPERAND_ROWS = (0, 1, 2, 3, 4)
CALIB_ROWS = (5, 6, 7)
CALIB_STORAGE_ROWS = (8, 9, 10)
CONST_ZERO_ROW = 11
CONST_ONE_ROW = 12
STAGING_ROWS = (13, 14, 15, 16, 17)
SCRATCH_START_ROW = 18

# Настройки логирования
LOG_FORMAT = '%(asctime)s [%(levelname)s] %(message)s'

# Формат файла калибровки
CALIBRATION_FORMAT_VERSION = 1
CALIBRATION_KIND = "pud-calibration-table"


def get_app_version() -> str:
    """Возвращает версию приложения."""
    return APP_VERSION
