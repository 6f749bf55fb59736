"""
Модуль настройки логирования для приложения.
"""

import logging
import os
import platform
import sys
from datetime import datetime
from typing import Optional, Dict, Any

import config

APP_LOGGER = 'PudSim'


class ConsoleHandler(logging.StreamHandler):
    """Вывод в текущий sys.stderr (поток может подменяться, например, в тестах)."""

    def emit(self, record):
        self.stream = sys.stderr
        super().emit(record)


def setup_logging(log_to_file: bool = False, log_dir: Optional[str] = None,
                  level: int = logging.INFO) -> logging.Logger:
    """
    Настраивает логирование приложения

    Повторный вызов не добавляет обработчики повторно.

    Args:
        log_to_file: Включить логирование в файл
        log_dir: Директория для файлов логов
        level: Уровень логгера приложения

    Returns:
        logging.Logger: Настроенный логгер
    """
    root_logger = logging.getLogger()
    logger = logging.getLogger(APP_LOGGER)
    logger.setLevel(level)

    # Добавляем обработчик для вывода в консоль
    if not any(isinstance(h, ConsoleHandler) for h in root_logger.handlers):
        console_handler = ConsoleHandler()
        console_handler.setFormatter(logging.Formatter(config.LOG_FORMAT))
        root_logger.addHandler(console_handler)

    # Настройка логирования в файл, если требуется
    if log_to_file and not any(isinstance(h, logging.FileHandler) for h in root_logger.handlers):
        try:
            if log_dir is None:
                log_dir = os.path.join(config.CONFIG_DIR, "logs")

            # Создаем директорию для логов, если не существует
            if not os.path.exists(log_dir):
                os.makedirs(log_dir)

            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            log_file = os.path.join(log_dir, f"pud_sim_{timestamp}.log")

            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setFormatter(logging.Formatter(config.LOG_FORMAT))
            root_logger.addHandler(file_handler)

            logger.info(f"Логирование в файл включено: {log_file}")
        except Exception as e:
            logger.error(f"Не удалось настроить логирование в файл: {e}")

    return logger


def get_system_info() -> Dict[str, Any]:
    """
    Собирает информацию о системе для диагностики

    Returns:
        Dict[str, Any]: Словарь с информацией о системе
    """
    system_info = {
        "platform": platform.platform(),
        "python_version": platform.python_version(),
        "processor": platform.processor(),
        "machine": platform.machine(),
        "app_version": config.get_app_version(),
    }

    try:
        import numpy
        system_info["numpy_version"] = numpy.__version__
    except ImportError:
        system_info["numpy_version"] = "unknown"

    try:
        import psutil
        system_info["cpu_physical"] = psutil.cpu_count(logical=False)
        system_info["cpu_logical"] = psutil.cpu_count()
        system_info["memory_total_gb"] = round(psutil.virtual_memory().total / 2 ** 30, 1)
    except ImportError:
        system_info["cpu_physical"] = "unknown"

    return system_info


def log_system_info(logger: logging.Logger) -> None:
    """
    Логирует информацию о системе

    Args:
        logger: Логгер для записи информации
    """
    system_info = get_system_info()
    logger.info("=== Информация о системе ===")
    for key, value in system_info.items():
        logger.info(f"{key}: {value}")
    logger.info("===========================")
