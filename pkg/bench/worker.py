"""
Пул потоков для независимых элементов эксперимента.

Каждый элемент владеет своим подмассивом и потоками случайных чисел,
поэтому порядок выполнения не влияет на результат.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Hashable, Optional

import psutil

logger = logging.getLogger('PudSim')


def default_workers() -> int:
    """Число физических ядер процессора."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class ExperimentWorker:
    """
    Выполняет набор задач в пуле потоков и собирает результаты по ключам

    numpy освобождает GIL в тяжёлых операциях над строками, поэтому потоки
    дают выигрыш на многоядерных машинах.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers if workers and workers > 0 else default_workers()
        logger.debug(f"ExperimentWorker инициализирован: {self.workers} потоков")

    def run(self, tasks: Dict[Hashable, Callable[[], Any]]) -> Dict[Hashable, Any]:
        """
        Запускает задачи

        Args:
            tasks: Словарь ключ -> функция без аргументов

        Returns:
            Dict: Результаты, упорядоченные по ключам
        """
        start = time.perf_counter()
        if self.workers == 1 or len(tasks) <= 1:
            results = {key: task() for key, task in tasks.items()}
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                futures = {key: pool.submit(task) for key, task in tasks.items()}
                # Исключение задачи пробрасывается вызывающему
                results = {key: future.result() for key, future in futures.items()}
        logger.debug(f"Выполнено задач: {len(tasks)} за {time.perf_counter() - start:.2f} с")
        return {key: results[key] for key in sorted(results)}
