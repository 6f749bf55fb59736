"""
Коды результатов и исключения симулятора
"""

from errors.result import Result, PudError

__all__ = ["Result", "PudError"]
