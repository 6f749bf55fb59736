"""
Коды результатов операций симулятора и единое исключение PudError.

Коды регистрируются в общем реестре через Result.add_code, старший бит
означает ошибку, а категория определяет код выхода командной строки.
"""

from collections import OrderedDict


class Result(object):
    """Код результата операции и его описание."""
    ERROR_FLAG = 0x80000000
    CATEGORY_MASK = 0x7FFF0000
    USAGE_CATEGORY = 0x00010000
    CONFIG_CATEGORY = 0x00020000
    IO_CATEGORY = 0x00030000
    code_map = OrderedDict()

    def __init__(self, code=ERROR_FLAG):
        self.code = code

    def __bool__(self):
        return (self.code & self.ERROR_FLAG) == 0

    def __eq__(self, other):
        return isinstance(other, Result) and self.code == other.code

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        try:
            description = self.code_map[self.code]
            return "Result." + description.split(':')[0]
        except KeyError:
            return object.__repr__(self)

    def __str__(self):
        return self.code_map.get(self.code, "Invalid error code!")

    @property
    def name(self) -> str:
        return str(self).split(':')[0]

    def category(self) -> int:
        return self.code & self.CATEGORY_MASK

    def is_usage_error(self) -> bool:
        return self.category() == self.USAGE_CATEGORY

    def is_config_error(self) -> bool:
        return self.category() == self.CONFIG_CATEGORY

    def is_io_error(self) -> bool:
        return self.category() == self.IO_CATEGORY

    @classmethod
    def add_code(cls, message, code=None):
        """Регистрирует код и его описание."""
        if code is None:
            code = next(reversed(cls.code_map)) + 1
        cls.code_map[code] = message
        return Result(code)


# Успешные результаты
Result.Ok = Result.add_code("Ok: The operation succeeded", 0)

# Общие ошибки
Result.Failed = Result.add_code("Failed: The operation failed", Result.ERROR_FLAG)
Result.NotPermitted = Result.add_code("NotPermitted: The operation is not permitted in the current state")
Result.AllocationFailure = Result.add_code("AllocationFailure: No free rows left in the subarray")

# Ошибки использования
Result.InvalidArgument = Result.add_code(
    "InvalidArgument: A supplied argument was invalid", Result.ERROR_FLAG | Result.USAGE_CATEGORY)
Result.InvalidIndex = Result.add_code("InvalidIndex: A supplied row index was out of range")
Result.InvalidShape = Result.add_code("InvalidShape: A supplied bit vector has the wrong length")

# Ошибки конфигурации
Result.InvalidSettings = Result.add_code(
    "InvalidSettings: The settings supplied were not valid", Result.ERROR_FLAG | Result.CONFIG_CATEGORY)
Result.InvalidGeometry = Result.add_code("InvalidGeometry: The subarray geometry is not valid")
Result.MissingCalibration = Result.add_code("MissingCalibration: A calibration table is required for this mode")
Result.LadderTooSmall = Result.add_code("LadderTooSmall: The offset ladder has fewer than two levels")

# Ошибки файлов
Result.FileNotFound = Result.add_code(
    "FileNotFound: The file does not exist or is unreadable", Result.ERROR_FLAG | Result.IO_CATEGORY)
Result.InvalidFormat = Result.add_code("InvalidFormat: The file was not in the expected format")
Result.InvalidVersion = Result.add_code("InvalidVersion: The file has an unsupported format version")
Result.GeometryMismatch = Result.add_code("GeometryMismatch: The file does not match the subarray geometry")
Result.FileIOFailure = Result.add_code("FileIOFailure: An operation to read or write a file failed")


class PudError(Exception):
    """Исключение для всех ошибок симулятора, несущее код Result."""

    def __init__(self, result: Result, details: str = ""):
        self.result = result
        self.details = details
        message = str(result) if not details else f"{result}: {details}"
        super().__init__(message)

    @property
    def exit_code(self) -> int:
        """Код выхода командной строки для этой ошибки."""
        if self.result.is_usage_error() or self.result.is_config_error():
            return 2
        if self.result.is_io_error():
            return 3
        return 1
