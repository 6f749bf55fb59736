"""
Пакет настройки логирования
"""
