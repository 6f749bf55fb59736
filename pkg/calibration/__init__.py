"""
Пакет калибровки уровней смещения по столбцам
"""
