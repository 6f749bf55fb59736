"""
Пакет поведенческой модели подмассива DRAM и вариаций порогов усилителей
"""
