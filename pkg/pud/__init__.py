"""
Пакет выполнения операций большинства (MAJ) и арифметики на их основе
"""
