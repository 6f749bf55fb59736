"""
Пакет экспериментов: измерение ECR, пропускная способность, развёртки и дрейф
"""
