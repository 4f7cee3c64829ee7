"""
Тесты chiplet_cost (пакет: pytest добавляет корень проекта в sys.path)
"""
