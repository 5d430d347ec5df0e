"""
Offline - Óptimo exacto por flujo de costo mínimo
"""

default_app_config = "offline.apps.OfflineConfig"
