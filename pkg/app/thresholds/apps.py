"""
Configuración de la aplicación Django para Políticas de umbral
"""

from django.apps import AppConfig


class ThresholdsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "thresholds"
    verbose_name = "Políticas de umbral"
