"""
Thresholds - Políticas de umbral FTP y OA
"""

default_app_config = "thresholds.apps.ThresholdsConfig"
