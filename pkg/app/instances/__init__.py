"""
Instancias - Modelo de instancias, asignaciones y su validación
"""

default_app_config = "instances.apps.InstancesConfig"
