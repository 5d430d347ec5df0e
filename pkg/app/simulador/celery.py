"""
Configuración de Celery para el proyecto
"""

import os

from celery import Celery

# Establecer el módulo de configuración de Django para Celery
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "simulador.settings")

app = Celery("simulador")

# Usar la configuración de Django
app.config_from_object("django.conf:settings", namespace="CELERY")

# Descubrir tareas automáticamente en todas las aplicaciones
app.autodiscover_tasks()
