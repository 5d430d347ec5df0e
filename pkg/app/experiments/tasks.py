"""
Tareas Celery del harness de experimentos.
Cada prueba de un barrido se despacha como una tarea independiente.
"""

import logging

from celery import shared_task

logger = logging.getLogger(__name__)


@shared_task(bind=True, name="experiments.tasks.run_trial_task")
def run_trial_task(self, job: dict):
    """
    Corre una prueba (familia, R, índice, semilla base, alpha).

    Returns:
        Lista de registros de prueba serializados (ver TrialRecord.to_dict)
    """
    from .services import run_trial

    logger.debug(
        f"Prueba {job['family']} R={job['R']} #{job['trial']} - Task ID: {self.request.id}"
    )
    return run_trial(job)
