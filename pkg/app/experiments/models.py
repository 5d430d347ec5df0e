"""
Modelos para guardar corridas de experimentos y sus pruebas
"""

from django.db import models


class ExperimentRun(models.Model):
    """
    Una corrida del harness (barrido adversarial, uniforme o verificación
    de la cota inferior) con sus parámetros y el CSV emitido.
    """

    KIND_CHOICES = [
        ("adversarial", "Adversarial"),
        ("uniform", "Heterogéneo uniforme"),
        ("lowerbound", "Cota inferior"),
    ]

    STATUS_CHOICES = [
        ("success", "Exitosa"),
        ("violation", "Violación de cota"),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES, verbose_name="Tipo")
    base_seed = models.CharField(
        max_length=20,
        verbose_name="Semilla base",
        help_text="Entero sin signo de 64 bits",
    )
    parameters = models.JSONField(default=dict, blank=True, verbose_name="Parámetros")
    csv_output = models.TextField(blank=True, verbose_name="CSV")
    status = models.CharField(
        max_length=20, choices=STATUS_CHOICES, default="success", verbose_name="Estado"
    )
    parallel = models.BooleanField(default=False, verbose_name="Paralelo")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        verbose_name = "Corrida de experimento"
        verbose_name_plural = "Corridas de experimentos"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.get_kind_display()} (semilla {self.base_seed})"


class TrialResult(models.Model):
    """Resultado de un algoritmo en una prueba de una corrida"""

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name="trials",
        verbose_name="Corrida",
    )
    ceiling = models.PositiveIntegerField(verbose_name="R")
    trial = models.PositiveIntegerField(verbose_name="Prueba")
    seed = models.CharField(max_length=20, verbose_name="Semilla")
    algorithm = models.CharField(max_length=10, verbose_name="Algoritmo")
    order = models.CharField(max_length=10, verbose_name="Orden")
    alg_pairs = models.PositiveIntegerField(verbose_name="Pares del algoritmo")
    opt_pairs = models.PositiveIntegerField(
        null=True, blank=True, verbose_name="Pares óptimos"
    )
    ratio = models.FloatField(
        null=True,
        blank=True,
        verbose_name="Razón competitiva",
        help_text="Vacío si es infinita o si se omitió el óptimo",
    )
    is_infinite = models.BooleanField(default=False, verbose_name="Infinita")
    skipped = models.BooleanField(default=False, verbose_name="Óptimo omitido")

    class Meta:
        verbose_name = "Resultado de prueba"
        verbose_name_plural = "Resultados de pruebas"
        ordering = ["ceiling", "algorithm", "order", "trial"]

    def __str__(self):
        return f"R={self.ceiling} #{self.trial} {self.algorithm}/{self.order}"
