# Generated manually for experiments

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("adversarial", "Adversarial"),
                            ("uniform", "Heterogéneo uniforme"),
                            ("lowerbound", "Cota inferior"),
                        ],
                        max_length=20,
                        verbose_name="Tipo",
                    ),
                ),
                (
                    "base_seed",
                    models.CharField(
                        help_text="Entero sin signo de 64 bits",
                        max_length=20,
                        verbose_name="Semilla base",
                    ),
                ),
                (
                    "parameters",
                    models.JSONField(blank=True, default=dict, verbose_name="Parámetros"),
                ),
                ("csv_output", models.TextField(blank=True, verbose_name="CSV")),
                (
                    "status",
                    models.CharField(
                        choices=[("success", "Exitosa"), ("violation", "Violación de cota")],
                        default="success",
                        max_length=20,
                        verbose_name="Estado",
                    ),
                ),
                ("parallel", models.BooleanField(default=False, verbose_name="Paralelo")),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "verbose_name": "Corrida de experimento",
                "verbose_name_plural": "Corridas de experimentos",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="TrialResult",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("ceiling", models.PositiveIntegerField(verbose_name="R")),
                ("trial", models.PositiveIntegerField(verbose_name="Prueba")),
                ("seed", models.CharField(max_length=20, verbose_name="Semilla")),
                ("algorithm", models.CharField(max_length=10, verbose_name="Algoritmo")),
                ("order", models.CharField(max_length=10, verbose_name="Orden")),
                ("alg_pairs", models.PositiveIntegerField(verbose_name="Pares del algoritmo")),
                (
                    "opt_pairs",
                    models.PositiveIntegerField(
                        blank=True, null=True, verbose_name="Pares óptimos"
                    ),
                ),
                (
                    "ratio",
                    models.FloatField(
                        blank=True,
                        help_text="Vacío si es infinita o si se omitió el óptimo",
                        null=True,
                        verbose_name="Razón competitiva",
                    ),
                ),
                ("is_infinite", models.BooleanField(default=False, verbose_name="Infinita")),
                ("skipped", models.BooleanField(default=False, verbose_name="Óptimo omitido")),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="trials",
                        to="experiments.experimentrun",
                        verbose_name="Corrida",
                    ),
                ),
            ],
            options={
                "verbose_name": "Resultado de prueba",
                "verbose_name_plural": "Resultados de pruebas",
                "ordering": ["ceiling", "algorithm", "order", "trial"],
            },
        ),
    ]
