"""
Tests para el harness de experimentos
"""

import math
import os
import tempfile
from io import StringIO
from unittest.mock import patch

import numpy as np
from celery.result import EagerResult
from django.contrib.auth.models import User
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from django.urls import reverse

from experiments.models import ExperimentRun, TrialResult
from experiments.services import (
    CSV_HEADER,
    LowerBoundViolationError,
    StrategyDimensionError,
    TheoremViolationError,
    TrialRecord,
    aggregate,
    competitive_ratio,
    expected_inverse_ratio,
    powers_of_two,
    ratio_of,
    rows_to_csv,
    run_adversarial_experiment,
    run_uniform_experiment,
    verify_lower_bound,
)
from experiments.tasks import run_trial_task
from generators.services import gen_lower_bound_family
from instances.domain import Assignment, Pair
from instances.services import InvalidAssignmentError
from instances.tests import toy_instance
from offline.services import greedy_homogeneous, offline_optimal
from simulador.celery import app as celery_app


def record(trial, ratio, algorithm="oha", skipped=False):
    return TrialRecord(
        family="adversarial",
        R=2,
        trial=trial,
        seed=trial,
        algorithm=algorithm,
        order="arrival",
        alg_pairs=1,
        opt_pairs=None if skipped else 2,
        ratio=ratio,
        bound=10.0,
        skipped=skipped,
    )


class CompetitiveRatioTestCase(SimpleTestCase):
    """Tests para la razón competitiva"""

    def test_greedy_on_toy_instance(self):
        """Test razón del greedy sobre la instancia de ejemplo"""
        instance = toy_instance()
        self.assertEqual(competitive_ratio(instance, greedy_homogeneous(instance)), 2.0)

    def test_optimum_against_itself(self):
        """Test razón 1 del óptimo contra sí mismo"""
        instance = toy_instance()
        self.assertEqual(competitive_ratio(instance, offline_optimal(instance).assignment), 1.0)

    def test_special_cases(self):
        """Test casos especiales de la razón (0/0 y k/0)"""
        self.assertEqual(ratio_of(3, 0), math.inf)
        self.assertEqual(ratio_of(0, 0), 1.0)
        self.assertEqual(ratio_of(3, 2), 1.5)

    def test_invalid_assignment(self):
        """Test asignación inválida rechazada"""
        with self.assertRaises(InvalidAssignmentError):
            competitive_ratio(toy_instance(), Assignment.from_pairs([Pair(1, 0, 1.0)]))


class AggregationTestCase(SimpleTestCase):
    """Tests para la agregación y el CSV"""

    def test_record_dict_round_trip_keeps_infinity(self):
        """Test serialización de registros con razón infinita"""
        infinite = record(0, math.inf)
        data = infinite.to_dict()
        self.assertIsNone(data["ratio"])
        self.assertTrue(data["infinite"])
        self.assertEqual(TrialRecord.from_dict(data), infinite)
        self.assertTrue(math.isnan(TrialRecord.from_dict(record(1, math.nan, skipped=True).to_dict()).ratio))

    def test_infinite_and_skipped_excluded_from_mean(self):
        """Test media sin razones infinitas ni pruebas omitidas"""
        records = [record(0, 2.0), record(1, math.inf), record(2, 4.0), record(3, math.nan, skipped=True)]
        (row,) = aggregate(records)
        self.assertEqual(row.trials, 4)
        self.assertEqual(row.mean_ratio, 3.0)
        self.assertEqual(row.infinite, 1)
        self.assertEqual(row.skipped, 1)
        self.assertEqual(row.bound_misses, 1)

    def test_order_independent(self):
        """Test agregación independiente del orden de los registros"""
        records = [record(t, 1.0 + t / 7.0) for t in range(10)]
        self.assertEqual(
            rows_to_csv(aggregate(records)), rows_to_csv(aggregate(list(reversed(records))))
        )

    def test_csv_format(self):
        """Test formato del CSV"""
        text = rows_to_csv(aggregate([record(0, math.inf)]))
        header, line = text.splitlines()
        self.assertEqual(header, ",".join(CSV_HEADER))
        self.assertEqual(line.split(",")[5], "nan")
        self.assertTrue(text.endswith("\n"))
        self.assertNotIn("\r", text)
        self.assertEqual(line.split(",")[-1], repr(math.log(2)))


class LowerBoundTestCase(SimpleTestCase):
    """Tests para el evaluador de la cota inferior"""

    def setUp(self):
        self.family = gen_lower_bound_family(0.5, 4, 4, build_instances=False)

    def test_concentrated_strategy_attains_bound(self):
        """Test estrategia concentrada alcanza la cota"""
        self.assertEqual(expected_inverse_ratio(self.family, [0.0, 0.0, 1.0]), 0.6)

    def test_first_level_strategy(self):
        """Test estrategia en el primer nivel"""
        self.assertAlmostEqual(expected_inverse_ratio(self.family, [1.0, 0.0, 0.0]), 0.45, places=12)

    def test_zero_strategy(self):
        """Test estrategia nula"""
        self.assertEqual(expected_inverse_ratio(self.family, [0.0, 0.0, 0.0]), 0.0)

    def test_strategy_validation(self):
        """Test validación de estrategias"""
        with self.assertRaises(StrategyDimensionError):
            expected_inverse_ratio(self.family, [1.0, 0.0])
        with self.assertRaises(StrategyDimensionError):
            expected_inverse_ratio(self.family, [0.5, 0.6, 0.0])
        with self.assertRaises(StrategyDimensionError):
            expected_inverse_ratio(self.family, [-0.1, 0.0, 0.5])

    def test_verify_grid(self):
        """Test verificación sobre una grilla de parámetros"""
        report = verify_lower_bound([0.1, 0.25, 0.5], [4, 16, 256], 1000, base_seed=0)
        self.assertEqual(len(report.entries), 9)
        for entry in report.entries:
            self.assertLessEqual(entry.max_value, entry.bound + 1e-12)
            self.assertAlmostEqual(entry.concentrated_value, entry.bound, delta=1e-12)
            self.assertLess(entry.tail_error, 1e-12)
            self.assertEqual(entry.samples, 1000)

    def test_zero_samples(self):
        """Test cero muestras"""
        report = verify_lower_bound([0.5], [4], 0)
        self.assertEqual(report.entries, ())

    def test_violation_names_parameters(self):
        """Test violación de cota inferior con parámetros"""
        with patch("experiments.services.tail_mass", return_value=np.full(3, 2.0)):
            with self.assertRaises(LowerBoundViolationError) as ctx:
                verify_lower_bound([0.5], [4], 10, base_seed=3)
        self.assertEqual(ctx.exception.eta, 0.5)
        self.assertEqual(ctx.exception.ceiling, 4)
        self.assertEqual(len(ctx.exception.fractions), 3)


class SweepTestCase(SimpleTestCase):
    """Tests para los barridos"""

    def test_adversarial_rows(self):
        """Test filas del barrido adversarial"""
        report = run_adversarial_experiment(ceilings=[2, 4], trials=3, base_seed=11)
        keys = [(row.R, row.algorithm, row.order) for row in report.rows]
        self.assertEqual(
            keys,
            [
                (2, "oha", "arrival"),
                (2, "oha", "permuted"),
                (2, "rpa", "permuted"),
                (4, "oha", "arrival"),
                (4, "oha", "permuted"),
                (4, "rpa", "permuted"),
            ],
        )
        for row in report.rows:
            self.assertEqual(row.trials, 3)
            self.assertEqual(row.skipped, 0)
            if row.algorithm == "oha":
                self.assertLessEqual(row.mean_ratio, (row.R * math.e) ** 0.5 * (math.log(row.R) + 3))
                self.assertEqual(row.bound_misses, 0)

    def test_adversarial_is_deterministic(self):
        """Test barrido adversarial determinístico"""
        first = run_adversarial_experiment(ceilings=[2], trials=1, base_seed=5).csv
        second = run_adversarial_experiment(ceilings=[2], trials=1, base_seed=5).csv
        self.assertEqual(first, second)

    def test_uniform_rows(self):
        """Test filas del barrido uniforme"""
        report = run_uniform_experiment(ceilings=[2, 3], trials=2, base_seed=1)
        self.assertEqual(
            [(row.R, row.algorithm, row.order) for row in report.rows],
            [(2, "oha", "arrival"), (2, "rpa", "arrival"), (3, "oha", "arrival"), (3, "rpa", "arrival")],
        )
        oha_row = report.row(2, "oha", "arrival")
        self.assertLessEqual(oha_row.mean_ratio, oha_row.bound)
        self.assertEqual(oha_row.bound, (2 * math.e) ** (2 / 200) * (math.log(2) + 3))

    def test_theorem_violation_stops_sweep(self):
        """Test violación de cota corta el barrido"""
        with patch("experiments.services.oha_bound", return_value=0.5):
            with self.assertRaises(TheoremViolationError):
                run_adversarial_experiment(ceilings=[2], trials=1)


class SweepShapeTestCase(SimpleTestCase):
    """Comportamiento esperado de los barridos con semilla fija"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.uniform = run_uniform_experiment(ceilings=[2, 10, 25, 50], trials=20, base_seed=0)

    def test_uniform_ratios_flat_in_ceiling(self):
        """Test razón media en grafos uniformes sin crecer más de 3x a lo largo de R"""
        for algorithm in ("oha", "rpa"):
            means = [
                self.uniform.row(ceiling, algorithm, "arrival").mean_ratio
                for ceiling in (2, 10, 25, 50)
            ]
            self.assertTrue(all(math.isfinite(mean) for mean in means), means)
            self.assertLessEqual(max(means) / min(means), 3.0, (algorithm, means))

    def test_rpa_within_high_probability_bound(self):
        """Test OPT <= 36 RPA en al menos el 95% de las pruebas uniformes"""
        rows = [row for row in self.uniform.rows if row.algorithm == "rpa"]
        self.assertEqual(rows[0].bound, 36.0)
        trials = sum(row.trials for row in rows)
        misses = sum(row.bound_misses for row in rows)
        self.assertEqual(trials, 80)
        self.assertLessEqual(misses / trials, 0.05)

    def test_random_order_helps_oha(self):
        """Test OHA con orden aleatorio no peor en media que en orden de llegada"""
        ceilings = [2, 8, 64, 256]
        report = run_adversarial_experiment(ceilings=ceilings, trials=200, base_seed=0)
        for ceiling in ceilings:
            permuted = report.row(ceiling, "oha", "permuted").mean_ratio
            arrival = report.row(ceiling, "oha", "arrival").mean_ratio
            self.assertLessEqual(permuted, arrival, ceiling)

    def test_adversarial_bound_up_to_4096(self):
        """Test cota de OHA en todas las potencias de 2 hasta 4096"""
        ceilings = powers_of_two(4096)
        self.assertEqual(ceilings[-1], 4096)
        report = run_adversarial_experiment(ceilings=ceilings, trials=5, base_seed=0)
        for ceiling in ceilings:
            for order in ("arrival", "permuted"):
                row = report.row(ceiling, "oha", order)
                self.assertEqual(row.bound_misses, 0, (ceiling, order))
                self.assertEqual(row.infinite, 0, (ceiling, order))
                self.assertLessEqual(row.mean_ratio, row.bound, (ceiling, order))


class ParallelSweepTestCase(SimpleTestCase):
    """Los barridos con Celery (modo eager) emiten el mismo CSV que en serie"""

    def setUp(self):
        self._eager = (
            celery_app.conf.get("CELERY_TASK_ALWAYS_EAGER"),
            celery_app.conf.task_always_eager,
        )
        celery_app.conf.CELERY_TASK_ALWAYS_EAGER = True
        celery_app.conf.task_always_eager = True

    def tearDown(self):
        celery_app.conf.CELERY_TASK_ALWAYS_EAGER, celery_app.conf.task_always_eager = self._eager

    def test_tasks_run_eagerly(self):
        """Test despacho de una prueba sin broker"""
        job = {"family": "adversarial", "R": 2, "trial": 0}
        with patch("experiments.services.run_trial", return_value=[]) as run_trial:
            result = run_trial_task.delay(job)
        self.assertIsInstance(result, EagerResult)
        self.assertEqual(result.get(), [])
        run_trial.assert_called_once_with(job)

    def test_parallel_matches_serial(self):
        """Test mismo CSV y registros en paralelo que en serie"""
        serial = run_adversarial_experiment(ceilings=[2, 4], trials=2, base_seed=9)
        parallel = run_adversarial_experiment(ceilings=[2, 4], trials=2, base_seed=9, parallel=True)
        self.assertEqual(serial.csv, parallel.csv)
        self.assertEqual(serial.records, parallel.records)


class PersistenceTestCase(TestCase):
    """Tests para el guardado de corridas y el admin"""

    def test_save_run(self):
        """Test guardado de corrida"""
        run_adversarial_experiment(ceilings=[2], trials=2, base_seed=4, save=True)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.kind, "adversarial")
        self.assertEqual(run.status, "success")
        self.assertEqual(run.base_seed, "4")
        self.assertTrue(run.csv_output.startswith("family,R,"))
        self.assertEqual(run.trials.count(), 6)
        self.assertEqual(TrialResult.objects.filter(run=run, algorithm="rpa").count(), 2)

    def test_admin_pages(self):
        """Test páginas del admin"""
        run_adversarial_experiment(ceilings=[2], trials=1, save=True)
        admin_user = User.objects.create_superuser("admin", "admin@example.com", "clave-segura-123")
        self.client.force_login(admin_user)
        run = ExperimentRun.objects.get()
        for url in (
            reverse("admin:experiments_experimentrun_changelist"),
            reverse("admin:experiments_experimentrun_change", args=[run.pk]),
            reverse("admin:experiments_trialresult_changelist"),
        ):
            self.assertEqual(self.client.get(url).status_code, 200)


class ExperimentCommandTestCase(TestCase):
    """Tests para el comando experiment"""

    def test_adversarial_to_stdout(self):
        """Test barrido adversarial a stdout"""
        out = StringIO()
        call_command("experiment", "adversarial", "--R-max", "4", "--trials", "1", "--seed", "2", stdout=out)
        lines = out.getvalue().splitlines()
        self.assertEqual(lines[0], ",".join(CSV_HEADER))
        self.assertEqual(len(lines), 1 + 6)

    def test_uniform_to_file(self):
        """Test barrido uniforme a archivo"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "uniform.csv")
            call_command(
                "experiment", "uniform", "--R-min", "2", "--R-max", "3", "--trials", "1",
                "--out", path, stdout=StringIO(),
            )
            with open(path, encoding="utf-8") as handle:
                self.assertEqual(len(handle.read().splitlines()), 1 + 4)

    def test_lowerbound(self):
        """Test verificación de cota inferior"""
        out = StringIO()
        call_command("experiment", "lowerbound", "--eta", "0.5", "--R", "4", "--samples", "20", "--save", stdout=out)
        lines = out.getvalue().splitlines()
        self.assertTrue(lines[0].startswith("eta,R,k,"))
        self.assertEqual(len(lines), 2)
        self.assertEqual(ExperimentRun.objects.get().kind, "lowerbound")

    def test_violation_fails_and_is_recorded(self):
        """Test violación falla y queda registrada"""
        with patch("experiments.services.oha_bound", return_value=0.5):
            with self.assertRaises(CommandError):
                call_command(
                    "experiment", "adversarial", "--R-max", "2", "--trials", "1", "--save",
                    stdout=StringIO(),
                )
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, "violation")
        self.assertIn("error", run.parameters)

    def test_invalid_range(self):
        """Test rango de R inválido"""
        with self.assertRaises(CommandError):
            call_command("experiment", "uniform", "--R-min", "5", "--R-max", "3", stdout=StringIO())
