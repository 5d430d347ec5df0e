"""
Tests para las políticas de umbral
"""

import json
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from generators.prng import SplitMixRandom
from generators.services import gen_lower_bound_family, gen_uniform_hetero
from instances.domain import PaymentMode, UniformBids, Worker
from instances.services import validate_assignment
from instances.tests import TOY_DOCUMENT, toy_instance
from offline.services import brute_force_optimal, offline_optimal
from offline.tests import random_small_instance
from thresholds.services import FixedThresholdPolicy, candidate_thresholds, ftp, oa


def unit_workers(count: int, num_tasks: int):
    return [Worker(i, {t: 1.0 for t in range(num_tasks)}) for i in range(count)]


class FixedThresholdPolicyTestCase(SimpleTestCase):
    """Tests para FTP"""

    def test_budget_exhausted(self):
        """Test presupuesto agotado"""
        assignment = ftp(1.0, 2.0, unit_workers(2, 2), 2)
        self.assertEqual(assignment.as_set(), {(0, 0), (1, 1)})
        self.assertEqual(assignment.total_payment, 2.0)

    def test_toy_instance(self):
        """Test instancia de ejemplo"""
        instance = toy_instance()
        assignment = ftp(1.25, instance.budget, instance.workers, instance.num_tasks)
        self.assertEqual(assignment.as_set(), {(0, 0)})

    def test_threshold_below_bid_floor(self):
        """Test umbral menor que la oferta mínima"""
        instance = toy_instance()
        self.assertEqual(len(ftp(0.5, instance.budget, instance.workers, instance.num_tasks)), 0)

    def test_threshold_payment_mode(self):
        """Test modo de pago por umbral"""
        assignment = ftp(1.5, 2.5, unit_workers(2, 2), 2, PaymentMode.THRESHOLD)
        self.assertEqual([p.payment for p in assignment.pairs], [1.5, 1.0])
        self.assertEqual(assignment.total_payment, 2.5)

    def test_halts_on_empty_budget(self):
        """Test se detiene sin presupuesto"""
        policy = FixedThresholdPolicy(1.0, 1.0, 3)
        self.assertIsNotNone(policy.offer(Worker(0, {0: 1.0})))
        self.assertTrue(policy.halted)
        self.assertIsNone(policy.offer(Worker(1, {1: 1.0})))

    def test_stream_matches_batch(self):
        """Test flujo equivalente al lote"""
        rng = SplitMixRandom(31)
        for _ in range(200):
            instance = random_small_instance(rng)
            price = float(rng.randint(1, 5))
            batch = ftp(price, instance.budget, instance.workers, instance.num_tasks)

            policy = FixedThresholdPolicy(price, instance.budget, instance.num_tasks)
            for worker in instance.workers:
                policy.offer(worker)
            self.assertEqual(policy.assignment(), batch)

    def test_trace_respects_threshold_and_budget(self):
        """Test traza respeta umbral y presupuesto"""
        rng = SplitMixRandom(32)
        for _ in range(200):
            instance = random_small_instance(rng)
            price = float(rng.randint(1, 5))
            assignment = ftp(price, instance.budget, instance.workers, instance.num_tasks)
            self.assertTrue(all(p.payment <= price for p in assignment.pairs))
            self.assertTrue(validate_assignment(instance, assignment).ok)


class OATestCase(SimpleTestCase):
    """Tests para la búsqueda de umbral OA"""

    def test_toy_instance(self):
        """Test instancia de ejemplo"""
        instance = toy_instance()
        self.assertEqual(candidate_thresholds(instance.workers), [1.0, 1.125, 1.25, 1.75])
        result = oa(instance.workers, instance.num_tasks, instance.budget)
        self.assertEqual(result.Q, 1)
        self.assertEqual(result.p_star, 2.5)
        self.assertEqual(result.price, 1.0)
        self.assertLessEqual(brute_force_optimal(instance).flow_value, 4 * result.Q)

    def test_homogeneous_instance(self):
        """Test instancia homogénea"""
        workers = [Worker(i, UniformBids(1.0, 6)) for i in range(5)]
        result = oa(workers, 6, 5.0)
        self.assertEqual(result.Q, 5)
        self.assertEqual(result.p_star, 1.0)

    def test_empty_sequence(self):
        """Test secuencia vacía"""
        result = oa([], 3, 5.0)
        self.assertEqual(result.Q, 0)
        self.assertEqual(result.p_star, 0.0)
        self.assertEqual(len(result.assignment), 0)

    def test_four_approximation(self):
        """Test 4-aproximación"""
        rng = SplitMixRandom(4)
        for _ in range(500):
            instance = random_small_instance(rng)
            result = oa(instance.workers, instance.num_tasks, instance.budget)
            self.assertEqual(result.Q, len(result.assignment))
            self.assertLessEqual(brute_force_optimal(instance).flow_value, 4 * result.Q)

    def test_four_approximation_on_generated_families(self):
        """Test 4-aproximación sobre instancias generadas con n, m <= 8"""
        instances = []
        for eta in (0.25, 0.5, 0.75):
            for ceiling in (2, 3, 4):
                for budget in range(ceiling, ceiling + 5):
                    family = gen_lower_bound_family(eta, ceiling, budget)
                    instances.extend(
                        instance for instance in family.instances if instance.num_workers <= 8
                    )
        self.assertTrue(instances)
        for ceiling in (2, 4, 8):
            for seed in range(20):
                instances.append(
                    gen_uniform_hetero(
                        ceiling, seed, num_workers=8, num_tasks=8, budget=8.0, edge_probability=0.5
                    )
                )

        for instance in instances:
            result = oa(instance.workers, instance.num_tasks, instance.budget)
            self.assertLessEqual(offline_optimal(instance).flow_value, 4 * result.Q, instance)


class RunThresholdCommandTestCase(SimpleTestCase):
    """Tests para el comando run_threshold"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "toy.json")
        with open(self.path, "w", encoding="utf-8") as handle:
            handle.write(TOY_DOCUMENT)

    def tearDown(self):
        self.tmp.cleanup()

    def test_oa(self):
        """Test OA"""
        out = StringIO()
        call_command("run_threshold", "--instance", self.path, "--policy", "oa", stdout=out)
        output = json.loads(out.getvalue())
        self.assertEqual(output["Q"], 1)
        self.assertEqual(output["p_star"], 2.5)

    def test_ftp(self):
        """Test FTP"""
        out = StringIO()
        call_command(
            "run_threshold", "--instance", self.path, "--policy", "ftp", "--price", "1.25", stdout=out
        )
        self.assertEqual(json.loads(out.getvalue())["assignment"]["pairs"], [
            {"worker": 0, "task": 0, "payment": 1.0}
        ])

    def test_ftp_requires_price(self):
        """Test FTP requiere precio"""
        with self.assertRaises(CommandError):
            call_command("run_threshold", "--instance", self.path, "--policy", "ftp")
