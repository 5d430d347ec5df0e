"""
Tests para los algoritmos online
"""

import json
import math
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from generators.prng import SplitMixRandom, permutation
from generators.services import gen_adversarial, gen_uniform_hetero
from instances.domain import Instance, PaymentMode, UniformBids, Worker
from instances.services import serialize_instance, validate_assignment
from offline.services import optimal_pairs
from online.services import (
    BudgetMode,
    DegenerateInstanceError,
    InvalidInstanceError,
    PotentialDomainError,
    RPAConfig,
    oha,
    oha_bound,
    oha_trace,
    potential_phi,
    price_sandwich,
    rpa,
    rpa_run,
)


def reference_oha_count(bids, budget, ceiling, num_tasks):
    """Simulación directa de OHA sobre ofertas homogéneas"""
    x, f, free, hired = 0.0, budget, num_tasks, []
    c = 1.0 / (1.0 + math.log(ceiling))
    for i, bid in enumerate(bids):
        if f <= 0:
            break
        phi = ceiling if x <= c else min((ceiling * math.e) ** (1.0 - min(x, 1.0)), ceiling)
        if free and bid <= min(f, phi):
            hired.append(i)
            free -= 1
            x += bid / budget
            f -= bid
    return hired


class PotentialTestCase(SimpleTestCase):
    """Tests para la función potencial φ"""

    CEILINGS = (2.0, math.e, 10.0, 1000.0)

    def test_endpoints(self):
        """Test extremos de φ"""
        for ceiling in self.CEILINGS:
            self.assertEqual(potential_phi(0.0, ceiling), ceiling)
            self.assertEqual(potential_phi(1.0, ceiling), 1.0)

    def test_constant_up_to_threshold_for_e(self):
        """Test φ constante hasta el umbral"""
        for x in (0.0, 0.1, 0.25, 0.4999, 0.5):
            self.assertEqual(potential_phi(x, math.e), math.e)
        self.assertLess(potential_phi(0.5001, math.e), math.e)

    def test_grid_properties(self):
        """Test propiedades de la grilla"""
        for ceiling in self.CEILINGS:
            c = 1.0 / (1.0 + math.log(ceiling))
            previous = math.inf
            for i in range(10_000):
                x = i / 9999
                value = potential_phi(x, ceiling)
                self.assertLessEqual(value, previous)
                self.assertGreaterEqual(value, 1.0)
                if x <= c:
                    self.assertEqual(value, ceiling)
                previous = value

    def test_domain(self):
        """Test dominio de φ"""
        with self.assertRaises(PotentialDomainError):
            potential_phi(1.5, 2.0)
        with self.assertRaises(PotentialDomainError):
            potential_phi(-0.1, 2.0)


class OHATestCase(SimpleTestCase):
    """Tests para OHA"""

    def test_single_worker(self):
        """Test un solo trabajador"""
        assignment = oha([Worker(0, {0: 1.0})], 1, 1.0, 1.0)
        self.assertEqual(assignment.as_set(), {(0, 0)})

    def test_boundary_acceptance_at_ceiling(self):
        """Test aceptación en el borde R"""
        assignment = oha([Worker(0, {0: 4.0})], 1, 8.0, 4.0)
        self.assertEqual(len(assignment), 1)

    def test_bid_outside_range(self):
        """Test oferta fuera de rango"""
        with self.assertRaises(InvalidInstanceError) as ctx:
            oha([Worker(0, {0: 1.0}), Worker(1, {0: 5.0})], 1, 8.0, 4.0)
        self.assertEqual(ctx.exception.worker_id, 1)

    def test_adversarial_trace(self):
        """Test traza adversarial"""
        instance = gen_adversarial(4, seed=0, depth=2)
        bids = [w.uniform_bid for w in instance.workers]
        self.assertEqual(bids[:14], [4.0] * 2 + [2.0] * 4 + [1.0] * 8)

        trace = oha_trace(instance.workers, instance.num_tasks, instance.budget, instance.bid_ceiling)
        hired = [d.worker_id for d in trace.decisions if d.accepted]
        self.assertEqual(hired, [0, 2, 6, 7])
        self.assertEqual(
            hired, reference_oha_count(bids, instance.budget, instance.bid_ceiling, instance.num_tasks)
        )
        self.assertEqual(trace.final_x, 1.0)
        self.assertEqual(trace.final_f, 0.0)
        self.assertEqual(optimal_pairs(instance), 8)

    def test_trace_never_exceeds_offered_price(self):
        """Test la traza nunca supera el precio ofrecido"""
        rng = SplitMixRandom(5)
        for trial in range(20):
            instance = gen_uniform_hetero(rng.randint(2, 20), seed=trial)
            trace = oha_trace(
                instance.workers, instance.num_tasks, instance.budget, instance.bid_ceiling
            )
            spent = 0.0
            for decision in trace.decisions:
                self.assertLessEqual(decision.offered, potential_phi(min(decision.x, 1.0), instance.bid_ceiling))
                if decision.accepted:
                    self.assertLessEqual(decision.bid, decision.offered)
                    spent += decision.payment
            self.assertLessEqual(spent, instance.budget + 1e-9)
            self.assertTrue(validate_assignment(instance, trace.assignment).ok)

    def test_threshold_payment_mode(self):
        """Test modo de pago por umbral"""
        assignment = oha([Worker(0, {0: 1.0})], 1, 8.0, 4.0, PaymentMode.THRESHOLD)
        self.assertEqual(assignment.pairs[0].payment, 4.0)

    def test_competitive_bound_on_generated_instances(self):
        """Test cota competitiva en instancias generadas"""
        for ceiling in (2, 4, 8, 16):
            for seed in range(10):
                instance = gen_adversarial(ceiling, seed)
                pairs = len(
                    oha(instance.workers, instance.num_tasks, instance.budget, instance.bid_ceiling)
                )
                bound = oha_bound(instance.bid_ceiling, instance.epsilon)
                self.assertLessEqual(optimal_pairs(instance), bound * pairs)
        for seed in range(5):
            instance = gen_uniform_hetero(10, seed)
            pairs = len(oha(instance.workers, instance.num_tasks, instance.budget, instance.bid_ceiling))
            bound = oha_bound(instance.bid_ceiling, instance.epsilon)
            self.assertLessEqual(optimal_pairs(instance), bound * pairs)


class RPATestCase(SimpleTestCase):
    """Tests para RPA"""

    def test_no_affordable_bids_in_sample(self):
        """Test muestra sin ofertas pagables"""
        workers = [Worker(0, {}), Worker(1, {}), Worker(2, {0: 1.0}), Worker(3, {1: 1.0})]
        result = rpa_run(workers, 2, 4.0)
        self.assertEqual(result.p_hat, 0.0)
        self.assertEqual(result.threshold, 0.0)
        self.assertEqual(len(result.assignment), 0)

    def test_homogeneous_half_budget(self):
        """Test homogéneo con medio presupuesto"""
        workers = [Worker(i, UniformBids(1.0, 8)) for i in range(8)]
        result = rpa_run(workers, 8, 4.0, RPAConfig(alpha=0.5, budget_mode=BudgetMode.HALF))
        self.assertEqual(result.p_hat, 1.0)
        self.assertEqual(result.threshold, 1.5)
        self.assertEqual(result.sample_size, 4)
        self.assertEqual(result.assignment.as_set(), {(4, 0), (5, 1)})

    def test_full_budget_mode(self):
        """Test modo de presupuesto completo"""
        workers = [Worker(i, UniformBids(1.0, 8)) for i in range(8)]
        assignment = rpa(workers, 8, 4.0, RPAConfig(alpha=0.5, budget_mode=BudgetMode.FULL))
        self.assertEqual(len(assignment), 4)

    def test_degenerate_instance(self):
        """Test instancia degenerada"""
        with self.assertRaises(DegenerateInstanceError):
            rpa([Worker(0, {0: 1.0})], 1, 2.0)

    def test_alpha_range(self):
        """Test rango de alpha"""
        with self.assertRaises(ValueError):
            RPAConfig(alpha=1.0)
        self.assertEqual(RPAConfig(alpha=0.5).bound, 36.0)

    def test_uniform_instance(self):
        """Test instancia uniforme"""
        instance = gen_uniform_hetero(10, seed=0)
        result = rpa_run(instance.workers, instance.num_tasks, instance.budget, RPAConfig(alpha=0.5))
        self.assertTrue(validate_assignment(instance, result.assignment).ok)
        self.assertTrue(all(p.payment <= result.threshold for p in result.assignment.pairs))
        self.assertLessEqual(result.assignment.total_payment, instance.budget / 2 + 1e-9)

    def test_sample_is_never_hired(self):
        """Test la muestra nunca se contrata"""
        rng = SplitMixRandom(77)
        for trial in range(30):
            instance = gen_uniform_hetero(rng.randint(2, 30), seed=trial)
            for mode in (BudgetMode.HALF, BudgetMode.FULL):
                assignment = rpa(
                    instance.workers,
                    instance.num_tasks,
                    instance.budget,
                    RPAConfig(alpha=0.5, budget_mode=mode),
                )
                half = instance.num_workers // 2
                self.assertTrue(all(p.worker_id >= half for p in assignment.pairs))

    def test_price_sandwich_over_permutations(self):
        """Test cota de precio sobre permutaciones"""
        workers = tuple(Worker(i, UniformBids(1.0 if i < 100 else 2.0, 200)) for i in range(200))
        instance = Instance(workers=workers, num_tasks=200, budget=100.0, bid_ceiling=2.0)
        holds = 0
        for seed in range(100):
            permuted = instance.permuted(permutation(200, seed))
            sandwich = price_sandwich(permuted.workers, permuted.num_tasks, permuted.budget, 0.5)
            self.assertEqual(sandwich.p, 1.0)
            holds += sandwich.holds
        self.assertGreaterEqual(holds / 100, 0.9)


class RunOnlineCommandTestCase(SimpleTestCase):
    """Tests para el comando run_online"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "homogeneous.json")
        instance = Instance(
            workers=tuple(Worker(i, UniformBids(1.0, 8)) for i in range(8)),
            num_tasks=8,
            budget=4.0,
            bid_ceiling=1.0,
        )
        with open(self.path, "w", encoding="utf-8") as handle:
            handle.write(serialize_instance(instance))

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, *args):
        out = StringIO()
        call_command("run_online", "--instance", self.path, *args, stdout=out)
        return json.loads(out.getvalue())

    def test_oha(self):
        """Test OHA"""
        output = self.run_command("--algorithm", "oha")
        self.assertEqual(output["pairs"], 4)
        self.assertEqual(output["spend"], 4.0)

    def test_rpa_half_and_full(self):
        """Test RPA con medio y todo el presupuesto"""
        self.assertEqual(self.run_command("--algorithm", "rpa", "--alpha", "0.5")["pairs"], 2)
        output = self.run_command("--algorithm", "rpa", "--budget-mode", "full")
        self.assertEqual(output["pairs"], 4)
        self.assertEqual(output["p_hat"], 1.0)

    def test_invalid_alpha(self):
        """Test alpha inválido"""
        with self.assertRaises(CommandError):
            self.run_command("--algorithm", "rpa", "--alpha", "1.5")
