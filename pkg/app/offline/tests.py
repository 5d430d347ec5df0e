"""
Tests para el solver offline
"""

import json
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from generators.prng import SplitMixRandom
from instances.domain import Instance, UniformBids, Worker
from instances.services import validate_assignment
from instances.tests import TOY_DOCUMENT, toy_instance
from offline.services import (
    EnumerationLimitError,
    OfflineScaleError,
    brute_force_optimal,
    build_flow_network,
    greedy_homogeneous,
    min_cost_flow_schedule,
    offline_optimal,
    optimal_pairs,
)


def random_small_instance(rng: SplitMixRandom, feasible: float = 0.6) -> Instance:
    """n, m <= 6, ofertas enteras en {1..5}, B uniforme en [1, 12]"""
    n = rng.randint(0, 6)
    m = rng.randint(1, 6)
    workers = []
    for worker_id in range(n):
        bids = {t: float(rng.randint(1, 5)) for t in range(m) if rng.bernoulli(feasible)}
        workers.append(Worker(worker_id, bids))
    budget = 1.0 + rng.random() * 11.0
    return Instance(workers=tuple(workers), num_tasks=m, budget=budget, bid_ceiling=5.0)


def random_homogeneous_instance(rng: SplitMixRandom) -> Instance:
    n = rng.randint(0, 6)
    m = rng.randint(1, 6)
    workers = tuple(Worker(i, UniformBids(float(rng.randint(1, 5)), m)) for i in range(n))
    return Instance(workers=workers, num_tasks=m, budget=1.0 + rng.random() * 11.0, bid_ceiling=5.0)


class FlowNetworkTestCase(SimpleTestCase):
    """Tests para la construcción de la red de flujo"""

    def test_empty_instance(self):
        """Test instancia vacía"""
        network = build_flow_network(Instance(workers=(), num_tasks=0, budget=1.0, bid_ceiling=1.0))
        self.assertEqual(network.num_nodes, 2)
        self.assertEqual(len(network.arcs), 0)

    def test_toy_instance(self):
        """Test red de la instancia de ejemplo"""
        network = build_flow_network(toy_instance())
        self.assertEqual(network.num_nodes, 6)
        self.assertEqual(len(network.arcs), 8)
        self.assertTrue(all(arc.capacity == 1 for arc in network.arcs))
        bid_arcs = [arc for arc in network.arcs if arc.cost > 0]
        self.assertEqual(sorted(arc.cost for arc in bid_arcs), [1.0, 1.125, 1.25, 1.75])

    def test_worker_without_feasible_tasks(self):
        """Test trabajador sin tareas factibles"""
        instance = Instance(
            workers=(Worker(0, {}), Worker(1, {0: 1.0})), num_tasks=1, budget=2.0, bid_ceiling=1.0
        )
        network = build_flow_network(instance)
        self.assertEqual(network.num_nodes, 5)
        outgoing = [arc for arc in network.arcs if arc.tail == network.worker_node(0)]
        self.assertEqual(outgoing, [])
        self.assertEqual(len(network.arcs), 2 + 1 + 1)


class MinCostFlowScheduleTestCase(SimpleTestCase):
    """Tests para el costo mínimo por valor de flujo"""

    def schedule(self, instance):
        return [
            (step.flow, step.marginal_cost, step.cumulative_cost)
            for step in min_cost_flow_schedule(build_flow_network(instance))
        ]

    def test_toy_schedule(self):
        """Test costos de la instancia de ejemplo"""
        self.assertEqual(self.schedule(toy_instance()), [(1, 1.0, 1.0), (2, 1.375, 2.375)])

    def test_single_pair(self):
        """Test un solo par"""
        instance = Instance(workers=(Worker(0, {0: 1.0}),), num_tasks=1, budget=1.0, bid_ceiling=1.0)
        self.assertEqual(self.schedule(instance), [(1, 1.0, 1.0)])

    def test_single_task_caps_flow(self):
        """Test una sola tarea limita el flujo"""
        instance = Instance(
            workers=(Worker(0, {0: 1.0}), Worker(1, {0: 2.0})), num_tasks=1, budget=3.0, bid_ceiling=2.0
        )
        self.assertEqual(self.schedule(instance), [(1, 1.0, 1.0)])

    def test_marginal_costs_are_non_decreasing(self):
        """Test costos marginales no decrecientes"""
        rng = SplitMixRandom(7)
        for _ in range(200):
            steps = min_cost_flow_schedule(build_flow_network(random_small_instance(rng)))
            marginals = [step.marginal_cost for step in steps]
            self.assertEqual(marginals, sorted(marginals))


class OfflineOptimalTestCase(SimpleTestCase):
    """Tests para el óptimo offline"""

    def test_toy_instance(self):
        """Test óptimo de la instancia de ejemplo"""
        instance = toy_instance()
        result = offline_optimal(instance)
        self.assertEqual(result.flow_value, 2)
        self.assertEqual(result.total_cost, 2.375)
        self.assertEqual(result.assignment.as_set(), {(1, 0), (0, 1)})
        self.assertTrue(validate_assignment(instance, result.assignment).ok)

    def test_toy_instance_small_budget(self):
        """Test presupuesto chico"""
        result = offline_optimal(toy_instance().with_budget(1.0))
        self.assertEqual(result.flow_value, 1)
        self.assertEqual(result.assignment.as_set(), {(0, 0)})

    def test_budget_below_minimum_bid(self):
        """Test presupuesto menor que la oferta mínima"""
        result = offline_optimal(toy_instance().with_budget(0.5))
        self.assertEqual(result.flow_value, 0)
        self.assertEqual(len(result.assignment), 0)

    def test_equal_cost_tie_prefers_lowest_worker_then_task(self):
        """Test empate de costo: gana el par (trabajador, tarea) lexicográficamente menor"""
        instance = Instance(
            workers=(Worker(0, {1: 1.0}), Worker(1, {0: 1.0})),
            num_tasks=2,
            budget=1.0,
            bid_ceiling=1.0,
        )
        result = offline_optimal(instance)
        self.assertEqual(result.flow_value, 1)
        self.assertEqual(result.assignment.as_set(), {(0, 1)})

        instance = Instance(
            workers=(Worker(0, {0: 1.0, 1: 1.0}), Worker(1, {0: 1.0})),
            num_tasks=2,
            budget=1.0,
            bid_ceiling=1.0,
        )
        self.assertEqual(offline_optimal(instance).assignment.as_set(), {(0, 0)})

    def test_matches_brute_force(self):
        """Test coincide con la fuerza bruta"""
        rng = SplitMixRandom(12345)
        for _ in range(500):
            instance = random_small_instance(rng)
            flow = offline_optimal(instance)
            oracle = brute_force_optimal(instance)
            self.assertEqual(flow.flow_value, oracle.flow_value, instance)
            self.assertEqual(len(flow.assignment), flow.flow_value)
            self.assertTrue(validate_assignment(instance, flow.assignment).ok)


class BruteForceTestCase(SimpleTestCase):
    """Tests para el oráculo de fuerza bruta"""

    def test_toy_instance(self):
        """Test fuerza bruta sobre la instancia de ejemplo"""
        result = brute_force_optimal(toy_instance())
        self.assertEqual(result.flow_value, 2)
        self.assertEqual(result.total_cost, 2.375)

    def test_empty_instance(self):
        """Test instancia vacía"""
        instance = Instance(workers=(), num_tasks=1, budget=1.0, bid_ceiling=1.0)
        self.assertEqual(brute_force_optimal(instance).flow_value, 0)

    def test_budget_caps_count(self):
        """Test el presupuesto limita la cantidad"""
        workers = tuple(Worker(i, {t: 1.0 for t in range(3)}) for i in range(3))
        instance = Instance(workers=workers, num_tasks=3, budget=2.0, bid_ceiling=1.0)
        self.assertEqual(brute_force_optimal(instance).flow_value, 2)

    def test_enumeration_guard(self):
        """Test límite de enumeración"""
        workers = tuple(Worker(i, {0: 1.0}) for i in range(9))
        instance = Instance(workers=workers, num_tasks=1, budget=9.0, bid_ceiling=1.0)
        with self.assertRaises(EnumerationLimitError):
            brute_force_optimal(instance)

    @override_settings(SIMULATOR_BRUTE_FORCE_LIMIT=2)
    def test_enumeration_guard_from_settings(self):
        """Test límite de enumeración desde settings"""
        with self.assertRaises(EnumerationLimitError):
            brute_force_optimal(
                Instance(
                    workers=tuple(Worker(i, {}) for i in range(3)),
                    num_tasks=1,
                    budget=1.0,
                    bid_ceiling=1.0,
                )
            )


class GreedyHomogeneousTestCase(SimpleTestCase):
    """Tests para el greedy homogéneo"""

    def test_toy_instance_is_suboptimal(self):
        """Test greedy subóptimo en la instancia de ejemplo"""
        instance = toy_instance()
        greedy = greedy_homogeneous(instance)
        self.assertEqual(greedy.as_set(), {(0, 0)})
        self.assertEqual(offline_optimal(instance).flow_value, 2)

    def test_homogeneous_prefix(self):
        """Test prefijo homogéneo"""
        bids = [3.0, 1.0, 2.0, 2.0]
        workers = tuple(Worker(i, UniformBids(b, 4)) for i, b in enumerate(bids))
        instance = Instance(workers=workers, num_tasks=4, budget=5.0, bid_ceiling=3.0)
        assignment = greedy_homogeneous(instance)
        self.assertEqual(sorted(p.worker_id for p in assignment.pairs), [1, 2, 3])
        self.assertEqual(assignment.total_payment, 5.0)

    def test_empty_instance(self):
        """Test instancia vacía"""
        instance = Instance(workers=(), num_tasks=2, budget=2.0, bid_ceiling=1.0)
        self.assertEqual(len(greedy_homogeneous(instance)), 0)

    def test_optimal_on_homogeneous_instances(self):
        """Test greedy óptimo en instancias homogéneas"""
        rng = SplitMixRandom(99)
        for _ in range(300):
            instance = random_homogeneous_instance(rng)
            self.assertEqual(
                len(greedy_homogeneous(instance)), brute_force_optimal(instance).flow_value
            )


class OptimalPairsTestCase(SimpleTestCase):
    """Tests para la elección del método exacto"""

    def test_heterogeneous_uses_flow(self):
        """Test instancia heterogénea usa flujo"""
        self.assertEqual(optimal_pairs(toy_instance()), 2)

    def test_homogeneous_skips_flow(self):
        """Test instancia homogénea evita el flujo"""
        workers = tuple(Worker(i, UniformBids(1.0, 10_000)) for i in range(10_000))
        instance = Instance(workers=workers, num_tasks=10_000, budget=50.0, bid_ceiling=1.0)
        self.assertEqual(optimal_pairs(instance, max_arcs=10), 50)

    def test_scale_guard(self):
        """Test límite de escala"""
        with self.assertRaises(OfflineScaleError):
            optimal_pairs(toy_instance(), max_arcs=5)


class SolveOfflineCommandTestCase(SimpleTestCase):
    """Tests para el comando solve_offline"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "toy.json")
        with open(self.path, "w", encoding="utf-8") as handle:
            handle.write(TOY_DOCUMENT)

    def tearDown(self):
        self.tmp.cleanup()

    def solve(self, algorithm):
        out = StringIO()
        call_command("solve_offline", "--instance", self.path, "--algorithm", algorithm, stdout=out)
        return json.loads(out.getvalue())

    def test_flow(self):
        """Test algoritmo flow"""
        output = self.solve("flow")
        self.assertEqual(output["F"], 2)
        self.assertEqual(output["total_cost"], 2.375)
        self.assertEqual(output["assignment"]["count"], 2)

    def test_brute_and_greedy(self):
        """Test algoritmos brute y greedy"""
        self.assertEqual(self.solve("brute")["F"], 2)
        self.assertEqual(self.solve("greedy")["F"], 1)

    def test_missing_file(self):
        """Test archivo inexistente"""
        with self.assertRaises(CommandError):
            call_command("solve_offline", "--instance", os.path.join(self.tmp.name, "nada.json"))
