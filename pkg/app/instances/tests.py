"""
Tests para el modelo de instancias
"""

import json

from django.test import SimpleTestCase

from generators.prng import SplitMixRandom
from instances.domain import Assignment, Instance, Pair, TaskPool, UniformBids, Worker, cheapest_task
from instances.services import (
    InstanceFormatError,
    InvalidAssignmentError,
    assignment_to_dict,
    ensure_valid,
    parse_instance,
    serialize_instance,
    validate_assignment,
)

TOY_DOCUMENT = json.dumps(
    {
        "budget": 2.5,
        "num_tasks": 2,
        "bid_ceiling": 2,
        "workers": [
            {"id": 0, "bids": {"0": 1, "1": 1.25}},
            {"id": 1, "bids": {"0": 1.125, "1": 1.75}},
        ],
    }
)


def toy_instance() -> Instance:
    return parse_instance(TOY_DOCUMENT)


def random_instance(rng: SplitMixRandom) -> Instance:
    m = rng.randint(1, 6)
    ceiling = 1.0 + rng.random() * 9.0
    budget = ceiling + rng.random() * 20.0
    workers = []
    for worker_id in range(rng.randint(0, 6)):
        if rng.bernoulli(0.2):
            workers.append(Worker(worker_id, UniformBids(1.0 + rng.random() * (ceiling - 1.0), m)))
            continue
        bids = {}
        for task_id in range(m):
            if rng.bernoulli(0.6):
                bids[task_id] = 1.0 + rng.random() * (ceiling - 1.0)
        workers.append(Worker(worker_id, bids))
    return Instance(workers=tuple(workers), num_tasks=m, budget=budget, bid_ceiling=ceiling)


class ParseInstanceTestCase(SimpleTestCase):
    """Tests para la lectura de instancias"""

    def test_empty_worker_sequence(self):
        """Test secuencia vacía de trabajadores"""
        instance = parse_instance('{"budget": 5, "num_tasks": 1, "bid_ceiling": 2, "workers": []}')
        self.assertEqual(instance.num_workers, 0)
        self.assertEqual(instance.num_tasks, 1)
        self.assertEqual(instance.budget, 5.0)

    def test_toy_instance(self):
        """Test instancia de ejemplo"""
        instance = toy_instance()
        self.assertEqual(instance.num_workers, 2)
        self.assertEqual(instance.num_tasks, 2)
        self.assertEqual(instance.workers[1].bids, {0: 1.125, 1: 1.75})
        self.assertEqual(instance.epsilon, 2 / 2.5)
        self.assertFalse(instance.is_homogeneous)
        self.assertEqual(instance.bid_values(), [1.0, 1.125, 1.25, 1.75])

    def test_bid_below_one(self):
        """Test oferta menor que 1"""
        document = '{"budget": 5, "num_tasks": 1, "bid_ceiling": 2, "workers": [{"id": 0, "bids": {"0": 0.5}}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertIn("bid below 1", str(ctx.exception))
        self.assertEqual(ctx.exception.code, "bid_below_1")
        self.assertEqual(ctx.exception.worker_id, 0)
        self.assertEqual(ctx.exception.task_id, 0)

    def test_bid_above_ceiling(self):
        """Test oferta mayor que R"""
        document = '{"budget": 5, "num_tasks": 2, "bid_ceiling": 2, "workers": [{"id": 0, "bids": {"1": 3}}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "bid_above_ceiling")
        self.assertEqual(ctx.exception.task_id, 1)

    def test_duplicate_task_key(self):
        """Test clave de tarea repetida"""
        document = '{"budget": 5, "num_tasks": 2, "bid_ceiling": 2, "workers": [{"id": 0, "bids": {"1": 1, "1": 2}}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "duplicate_task")
        self.assertEqual(ctx.exception.task_id, 1)
        self.assertEqual(ctx.exception.worker_id, 0)

    def test_duplicate_task_key_reports_owner(self):
        """Test clave de tarea repetida atribuida al trabajador que la declara"""
        document = (
            '{"budget": 5, "num_tasks": 3, "bid_ceiling": 2, "workers": ['
            '{"id": 0, "bids": {"0": 1, "2": 2}}, '
            '{"id": 1, "bids": {"2": 1, "0": 1, "2": 2}}]}'
        )
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "duplicate_task")
        self.assertEqual(ctx.exception.worker_id, 1)
        self.assertEqual(ctx.exception.task_id, 2)

    def test_duplicate_worker_field(self):
        """Test campo repetido dentro de un trabajador"""
        document = '{"budget": 5, "num_tasks": 2, "bid_ceiling": 2, "workers": [{"id": 0, "uniform_bid": 1, "uniform_bid": 2}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "duplicate_key")
        self.assertEqual(ctx.exception.worker_id, 0)

    def test_ceiling_above_budget(self):
        """Test R mayor que el presupuesto"""
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance('{"budget": 1, "num_tasks": 1, "bid_ceiling": 2, "workers": []}')
        self.assertEqual(ctx.exception.code, "ceiling_above_budget")

    def test_worker_id_must_match_position(self):
        """Test id de trabajador igual a su posición"""
        document = '{"budget": 5, "num_tasks": 1, "bid_ceiling": 2, "workers": [{"id": 1, "bids": {}}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "worker_id")

    def test_task_out_of_range(self):
        """Test tarea fuera de rango"""
        document = '{"budget": 5, "num_tasks": 1, "bid_ceiling": 2, "workers": [{"id": 0, "bids": {"3": 1}}]}'
        with self.assertRaises(InstanceFormatError) as ctx:
            parse_instance(document)
        self.assertEqual(ctx.exception.code, "task_out_of_range")

    def test_malformed_json(self):
        """Test JSON mal formado"""
        with self.assertRaises(InstanceFormatError):
            parse_instance("{not json")
        with self.assertRaises(InstanceFormatError):
            parse_instance('{"budget": 5}')

    def test_uniform_bid_encoding(self):
        """Test codificación uniform_bid"""
        document = '{"budget": 5, "num_tasks": 3, "bid_ceiling": 2, "workers": [{"id": 0, "uniform_bid": 1.5}]}'
        instance = parse_instance(document)
        worker = instance.workers[0]
        self.assertEqual(worker.uniform_bid, 1.5)
        self.assertEqual(dict(worker.bids), {0: 1.5, 1: 1.5, 2: 1.5})
        self.assertNotIn(3, worker.bids)
        self.assertTrue(instance.is_homogeneous)


class SerializeInstanceTestCase(SimpleTestCase):
    """Tests para la escritura de instancias"""

    def test_empty_instance_document(self):
        """Test documento de instancia vacía"""
        instance = Instance(workers=(), num_tasks=1, budget=5.0, bid_ceiling=2.0)
        self.assertEqual(
            serialize_instance(instance),
            '{"budget":5.0,"num_tasks":1,"bid_ceiling":2.0,"workers":[]}\n',
        )

    def test_toy_round_trip(self):
        """Test ida y vuelta de la instancia de ejemplo"""
        instance = toy_instance()
        self.assertEqual(parse_instance(serialize_instance(instance)), instance)

    def test_bid_decimal_rendering(self):
        """Test representación decimal de ofertas"""
        instance = Instance(
            workers=(Worker(0, {0: 1.125}), Worker(1, {0: 1.0 + 1.0 / 3.0})),
            num_tasks=1,
            budget=3.0,
            bid_ceiling=2.0,
        )
        reparsed = parse_instance(serialize_instance(instance))
        self.assertEqual(reparsed.workers[0].bids[0], 1.125)
        self.assertEqual(reparsed.workers[1].bids[0], 1.0 + 1.0 / 3.0)

    def test_round_trip_random_instances(self):
        """Test ida y vuelta de instancias aleatorias"""
        rng = SplitMixRandom(20240601)
        for _ in range(1000):
            instance = random_instance(rng)
            text = serialize_instance(instance)
            reparsed = parse_instance(text)
            self.assertEqual(reparsed, instance)
            self.assertEqual(serialize_instance(reparsed), text)

    def test_uniform_encoding_is_preserved(self):
        """Test se conserva la codificación uniforme"""
        instance = Instance(
            workers=(Worker(0, UniformBids(2.0, 4)),), num_tasks=4, budget=8.0, bid_ceiling=2.0
        )
        self.assertIn('"uniform_bid":2.0', serialize_instance(instance))
        self.assertIsInstance(parse_instance(serialize_instance(instance)).workers[0].bids, UniformBids)


class ValidateAssignmentTestCase(SimpleTestCase):
    """Tests para el validador de asignaciones"""

    def setUp(self):
        self.instance = toy_instance()

    def test_empty_assignment_is_ok(self):
        """Test asignación vacía válida"""
        self.assertTrue(validate_assignment(self.instance, Assignment()).ok)

    def test_toy_assignment_is_ok(self):
        """Test asignación de ejemplo válida"""
        assignment = Assignment.from_pairs([Pair(1, 0, 1.125), Pair(0, 1, 1.25)])
        report = validate_assignment(self.instance, assignment)
        self.assertTrue(report.ok)
        self.assertEqual(assignment_to_dict(assignment)["total_payment"], 2.375)

    def test_payment_below_bid(self):
        """Test pago menor que la oferta"""
        assignment = Assignment.from_pairs([Pair(1, 0, 1.0), Pair(0, 1, 1.25)])
        report = validate_assignment(self.instance, assignment)
        self.assertFalse(report.ok)
        self.assertEqual(report.codes(), ["payment_below_bid"])
        self.assertIn("payment below bid", report.violations[0].message)

    def test_repeated_worker_and_task(self):
        """Test trabajador y tarea repetidos"""
        assignment = Assignment.from_pairs([Pair(0, 0, 1.0), Pair(0, 1, 1.25), Pair(1, 1, 1.75)])
        codes = validate_assignment(self.instance.with_budget(10.0), assignment).codes()
        self.assertIn("worker_repeated", codes)
        self.assertIn("task_repeated", codes)

    def test_over_budget(self):
        """Test exceso de presupuesto"""
        assignment = Assignment.from_pairs([Pair(0, 1, 1.25), Pair(1, 0, 1.5)])
        self.assertEqual(validate_assignment(self.instance, assignment).codes(), ["over_budget"])

    def test_budget_tolerance(self):
        """Test tolerancia del presupuesto"""
        assignment = Assignment.from_pairs([Pair(0, 1, 1.25), Pair(1, 0, 1.25 + 5e-10)])
        self.assertTrue(validate_assignment(self.instance, assignment).ok)

    def test_infeasible_and_unknown(self):
        """Test pares no factibles y tareas inexistentes"""
        instance = Instance(
            workers=(Worker(0, {1: 1.0}),), num_tasks=2, budget=5.0, bid_ceiling=2.0
        )
        codes = validate_assignment(
            instance, Assignment.from_pairs([Pair(0, 0, 1.0), Pair(3, 1, 1.0), Pair(0, 7, 1.0)])
        ).codes()
        self.assertEqual(sorted(codes), ["infeasible_pair", "unknown_task", "unknown_worker"])

    def test_ensure_valid_raises(self):
        """Test ensure_valid lanza error"""
        assignment = Assignment.from_pairs([Pair(1, 0, 1.0)])
        with self.assertRaises(InvalidAssignmentError) as ctx:
            ensure_valid(self.instance, assignment, context="(test)")
        self.assertEqual(ctx.exception.report.codes(), ["payment_below_bid"])


class TaskPoolTestCase(SimpleTestCase):
    """Tests para el conjunto de tareas y la regla de elección"""

    def test_lowest_with_lazy_removal(self):
        """Test menor tarea con borrado perezoso"""
        pool = TaskPool.of(5)
        pool.remove(0)
        pool.remove(2)
        self.assertEqual(pool.lowest(), 1)
        pool.remove(1)
        self.assertEqual(pool.lowest(), 3)
        self.assertEqual(list(pool), [3, 4])

    def test_cheapest_task_tie_breaks_by_task_id(self):
        """Test desempate por id de tarea"""
        worker = Worker(0, {3: 1.0, 1: 1.0, 0: 2.0})
        self.assertEqual(cheapest_task(worker, TaskPool.of(4), 5.0), (1, 1.0))
        self.assertEqual(cheapest_task(worker, TaskPool.of([0, 3]), 5.0), (3, 1.0))
        self.assertIsNone(cheapest_task(worker, TaskPool.of([0]), 1.5))

    def test_cheapest_task_uniform_worker(self):
        """Test trabajador uniforme"""
        worker = Worker(0, UniformBids(2.0, 3))
        pool = TaskPool.of(3)
        pool.remove(0)
        self.assertEqual(cheapest_task(worker, pool, 2.0), (1, 2.0))
        self.assertIsNone(cheapest_task(worker, pool, 1.999))
