"""
Tests para los generadores de instancias y el PRNG
"""

import math
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from generators.prng import SplitMixRandom, derive_seed, permutation, splitmix64
from generators.services import (
    GeneratorParameterError,
    adversarial_groups,
    gen_adversarial,
    gen_lower_bound_family,
    gen_uniform_hetero,
    lower_bound_depth,
)
from instances.services import parse_instance, serialize_instance


class PRNGTestCase(SimpleTestCase):
    """Tests para el generador portable"""

    def test_splitmix64_reference_value(self):
        """Test valor de referencia de SplitMix64"""
        self.assertEqual(splitmix64(0), 0xE220A8397B1DCDAF)

    def test_same_seed_same_stream(self):
        """Test misma semilla, misma secuencia"""
        a, b = SplitMixRandom(42), SplitMixRandom(42)
        self.assertEqual([a.next_u64() for _ in range(10)], [b.next_u64() for _ in range(10)])
        self.assertNotEqual(SplitMixRandom(43).next_u64(), SplitMixRandom(42).next_u64())

    def test_ranges(self):
        """Test rangos de los sorteos"""
        rng = SplitMixRandom(1)
        for _ in range(2000):
            self.assertTrue(0.0 <= rng.random() < 1.0)
            self.assertIn(rng.randint(1, 5), {1, 2, 3, 4, 5})
            self.assertGreaterEqual(rng.exponential(), 0.0)
        with self.assertRaises(ValueError):
            rng.randbelow(0)

    def test_permutation(self):
        """Test permutación"""
        order = permutation(50, 9)
        self.assertEqual(sorted(order), list(range(50)))
        self.assertEqual(order, permutation(50, 9))
        self.assertNotEqual(order, list(range(50)))

    def test_derive_seed_depends_on_every_key(self):
        """Test semilla derivada de cada componente"""
        seeds = {derive_seed(0, r, t) for r in (2, 4, 8) for t in range(20)}
        self.assertEqual(len(seeds), 60)
        self.assertNotEqual(derive_seed(1, 2, 3), derive_seed(1, 3, 2))


class AdversarialGeneratorTestCase(SimpleTestCase):
    """Tests para la familia adversarial"""

    def test_ceiling_two(self):
        """Test R = 2"""
        instance = gen_adversarial(2, seed=0, depth=1)
        bids = [w.uniform_bid for w in instance.workers]
        self.assertEqual(bids[:6], [2.0, 2.0, 1.0, 1.0, 1.0, 1.0])
        self.assertEqual(bids[6:], [2.0] * 10)
        self.assertEqual(instance.num_workers, 16)
        self.assertEqual(instance.num_tasks, 16)
        self.assertEqual(instance.budget, 4.0)
        self.assertTrue(instance.is_homogeneous)

    def test_group_sizes_closed_form(self):
        """Test tamaños de grupo en forma cerrada"""
        for exponent in range(1, 21):
            ceiling = 2 ** exponent
            for depth in range(1, exponent + 1):
                groups = adversarial_groups(ceiling, depth)
                self.assertEqual([count for _, count in groups], [2 ** (j + 1) for j in range(depth + 1)])
                total = sum(count for _, count in groups)
                self.assertEqual(total, 2 ** (depth + 2) - 2)
                self.assertLessEqual(total, 8 * ceiling)

    def test_bids_are_powers_of_two_in_range(self):
        """Test ofertas potencias de 2 en rango"""
        for seed in range(20):
            instance = gen_adversarial(64, seed)
            for value in instance.bid_values():
                self.assertTrue(1.0 <= value <= 64.0)
                self.assertEqual(math.frexp(value)[0], 0.5)

    def test_depth_drawn_from_seed(self):
        """Test profundidad sorteada desde la semilla"""
        depths = set()
        for seed in range(100):
            instance = gen_adversarial(16, seed)
            depths.add(int(math.log2(16 / min(instance.bid_values()))))
        self.assertEqual(depths, {1, 2, 3, 4})

    def test_determinism(self):
        """Test determinismo"""
        self.assertEqual(
            serialize_instance(gen_adversarial(32, 7)), serialize_instance(gen_adversarial(32, 7))
        )

    def test_invalid_ceiling(self):
        """Test R inválido"""
        for ceiling in (3, 1, 2 ** 21, True, 4.0):
            with self.assertRaises(GeneratorParameterError):
                gen_adversarial(ceiling, 0)


class UniformGeneratorTestCase(SimpleTestCase):
    """Tests para los grafos heterogéneos uniformes"""

    def test_shape_and_edge_count(self):
        """Test forma y cantidad de aristas"""
        instance = gen_uniform_hetero(10, seed=0)
        self.assertEqual(instance.num_workers, 200)
        self.assertEqual(instance.num_tasks, 200)
        self.assertEqual(instance.budget, 200.0)
        sigma = math.sqrt(2000 * 0.95)
        self.assertLessEqual(abs(instance.arc_count() - 2000), 5 * sigma)

    def test_bids_are_integral(self):
        """Test ofertas enteras"""
        for ceiling in (2, 7, 50):
            instance = gen_uniform_hetero(ceiling, seed=ceiling)
            for worker in instance.workers:
                for bid in worker.bids.values():
                    self.assertTrue(bid.is_integer())
                    self.assertTrue(1 <= bid <= ceiling)

    def test_determinism(self):
        """Test determinismo"""
        self.assertEqual(gen_uniform_hetero(20, 3), gen_uniform_hetero(20, 3))
        self.assertNotEqual(gen_uniform_hetero(20, 3), gen_uniform_hetero(20, 4))

    def test_large_ceiling_warns(self):
        """Test advertencia con R grande"""
        with self.assertLogs("generators.services", level="WARNING"):
            gen_uniform_hetero(60, seed=0)

    def test_ceiling_above_budget(self):
        """Test R mayor que el presupuesto"""
        with self.assertRaises(GeneratorParameterError):
            gen_uniform_hetero(300, seed=0)


class LowerBoundFamilyTestCase(SimpleTestCase):
    """Tests para la familia de instancias difíciles"""

    def test_probabilities(self):
        """Test probabilidades"""
        family = gen_lower_bound_family(0.5, 4, 4)
        self.assertEqual(family.k, 2)
        self.assertEqual(family.probs, (0.2, 0.2, 0.6))
        self.assertEqual(family.bound, 0.6)

    def test_group_sizes(self):
        """Test tamaños de grupo"""
        family = gen_lower_bound_family(0.5, 4, 8)
        last = family.instances[-1]
        bids = [w.uniform_bid for w in last.workers]
        self.assertEqual(bids, [4.0] * 2 + [2.0] * 4 + [1.0] * 8)

        first = family.instances[0]
        self.assertEqual([w.uniform_bid for w in first.workers], [4.0] * 14)
        self.assertEqual(
            [w.uniform_bid for w in family.instances[1].workers], [4.0] * 2 + [2.0] * 4 + [4.0] * 8
        )

    def test_equal_lengths_and_valid_bids(self):
        """Test largos iguales y ofertas válidas"""
        for eta in (0.1, 0.25, 0.3, 0.5):
            for ceiling in (4, 16):
                family = gen_lower_bound_family(eta, ceiling, 2 * ceiling)
                lengths = {inst.num_workers for inst in family.instances}
                self.assertEqual(len(lengths), 1)
                self.assertEqual(len(family.instances), family.k + 1)
                for inst in family.instances:
                    self.assertEqual(inst.num_tasks, inst.num_workers)
                    self.assertTrue(all(1.0 <= v <= ceiling for v in inst.bid_values()))
                self.assertAlmostEqual(math.fsum(family.probs), 1.0, delta=1e-12)

    def test_depth(self):
        """Test profundidad"""
        self.assertEqual(lower_bound_depth(0.5, 4), 2)
        self.assertEqual(lower_bound_depth(0.1, 4), 14)
        self.assertEqual(lower_bound_depth(0.5, 256), 8)

    def test_parameter_domain(self):
        """Test dominio de parámetros"""
        with self.assertRaises(GeneratorParameterError):
            gen_lower_bound_family(0.0, 4, 4)
        with self.assertRaises(GeneratorParameterError):
            gen_lower_bound_family(1.0, 4, 4)
        with self.assertRaises(GeneratorParameterError):
            gen_lower_bound_family(0.5, 4, 2)


class GenInstanceCommandTestCase(SimpleTestCase):
    """Tests para el comando gen_instance"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def generate(self, name, *args):
        path = os.path.join(self.tmp.name, name)
        call_command("gen_instance", *args, "--out", path, stdout=StringIO())
        with open(path, encoding="utf-8") as handle:
            return handle.read()

    def test_adversarial_is_byte_identical(self):
        """Test salida adversarial idéntica byte a byte"""
        first = self.generate("a.json", "--family", "adversarial", "--R", "8", "--seed", "3")
        second = self.generate("b.json", "--family", "adversarial", "--R", "8", "--seed", "3")
        self.assertEqual(first, second)
        self.assertEqual(first, serialize_instance(gen_adversarial(8, 3)))
        self.assertEqual(parse_instance(first).num_workers, gen_adversarial(8, 3).num_workers)

    def test_lowerbound_index(self):
        """Test índice de instancia de la familia de cota inferior"""
        text = self.generate(
            "lb.json", "--family", "lowerbound", "--R", "4", "--eta", "0.5", "--B", "8", "--u", "1"
        )
        instance = parse_instance(text)
        self.assertEqual(instance.num_workers, 14)
        self.assertEqual(instance.bid_values(), [2.0, 4.0])

    def test_invalid_parameters(self):
        """Test parámetros inválidos"""
        with self.assertRaises(CommandError):
            self.generate("x.json", "--family", "adversarial", "--R", "6")
        with self.assertRaises(CommandError):
            self.generate("y.json", "--family", "lowerbound", "--R", "4")
