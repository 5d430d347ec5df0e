"""
Generador pseudoaleatorio portable.

El estado se siembra con splitmix64 y la secuencia sale de un xorshift64*,
así que dada la misma semilla cualquier implementación (en cualquier
lenguaje) produce exactamente los mismos números:

    splitmix64(s):  s += 0x9E3779B97F4A7C15
                    z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
                    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                    return z ^ (z >> 31)

    xorshift64*:    x ^= x >> 12; x ^= x << 25; x ^= x >> 27
                    return x * 0x2545F4914F6CDD1D

Todas las operaciones son módulo 2^64.
"""

import math
from typing import List, MutableSequence

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """Un paso de splitmix64 sobre `state`; devuelve la salida mezclada"""
    z = (state + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *keys: int) -> int:
    """
    Mezcla una semilla base con claves enteras (p. ej. R e índice de prueba)
    para que cada prueba sea reproducible por separado.
    """
    seed = base & MASK64
    for key in keys:
        seed = splitmix64(seed ^ splitmix64(key & MASK64))
    return seed


class SplitMixRandom:
    """Secuencia xorshift64* sembrada con splitmix64"""

    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self._state = state or GOLDEN_GAMMA

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def random(self) -> float:
        """Uniforme en [0, 1) con 53 bits"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniforme en {0, ..., n-1}, sin sesgo (rechazo)"""
        if n <= 0:
            raise ValueError(f"n={n} debe ser positivo")
        limit = ((1 << 64) // n) * n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def randint(self, a: int, b: int) -> int:
        """Uniforme en {a, ..., b}"""
        return a + self.randbelow(b - a + 1)

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def exponential(self) -> float:
        return -math.log(1.0 - self.random())

    def shuffle(self, items: MutableSequence) -> None:
        """Fisher-Yates desde el final"""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def permutation(n: int, seed: int) -> List[int]:
    order = list(range(n))
    SplitMixRandom(seed).shuffle(order)
    return order
