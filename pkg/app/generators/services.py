"""
Generadores de instancias
Familia adversarial de los experimentos, grafos heterogéneos uniformes y la
familia de instancias difíciles I_0..I_k con su distribución de probabilidad.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from django.conf import settings

from instances.domain import Instance, UniformBids, Worker
from instances.services import SimulatorError

from .prng import SplitMixRandom

logger = logging.getLogger(__name__)

MAX_ADVERSARIAL_EXPONENT = 20


class GeneratorParameterError(SimulatorError, ValueError):
    """Parámetros fuera del dominio del generador"""

    pass


def _homogeneous_instance(
    levels: List[Tuple[float, int]], budget: float, ceiling: float, num_tasks: Optional[int] = None
) -> Instance:
    """Arma una instancia con grupos (oferta, cantidad) que ofertan en todas las tareas"""
    n = sum(count for _, count in levels)
    m = num_tasks if num_tasks is not None else n
    workers = []
    for bid, count in levels:
        shared = UniformBids(float(bid), m)
        for _ in range(count):
            workers.append(Worker(id=len(workers), bids=shared))
    return Instance(
        workers=tuple(workers), num_tasks=m, budget=float(budget), bid_ceiling=float(ceiling)
    )


# =============================================================================
# Familia adversarial
# =============================================================================


def adversarial_groups(ceiling: int, depth: int) -> List[Tuple[float, int]]:
    """
    Grupos (oferta, cantidad) antes del relleno: ofertas R, R/2, ..., R/2^i,
    con B·2^j/R = 2^(j+1) trabajadores en el grupo j.
    """
    budget = 2 * ceiling
    return [(ceiling / 2 ** j, budget * 2 ** j // ceiling) for j in range(depth + 1)]


def gen_adversarial(ceiling: int, seed: int, depth: Optional[int] = None) -> Instance:
    """
    Instancia adversarial: B = 2R, n = m = 8R, grupos con ofertas decrecientes
    y relleno final con trabajadores de oferta R.

    Args:
        ceiling: R, potencia de dos en [2, 2^20]
        seed: Semilla; elige la profundidad i uniforme en {1..log2 R}
        depth: Fuerza i (solo para pruebas)
    """
    if (
        isinstance(ceiling, bool)
        or not isinstance(ceiling, int)
        or ceiling < 2
        or ceiling & (ceiling - 1)
        or ceiling > 2 ** MAX_ADVERSARIAL_EXPONENT
    ):
        raise GeneratorParameterError(
            f"R={ceiling!r} debe ser potencia de dos en [2, 2^{MAX_ADVERSARIAL_EXPONENT}]"
        )

    log_r = ceiling.bit_length() - 1
    if depth is None:
        depth = 1 + SplitMixRandom(seed).randbelow(log_r)
    elif not 1 <= depth <= log_r:
        raise GeneratorParameterError(f"i={depth} fuera de [1, {log_r}]")

    levels = adversarial_groups(ceiling, depth)
    n = 8 * ceiling
    padding = n - sum(count for _, count in levels)
    levels.append((float(ceiling), padding))

    logger.debug(f"Adversarial: R={ceiling}, i={depth}, relleno={padding}")
    return _homogeneous_instance(levels, budget=2 * ceiling, ceiling=ceiling)


# =============================================================================
# Grafos heterogéneos uniformes
# =============================================================================


def gen_uniform_hetero(
    ceiling: int,
    seed: int,
    num_workers: int = 200,
    num_tasks: int = 200,
    budget: float = 200.0,
    edge_probability: float = 0.05,
) -> Instance:
    """
    Cada par (trabajador, tarea) es factible con probabilidad 0.05 y su
    oferta es uniforme en {1, ..., R}.

    Se recorren trabajadores y luego tareas; la oferta se sortea justo
    después de cada arista realizada.
    """
    if isinstance(ceiling, bool) or not isinstance(ceiling, int) or ceiling < 2:
        raise GeneratorParameterError(f"R={ceiling!r} debe ser un entero >= 2")
    if ceiling > budget:
        raise GeneratorParameterError(f"R={ceiling} mayor que B={budget}")
    if ceiling > getattr(settings, "SIMULATOR_UNIFORM_R_WARN", 50):
        logger.warning(f"R={ceiling} fuera del rango habitual [2, 50]")

    rng = SplitMixRandom(seed)
    workers = []
    for worker_id in range(num_workers):
        bids = {}
        for task_id in range(num_tasks):
            if rng.bernoulli(edge_probability):
                bids[task_id] = float(rng.randint(1, ceiling))
        workers.append(Worker(id=worker_id, bids=bids))

    return Instance(
        workers=tuple(workers),
        num_tasks=num_tasks,
        budget=float(budget),
        bid_ceiling=float(ceiling),
    )


# =============================================================================
# Familia de cota inferior
# =============================================================================


@dataclass(frozen=True)
class LowerBoundFamily:
    """
    Instancias anidadas I_0..I_k con ofertas R(1-η)^u y probabilidades p_u.
    """

    eta: float
    R: float
    B: float
    k: int
    instances: Tuple[Instance, ...]
    probs: Tuple[float, ...]

    @property
    def bound(self) -> float:
        """(1+η)/((k+1)η+1), cota del inverso de la razón esperada"""
        return (1.0 + self.eta) / ((self.k + 1) * self.eta + 1.0)

    @property
    def asymptotic_bound(self) -> float:
        """(1+η)/(η ln R / ln(1/(1-η)) + 1) = O(1/ln R)"""
        return (1.0 + self.eta) / (
            self.eta * math.log(self.R) / math.log(1.0 / (1.0 - self.eta)) + 1.0
        )


def lower_bound_depth(eta: float, ceiling: float) -> int:
    """Menor entero k con (1-η)^k <= 1/R"""
    k = 0
    while (1.0 - eta) ** k > 1.0 / ceiling:
        k += 1
    return k


def lower_bound_probabilities(eta: float, k: int) -> Tuple[float, ...]:
    denominator = (k + 1) * eta + 1.0
    return tuple([eta / denominator] * k + [(1.0 + eta) / denominator])


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def gen_lower_bound_family(
    eta: float, ceiling: float, budget: float, build_instances: bool = True
) -> LowerBoundFamily:
    """
    I_0 tiene round(B/R) trabajadores con oferta R; I_u agrega a I_{u-1}
    round(B/(R(1-η)^u)) trabajadores con oferta R(1-η)^u. Todas se rellenan
    con ofertas R hasta el largo de I_k y tienen m = ese largo.

    El último nivel puede quedar por debajo de 1; se lleva a 1 para respetar
    el rango de ofertas y su tamaño se calcula con la oferta ajustada.
    """
    if not 0.0 < eta < 1.0:
        raise GeneratorParameterError(f"η={eta!r} debe estar en (0, 1)")
    if ceiling < 2:
        raise GeneratorParameterError(f"R={ceiling!r} debe ser >= 2")
    if budget < ceiling:
        raise GeneratorParameterError(f"B={budget!r} debe ser >= R={ceiling!r}")

    k = lower_bound_depth(eta, ceiling)
    probs = lower_bound_probabilities(eta, k)

    levels: List[Tuple[float, int]] = []
    for u in range(k + 1):
        bid = max(1.0, ceiling * (1.0 - eta) ** u)
        levels.append((bid, max(1, _round_half_up(budget / bid))))

    instances: Tuple[Instance, ...] = ()
    if build_instances:
        length = sum(count for _, count in levels)
        built = []
        for u in range(k + 1):
            prefix = levels[: u + 1]
            padding = length - sum(count for _, count in prefix)
            padded = prefix + ([(float(ceiling), padding)] if padding else [])
            built.append(
                _homogeneous_instance(padded, budget=budget, ceiling=ceiling, num_tasks=length)
            )
        instances = tuple(built)

    logger.debug(f"Familia de cota inferior: η={eta}, R={ceiling}, k={k}")
    return LowerBoundFamily(
        eta=float(eta),
        R=float(ceiling),
        B=float(budget),
        k=k,
        instances=instances,
        probs=probs,
    )
