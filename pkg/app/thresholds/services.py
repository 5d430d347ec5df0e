"""
Políticas de umbral
FTP (política de umbral fijo) y OA, la búsqueda offline del mejor umbral
entre los valores de oferta, con garantía de 4-aproximación.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

from instances.domain import Assignment, PaymentMode, Pair, TaskPool, Worker, cheapest_task

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdResult:
    """
    Resultado de OA.

    `p_star` es B/Q (0 si Q = 0); `price` es la oferta candidata que logró Q.
    """

    assignment: Assignment
    Q: int
    p_star: float
    price: float = 0.0


class FixedThresholdPolicy:
    """
    FTP como máquina de estados secuencial.

    Cada llamada a `offer` procesa un trabajador: arma C_i con las tareas
    disponibles cuya oferta es <= min(p, presupuesto restante) y, si no está
    vacío, asigna la de menor oferta (empates por menor id).
    """

    def __init__(
        self,
        price: float,
        budget: float,
        tasks,
        payment_mode: PaymentMode = PaymentMode.BID,
    ):
        self.price = price
        self.remaining = budget
        self.pool = TaskPool.of(tasks)
        self.payment_mode = PaymentMode(payment_mode)
        self.pairs: List[Pair] = []

    @property
    def halted(self) -> bool:
        return self.remaining <= 0

    def offer(self, worker: Worker) -> Optional[Pair]:
        if self.halted or not self.pool:
            return None
        limit = min(self.price, self.remaining)
        choice = cheapest_task(worker, self.pool, limit)
        if choice is None:
            return None

        task_id, bid = choice
        payment = bid if self.payment_mode == PaymentMode.BID else limit
        pair = Pair(worker.id, task_id, payment)
        self.pairs.append(pair)
        self.pool.remove(task_id)
        self.remaining -= payment
        return pair

    def assignment(self) -> Assignment:
        return Assignment.from_pairs(self.pairs)


def ftp(
    price: float,
    budget: float,
    workers: Iterable[Worker],
    tasks,
    payment_mode: PaymentMode = PaymentMode.BID,
) -> Assignment:
    """
    Política de umbral fijo sobre una secuencia de trabajadores.

    Args:
        price: Umbral p
        budget: Presupuesto B
        workers: Trabajadores en orden de llegada
        tasks: Tareas disponibles (ids, cantidad m o TaskPool)
        payment_mode: BID paga la oferta, THRESHOLD paga min(p, restante)
    """
    policy = FixedThresholdPolicy(price, budget, tasks, payment_mode)
    for worker in workers:
        if policy.halted:
            break
        policy.offer(worker)
    return policy.assignment()


def candidate_thresholds(workers: Iterable[Worker]) -> List[float]:
    """Ofertas distintas de la entrada, en orden ascendente"""
    values = set()
    for worker in workers:
        values.update(worker.distinct_bids())
    return sorted(values)


def oa(workers, tasks, budget: float) -> ThresholdResult:
    """
    OA: corre FTP con cada oferta como umbral y se queda con el máximo Q.

    Entre candidatos con igual Q gana el umbral más chico. El precio
    reportado es p* = B/Q.
    """
    workers = list(workers)
    best_q = 0
    best_price = 0.0
    best_assignment = Assignment()

    for price in candidate_thresholds(workers):
        assignment = ftp(price, budget, workers, tasks)
        if len(assignment) > best_q:
            best_q = len(assignment)
            best_price = price
            best_assignment = assignment

    p_star = budget / best_q if best_q > 0 else 0.0
    logger.debug(f"OA: Q={best_q}, p*={p_star}, umbral={best_price}")
    return ThresholdResult(
        assignment=best_assignment, Q=best_q, p_star=p_star, price=best_price
    )
