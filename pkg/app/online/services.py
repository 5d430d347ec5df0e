"""
Algoritmos online
OHA (orden adversarial) con la función potencial φ, y RPA (permutación
aleatoria): observa la primera mitad, estima un precio con OA y corre FTP.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence

from instances.domain import Assignment, PaymentMode, Pair, TaskPool, Worker, cheapest_task
from instances.services import SimulatorError
from thresholds.services import ftp, oa

logger = logging.getLogger(__name__)


class PotentialDomainError(SimulatorError, ValueError):
    """x fuera de [0, 1] al evaluar φ"""

    pass


class InvalidInstanceError(SimulatorError):
    """Una oferta observada está fuera de [1, R]"""

    def __init__(self, message: str, worker_id: Optional[int] = None):
        super().__init__(message)
        self.worker_id = worker_id


class DegenerateInstanceError(SimulatorError):
    """RPA necesita al menos dos trabajadores"""

    pass


# =============================================================================
# Función potencial
# =============================================================================


def potential_phi(x: float, ceiling: float) -> float:
    """
    φ(x) = min((R·e)^(1-x), R).

    Vale exactamente R en [0, 1/(1+ln R)] y 1 en x = 1; es no creciente.
    """
    if not 0.0 <= x <= 1.0:
        raise PotentialDomainError(f"x={x!r} fuera de [0, 1]")
    if ceiling < 1:
        raise PotentialDomainError(f"R={ceiling!r} debe ser >= 1")
    if x <= 1.0 / (1.0 + math.log(ceiling)):
        return float(ceiling)
    return min((ceiling * math.e) ** (1.0 - x), float(ceiling))


# =============================================================================
# OHA
# =============================================================================


@dataclass
class OnlineState:
    """Fracción consumida x, presupuesto restante f y tareas sin asignar"""

    budget: float
    pool: TaskPool
    x: float = 0.0
    f: float = field(default=None)

    def __post_init__(self):
        if self.f is None:
            self.f = self.budget

    def consume(self, task_id: int, amount: float) -> None:
        self.x += amount / self.budget
        self.f -= amount
        self.pool.remove(task_id)


@dataclass(frozen=True)
class OnlineDecision:
    """Decisión ante una llegada: precio ofrecido φ_i y tarea elegida (si hubo)"""

    worker_id: int
    x: float
    offered: float
    task_id: Optional[int] = None
    bid: Optional[float] = None
    payment: Optional[float] = None

    @property
    def accepted(self) -> bool:
        return self.task_id is not None


@dataclass(frozen=True)
class OnlineTrace:
    decisions: Sequence[OnlineDecision]
    assignment: Assignment
    final_x: float
    final_f: float


def _check_bid_range(worker: Worker, ceiling: float) -> None:
    low, high = worker.min_bid(), worker.max_bid()
    if low is None:
        return
    if low < 1 or high > ceiling:
        raise InvalidInstanceError(
            f"Trabajador {worker.id}: ofertas en [{low}, {high}] fuera de [1, {ceiling}]",
            worker_id=worker.id,
        )


def oha_trace(
    workers: Iterable[Worker],
    tasks,
    budget: float,
    ceiling: float,
    payment_mode: PaymentMode = PaymentMode.BID,
) -> OnlineTrace:
    """
    OHA con la traza de cada llegada.

    Por trabajador: C_i = {j disponible : b_ij <= min(f, φ(x))}. En modo
    THRESHOLD se paga y descuenta φ_i = min(f, φ(x)) en lugar de la oferta.
    """
    payment_mode = PaymentMode(payment_mode)
    state = OnlineState(budget=budget, pool=TaskPool.of(tasks))
    decisions: List[OnlineDecision] = []
    pairs: List[Pair] = []

    for worker in workers:
        if state.f <= 0:
            break
        _check_bid_range(worker, ceiling)

        x_at_arrival = state.x
        offered = min(state.f, potential_phi(min(state.x, 1.0), ceiling))
        choice = cheapest_task(worker, state.pool, offered) if state.pool else None
        if choice is None:
            decisions.append(OnlineDecision(worker.id, x_at_arrival, offered))
            continue

        task_id, bid = choice
        payment = bid if payment_mode == PaymentMode.BID else offered
        state.consume(task_id, payment)
        pairs.append(Pair(worker.id, task_id, payment))
        decisions.append(
            OnlineDecision(worker.id, x_at_arrival, offered, task_id, bid, payment)
        )

    assignment = Assignment.from_pairs(pairs)
    logger.debug(
        f"OHA: {len(assignment)} pares, gasto {budget - state.f}, x final {state.x}"
    )
    return OnlineTrace(
        decisions=tuple(decisions),
        assignment=assignment,
        final_x=state.x,
        final_f=state.f,
    )


def oha(
    workers: Iterable[Worker],
    tasks,
    budget: float,
    ceiling: float,
    payment_mode: PaymentMode = PaymentMode.BID,
) -> Assignment:
    return oha_trace(workers, tasks, budget, ceiling, payment_mode).assignment


def oha_bound(ceiling: float, epsilon: float) -> float:
    """Cota de la razón competitiva de OHA: (R·e)^ε · (ln R + 3)"""
    return (ceiling * math.e) ** epsilon * (math.log(ceiling) + 3.0)


# =============================================================================
# RPA
# =============================================================================


class BudgetMode(str, Enum):
    HALF = "half"
    FULL = "full"


@dataclass(frozen=True)
class RPAConfig:
    """
    alpha infla el precio estimado; budget_mode decide si la segunda mitad
    usa B/2 (HALF) o todo el presupuesto (FULL).
    """

    alpha: float = 0.5
    budget_mode: BudgetMode = BudgetMode.HALF

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha!r} debe estar en (0, 1)")
        object.__setattr__(self, "budget_mode", BudgetMode(self.budget_mode))

    @property
    def bound(self) -> float:
        """Cota de alta probabilidad 8(1+α)²/(1-α)"""
        return 8.0 * (1.0 + self.alpha) ** 2 / (1.0 - self.alpha)


@dataclass(frozen=True)
class RPAResult:
    assignment: Assignment
    p_hat: float
    threshold: float
    sample_size: int


def rpa_run(
    workers: Sequence[Worker],
    tasks,
    budget: float,
    config: Optional[RPAConfig] = None,
    payment_mode: PaymentMode = PaymentMode.BID,
) -> RPAResult:
    """
    RPA: no asigna nada a los primeros ⌊n/2⌋ trabajadores, estima
    p̂ = OA(primera mitad, J, B/2).p*, y corre FTP((1+α)p̂, B') sobre el resto.
    """
    config = config or RPAConfig()
    workers = list(workers)
    n = len(workers)
    if n < 2:
        raise DegenerateInstanceError(f"RPA necesita n >= 2 (n={n})")

    half = n // 2
    estimate = oa(workers[:half], tasks, budget / 2.0)
    threshold = (1.0 + config.alpha) * estimate.p_star
    phase_budget = budget / 2.0 if config.budget_mode == BudgetMode.HALF else budget

    assignment = ftp(threshold, phase_budget, workers[half:], tasks, payment_mode)
    logger.debug(
        f"RPA: p̂={estimate.p_star}, umbral={threshold}, {len(assignment)} pares"
    )
    return RPAResult(
        assignment=assignment,
        p_hat=estimate.p_star,
        threshold=threshold,
        sample_size=half,
    )


def rpa(
    workers: Sequence[Worker],
    tasks,
    budget: float,
    config: Optional[RPAConfig] = None,
    payment_mode: PaymentMode = PaymentMode.BID,
) -> Assignment:
    return rpa_run(workers, tasks, budget, config, payment_mode).assignment


@dataclass(frozen=True)
class PriceSandwich:
    p: float
    p_hat: float
    holds: bool


def price_sandwich(workers: Sequence[Worker], tasks, budget: float, alpha: float) -> PriceSandwich:
    """
    Compara el precio de OA sobre toda la secuencia (presupuesto B) con el
    estimado de la primera mitad: p <= (1+α)p̂ <= (1+α)p/(1-α).
    """
    workers = list(workers)
    p = oa(workers, tasks, budget).p_star
    p_hat = oa(workers[: len(workers) // 2], tasks, budget / 2.0).p_star
    inflated = (1.0 + alpha) * p_hat
    holds = p <= inflated <= (1.0 + alpha) * p / (1.0 - alpha)
    return PriceSandwich(p=p, p_hat=p_hat, holds=holds)
