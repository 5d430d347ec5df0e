"""
Tipos de dominio del simulador: tareas, trabajadores, instancias y asignaciones.

Todos los tipos son inmutables después de construidos, así que se pueden
compartir en modo lectura entre corridas concurrentes.
"""

import heapq
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple


# Tolerancia aditiva para la factibilidad del presupuesto
BUDGET_TOLERANCE = 1e-9


class PaymentMode(str, Enum):
    """
    Cómo se paga a un trabajador contratado.

    BID paga su oferta; THRESHOLD paga el precio ofrecido (variante de precio
    publicado) y descuenta ese monto del presupuesto.
    """

    BID = "bid"
    THRESHOLD = "threshold"


class UniformBids(Mapping):
    """
    Mapa de ofertas de un trabajador homogéneo: el mismo valor en las m tareas.

    No materializa las m entradas; las familias adversariales tienen n = m = 8R.
    """

    __slots__ = ("value", "num_tasks")

    def __init__(self, value: float, num_tasks: int):
        self.value = value
        self.num_tasks = num_tasks

    def __getitem__(self, task_id):
        if isinstance(task_id, int) and 0 <= task_id < self.num_tasks:
            return self.value
        raise KeyError(task_id)

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.num_tasks))

    def __len__(self) -> int:
        return self.num_tasks

    def __contains__(self, task_id) -> bool:
        return isinstance(task_id, int) and 0 <= task_id < self.num_tasks

    def __eq__(self, other):
        if isinstance(other, UniformBids):
            return self.value == other.value and self.num_tasks == other.num_tasks
        return Mapping.__eq__(self, other)

    def __hash__(self):
        return hash((self.value, self.num_tasks))

    def __repr__(self):
        return f"UniformBids({self.value!r}, num_tasks={self.num_tasks})"


@dataclass(frozen=True)
class Task:
    """Tarea identificada por su índice en [0, m)"""

    id: int


@dataclass(frozen=True)
class Worker:
    """
    Trabajador que llega en la posición `id`.

    `bids` mapea id de tarea -> oferta; el conjunto de claves es exactamente J_i
    (una clave ausente significa tarea no factible).
    """

    id: int
    bids: Mapping = field(default_factory=dict)

    @property
    def uniform_bid(self) -> Optional[float]:
        """Oferta única si el trabajador usa la codificación homogénea compacta"""
        if isinstance(self.bids, UniformBids):
            return self.bids.value
        return None

    @property
    def feasible_tasks(self) -> Iterable[int]:
        return self.bids.keys()

    def min_bid(self) -> Optional[float]:
        if isinstance(self.bids, UniformBids):
            return self.bids.value if self.bids.num_tasks else None
        return min(self.bids.values()) if self.bids else None

    def max_bid(self) -> Optional[float]:
        if isinstance(self.bids, UniformBids):
            return self.bids.value if self.bids.num_tasks else None
        return max(self.bids.values()) if self.bids else None

    def distinct_bids(self) -> Iterable[float]:
        if isinstance(self.bids, UniformBids):
            return (self.bids.value,) if self.bids.num_tasks else ()
        return set(self.bids.values())

    def with_id(self, new_id: int) -> "Worker":
        return Worker(id=new_id, bids=self.bids)


@dataclass(frozen=True)
class Instance:
    """
    Secuencia de trabajadores en orden de llegada, cantidad de tareas,
    presupuesto B y techo de ofertas R.
    """

    workers: Tuple[Worker, ...]
    num_tasks: int
    budget: float
    bid_ceiling: float

    @property
    def num_workers(self) -> int:
        return len(self.workers)

    @property
    def epsilon(self) -> float:
        return self.bid_ceiling / self.budget

    @property
    def tasks(self) -> Tuple[Task, ...]:
        return tuple(Task(j) for j in range(self.num_tasks))

    @property
    def is_homogeneous(self) -> bool:
        """Cada trabajador ofrece un único valor sobre las m tareas"""
        for worker in self.workers:
            if worker.uniform_bid is not None:
                continue
            if len(worker.bids) != self.num_tasks:
                return False
            if len(set(worker.bids.values())) > 1:
                return False
        return True

    def bid_values(self) -> List[float]:
        """Valores de oferta distintos, en orden ascendente"""
        values = set()
        for worker in self.workers:
            values.update(worker.distinct_bids())
        return sorted(values)

    def arc_count(self) -> int:
        return sum(len(worker.bids) for worker in self.workers)

    def permuted(self, order: Sequence[int]) -> "Instance":
        """Copia con los trabajadores en el orden dado, re-indexados por posición"""
        workers = tuple(
            self.workers[old].with_id(new) for new, old in enumerate(order)
        )
        return Instance(
            workers=workers,
            num_tasks=self.num_tasks,
            budget=self.budget,
            bid_ceiling=self.bid_ceiling,
        )

    def with_budget(self, budget: float) -> "Instance":
        return Instance(
            workers=self.workers,
            num_tasks=self.num_tasks,
            budget=budget,
            bid_ceiling=self.bid_ceiling,
        )


@dataclass(frozen=True, order=True)
class Pair:
    """Terna (trabajador, tarea, pago)"""

    worker_id: int
    task_id: int
    payment: float


@dataclass(frozen=True)
class Assignment:
    """Conjunto de ternas que forman un emparejamiento factible en presupuesto"""

    pairs: Tuple[Pair, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> "Assignment":
        return cls(pairs=tuple(sorted(pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def total_payment(self) -> float:
        return sum(pair.payment for pair in self.pairs)

    def as_set(self) -> set:
        return {(pair.worker_id, pair.task_id) for pair in self.pairs}


class TaskPool:
    """
    Conjunto de tareas aún sin asignar.

    Mantiene un heap con borrado perezoso para obtener la menor tarea
    disponible en O(log m).
    """

    def __init__(self, task_ids: Iterable[int]):
        self._remaining = set(task_ids)
        self._heap = sorted(self._remaining)

    @classmethod
    def of(cls, tasks) -> "TaskPool":
        if isinstance(tasks, TaskPool):
            return tasks.copy()
        if isinstance(tasks, int):
            return cls(range(tasks))
        return cls(tasks)

    def copy(self) -> "TaskPool":
        return TaskPool(self._remaining)

    def __contains__(self, task_id) -> bool:
        return task_id in self._remaining

    def __len__(self) -> int:
        return len(self._remaining)

    def __bool__(self) -> bool:
        return bool(self._remaining)

    def __iter__(self):
        return iter(sorted(self._remaining))

    def remove(self, task_id: int) -> None:
        self._remaining.remove(task_id)

    def lowest(self) -> Optional[int]:
        while self._heap and self._heap[0] not in self._remaining:
            heapq.heappop(self._heap)
        return self._heap[0] if self._heap else None


def cheapest_task(
    worker: Worker, pool: TaskPool, limit: float
) -> Optional[Tuple[int, float]]:
    """
    Elige la tarea para un trabajador: oferta mínima entre las tareas
    disponibles con oferta <= limit; empates por menor id de tarea.

    Returns:
        (task_id, bid) o None si el conjunto candidato está vacío
    """
    uniform = worker.uniform_bid
    if uniform is not None:
        if uniform <= limit:
            task_id = pool.lowest()
            if task_id is not None and task_id < worker.bids.num_tasks:
                return task_id, uniform
        return None

    best = None
    for task_id, bid in worker.bids.items():
        if bid <= limit and task_id in pool:
            if best is None or (bid, task_id) < (best[1], best[0]):
                best = (task_id, bid)
    return best
