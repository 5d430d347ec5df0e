"""
Solver offline
Óptimo exacto vía flujo de costo mínimo (caminos más cortos sucesivos con
potenciales), oráculo de fuerza bruta para instancias chicas y el greedy
homogéneo de referencia.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from django.conf import settings

from instances.domain import BUDGET_TOLERANCE, Assignment, Instance, Pair, TaskPool, cheapest_task
from instances.services import SimulatorError

logger = logging.getLogger(__name__)

INF = math.inf

# Costos que difieren menos que esto se consideran empatados
TIE_TOLERANCE = 1e-9


class EnumerationLimitError(SimulatorError):
    """La instancia excede el límite de enumeración de la fuerza bruta"""

    pass


class OfflineScaleError(SimulatorError):
    """La red de flujo excede la escala configurada para el óptimo offline"""

    pass


# =============================================================================
# Red de flujo
# =============================================================================


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: int
    cost: float


@dataclass(frozen=True)
class FlowNetwork:
    """
    Grafo fuente -> trabajadores -> tareas -> sumidero.

    Nodos: 0 = fuente, 1..n = trabajadores, n+1..n+m = tareas, n+m+1 = sumidero.
    """

    num_workers: int
    num_tasks: int
    arcs: Tuple[Arc, ...]

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return self.num_workers + self.num_tasks + 1

    @property
    def num_nodes(self) -> int:
        return self.num_workers + self.num_tasks + 2

    def worker_node(self, worker_id: int) -> int:
        return 1 + worker_id

    def task_node(self, task_id: int) -> int:
        return 1 + self.num_workers + task_id

    def task_of(self, node: int) -> int:
        return node - 1 - self.num_workers


@dataclass(frozen=True)
class FlowStep:
    flow: int
    marginal_cost: float
    cumulative_cost: float


@dataclass(frozen=True)
class FlowResult:
    flow_value: int
    total_cost: float
    assignment: Assignment


def build_flow_network(instance: Instance) -> FlowNetwork:
    """
    Construye la red de la reducción: arcos de capacidad 1, costo 0 desde la
    fuente y hacia el sumidero, costo b_ij en cada par factible.
    """
    n, m = instance.num_workers, instance.num_tasks
    arcs: List[Arc] = []
    for worker in instance.workers:
        arcs.append(Arc(0, 1 + worker.id, 1, 0.0))
    for worker in instance.workers:
        for task_id, bid in sorted(worker.bids.items()):
            arcs.append(Arc(1 + worker.id, 1 + n + task_id, 1, float(bid)))
    for task in instance.tasks:
        arcs.append(Arc(1 + n + task.id, n + m + 1, 1, 0.0))
    return FlowNetwork(num_workers=n, num_tasks=m, arcs=tuple(arcs))


class SuccessiveShortestPaths:
    """
    Flujo de costo mínimo por caminos más cortos sucesivos.

    Cada aumento envía una unidad; los potenciales mantienen los costos
    reducidos no negativos, así que cada búsqueda es un Dijkstra. Entre caminos de
    igual costo gana el de secuencia de pares (trabajador, tarea)
    lexicográficamente menor.
    """

    def __init__(self, network: FlowNetwork):
        self.network = network
        size = network.num_nodes
        self.graph: List[List[int]] = [[] for _ in range(size)]
        self.head: List[int] = []
        self.cap: List[int] = []
        self.cost: List[float] = []
        for arc in network.arcs:
            self._add(arc.tail, arc.head, arc.capacity, arc.cost)
        self.potential = [0.0] * size
        self.flow = 0
        self.total_cost = 0.0

    def _add(self, tail: int, head: int, capacity: int, cost: float) -> None:
        self.graph[tail].append(len(self.head))
        self.head.append(head)
        self.cap.append(capacity)
        self.cost.append(cost)
        self.graph[head].append(len(self.head))
        self.head.append(tail)
        self.cap.append(0)
        self.cost.append(-cost)

    def _pair_of(self, node: int, arc: int) -> Optional[Tuple[int, int]]:
        """Par (trabajador, tarea) si el arco es un arco directo trabajador -> tarea"""
        n = self.network.num_workers
        if arc % 2 == 0 and 1 <= node <= n:
            return node - 1, self.network.task_of(self.head[arc])
        return None

    def _shortest_path(self) -> Optional[Tuple[List[int], List[float]]]:
        source, sink = self.network.source, self.network.sink
        size = self.network.num_nodes
        dist = [INF] * size
        keys: List[Tuple[Tuple[int, int], ...]] = [()] * size
        parent_arc = [-1] * size
        done = [False] * size
        dist[source] = 0.0
        heap = [(0.0, (), source)]
        potential = self.potential

        while heap:
            d, key, node = heapq.heappop(heap)
            if done[node] or d != dist[node] or key != keys[node]:
                continue
            done[node] = True
            for arc in self.graph[node]:
                if self.cap[arc] <= 0:
                    continue
                head = self.head[arc]
                if done[head]:
                    continue
                reduced = self.cost[arc] + potential[node] - potential[head]
                # errores de redondeo en potenciales
                if reduced < 0:
                    reduced = 0.0
                candidate = d + reduced
                pair = self._pair_of(node, arc)
                candidate_key = key + (pair,) if pair is not None else key
                if candidate < dist[head] - TIE_TOLERANCE or (
                    abs(candidate - dist[head]) <= TIE_TOLERANCE and candidate_key < keys[head]
                ):
                    dist[head] = candidate
                    keys[head] = candidate_key
                    parent_arc[head] = arc
                    heapq.heappush(heap, (candidate, candidate_key, head))

        if dist[sink] == INF:
            return None
        return parent_arc, dist

    def next_path(self) -> Optional[Tuple[List[int], float]]:
        """
        Busca el próximo camino de aumento sin aplicarlo.

        Returns:
            (arcos del camino, costo marginal real) o None si no hay más flujo
        """
        found = self._shortest_path()
        if found is None:
            return None
        parent_arc, dist = found

        for node, d in enumerate(dist):
            if d < INF:
                self.potential[node] += d

        path = []
        node = self.network.sink
        while node != self.network.source:
            arc = parent_arc[node]
            path.append(arc)
            node = self.head[arc ^ 1]
        path.reverse()
        marginal = math.fsum(self.cost[arc] for arc in path)
        return path, marginal

    def augment(self, path: List[int], marginal: float) -> FlowStep:
        for arc in path:
            self.cap[arc] -= 1
            self.cap[arc ^ 1] += 1
        self.flow += 1
        self.total_cost += marginal
        return FlowStep(self.flow, marginal, self.total_cost)

    def steps(self) -> Iterator[FlowStep]:
        while True:
            found = self.next_path()
            if found is None:
                return
            yield self.augment(*found)

    def assignment(self) -> Assignment:
        """Pares trabajador -> tarea con flujo, pagando la oferta"""
        net = self.network
        pairs = []
        for worker_id in range(net.num_workers):
            node = net.worker_node(worker_id)
            for arc in self.graph[node]:
                if arc % 2 == 0 and self.cap[arc] == 0:
                    head = self.head[arc]
                    if head > net.num_workers:
                        pairs.append(Pair(worker_id, net.task_of(head), self.cost[arc]))
        return Assignment.from_pairs(pairs)


def min_cost_flow_schedule(network: FlowNetwork) -> List[FlowStep]:
    """
    Costo mínimo de enviar F unidades, para F = 1..F_max.

    El costo marginal es no decreciente (la función de valor es convexa);
    se verifica en cada paso.
    """
    solver = SuccessiveShortestPaths(network)
    schedule: List[FlowStep] = []
    for step in solver.steps():
        if schedule and step.marginal_cost < schedule[-1].marginal_cost - BUDGET_TOLERANCE:
            raise AssertionError(
                f"Costo marginal decreciente en F={step.flow}: "
                f"{step.marginal_cost} < {schedule[-1].marginal_cost}"
            )
        schedule.append(step)
    return schedule


def offline_optimal(instance: Instance) -> FlowResult:
    """
    Óptimo offline: el mayor F cuyo costo mínimo acumulado cabe en B.

    Aumenta de a una unidad y corta cuando el próximo camino excedería el
    presupuesto; por convexidad ningún F mayor puede caber.
    """
    tolerance = getattr(settings, "SIMULATOR_BUDGET_TOLERANCE", BUDGET_TOLERANCE)
    solver = SuccessiveShortestPaths(build_flow_network(instance))
    last_marginal = -INF

    while True:
        found = solver.next_path()
        if found is None:
            break
        path, marginal = found
        if solver.total_cost + marginal > instance.budget + tolerance:
            break
        if marginal < last_marginal - tolerance:
            raise AssertionError(f"Costo marginal decreciente en F={solver.flow + 1}")
        last_marginal = marginal
        solver.augment(path, marginal)

    assignment = solver.assignment()
    logger.debug(
        f"Óptimo offline: F={solver.flow}, costo={solver.total_cost} "
        f"(n={instance.num_workers}, m={instance.num_tasks})"
    )
    return FlowResult(
        flow_value=solver.flow,
        total_cost=math.fsum(p.payment for p in assignment.pairs),
        assignment=assignment,
    )


# =============================================================================
# Oráculo de fuerza bruta
# =============================================================================


def brute_force_optimal(instance: Instance, limit: Optional[int] = None) -> FlowResult:
    """
    Enumera todos los emparejamientos trabajador -> tarea.

    Devuelve uno con la máxima cantidad de pares cuyo costo cabe en B;
    entre empates, el de menor costo (el primero encontrado si persiste).
    """
    limit = limit or getattr(settings, "SIMULATOR_BRUTE_FORCE_LIMIT", 8)
    if instance.num_workers > limit or instance.num_tasks > limit:
        raise EnumerationLimitError(
            f"Instancia {instance.num_workers}x{instance.num_tasks} excede el "
            f"límite de enumeración {limit}x{limit}"
        )

    tolerance = getattr(settings, "SIMULATOR_BUDGET_TOLERANCE", BUDGET_TOLERANCE)
    budget = instance.budget + tolerance
    workers = instance.workers
    best = {"count": 0, "cost": 0.0, "pairs": ()}
    chosen: List[Tuple[int, int, float]] = []
    used = set()

    def explore(index: int, cost: float) -> None:
        count = len(chosen)
        if count > best["count"] or (count == best["count"] and cost < best["cost"]):
            best.update(count=count, cost=cost, pairs=tuple(chosen))
        if index == len(workers):
            return
        # cota: aunque todos los restantes entren no se supera el mejor
        if count + (len(workers) - index) < best["count"]:
            return
        worker = workers[index]
        for task_id, bid in sorted(worker.bids.items()):
            if task_id in used or cost + bid > budget:
                continue
            used.add(task_id)
            chosen.append((worker.id, task_id, bid))
            explore(index + 1, cost + bid)
            chosen.pop()
            used.remove(task_id)
        explore(index + 1, cost)

    explore(0, 0.0)
    assignment = Assignment.from_pairs(Pair(w, t, b) for w, t, b in best["pairs"])
    return FlowResult(
        flow_value=best["count"],
        total_cost=math.fsum(p.payment for p in assignment.pairs),
        assignment=assignment,
    )


# =============================================================================
# Greedy homogéneo
# =============================================================================


def greedy_homogeneous(instance: Instance) -> Assignment:
    """
    Ordena los trabajadores por su oferta mínima y asigna a cada uno su tarea
    restante más barata mientras alcance el presupuesto.

    Es óptimo cuando las tareas son homogéneas; con tareas heterogéneas
    puede quedar por debajo del óptimo.
    """
    pool = TaskPool.of(instance.num_tasks)
    remaining = instance.budget
    pairs = []

    ordered = sorted(
        (w for w in instance.workers if w.min_bid() is not None),
        key=lambda w: (w.min_bid(), w.id),
    )
    for worker in ordered:
        if not pool or remaining <= 0:
            break
        choice = cheapest_task(worker, pool, INF)
        if choice is None:
            continue
        task_id, bid = choice
        if bid > remaining:
            continue
        pairs.append(Pair(worker.id, task_id, bid))
        pool.remove(task_id)
        remaining -= bid

    return Assignment.from_pairs(pairs)


def optimal_pairs(instance: Instance, max_arcs: Optional[int] = None) -> int:
    """
    Cantidad óptima de pares offline, eligiendo el método exacto más barato.

    Raises:
        OfflineScaleError: si la red de flujo excede la escala configurada
    """
    if instance.is_homogeneous:
        return len(greedy_homogeneous(instance))

    max_arcs = max_arcs or getattr(settings, "SIMULATOR_OFFLINE_MAX_ARCS", 2_000_000)
    arcs = instance.num_workers + instance.num_tasks + instance.arc_count()
    if arcs > max_arcs:
        raise OfflineScaleError(
            f"Red de flujo con {arcs} arcos excede el máximo configurado {max_arcs}"
        )
    return offline_optimal(instance).flow_value
