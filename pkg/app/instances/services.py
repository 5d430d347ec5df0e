"""
Servicios del modelo de instancias
Incluye el formato JSON de instancias (lectura/escritura) y el validador
de asignaciones que toda salida de algoritmo debe pasar.
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from django.conf import settings

from .domain import (
    BUDGET_TOLERANCE,
    Assignment,
    Instance,
    Pair,
    UniformBids,
    Worker,
)

logger = logging.getLogger(__name__)


class SimulatorError(Exception):
    """Error base del simulador"""

    pass


class InstanceFormatError(SimulatorError):
    """Documento de instancia mal formado o que viola un invariante"""

    def __init__(
        self,
        message: str,
        code: str = "malformed",
        worker_id: Optional[int] = None,
        task_id: Optional[int] = None,
    ):
        super().__init__(message)
        self.code = code
        self.worker_id = worker_id
        self.task_id = task_id


class InvalidAssignmentError(SimulatorError):
    """Una asignación producida por un algoritmo no pasó la validación"""

    def __init__(self, report: "ValidationReport", context: str = ""):
        detail = "; ".join(v.message for v in report.violations[:5])
        super().__init__(f"Asignación inválida {context}: {detail}".strip())
        self.report = report


# =============================================================================
# Formato JSON de instancias
# =============================================================================


class _JsonObject(dict):
    """Objeto JSON que recuerda las claves repetidas para reportarlas con contexto"""

    duplicates: Tuple[str, ...] = ()


def _collect_duplicates(pairs) -> _JsonObject:
    """Hook de json: conserva la última aparición y anota las claves repetidas"""
    obj = _JsonObject()
    duplicates = []
    for key, value in pairs:
        if key in obj:
            duplicates.append(key)
        obj[key] = value
    obj.duplicates = tuple(duplicates)
    return obj


def _duplicates(raw) -> Tuple[str, ...]:
    return getattr(raw, "duplicates", ())


def _as_number(value, what: str, worker_id: Optional[int] = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(
            f"{what} debe ser numérico (recibido {value!r})", worker_id=worker_id
        )
    number = float(value)
    if not math.isfinite(number):
        raise InstanceFormatError(f"{what} debe ser finito", worker_id=worker_id)
    return number


def _check_bid(bid: float, ceiling: float, worker_id: int, task_id: Optional[int]):
    if bid < 1:
        raise InstanceFormatError(
            f"bid below 1: trabajador {worker_id}, tarea {task_id}, oferta {bid!r}",
            code="bid_below_1",
            worker_id=worker_id,
            task_id=task_id,
        )
    if bid > ceiling:
        raise InstanceFormatError(
            f"bid above R: trabajador {worker_id}, tarea {task_id}, "
            f"oferta {bid!r} > R={ceiling!r}",
            code="bid_above_ceiling",
            worker_id=worker_id,
            task_id=task_id,
        )


def _parse_worker(raw, position: int, num_tasks: int, ceiling: float) -> Worker:
    if not isinstance(raw, dict):
        raise InstanceFormatError(
            f"El trabajador en la posición {position} no es un objeto",
            worker_id=position,
        )

    worker_id = raw.get("id")
    if isinstance(worker_id, bool) or not isinstance(worker_id, int) or worker_id != position:
        raise InstanceFormatError(
            f"El id del trabajador ({worker_id!r}) debe ser igual a su posición {position}",
            code="worker_id",
            worker_id=position,
        )
    if _duplicates(raw):
        raise InstanceFormatError(
            f"Clave repetida '{_duplicates(raw)[0]}' en el trabajador {worker_id}",
            code="duplicate_key",
            worker_id=worker_id,
        )

    if "uniform_bid" in raw:
        if "bids" in raw:
            raise InstanceFormatError(
                "Un trabajador no puede tener 'bids' y 'uniform_bid' a la vez",
                worker_id=worker_id,
            )
        bid = _as_number(raw["uniform_bid"], "uniform_bid", worker_id)
        _check_bid(bid, ceiling, worker_id, None)
        return Worker(id=worker_id, bids=UniformBids(bid, num_tasks))

    raw_bids = raw.get("bids")
    if not isinstance(raw_bids, dict):
        raise InstanceFormatError(
            f"El trabajador {worker_id} no tiene un mapa 'bids'", worker_id=worker_id
        )
    if _duplicates(raw_bids):
        key = _duplicates(raw_bids)[0]
        raise InstanceFormatError(
            f"duplicate task key '{key}' en el trabajador {worker_id}",
            code="duplicate_task",
            worker_id=worker_id,
            task_id=int(key) if key.isdigit() else None,
        )

    bids: Dict[int, float] = {}
    for key, value in raw_bids.items():
        try:
            task_id = int(key)
        except ValueError:
            raise InstanceFormatError(
                f"Clave de tarea inválida '{key}' en el trabajador {worker_id}",
                worker_id=worker_id,
            )
        if key != str(task_id):
            raise InstanceFormatError(
                f"Clave de tarea no canónica '{key}' en el trabajador {worker_id}",
                worker_id=worker_id,
            )
        if not 0 <= task_id < num_tasks:
            raise InstanceFormatError(
                f"Tarea {task_id} fuera de rango [0, {num_tasks}) en el trabajador {worker_id}",
                code="task_out_of_range",
                worker_id=worker_id,
                task_id=task_id,
            )
        bid = _as_number(value, f"La oferta de la tarea {task_id}", worker_id)
        _check_bid(bid, ceiling, worker_id, task_id)
        bids[task_id] = bid

    return Worker(id=worker_id, bids=dict(sorted(bids.items())))


def parse_instance(text: str) -> Instance:
    """
    Lee una instancia en formato JSON.

    Args:
        text: Documento JSON
            {"budget", "num_tasks", "bid_ceiling", "workers": [{"id", "bids"}]}

    Returns:
        Instance que cumple todos los invariantes

    Raises:
        InstanceFormatError: documento mal formado o invariante violado
    """
    try:
        document = json.loads(text, object_pairs_hook=_collect_duplicates)
    except (TypeError, ValueError) as e:
        raise InstanceFormatError(f"JSON inválido: {e}")

    if not isinstance(document, dict):
        raise InstanceFormatError("El documento debe ser un objeto JSON")
    if _duplicates(document):
        raise InstanceFormatError(
            f"Clave repetida '{_duplicates(document)[0]}' en el documento", code="duplicate_key"
        )

    missing = [k for k in ("budget", "num_tasks", "bid_ceiling", "workers") if k not in document]
    if missing:
        raise InstanceFormatError(f"Faltan campos: {', '.join(missing)}")

    num_tasks = document["num_tasks"]
    if isinstance(num_tasks, bool) or not isinstance(num_tasks, int) or num_tasks <= 0:
        raise InstanceFormatError(f"num_tasks debe ser un entero positivo ({num_tasks!r})")

    budget = _as_number(document["budget"], "budget")
    ceiling = _as_number(document["bid_ceiling"], "bid_ceiling")
    if budget <= 0 or ceiling <= 0:
        raise InstanceFormatError("budget y bid_ceiling deben ser positivos")
    if ceiling > budget:
        raise InstanceFormatError(
            f"R={ceiling!r} mayor que B={budget!r}", code="ceiling_above_budget"
        )

    raw_workers = document["workers"]
    if not isinstance(raw_workers, list):
        raise InstanceFormatError("'workers' debe ser una lista")

    workers = tuple(
        _parse_worker(raw, position, num_tasks, ceiling)
        for position, raw in enumerate(raw_workers)
    )

    instance = Instance(
        workers=workers, num_tasks=num_tasks, budget=budget, bid_ceiling=ceiling
    )
    logger.debug(
        f"Instancia leída: n={instance.num_workers}, m={num_tasks}, B={budget}, R={ceiling}"
    )
    return instance


def load_instance(path: str) -> Instance:
    """Lee y valida una instancia desde un archivo"""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise InstanceFormatError(f"No se pudo leer {path}: {e}", code="unreadable")
    return parse_instance(text)


def instance_to_dict(instance: Instance) -> dict:
    workers = []
    for worker in instance.workers:
        if worker.uniform_bid is not None:
            workers.append({"id": worker.id, "uniform_bid": float(worker.uniform_bid)})
        else:
            workers.append(
                {
                    "id": worker.id,
                    "bids": {
                        str(task_id): float(bid)
                        for task_id, bid in sorted(worker.bids.items())
                    },
                }
            )
    return {
        "budget": float(instance.budget),
        "num_tasks": instance.num_tasks,
        "bid_ceiling": float(instance.bid_ceiling),
        "workers": workers,
    }


def serialize_instance(instance: Instance) -> str:
    """
    Escribe la instancia en el formato JSON canónico.

    Los números usan la representación decimal más corta que reproduce
    el mismo double (repr de float), así que la ida y vuelta es exacta.
    """
    return json.dumps(instance_to_dict(instance), separators=(",", ":")) + "\n"


# =============================================================================
# Validación de asignaciones
# =============================================================================


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    worker_id: Optional[int] = None
    task_id: Optional[int] = None


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


def validate_assignment(instance: Instance, assignment: Assignment) -> ValidationReport:
    """
    Verifica una asignación contra la instancia.

    Las violaciones se devuelven como datos; nunca se lanza una excepción.
    """
    tolerance = getattr(settings, "SIMULATOR_BUDGET_TOLERANCE", BUDGET_TOLERANCE)
    violations: List[Violation] = []
    seen_workers = set()
    seen_tasks = set()

    for pair in assignment.pairs:
        w, t = pair.worker_id, pair.task_id

        if not 0 <= w < instance.num_workers:
            violations.append(
                Violation("unknown_worker", f"Trabajador {w} inexistente", w, t)
            )
            continue
        if not 0 <= t < instance.num_tasks:
            violations.append(Violation("unknown_task", f"Tarea {t} inexistente", w, t))
            continue

        if w in seen_workers:
            violations.append(
                Violation("worker_repeated", f"Trabajador {w} asignado más de una vez", w, t)
            )
        seen_workers.add(w)

        if t in seen_tasks:
            violations.append(
                Violation("task_repeated", f"Tarea {t} asignada más de una vez", w, t)
            )
        seen_tasks.add(t)

        worker = instance.workers[w]
        if t not in worker.feasible_tasks:
            violations.append(
                Violation("infeasible_pair", f"Tarea {t} no factible para el trabajador {w}", w, t)
            )
            continue

        if not pair.payment > 0:
            violations.append(
                Violation("payment_not_positive", f"Pago no positivo para ({w}, {t})", w, t)
            )
        elif pair.payment < worker.bids[t]:
            violations.append(
                Violation(
                    "payment_below_bid",
                    f"payment below bid: ({w}, {t}) paga {pair.payment!r} < {worker.bids[t]!r}",
                    w,
                    t,
                )
            )

    total = math.fsum(pair.payment for pair in assignment.pairs)
    if total > instance.budget + tolerance:
        violations.append(
            Violation(
                "over_budget",
                f"Pagos totales {total!r} exceden el presupuesto {instance.budget!r}",
            )
        )

    return ValidationReport(violations=tuple(violations))


def ensure_valid(instance: Instance, assignment: Assignment, context: str = "") -> Assignment:
    """Valida y lanza InvalidAssignmentError si hay violaciones"""
    report = validate_assignment(instance, assignment)
    if not report.ok:
        logger.error(f"Asignación inválida {context}: {report.codes()}")
        raise InvalidAssignmentError(report, context)
    return assignment


def assignment_to_dict(assignment: Assignment) -> dict:
    return {
        "pairs": [
            {"worker": p.worker_id, "task": p.task_id, "payment": p.payment}
            for p in assignment.pairs
        ],
        "count": len(assignment),
        "total_payment": math.fsum(p.payment for p in assignment.pairs),
    }
