"""
Harness de experimentos
Razón competitiva, barridos multi-prueba con semillas (familia adversarial
y grafos heterogéneos uniformes), evaluador de la cota inferior y emisión
de CSV. Las cotas demostradas se verifican en cada prueba.
"""

import csv
import io
import itertools
import logging
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from django.db import transaction

from generators.prng import SplitMixRandom, derive_seed, permutation
from generators.services import (
    LowerBoundFamily,
    gen_adversarial,
    gen_lower_bound_family,
    gen_uniform_hetero,
)
from instances.domain import Assignment, Instance
from instances.services import SimulatorError, ensure_valid
from offline.services import OfflineScaleError, offline_optimal, optimal_pairs
from online.services import BudgetMode, RPAConfig, oha, oha_bound, rpa
from thresholds.services import oa

logger = logging.getLogger(__name__)

# Clave para derivar la semilla de la permutación a partir de la de la prueba
PERMUTATION_KEY = 0x5045524D

LOWER_BOUND_TOLERANCE = 1e-12

CSV_HEADER = [
    "family",
    "R",
    "algorithm",
    "order",
    "trials",
    "mean_ratio",
    "infinite",
    "skipped",
    "bound",
    "bound_misses",
    "ln_R",
]


class TheoremViolationError(SimulatorError):
    """Una cota demostrada no se cumplió en alguna prueba"""

    pass


class StrategyDimensionError(SimulatorError, ValueError):
    """Vector de estrategia con dimensión o masa inválida"""

    pass


class LowerBoundViolationError(SimulatorError):
    """Un vector de estrategia superó la cota de la familia difícil"""

    def __init__(self, message: str, eta: float, ceiling: float, fractions: Sequence[float]):
        super().__init__(message)
        self.eta = eta
        self.ceiling = ceiling
        self.fractions = tuple(fractions)


# =============================================================================
# Razón competitiva
# =============================================================================


def ratio_of(opt_pairs: int, alg_pairs: int) -> float:
    """OPT/ALG; 0/0 vale 1 y OPT > 0 con ALG = 0 es +inf"""
    if alg_pairs > 0:
        return opt_pairs / alg_pairs
    return 1.0 if opt_pairs == 0 else math.inf


def competitive_ratio(
    instance: Instance, assignment: Assignment, opt_pairs: Optional[int] = None
) -> float:
    """
    Razón competitiva de una asignación contra el óptimo offline.

    Raises:
        InvalidAssignmentError: si la asignación no valida contra la instancia
    """
    ensure_valid(instance, assignment, context="(razón competitiva)")
    if opt_pairs is None:
        opt_pairs = offline_optimal(instance).flow_value
    return ratio_of(opt_pairs, len(assignment))


# =============================================================================
# Pruebas individuales
# =============================================================================


@dataclass(frozen=True)
class TrialRecord:
    family: str
    R: int
    trial: int
    seed: int
    algorithm: str
    order: str
    alg_pairs: int
    opt_pairs: Optional[int]
    ratio: float
    bound: float
    skipped: bool = False

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.ratio)

    @property
    def exceeds_bound(self) -> bool:
        return not self.skipped and self.ratio > self.bound

    def sort_key(self):
        return (self.R, self.algorithm, self.order, self.trial)

    def to_dict(self) -> dict:
        data = asdict(self)
        # JSON no tiene inf/nan
        data["ratio"] = self.ratio if math.isfinite(self.ratio) else None
        data["infinite"] = self.is_infinite
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TrialRecord":
        data = dict(data)
        infinite = data.pop("infinite", False)
        if data["ratio"] is None:
            data["ratio"] = math.inf if infinite else math.nan
        return cls(**data)


def _check_four_approximation(instance: Instance, opt: int, context: str) -> None:
    q = oa(instance.workers, instance.num_tasks, instance.budget).Q
    if opt > 4 * q:
        logger.error(f"4-aproximación violada {context}: OPT={opt}, OA={q}")
        raise TheoremViolationError(f"OPT={opt} > 4·OA={4 * q} {context}")


def _records(
    family: str,
    ceiling: int,
    trial: int,
    seed: int,
    instance: Instance,
    runs: List[Tuple[str, str, Instance, Assignment]],
    alpha: float,
) -> List[TrialRecord]:
    context = f"({family}, R={ceiling}, prueba {trial}, semilla {seed})"
    try:
        opt = optimal_pairs(instance)
    except OfflineScaleError as e:
        logger.warning(f"Óptimo omitido {context}: {e}")
        opt = None

    if opt is not None:
        _check_four_approximation(instance, opt, context)

    records = []
    for algorithm, order, run_instance, assignment in runs:
        ensure_valid(run_instance, assignment, context=f"{algorithm}/{order} {context}")
        if algorithm == "oha":
            bound = oha_bound(instance.bid_ceiling, instance.epsilon)
        else:
            bound = RPAConfig(alpha=alpha).bound

        if opt is None:
            ratio, skipped = math.nan, True
        else:
            ratio, skipped = ratio_of(opt, len(assignment)), False

        if algorithm == "oha" and not skipped and ratio > bound:
            logger.error(f"Cota de OHA violada {context}: {ratio} > {bound}")
            raise TheoremViolationError(
                f"OPT/OHA={ratio} supera (Re)^ε(ln R+3)={bound} {context}"
            )

        records.append(
            TrialRecord(
                family=family,
                R=ceiling,
                trial=trial,
                seed=seed,
                algorithm=algorithm,
                order=order,
                alg_pairs=len(assignment),
                opt_pairs=opt,
                ratio=ratio,
                bound=bound,
                skipped=skipped,
            )
        )
    return records


def adversarial_trial(ceiling: int, trial: int, base_seed: int, alpha: float) -> List[TrialRecord]:
    """
    Una prueba de la familia adversarial: OHA en orden de llegada, y OHA y
    RPA sobre una permutación uniforme de la misma secuencia.
    """
    seed = derive_seed(base_seed, ceiling, trial)
    instance = gen_adversarial(ceiling, seed)
    order = permutation(instance.num_workers, derive_seed(seed, PERMUTATION_KEY))
    permuted = instance.permuted(order)
    config = RPAConfig(alpha=alpha, budget_mode=BudgetMode.FULL)
    m, budget, top = instance.num_tasks, instance.budget, instance.bid_ceiling

    runs = [
        ("oha", "arrival", instance, oha(instance.workers, m, budget, top)),
        ("oha", "permuted", permuted, oha(permuted.workers, m, budget, top)),
        ("rpa", "permuted", permuted, rpa(permuted.workers, m, budget, config)),
    ]
    return _records("adversarial", ceiling, trial, seed, instance, runs, alpha)


def uniform_trial(ceiling: int, trial: int, base_seed: int, alpha: float) -> List[TrialRecord]:
    """Una prueba sobre un grafo heterogéneo uniforme: OHA y RPA (presupuesto completo)"""
    seed = derive_seed(base_seed, ceiling, trial)
    instance = gen_uniform_hetero(ceiling, seed)
    config = RPAConfig(alpha=alpha, budget_mode=BudgetMode.FULL)
    m, budget, top = instance.num_tasks, instance.budget, instance.bid_ceiling

    runs = [
        ("oha", "arrival", instance, oha(instance.workers, m, budget, top)),
        ("rpa", "arrival", instance, rpa(instance.workers, m, budget, config)),
    ]
    return _records("uniform", ceiling, trial, seed, instance, runs, alpha)


TRIAL_RUNNERS = {
    "adversarial": adversarial_trial,
    "uniform": uniform_trial,
}


def run_trial(job: dict) -> List[dict]:
    """Corre la prueba descrita por `job` y devuelve sus registros como dicts"""
    runner = TRIAL_RUNNERS[job["family"]]
    records = runner(job["R"], job["trial"], job["base_seed"], job["alpha"])
    return [record.to_dict() for record in records]


# =============================================================================
# Agregación y CSV
# =============================================================================


@dataclass(frozen=True)
class SummaryRow:
    family: str
    R: int
    algorithm: str
    order: str
    trials: int
    mean_ratio: float
    infinite: int
    skipped: int
    bound: float
    bound_misses: int

    @property
    def ln_R(self) -> float:
        return math.log(self.R)

    def values(self) -> list:
        return [getattr(self, name) for name in CSV_HEADER]


def _format(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def aggregate(records: Iterable[TrialRecord]) -> List[SummaryRow]:
    """
    Promedia las razones por (R, algoritmo, orden).

    Los registros se ordenan antes de agregar, así que el resultado no
    depende del orden en que terminaron las pruebas. Las razones infinitas
    y las pruebas sin óptimo quedan fuera del promedio y se cuentan aparte.
    """
    ordered = sorted(records, key=TrialRecord.sort_key)
    rows = []
    for (ceiling, algorithm, order), group in itertools.groupby(
        ordered, key=lambda r: (r.R, r.algorithm, r.order)
    ):
        group = list(group)
        finite = [r.ratio for r in group if not r.skipped and math.isfinite(r.ratio)]
        rows.append(
            SummaryRow(
                family=group[0].family,
                R=ceiling,
                algorithm=algorithm,
                order=order,
                trials=len(group),
                mean_ratio=float(np.mean(finite)) if finite else math.nan,
                infinite=sum(1 for r in group if not r.skipped and r.is_infinite),
                skipped=sum(1 for r in group if r.skipped),
                bound=group[0].bound,
                bound_misses=sum(1 for r in group if r.exceeds_bound),
            )
        )
    return rows


def rows_to_csv(rows: Iterable[SummaryRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_format(value) for value in row.values()])
    return buffer.getvalue()


@dataclass(frozen=True)
class ExperimentReport:
    family: str
    rows: Tuple[SummaryRow, ...]
    records: Tuple[TrialRecord, ...]

    @property
    def csv(self) -> str:
        return rows_to_csv(self.rows)

    def row(self, ceiling: int, algorithm: str, order: str) -> SummaryRow:
        for row in self.rows:
            if (row.R, row.algorithm, row.order) == (ceiling, algorithm, order):
                return row
        raise KeyError((ceiling, algorithm, order))


# =============================================================================
# Ejecución de barridos
# =============================================================================


class ExperimentRunner:
    """
    Ejecuta especificaciones de prueba en serie o como un `group` de Celery.

    En ambos casos los registros pasan por su forma dict y se ordenan, así
    que el CSV resultante es idéntico.
    """

    def __init__(self, parallel: bool = False, save: bool = False):
        self.parallel = parallel
        self.save = save

    def run_jobs(self, jobs: List[dict]) -> List[TrialRecord]:
        if self.parallel:
            raw = self._run_parallel(jobs)
        else:
            raw = [item for job in jobs for item in run_trial(job)]
        return sorted((TrialRecord.from_dict(item) for item in raw), key=TrialRecord.sort_key)

    def _run_parallel(self, jobs: List[dict]) -> List[dict]:
        from celery import group

        from .tasks import run_trial_task

        timeout = getattr(settings, "SIMULATOR_TASK_TIMEOUT", 3600)
        logger.info(f"Despachando {len(jobs)} pruebas a Celery")
        try:
            result = group(run_trial_task.s(job) for job in jobs).apply_async()
            chunks = result.join(timeout=timeout)
        except SimulatorError:
            raise
        except Exception as e:
            logger.error(f"Error en pruebas paralelas: {e}", exc_info=True)
            raise SimulatorError(f"Error en pruebas paralelas: {e}")
        return [item for chunk in chunks for item in chunk]

    def sweep(
        self, family: str, ceilings: Sequence[int], trials: int, base_seed: int, alpha: float
    ) -> ExperimentReport:
        if trials < 1:
            raise SimulatorError(f"trials={trials} debe ser >= 1")

        jobs = [
            {"family": family, "R": ceiling, "trial": trial, "base_seed": base_seed, "alpha": alpha}
            for ceiling in ceilings
            for trial in range(trials)
        ]
        logger.info(
            f"Barrido {family}: R={list(ceilings)}, {trials} pruebas, semilla {base_seed}"
        )
        records = self.run_jobs(jobs)
        rows = aggregate(records)
        for row in rows:
            logger.info(
                f"{family} R={row.R} {row.algorithm}/{row.order}: "
                f"razón media {row.mean_ratio} ({row.trials} pruebas)"
            )

        report = ExperimentReport(family=family, rows=tuple(rows), records=tuple(records))
        if self.save:
            self._persist(
                report,
                base_seed,
                {"R": list(ceilings), "trials": trials, "alpha": alpha},
            )
        return report

    def _persist(self, report: ExperimentReport, base_seed: int, parameters: dict):
        from .models import ExperimentRun, TrialResult

        with transaction.atomic():
            run = ExperimentRun.objects.create(
                kind=report.family,
                base_seed=str(base_seed),
                parameters=parameters,
                csv_output=report.csv,
                parallel=self.parallel,
            )
            TrialResult.objects.bulk_create(
                [
                    TrialResult(
                        run=run,
                        ceiling=record.R,
                        trial=record.trial,
                        seed=str(record.seed),
                        algorithm=record.algorithm,
                        order=record.order,
                        alg_pairs=record.alg_pairs,
                        opt_pairs=record.opt_pairs,
                        ratio=record.ratio if math.isfinite(record.ratio) else None,
                        is_infinite=record.is_infinite,
                        skipped=record.skipped,
                    )
                    for record in report.records
                ]
            )
        logger.info(f"Corrida {run.pk} guardada con {len(report.records)} resultados")
        return run


def default_adversarial_ceilings(full_scale: bool = False) -> List[int]:
    name = "SIMULATOR_FULL_SCALE_R_MAX" if full_scale else "SIMULATOR_ADVERSARIAL_R_MAX"
    r_max = getattr(settings, name, 2 ** 20 if full_scale else 4096)
    return powers_of_two(r_max)


def powers_of_two(r_max: int) -> List[int]:
    ceilings = []
    ceiling = 2
    while ceiling <= r_max:
        ceilings.append(ceiling)
        ceiling *= 2
    return ceilings


def run_adversarial_experiment(
    ceilings: Optional[Sequence[int]] = None,
    trials: Optional[int] = None,
    base_seed: int = 0,
    alpha: Optional[float] = None,
    parallel: bool = False,
    save: bool = False,
) -> ExperimentReport:
    """
    Barrido sobre la familia adversarial (B = 2R, n = m = 8R).

    Filas por R: OHA/arrival, OHA/permuted y RPA/permuted, con la columna
    de referencia ln R.
    """
    ceilings = list(ceilings) if ceilings else default_adversarial_ceilings()
    trials = trials if trials is not None else getattr(settings, "SIMULATOR_DEFAULT_TRIALS", 200)
    alpha = alpha if alpha is not None else getattr(settings, "SIMULATOR_RPA_ALPHA", 0.5)
    runner = ExperimentRunner(parallel=parallel, save=save)
    return runner.sweep("adversarial", ceilings, trials, base_seed, alpha)


def run_uniform_experiment(
    ceilings: Optional[Sequence[int]] = None,
    trials: Optional[int] = None,
    alpha: Optional[float] = None,
    base_seed: int = 0,
    parallel: bool = False,
    save: bool = False,
) -> ExperimentReport:
    """Barrido sobre grafos heterogéneos uniformes (n = m = B = 200, p = 0.05)"""
    ceilings = list(ceilings) if ceilings else list(range(2, 51))
    trials = trials if trials is not None else getattr(settings, "SIMULATOR_UNIFORM_TRIALS", 80)
    alpha = alpha if alpha is not None else getattr(settings, "SIMULATOR_RPA_ALPHA", 0.5)
    runner = ExperimentRunner(parallel=parallel, save=save)
    return runner.sweep("uniform", ceilings, trials, base_seed, alpha)


# =============================================================================
# Cota inferior
# =============================================================================


@dataclass(frozen=True)
class StrategyVector:
    """Fracción del presupuesto gastada en cada nivel de oferta R(1-η)^u"""

    fractions: Tuple[float, ...]

    def __post_init__(self):
        fractions = tuple(float(f) for f in self.fractions)
        object.__setattr__(self, "fractions", fractions)
        if any(f < 0 for f in fractions):
            raise StrategyDimensionError("Las fracciones deben ser no negativas")
        if math.fsum(fractions) > 1.0 + LOWER_BOUND_TOLERANCE:
            raise StrategyDimensionError(
                f"Las fracciones suman {math.fsum(fractions)} > 1"
            )

    def __len__(self) -> int:
        return len(self.fractions)


def decay_matrix(eta: float, k: int) -> np.ndarray:
    """M[u, v] = (1-η)^(u-v) si v <= u, 0 si no"""
    u, v = np.indices((k + 1, k + 1))
    exponent = np.maximum(u - v, 0)
    return np.where(v <= u, (1.0 - eta) ** exponent, 0.0)


def expected_inverse_ratio(family: LowerBoundFamily, strategy) -> float:
    """
    Inverso de la razón competitiva esperada de una estrategia determinística:
    Σ_u p_u Σ_{v<=u} f_v (1-η)^(u-v).
    """
    if not isinstance(strategy, StrategyVector):
        strategy = StrategyVector(tuple(strategy))
    if len(strategy) != family.k + 1:
        raise StrategyDimensionError(
            f"La estrategia tiene {len(strategy)} componentes; se esperaban {family.k + 1}"
        )
    f = np.asarray(strategy.fractions, dtype=float)
    probs = np.asarray(family.probs, dtype=float)
    return float(probs @ (decay_matrix(family.eta, family.k) @ f))


def tail_mass(family: LowerBoundFamily) -> np.ndarray:
    """w_v = Σ_{u>=v} p_u (1-η)^(u-v), el peso de f_v en el inverso de la razón"""
    probs = np.asarray(family.probs, dtype=float)
    return decay_matrix(family.eta, family.k).T @ probs


def tail_mass_closed_form(family: LowerBoundFamily) -> np.ndarray:
    """(1 + η(1-η)^(k-v)) / ((k+1)η + 1)"""
    v = np.arange(family.k + 1)
    denominator = (family.k + 1) * family.eta + 1.0
    return (1.0 + family.eta * (1.0 - family.eta) ** (family.k - v)) / denominator


@dataclass(frozen=True)
class LowerBoundEntry:
    eta: float
    R: float
    k: int
    samples: int
    bound: float
    max_value: float
    concentrated_value: float
    tail_error: float
    asymptotic_bound: float


@dataclass(frozen=True)
class LowerBoundReport:
    entries: Tuple[LowerBoundEntry, ...] = ()

    @property
    def csv(self) -> str:
        names = [f for f in LowerBoundEntry.__dataclass_fields__]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(names)
        for entry in self.entries:
            writer.writerow([_format(getattr(entry, name)) for name in names])
        return buffer.getvalue()


def random_strategies(rng: SplitMixRandom, dimension: int, samples: int) -> np.ndarray:
    """
    Vectores uniformes en el símplex, escalados por un total uniforme en [0, 1].
    """
    rows = np.empty((samples, dimension))
    for s in range(samples):
        total = rng.random()
        spacings = np.array([rng.exponential() for _ in range(dimension)])
        mass = spacings.sum()
        if mass == 0:
            spacings, mass = np.ones(dimension), float(dimension)
        rows[s] = total * spacings / mass
    return rows


def verify_lower_bound(
    etas: Sequence[float],
    ceilings: Sequence[float],
    samples: int,
    base_seed: int = 0,
    tolerance: float = LOWER_BOUND_TOLERANCE,
) -> LowerBoundReport:
    """
    Para cada (η, R) sortea estrategias y verifica que el inverso de la
    razón esperada no supere (1+η)/((k+1)η+1). La estrategia concentrada en
    el último nivel debe alcanzar la cota.

    Raises:
        LowerBoundViolationError: nombrando (η, R, f) ante la primera violación
    """
    if samples < 0:
        raise SimulatorError(f"samples={samples} debe ser >= 0")
    if samples == 0:
        return LowerBoundReport()

    entries = []
    for i, eta in enumerate(etas):
        for j, ceiling in enumerate(ceilings):
            family = gen_lower_bound_family(eta, ceiling, ceiling, build_instances=False)
            rng = SplitMixRandom(derive_seed(base_seed, i, j))
            strategies = random_strategies(rng, family.k + 1, samples)
            weights = tail_mass(family)
            values = strategies @ weights
            bound = family.bound

            worst = int(np.argmax(values))
            if values[worst] > bound + tolerance:
                logger.error(f"Cota inferior violada: η={eta}, R={ceiling}")
                raise LowerBoundViolationError(
                    f"η={eta}, R={ceiling}: valor {values[worst]} > cota {bound} "
                    f"con f={strategies[worst].tolist()}",
                    eta,
                    ceiling,
                    strategies[worst].tolist(),
                )

            concentrated = [0.0] * family.k + [1.0]
            concentrated_value = expected_inverse_ratio(family, concentrated)
            if abs(concentrated_value - bound) > tolerance:
                raise LowerBoundViolationError(
                    f"η={eta}, R={ceiling}: la estrategia concentrada da "
                    f"{concentrated_value}, se esperaba {bound}",
                    eta,
                    ceiling,
                    concentrated,
                )

            entries.append(
                LowerBoundEntry(
                    eta=float(eta),
                    R=float(ceiling),
                    k=family.k,
                    samples=samples,
                    bound=bound,
                    max_value=float(values[worst]),
                    concentrated_value=concentrated_value,
                    tail_error=float(np.max(np.abs(weights - tail_mass_closed_form(family)))),
                    asymptotic_bound=family.asymptotic_bound,
                )
            )
            logger.info(
                f"Cota inferior η={eta}, R={ceiling}: k={family.k}, "
                f"máximo {values[worst]} <= {bound}"
            )
    return LowerBoundReport(entries=tuple(entries))


def save_lower_bound_report(report: LowerBoundReport, base_seed: int, parameters: dict):
    from .models import ExperimentRun

    return ExperimentRun.objects.create(
        kind="lowerbound",
        base_seed=str(base_seed),
        parameters=parameters,
        csv_output=report.csv,
    )


def record_violation(kind: str, base_seed: int, parameters: dict, error: Exception):
    """Guarda una corrida que terminó con una cota violada"""
    from .models import ExperimentRun

    return ExperimentRun.objects.create(
        kind=kind,
        base_seed=str(base_seed),
        parameters={**parameters, "error": str(error)},
        status="violation",
    )
