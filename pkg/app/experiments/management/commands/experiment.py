"""
Comando para correr los experimentos: barrido adversarial, barrido heterogéneo
uniforme y verificación de la cota inferior
"""

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Corre un experimento y emite su CSV (falla si alguna cota demostrada no se cumple)"

    def add_arguments(self, parser):
        parser.add_argument("kind", choices=["adversarial", "uniform", "lowerbound"])
        parser.add_argument("--R-min", dest="r_min", type=int, help="uniform: R mínimo (default 2)")
        parser.add_argument(
            "--R-max",
            dest="r_max",
            type=int,
            help="R máximo (adversarial: potencia de dos; uniform: default 50)",
        )
        parser.add_argument("--trials", type=int, help="Pruebas por R")
        parser.add_argument("--alpha", type=float, help="Factor de inflado de RPA")
        parser.add_argument("--seed", type=int, default=0, help="Semilla base")
        parser.add_argument("--out", help="Ruta del CSV (default: salida estándar)")
        parser.add_argument(
            "--eta", type=float, nargs="+", help="lowerbound: uno o más valores de η"
        )
        parser.add_argument(
            "--R", dest="ceilings", type=float, nargs="+", help="lowerbound: uno o más valores de R"
        )
        parser.add_argument("--samples", type=int, default=1000, help="lowerbound: estrategias a sortear")
        parser.add_argument(
            "--parallel",
            action="store_true",
            help="Despachar las pruebas como un grupo de tareas Celery",
        )
        parser.add_argument(
            "--save",
            action="store_true",
            help="Guardar la corrida y sus resultados en la base de datos",
        )
        parser.add_argument(
            "--full-scale",
            action="store_true",
            help="adversarial: R hasta 2^20 y 10000 pruebas por R",
        )

    def handle(self, *args, **options):
        from experiments import services
        from instances.services import InvalidAssignmentError, SimulatorError

        kind = options["kind"]
        parameters = {
            key: options[key]
            for key in ("r_min", "r_max", "trials", "alpha", "eta", "ceilings", "samples")
            if options[key] is not None
        }

        try:
            if kind == "adversarial":
                csv_text = self._adversarial(services, options)
            elif kind == "uniform":
                csv_text = self._uniform(services, options)
            else:
                csv_text = self._lower_bound(services, options, parameters)
        except (
            services.TheoremViolationError,
            services.LowerBoundViolationError,
            InvalidAssignmentError,
        ) as e:
            if options["save"]:
                services.record_violation(kind, options["seed"], parameters, e)
            raise CommandError(f"Cota violada: {e}")
        except (SimulatorError, ValueError) as e:
            raise CommandError(str(e))

        if options["out"]:
            try:
                with open(options["out"], "w", encoding="utf-8", newline="") as handle:
                    handle.write(csv_text)
            except OSError as e:
                raise CommandError(f"No se pudo escribir {options['out']}: {e}")
            self.stdout.write(self.style.SUCCESS(f"CSV escrito en {options['out']}"))
        else:
            self.stdout.write(csv_text, ending="")

    def _adversarial(self, services, options) -> str:
        full_scale = options["full_scale"]
        if options["r_max"] is not None:
            ceilings = services.powers_of_two(options["r_max"])
        else:
            ceilings = services.default_adversarial_ceilings(full_scale)
        if not ceilings:
            raise CommandError("--R-max debe ser >= 2")

        trials = options["trials"]
        if trials is None and full_scale:
            trials = getattr(settings, "SIMULATOR_FULL_SCALE_TRIALS", 10000)

        report = services.run_adversarial_experiment(
            ceilings=ceilings,
            trials=trials,
            base_seed=options["seed"],
            alpha=options["alpha"],
            parallel=options["parallel"],
            save=options["save"],
        )
        return report.csv

    def _uniform(self, services, options) -> str:
        r_min = options["r_min"] if options["r_min"] is not None else 2
        r_max = options["r_max"] if options["r_max"] is not None else 50
        if r_min < 2 or r_max < r_min:
            raise CommandError(f"Rango de R inválido: [{r_min}, {r_max}]")

        report = services.run_uniform_experiment(
            ceilings=list(range(r_min, r_max + 1)),
            trials=options["trials"],
            alpha=options["alpha"],
            base_seed=options["seed"],
            parallel=options["parallel"],
            save=options["save"],
        )
        return report.csv

    def _lower_bound(self, services, options, parameters) -> str:
        if not options["eta"] or not options["ceilings"]:
            raise CommandError("lowerbound requiere --eta y --R")
        report = services.verify_lower_bound(
            options["eta"],
            options["ceilings"],
            options["samples"],
            base_seed=options["seed"],
        )
        if options["save"]:
            services.save_lower_bound_report(report, options["seed"], parameters)
        return report.csv
