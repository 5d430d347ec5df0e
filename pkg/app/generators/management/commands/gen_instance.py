"""
Comando para generar una instancia de alguna de las familias
"""

from django.core.management.base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Genera una instancia (adversarial, uniforme o de cota inferior) y la escribe en JSON"

    def add_arguments(self, parser):
        parser.add_argument(
            "--family",
            choices=["adversarial", "uniform", "lowerbound"],
            required=True,
        )
        parser.add_argument("--R", dest="ceiling", type=float, required=True, help="Techo de ofertas R")
        parser.add_argument("--eta", type=float, help="lowerbound: paso η en (0, 1)")
        parser.add_argument("--B", dest="budget", type=float, help="lowerbound: presupuesto (default R)")
        parser.add_argument("--u", dest="index", type=int, help="lowerbound: índice de I_u (default k)")
        parser.add_argument("--seed", type=int, default=0, help="Semilla (entero sin signo de 64 bits)")
        parser.add_argument("--out", required=True, help="Ruta del JSON de salida")

    def handle(self, *args, **options):
        from generators.services import gen_adversarial, gen_lower_bound_family, gen_uniform_hetero
        from instances.services import SimulatorError, serialize_instance

        family = options["family"]
        ceiling = options["ceiling"]

        try:
            if family in ("adversarial", "uniform"):
                if not ceiling.is_integer():
                    raise CommandError(f"--R debe ser entero para la familia {family}")
                generator = gen_adversarial if family == "adversarial" else gen_uniform_hetero
                instance = generator(int(ceiling), options["seed"])
            else:
                if options["eta"] is None:
                    raise CommandError("--eta es requerido para la familia lowerbound")
                budget = options["budget"] if options["budget"] is not None else ceiling
                lower = gen_lower_bound_family(options["eta"], ceiling, budget)
                index = options["index"] if options["index"] is not None else lower.k
                if not 0 <= index <= lower.k:
                    raise CommandError(f"--u={index} fuera de [0, {lower.k}]")
                instance = lower.instances[index]
        except SimulatorError as e:
            raise CommandError(str(e))

        try:
            with open(options["out"], "w", encoding="utf-8", newline="\n") as handle:
                handle.write(serialize_instance(instance))
        except OSError as e:
            raise CommandError(f"No se pudo escribir {options['out']}: {e}")

        self.stdout.write(
            self.style.SUCCESS(
                f"Instancia {family} escrita en {options['out']} "
                f"(n={instance.num_workers}, m={instance.num_tasks}, B={instance.budget})"
            )
        )
