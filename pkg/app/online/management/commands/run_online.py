"""
Comando para correr OHA o RPA sobre una instancia en orden de llegada
"""

import json

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Corre un algoritmo online (OHA o RPA) sobre la secuencia de la instancia"

    def add_arguments(self, parser):
        parser.add_argument("--instance", required=True, help="Ruta al JSON de la instancia")
        parser.add_argument("--algorithm", choices=["oha", "rpa"], required=True)
        parser.add_argument(
            "--alpha",
            type=float,
            default=None,
            help="RPA: factor de inflado del precio estimado, en (0, 1)",
        )
        parser.add_argument(
            "--budget-mode",
            choices=["half", "full"],
            default="half",
            help="RPA: presupuesto de la segunda fase (B/2 o B)",
        )
        parser.add_argument(
            "--payment",
            choices=["bid", "threshold"],
            default="bid",
            help="Pagar la oferta o el precio ofrecido",
        )

    def handle(self, *args, **options):
        from instances.services import SimulatorError, assignment_to_dict, ensure_valid, load_instance
        from online.services import RPAConfig, oha, rpa_run

        try:
            instance = load_instance(options["instance"])
            output = {"algorithm": options["algorithm"], "payment": options["payment"]}
            if options["algorithm"] == "oha":
                assignment = oha(
                    instance.workers,
                    instance.num_tasks,
                    instance.budget,
                    instance.bid_ceiling,
                    options["payment"],
                )
            else:
                alpha = options["alpha"]
                if alpha is None:
                    alpha = getattr(settings, "SIMULATOR_RPA_ALPHA", 0.5)
                try:
                    config = RPAConfig(alpha=alpha, budget_mode=options["budget_mode"])
                except ValueError as e:
                    raise CommandError(str(e))
                result = rpa_run(
                    instance.workers,
                    instance.num_tasks,
                    instance.budget,
                    config,
                    options["payment"],
                )
                assignment = result.assignment
                output.update(
                    alpha=alpha,
                    budget_mode=options["budget_mode"],
                    p_hat=result.p_hat,
                    threshold=result.threshold,
                )
            ensure_valid(instance, assignment, context=f"({options['algorithm']})")
        except SimulatorError as e:
            raise CommandError(str(e))

        summary = assignment_to_dict(assignment)
        output.update(pairs=summary["count"], spend=summary["total_payment"], assignment=summary)
        self.stdout.write(json.dumps(output, indent=2))
