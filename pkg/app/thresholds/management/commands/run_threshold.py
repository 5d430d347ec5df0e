"""
Comando para correr FTP u OA sobre una instancia
"""

import json

from django.core.management.base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Corre la política de umbral fijo (FTP) o la búsqueda de umbral OA"

    def add_arguments(self, parser):
        parser.add_argument("--instance", required=True, help="Ruta al JSON de la instancia")
        parser.add_argument("--policy", choices=["ftp", "oa"], required=True)
        parser.add_argument("--price", type=float, help="Umbral p (requerido con --policy ftp)")
        parser.add_argument(
            "--payment",
            choices=["bid", "threshold"],
            default="bid",
            help="FTP: pagar la oferta o el umbral",
        )

    def handle(self, *args, **options):
        from instances.services import SimulatorError, assignment_to_dict, ensure_valid, load_instance
        from thresholds.services import ftp, oa

        try:
            instance = load_instance(options["instance"])
            if options["policy"] == "ftp":
                if options["price"] is None:
                    raise CommandError("--price es requerido con --policy ftp")
                assignment = ftp(
                    options["price"],
                    instance.budget,
                    instance.workers,
                    instance.num_tasks,
                    options["payment"],
                )
                output = {"policy": "ftp", "price": options["price"], "Q": len(assignment)}
            else:
                result = oa(instance.workers, instance.num_tasks, instance.budget)
                assignment = result.assignment
                output = {
                    "policy": "oa",
                    "Q": result.Q,
                    "p_star": result.p_star,
                    "price": result.price,
                }
            ensure_valid(instance, assignment, context=f"({options['policy']})")
        except SimulatorError as e:
            raise CommandError(str(e))

        output["assignment"] = assignment_to_dict(assignment)
        self.stdout.write(json.dumps(output, indent=2))
