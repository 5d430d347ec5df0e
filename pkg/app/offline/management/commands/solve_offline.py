"""
Comando para calcular el óptimo offline de una instancia
"""

import json

from django.core.management.base import BaseCommand, CommandError


class Command(BaseCommand):
    help = "Calcula el óptimo offline (máxima cantidad de pares dentro del presupuesto)"

    def add_arguments(self, parser):
        parser.add_argument(
            "--instance",
            required=True,
            help="Ruta al JSON de la instancia",
        )
        parser.add_argument(
            "--algorithm",
            choices=["flow", "brute", "greedy"],
            default="flow",
            help="flow (costo mínimo), brute (fuerza bruta, instancias chicas) o greedy",
        )

    def handle(self, *args, **options):
        from instances.services import SimulatorError, assignment_to_dict, load_instance
        from offline.services import brute_force_optimal, greedy_homogeneous, offline_optimal

        try:
            instance = load_instance(options["instance"])
            algorithm = options["algorithm"]
            if algorithm == "flow":
                result = offline_optimal(instance)
                flow, cost, assignment = result.flow_value, result.total_cost, result.assignment
            elif algorithm == "brute":
                result = brute_force_optimal(instance)
                flow, cost, assignment = result.flow_value, result.total_cost, result.assignment
            else:
                assignment = greedy_homogeneous(instance)
                flow, cost = len(assignment), assignment_to_dict(assignment)["total_payment"]
        except SimulatorError as e:
            raise CommandError(str(e))

        self.stdout.write(
            json.dumps(
                {
                    "algorithm": algorithm,
                    "F": flow,
                    "total_cost": cost,
                    "assignment": assignment_to_dict(assignment),
                },
                indent=2,
            )
        )
