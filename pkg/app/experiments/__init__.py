"""
Experiments - Harness de experimentos y cota inferior
"""

default_app_config = "experiments.apps.ExperimentsConfig"
