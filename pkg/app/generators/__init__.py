"""
Generators - Generadores de instancias y PRNG portable
"""

default_app_config = "generators.apps.GeneratorsConfig"
