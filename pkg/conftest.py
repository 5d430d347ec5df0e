"""Wire Django's test environment into pytest (tests live in app/*/tests.py)."""

import os
import sys

import django
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "app"))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "simulador.settings")
django.setup()


@pytest.fixture(scope="session", autouse=True)
def _django_test_environment():
    from django.test.utils import setup_databases, setup_test_environment, teardown_databases, teardown_test_environment

    setup_test_environment()
    old_config = setup_databases(verbosity=0, interactive=False)
    yield
    teardown_databases(old_config, verbosity=0)
    teardown_test_environment()
