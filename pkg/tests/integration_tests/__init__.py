# This file makes the integration_tests directory a Python package for relative imports
