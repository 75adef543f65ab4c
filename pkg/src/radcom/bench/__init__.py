"""Seeded benchmark harness and the ``radcom`` command line."""
from .experiments import CSV_HEADER, ResultRow, RunSummary, run_experiment, write_csv
from .spec import SCENARIOS, ExperimentSpec, Method, SpecError, parse_spec, parse_spec_text

__all__ = [
    "CSV_HEADER",
    "SCENARIOS",
    "ExperimentSpec",
    "Method",
    "ResultRow",
    "RunSummary",
    "SpecError",
    "parse_spec",
    "parse_spec_text",
    "run_experiment",
    "write_csv",
]
