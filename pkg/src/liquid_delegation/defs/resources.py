"""Shared resources for all components."""

import os

import dagster as dg

from liquid_delegation.definitions import DATA_DIR
from liquid_delegation.resources.solver_resource import SolverSettings
from liquid_delegation.resources.source_resource import InputSourceResource

SOURCE_TOKEN_VARIABLE = "DELEGATION_SOURCE_TOKEN"


def build_source() -> InputSourceResource:
    # an EnvVar must resolve at run time, so it is only bound when the variable exists
    token = dg.EnvVar(SOURCE_TOKEN_VARIABLE) if SOURCE_TOKEN_VARIABLE in os.environ else None
    return InputSourceResource(base_dir=str(DATA_DIR), token=token)


defs = dg.Definitions(
    resources={
        "solver": SolverSettings.from_env(),
        "source": build_source(),
    }
)
