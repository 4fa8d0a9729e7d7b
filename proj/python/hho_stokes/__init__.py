"""Enriched HHO Stokes solver on cut meshes around cylinders."""

from ._core import (
    Circle,
    ErrorReport,
    ExperimentConfig,
    HHOError,
    MeshRow,
    SolutionResiduals,
    SolvedCase,
    TestASolution,
    TestCase,
    config_from_text,
    cylinder_solution,
    default_meshes,
    run,
    solve_case,
    table_name,
    test_b_cylinders,
)

__all__ = [
    "Circle",
    "ErrorReport",
    "ExperimentConfig",
    "HHOError",
    "MeshRow",
    "SolutionResiduals",
    "SolvedCase",
    "TestASolution",
    "TestCase",
    "config_from_text",
    "cylinder_solution",
    "default_meshes",
    "read_table",
    "run",
    "solve_case",
    "table_name",
    "test_b_cylinders",
]


def read_table(path):
    """Read an error table into a dict of column name -> list."""
    with open(path) as f:
        header = f.readline().split()
        columns = {name: [] for name in header}
        for line in f:
            for name, value in zip(header, line.split()):
                columns[name].append(value if name == "MeshTitle" else float(value))
    return columns
