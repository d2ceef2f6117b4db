"""Lowest-order virtual elements for the Steklov eigenvalue problem."""

from ._steklov import (
    BoundaryTag,
    Mesh,
    MeshError,
    SolverError,
    assemble,
    build_mesh,
    exact_eigenvalue_square,
    fit_rate,
    indicators,
    initial_mesh,
    load_mesh,
    local_stiffness,
    mark,
    mesh_from_json,
    refine_fem,
    refine_uniform,
    refine_vem,
    run_experiment,
    save_mesh,
    solve,
)

__all__ = [
    "BoundaryTag",
    "Mesh",
    "MeshError",
    "SolverError",
    "assemble",
    "build_mesh",
    "exact_eigenvalue_square",
    "fit_rate",
    "indicators",
    "initial_mesh",
    "load_mesh",
    "local_stiffness",
    "mark",
    "mesh_from_json",
    "refine_fem",
    "refine_uniform",
    "refine_vem",
    "run_experiment",
    "save_mesh",
    "solve",
]
