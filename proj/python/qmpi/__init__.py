"""SPMD runtime for distributed quantum programs over a simulated entanglement fabric.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from ._core import (
    Engine,
    Error,
    QubitHandle,
    RankReport,
    RunReport,
    canonicalize_assembly,
    launch,
    list_programs,
    run_shots,
)

__all__ = [
    "Engine",
    "Error",
    "QubitHandle",
    "RankReport",
    "RunReport",
    "canonicalize_assembly",
    "launch",
    "list_programs",
    "run_shots",
]
