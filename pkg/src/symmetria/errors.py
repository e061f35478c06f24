"""Exception hierarchy for symmetria.

Input problems (bad files, invalid meshes, impossible parameters) map to exit
code 1, numerical failures of the pipeline to exit code 2.
"""
from __future__ import annotations

__all__ = [
    "SymmetriaError",
    "InputError",
    "ParseError",
    "ValidationError",
    "NonManifoldError",
    "DimensionError",
    "InfeasibleError",
    "EmptyGroundTruthError",
    "NumericalError",
    "ConvergenceError",
    "DegenerateSpectrumError",
    "NoFeaturesError",
    "UnreachableError",
    "DegenerateMapError",
    "ConvergenceWarning",
]


class SymmetriaError(Exception):
    exit_code = 1


class InputError(SymmetriaError):
    exit_code = 1


class ParseError(InputError):
    """Malformed OFF/OBJ syntax."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None) -> None:
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(f"{where}{message}")


class ValidationError(InputError):
    """Mesh or configuration violates an invariant; `element` names the culprit."""

    def __init__(self, message: str, *, element: str | None = None) -> None:
        self.element = element
        super().__init__(f"{message} ({element})" if element else message)


class NonManifoldError(InputError):
    def __init__(self, edge: tuple[int, int], count: int) -> None:
        self.edge = edge
        self.count = count
        super().__init__(f"edge {edge} has {count} incident faces (non-manifold)")


class DimensionError(InputError):
    pass


class InfeasibleError(InputError):
    pass


class EmptyGroundTruthError(InputError):
    pass


class NumericalError(SymmetriaError):
    exit_code = 2


class ConvergenceError(NumericalError):
    pass


class DegenerateSpectrumError(NumericalError):
    pass


class NoFeaturesError(NumericalError):
    pass


class UnreachableError(NumericalError):
    pass


class DegenerateMapError(NumericalError):
    pass


class ConvergenceWarning(UserWarning):
    """Optimizer stopped at the iteration cap; the result is still usable."""
