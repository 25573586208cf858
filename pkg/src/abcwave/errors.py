"""Exception hierarchy shared by all modules."""


class AbcWaveError(Exception):
    """Base class for all package errors."""


class SingularMatrix(AbcWaveError):
    """A factorization met a pivot below the singularity threshold."""


class NoConvergence(AbcWaveError):
    """A dense eigenvalue iteration did not converge."""


class CapExceeded(AbcWaveError):
    """A dense computation was requested on a matrix above the size cap."""


class InvalidSpec(AbcWaveError, ValueError):
    """Domain description violates its bounds."""


class DegenerateTriangle(AbcWaveError):
    """A mesh triangle has non-positive area."""


class PositivityViolation(AbcWaveError, ValueError):
    """A coefficient field violates its sign constraint at some node."""

    def __init__(self, field: str, node: int, value: float, bound: str):
        self.field = field
        self.node = node
        self.value = value
        super().__init__(f"coefficient {field!r} = {value!r} at node {node} violates {bound}")


class DimensionMismatch(AbcWaveError, ValueError):
    """Operands assembled on incompatible meshes."""


class DegenerateSplit(AbcWaveError):
    """The stationary/decaying splitting does not exist (e.g. d == 0)."""


class SingularSystem(AbcWaveError):
    """An auxiliary elliptic problem has no unique solution."""


class ConfigError(AbcWaveError):
    """Base for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ValidationError(ConfigError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
