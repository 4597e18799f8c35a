"""Exception types shared across the package.

Every error that a verification campaign can recover from carries enough
structured data to be reported (and replayed) without string parsing.
"""


class EquisplitError(Exception):
    """Base class for all package errors."""


class AmbientMismatch(EquisplitError):
    """Subspace operation on operands with different ambient dimensions."""


class NotSquare(EquisplitError):
    """Operation requires a square matrix."""


class FieldMismatch(EquisplitError):
    """Operands live over different coefficient fields."""


class ShapeMismatch(EquisplitError):
    """Matrix operands have incompatible shapes."""


class NotATree(EquisplitError):
    """Operation is only defined for trees (connected, acyclic, 1-dimensional)."""


class SizeLimit(EquisplitError):
    """A configured size cap (vertices, group order, dimension) was exceeded."""


class BadCharacteristic(EquisplitError):
    """Averaging over a subgroup whose order vanishes in the coefficient field.

    Attributes carry the offending subgroup so reports can name it: this is
    the operational content of the good-field hypothesis.
    """

    def __init__(self, order: int, char: int, description: str = ""):
        self.order = order
        self.char = char
        self.description = description
        msg = f"subgroup order {order} is divisible by the field characteristic {char}"
        if description:
            msg += f" ({description})"
        super().__init__(msg)


class NonCommutingOnCell(EquisplitError):
    """Vertex idempotents on a common cell fail to commute; no consistent system."""

    def __init__(self, cell: int, vertex_a: int, vertex_b: int):
        self.cell = cell
        self.vertex_a = vertex_a
        self.vertex_b = vertex_b
        super().__init__(
            f"vertex idempotents e_{vertex_a}, e_{vertex_b} do not commute on cell {cell}"
        )


class NotConvex(EquisplitError):
    """Subcomplex fails the (verifiable) convexity requirement."""


class InconsistentSystem(EquisplitError):
    """Idempotent system does not satisfy the consistency requirements."""


class NotFixed(EquisplitError):
    """The given subgroup does not fix the block function."""


class NotIncreasing(EquisplitError):
    """Level composites q_n are not an increasing sequence of idempotents."""

    def __init__(self, level: int):
        self.level = level
        super().__init__(f"composite idempotent at level {level} does not dominate level {level - 1}")


class NotExhaustive(EquisplitError):
    """Top-level composite is not the identity; telescoping unavailable."""


class NotLocallyEquivariant(EquisplitError):
    """Local map is not equivariant for the cell stabilizer; cannot be lifted."""


class ConfigError(EquisplitError):
    """Campaign configuration is malformed or violates a cap."""


class VerificationFailure(EquisplitError):
    """A mandatory campaign check failed."""
