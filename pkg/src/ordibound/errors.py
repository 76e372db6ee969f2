"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented exit statuses without a lookup table.
"""

from __future__ import annotations


class OrdiboundError(Exception):
    exit_code = 3

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class DataError(OrdiboundError):
    """Invalid input data (bad probabilities, malformed files, ...)."""

    exit_code = 2


class NumericalError(OrdiboundError):
    """Numerical or estimation failure."""

    exit_code = 3


# bounds
class NegativeMass(DataError):
    pass


class NotAProbabilityVector(DataError):
    pass


class TooFewCategories(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class MarginalShapeMismatch(DataError):
    pass


class InvalidJointMatrix(DataError):
    pass


# attainment
class DominanceViolated(DataError):
    pass


class FillInfeasible(NumericalError):
    pass


class ConstructionInvalid(NumericalError):
    pass


# transport
class Infeasible(DataError):
    pass


class Unbounded(NumericalError):
    pass


# glm
class Separation(NumericalError):
    pass


class DegenerateDesign(NumericalError):
    pass


class SingleCategory(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# estimators
class EmptyArm(DataError):
    pass


class MissingCovariates(DataError):
    pass


class EstimationError(NumericalError):
    pass


# bootstrap
class TooFewReplicates(NumericalError):
    pass


# files and CLI
class MalformedRow(DataError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["line"] = self.line
        return d


class NonIntegerCategory(MalformedRow):
    pass


class MissingColumn(DataError):
    pass


class LengthMismatch(DataError):
    pass


class NegativeCount(DataError):
    pass
