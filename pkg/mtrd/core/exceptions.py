"""
Error hierarchy. Every error carries the process exit code the CLI reports.
"""
from typing import Optional


class MTRDError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, *, schema_pointer: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        self.schema_pointer = schema_pointer

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "exit_code": self.exit_code,
            "schema_pointer": self.schema_pointer,
        }


class InputError(MTRDError):
    exit_code = 2


class NegativeMass(InputError):
    pass


class SumNotOne(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class UnknownVariable(InputError):
    pass


class AllMassZero(InputError):
    pass


class AlphabetMismatch(InputError):
    pass


class MissingBlocklength(InputError):
    pass


class EmptySubset(InputError):
    pass


class EmptyGrid(InputError):
    pass


class UndefinedDensity(InputError):
    pass


class FactorizationViolated(InputError):
    pass


class SlackRelationViolated(InputError):
    pass


class InfeasibleDistortion(MTRDError):
    exit_code = 3


class BudgetExceeded(MTRDError):
    exit_code = 4


class DecoderInconsistent(MTRDError):
    exit_code = 1
