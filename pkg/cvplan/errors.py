"""Exceptions raised by :mod:`cvplan`.

Every error derives from :class:`CvPlanError`. Input problems are
:class:`ValidationError` (also a :class:`ValueError`), failures of the
numerics themselves are :class:`NumericalError` (also an
:class:`ArithmeticError`). The command line maps the first branch to exit
code 1 and the second to exit code 2.
"""


class CvPlanError(Exception): pass


class ValidationError(CvPlanError, ValueError): pass


class NumericalError(CvPlanError, ArithmeticError): pass


# validation
class InvalidGeometry(ValidationError): pass
class BudgetExceeded(ValidationError): pass
class NotDivisible(ValidationError): pass
class InvalidRho(ValidationError): pass
class InvalidPi(ValidationError): pass
class InvalidR(ValidationError): pass
class InvalidJ(ValidationError): pass
class DomainError(ValidationError): pass
class OutOfRange(ValidationError): pass
class InvalidParams(ValidationError): pass
class ShapeMismatch(ValidationError): pass
class InvalidConfig(ValidationError): pass
class NoVariation(ValidationError): pass


# numerics
class DegenerateSample(NumericalError): pass
class SingularDesign(NumericalError): pass
class Separation(NumericalError): pass


class MomentWarning(UserWarning):
    """Issued when a distribution lacks the moments a loss needs."""


def exit_code(error: BaseException) -> int:
    """exit_code(error) -> int
    Maps an exception to the command line exit status.

    >>> from cvplan.errors import exit_code, InvalidPi, Separation
    >>> exit_code(InvalidPi("pi=1.5"))
    1
    >>> exit_code(Separation("diverged"))
    2
    """
    if isinstance(error, NumericalError):
        return 2
    if isinstance(error, ValidationError):
        return 1
    return 2


def describe(error: BaseException) -> str:
    return f"{error.__class__.__name__}: {error}"
