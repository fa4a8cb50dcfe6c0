"""Exception hierarchy.

Every error carries the module it came from and a short machine code so the
CLI can emit ``E:<module>:<code>:<detail>`` lines.
"""


class HeegnerError(Exception):
    module = "core"
    code = "error"

    def __init__(self, detail="", **extra):
        super().__init__(detail)
        self.detail = detail
        for key, value in extra.items():
            setattr(self, key, value)


class ValidationError(HeegnerError, ValueError):
    """Input violates a documented precondition."""

    code = "precondition"

    def __init__(self, detail="", module="core", **extra):
        super().__init__(detail, **extra)
        self.module = module


class PrecisionExhausted(HeegnerError, ArithmeticError):
    module = "numerics"
    code = "precision"


class ToleranceNotMet(HeegnerError, ArithmeticError):
    """Raised with the best ball obtained so far in ``best`` and its ``radius``."""

    module = "numerics"
    code = "tolerance"


class InsufficientCoefficients(HeegnerError, ArithmeticError):
    """The q-expansion is too short; ``required`` holds the needed length."""

    module = "modforms"
    code = "coefficients"


class NewformParseError(HeegnerError, ValueError):
    module = "modforms"
    code = "parse"

    def __init__(self, detail="", line=None, **extra):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail, line=line, **extra)


class DomainError(HeegnerError, ArithmeticError):
    module = "asym"
    code = "domain"
