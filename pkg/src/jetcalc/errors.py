"""Exception hierarchy shared by every jetcalc module."""


class JetCalcError(Exception):
    """Base class for all engine errors."""


class UnsupportedFunctionError(JetCalcError):
    pass


class UnboundVariableError(JetCalcError):
    pass


class DomainError(JetCalcError, ArithmeticError):
    pass


class InconclusiveError(JetCalcError):
    """Randomized equivalence could not find enough evaluable sample points."""


class ParseError(JetCalcError, ValueError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        prefix = text[:position]
        self.line = prefix.count("\n") + 1
        self.column = position - (prefix.rfind("\n") + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column})")


class InsufficientOrderError(JetCalcError):
    pass


class ContextMismatchError(JetCalcError):
    pass


class RankMismatchError(JetCalcError):
    pass


class NotLinearError(JetCalcError):
    pass


class NumericInstabilityError(JetCalcError):
    def __init__(self, message, case=None):
        self.case = case
        super().__init__(message)


class ShapeMismatchError(JetCalcError, ValueError):
    pass


class DepthError(JetCalcError):
    """Distribution nesting deeper than the model supports, or mixed carriers."""
