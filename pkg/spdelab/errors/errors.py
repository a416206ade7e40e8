class Error(Exception):
    """Base class for exceptions in this module."""

    def __init__(self, expression, message):
        super().__init__(expression, message)
        self.expression = expression
        self.message = message

    def __str__(self):
        return "{}{}".format(self.expression, self.message)


class GridError(Error, ValueError):
    """Exception raised for an invalid grid or when two objects live on different grids.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
    """
    pass


class DomainError(Error, ValueError):
    """Exception raised when an argument lies outside the domain of an operation
    (non-positive time, coordinates outside [0, 1], invalid moment order...).

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
    """
    pass


class AdmissibilityError(Error, ValueError):
    """Exception raised when an exponent or a moment order is outside its admissible interval.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
    """
    pass


class BlowUpError(Error, ArithmeticError):
    """Exception raised when a time stepping produces non-finite or absurdly large values.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
        step -- index of the time step at which the guard fired
    """

    def __init__(self, expression, message, step=None):
        super().__init__(expression, message)
        self.step = step


class HypothesisError(Error, ValueError):
    """Exception raised when coefficients violate the growth, bound or Lipschitz hypotheses.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
        witness -- dict describing the offending point(s)
    """

    def __init__(self, expression, message, witness=None):
        super().__init__(expression, message)
        self.witness = witness


class ConstantOverflowError(Error, OverflowError):
    """Exception raised when a constant leaves the double precision range.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
        log_value -- natural logarithm of the constant
    """

    def __init__(self, expression, message, log_value=None):
        super().__init__(expression, message)
        self.log_value = log_value


class EmptyEnsembleError(Error, ValueError):
    """Exception raised when an estimator receives no sample at all."""
    pass


class FitError(Error, RuntimeError):
    """Exception raised when a tail fit has no usable data."""
    pass


class ConfigurationError(Error, ValueError):
    """Exception raised for an unknown check identifier or a malformed run configuration."""
    pass


class QuadratureError(Error, ArithmeticError):
    """Exception raised when an adaptive quadrature stops refining before reaching its tolerance.

    Attributes:
        expression -- input expression in which the error occurred
        message -- explanation of the error
        estimate -- last estimate of the integral
    """

    def __init__(self, expression, message, estimate=None):
        super().__init__(expression, message)
        self.estimate = estimate
