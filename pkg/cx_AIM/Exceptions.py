"""Defines the exceptions raised by the library."""

__all__ = [ "BaseError", "ConfigurationError", "DiagnosticsFilesError",
        "DimensionError", "DomainError", "EmptyFront", "NonFiniteLoss",
        "NonFiniteValues", "UnknownMethod", "UnknownProblem" ]

class BaseError(Exception):
    """Base class for all errors raised by the library. The message is a
       template which is formatted with the keyword arguments passed when the
       exception is raised."""
    message = ""

    def __init__(self, **arguments):
        self.arguments = arguments
        self.message = self.message % arguments
        self.details = []
        super(BaseError, self).__init__(self.message)

    def __str__(self):
        return self.message

    def ErrorRecord(self):
        """Return a dictionary suitable for writing as a machine readable
           error record."""
        arguments = dict((k, v if isinstance(v, (int, float, str)) \
                else repr(v)) for k, v in self.arguments.items())
        return dict(error = self.__class__.__name__, message = self.message,
                arguments = arguments, details = self.details)


class ConfigurationError(BaseError):
    message = "Invalid configuration: %(reason)s"


class DiagnosticsFilesError(BaseError):
    message = "Diagnostics files missing or corrupt in %(dirName)s: " \
            "%(fileNames)s"


class DimensionError(BaseError):
    message = "Dimension mismatch: %(expected)s != %(actual)s"


class DomainError(BaseError):
    message = "Point %(point)s outside domain [%(low)s, %(high)s]"


class EmptyFront(BaseError):
    message = "Pareto front contains no points."


class NonFiniteLoss(BaseError):
    message = "Non-finite loss at epoch %(epoch)s, step %(step)s: %(losses)s"


class NonFiniteValues(BaseError):
    message = "Vector of length %(length)s has %(count)s non-finite entries"


class UnknownMethod(BaseError):
    message = 'Unknown method "%(method)s"; valid methods are %(valid)s'


class UnknownProblem(BaseError):
    message = 'Unknown problem "%(problem)s"; valid problems are %(valid)s'
