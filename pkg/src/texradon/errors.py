"""Exception types shared across the package."""


class TexRadonError(Exception):
    """Base class for library errors."""


class BandLimitError(TexRadonError, ValueError):
    """Requested band limit exceeds the configured ceiling."""


class IndexRangeError(TexRadonError, ValueError):
    """Harmonic index outside its admissible range."""


class PropagationError(TexRadonError, ArithmeticError):
    """A non-finite value appeared while evaluating a transform."""


class CalibrationError(TexRadonError, RuntimeError):
    """The measured dual-transform symbol drifted from its frozen table."""


class ModelError(TexRadonError, ValueError):
    """An ODF model cannot be realized at the requested band limit."""


class RankDeficiencyError(TexRadonError, ArithmeticError):
    """Pole-figure data do not determine the requested coefficients.

    ``undetermined`` maps degree ``l`` to the dimension of the unobserved
    subspace of that degree.
    """

    def __init__(self, message, undetermined=None, condition=None):
        super().__init__(message)
        self.undetermined = dict(undetermined or {})
        self.condition = condition


class FormatError(TexRadonError, ValueError):
    """Malformed text file; ``lineno`` is 1-based."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.lineno = lineno
