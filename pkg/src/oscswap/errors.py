"""Exception hierarchy; each leaf maps to a CLI exit status."""


class OscswapError(Exception):
    exit_status = 1


class ConfigError(OscswapError, ValueError):
    """Unparseable or semantically invalid configuration."""

    exit_status = 2


class DimensionError(OscswapError, ValueError):
    """Mode counts, cutoffs or array shapes do not line up."""

    exit_status = 3


class CutoffError(DimensionError):
    """An occupation or a state does not fit inside the photon-number cutoff."""


class NumericalDiagnosticError(OscswapError, ArithmeticError):
    """A numerical consistency check failed (negative probabilities, complex spectra, ...)."""

    exit_status = 4

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
