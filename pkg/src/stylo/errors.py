"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: config errors exit 1,
data errors 2, numeric divergence 3, provider failures 4.
"""


class StyloError(Exception):
    """Base class for all package errors."""


class ConfigError(StyloError):
    """Invalid or inconsistent run configuration."""


class DataError(StyloError):
    """Bad input data: empty corpus, out-of-vocabulary text, short chunks."""


class IntegrityError(DataError):
    """Checkpoint or bin file failed an integrity check."""


class NumericError(StyloError):
    """Non-finite values encountered during training."""


class ProviderError(StyloError):
    """NLI provider failed after retries."""


class ProtocolError(ProviderError):
    """NLI provider returned a malformed or non-simplex response."""
