"""Exception hierarchy shared across the package."""


class BanditLensError(Exception):
    """Base class for all errors raised by bandit-lens."""


class ConfigError(BanditLensError):
    """Invalid or inconsistent experiment configuration."""


class EncodingError(BanditLensError):
    """A raw context cannot be encoded under the schema."""


class IngestError(BanditLensError):
    """Log ingestion failed as a whole (not a single-record rejection)."""


class EstimatorError(BanditLensError):
    """An off-policy estimator cannot produce a value for these inputs."""


class AblationError(BanditLensError):
    """An ablation spec cannot be applied to this experiment."""
