"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Base class for environment-config problems."""


class ConfigParseError(ConfigError):
    """Malformed JSON. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ConfigSchemaError(ConfigError):
    """Unknown key or value outside the documented enum."""

    def __init__(self, message: str, key: str):
        super().__init__(message)
        self.key = key


class ConfigTypeError(ConfigError):
    """A field holds a value of the wrong type."""


class ExtractionError(ConfigError):
    """Could not recover the requested number of configs from LLM text.

    ``raw_text`` keeps the offending completion for logging and retries.
    """

    def __init__(self, message: str, raw_text: str):
        super().__init__(message)
        self.raw_text = raw_text


class GenerationError(RuntimeError):
    """Environment generation failed after exhausting retries."""


class CheckpointError(RuntimeError):
    """Missing or corrupt checkpoint file."""
