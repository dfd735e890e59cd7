class RauzyLabError(Exception):
    exit_code = 3

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ConfigurationError(RauzyLabError, ValueError):
    exit_code = 2


class ConsistencyError(RauzyLabError):
    """A pair of slices or graphs violates a combinatorial identity it must satisfy."""

    def __init__(self, message: str, witness: str | None = None):
        super().__init__(message if witness is None else f"{message} (witness: {witness!r})")
        self.witness = witness


class GeneratorExhaustedError(RauzyLabError):
    pass
