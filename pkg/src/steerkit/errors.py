"""Error types that the command line maps onto exit codes."""


class ConfigError(ValueError):
    """Invalid configuration input; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
