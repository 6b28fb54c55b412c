"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration.

    ``field`` carries a dotted path to the offending entry when one is known
    (e.g. ``energy.bess.soc``).
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
