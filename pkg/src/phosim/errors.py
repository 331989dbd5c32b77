class ConfigError(ValueError):
    """Invalid scenario or run configuration; reported before simulation starts."""
