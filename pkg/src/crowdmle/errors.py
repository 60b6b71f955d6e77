class CrowdMLEError(Exception):
    exit_code = 1


class InputError(CrowdMLEError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class CapExceeded(CrowdMLEError):
    """An enumeration would exceed its configured size cap."""

    exit_code = 3


class ConfigError(CrowdMLEError, ValueError):
    exit_code = 4
