"""
Exception hierarchy shared by the engine and the command-line runner.

Each error carries the process exit code the runner reports for it.
"""


class BeamManagementError(Exception):
    """
    Base class for every error raised on purpose by this package.
    """

    exit_code: int = 4

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigurationError(BeamManagementError, ValueError):
    """
    Invalid configuration or out-of-range model input.
    """

    exit_code = 2


class ConfigParseError(ConfigurationError):
    """
    Malformed line in a config file.
    """

    def __init__(self, line_number: int, detail: str):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number


class RangeViolation(ConfigurationError):
    """
    A config value parsed fine but lies outside its allowed range or set.
    """

    def __init__(self, key: str, detail: str):
        super().__init__(f"{key}: {detail}")
        self.key = key


class InfeasibleRecommendation(BeamManagementError):
    """
    No (N_SS, T_SS) pair satisfies the SNR constraints at the requested speed.
    """

    exit_code = 3
