class LabError(Exception):
    ...


class InvalidParametersError(LabError):
    ...


class InvalidVariableError(LabError):
    ...


class InvalidInputError(LabError):
    ...


class BudgetExceededError(LabError):
    ...


class UnsatisfiableError(LabError):
    ...


class WindowError(LabError):
    ...


class ConfigError(LabError):
    ...


class ReproducibilityError(LabError):
    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message)
        self.step = step
