# Error hierarchy. ValidationFailure maps to exit code 1, InputError to 2.


class FejerError(Exception):
    pass


class ValidationFailure(FejerError):
    pass


class InputError(FejerError):
    pass


class DimensionMismatchError(ValidationFailure):
    def __init__(self, expected: int, got: int, what: str = "vector"):
        super().__init__(f"Dimension mismatch: expected {what} of dim {expected}, got {got}")
        self.expected = expected
        self.got = got


class OrderError(ValidationFailure):
    pass


class GridTooSmallError(ValidationFailure):
    def __init__(self, M: int, required: int):
        super().__init__(f"Grid too small: M={M}, need M >= {required}")
        self.M = M
        self.required = required


class NonFiniteError(ValidationFailure):
    pass


class PoleError(ValidationFailure):
    pass


class UnitarityError(ValidationFailure):
    pass


class OrbitDriftError(ValidationFailure):
    pass


class RankDeficiencyError(ValidationFailure):
    pass


class SpectralRecoveryError(ValidationFailure):
    def __init__(self, message: str, worst_column: int = -1, residual: float = float("nan")):
        super().__init__(message)
        self.worst_column = worst_column
        self.residual = residual


class SelfCheckError(ValidationFailure):
    pass


class ConfigError(ValidationFailure):
    pass


class ExprSyntaxError(InputError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"Syntax error at offset {offset}: {message}")
        self.offset = offset
        self.detail = message


class UnknownFunctionError(ExprSyntaxError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown function '{name}'", offset)
        self.name = name


class MatrixMarketError(InputError):
    pass


class VectorCSVError(InputError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TextDecodeError(InputError):
    def __init__(self, path: str, line: int):
        super().__init__(f"{path}: line {line}: not valid UTF-8 text")
        self.path = path
        self.line = line
