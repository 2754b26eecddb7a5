"""Error types shared across the package.

DataError marks invalid or inconsistent input data; NumericalError marks a
computation that degenerated (non-finite likelihood, failed eigensolve, ...).
The CLI maps them to distinct exit codes.
"""


class DataError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass
