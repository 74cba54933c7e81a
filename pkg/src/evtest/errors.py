"""Exception hierarchy. Every error is a ``ValueError`` so callers can catch broadly."""


class EvtestError(ValueError):
    pass


class TiesDetected(EvtestError):
    pass


class DegenerateColumn(EvtestError):
    pass


class UnsupportedExponent(EvtestError):
    pass


class UnattainableTau(EvtestError):
    pass


class InvalidModel(EvtestError):
    pass


class CsvParseError(EvtestError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigError(EvtestError):
    pass
