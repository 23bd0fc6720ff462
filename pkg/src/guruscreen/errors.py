"""Exception hierarchy shared across the package."""


class GuruScreenError(Exception):
    """Base class for every error raised by this package."""


# ingest
class DataError(GuruScreenError):
    """Input data could not be used."""


class MalformedQuarter(DataError, ValueError):
    pass


class NoTradingData(DataError):
    pass


class SchemaError(DataError):
    pass


class RowError(DataError):
    """One or more unparsable rows.

    ``problems`` holds ``(line_number, message)`` pairs so callers can
    report every bad row, not only the first.
    """

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        first = self.problems[0] if self.problems else (0, "unknown")
        more = f" (+{len(self.problems) - 1} more)" if len(self.problems) > 1 else ""
        super().__init__(f"{self.path}:{first[0]}: {first[1]}{more}")


# scoring / portfolio
class UnknownGuru(GuruScreenError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyUniverse(GuruScreenError):
    pass


class EmptyColumn(GuruScreenError, ValueError):
    pass


class EmptyPortfolio(GuruScreenError):
    pass


class TableError(DataError):
    """Markdown portfolio table failed validation."""


class HeaderMismatch(TableError):
    pass


class BadScoreFormat(TableError):
    pass


class BadWeightFormat(TableError):
    pass


class WeightSumError(TableError):
    pass


class EmptyReason(TableError):
    pass


# backtest / analytics
class BacktestError(GuruScreenError):
    pass


class MissingPrices(BacktestError, DataError):
    pass


class CalendarGap(BacktestError, DataError):
    pass


class Degenerate(BacktestError, ArithmeticError):
    pass


class TooFewObservations(GuruScreenError, ValueError):
    pass
