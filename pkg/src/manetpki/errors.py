"""Exception hierarchy shared by every module."""


class ManetPkiError(Exception):
    pass


class FieldMismatchError(ManetPkiError, ValueError):
    """Operands live in different fields."""


class ParameterError(ManetPkiError, ValueError):
    """Curve or protocol parameters violate a structural requirement."""


class FixtureError(ManetPkiError, LookupError):
    """A hash fixture is missing, malformed or inconsistent with the curve."""


class ProtocolError(ManetPkiError):
    """A protocol step was invoked with inputs it cannot accept."""


class ParseError(ManetPkiError, ValueError):
    """A text record could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += str(source)
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConfigError(ManetPkiError, ValueError):
    """A scenario configuration is invalid; raised before any event runs."""


class UnknownQueryError(ManetPkiError, KeyError):
    pass
