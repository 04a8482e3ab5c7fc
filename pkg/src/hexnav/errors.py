class HexNavError(Exception):
    """Base class for domain errors raised by hexnav (CLI exit code 1)."""


class MapFormatError(HexNavError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class WallFollowError(HexNavError):
    pass


class EnclosedError(HexNavError):
    pass


class ContractError(HexNavError, ValueError):
    """A precondition of an operation was violated by the caller."""


class NoPathError(HexNavError):
    pass
