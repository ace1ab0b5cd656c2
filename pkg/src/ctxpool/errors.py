"""Exception hierarchy shared by the library and the CLI."""


class ContextPoolError(Exception):
    """Base class for all errors raised by ctxpool."""

    exit_code = 3


class ParseError(ContextPoolError, ValueError):
    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class InductiveContractError(ContextPoolError, ValueError):
    """A test graph uses a relation that the training vocabulary lacks."""


class ConstructionError(ContextPoolError, ValueError):
    pass


class UnknownNameError(ContextPoolError, KeyError):
    """Entity or relation lookup failed.

    Subclasses KeyError so plain dict-style handling keeps working.
    """

    def __init__(self, kind, name, suggestions=()):
        self.kind = kind
        self.name = name
        self.suggestions = list(suggestions)
        msg = f"unknown {kind}: {name!r}"
        if self.suggestions:
            msg += " (did you mean: " + ", ".join(self.suggestions) + "?)"
        super().__init__(msg)

    def __str__(self):
        return self.args[0]


class CapacityError(ContextPoolError, RuntimeError):
    exit_code = 4


class DecodeError(ContextPoolError, ValueError):
    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class ConfigError(ContextPoolError, ValueError):
    exit_code = 2
