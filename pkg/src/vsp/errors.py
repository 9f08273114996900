"""Exception hierarchy shared across the package.

Exit-code mapping for the CLI: InputError -> 2, BudgetExceeded -> 3,
verification failure -> 1.
"""


class VspError(Exception):
    pass


class InputError(VspError):
    """Bad user input: unknown ids, malformed files, invalid parameters."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ContractError(InputError):
    """Overlapping or terminal-containing clusters passed to contract()."""


class ParamError(InputError):
    """Parameter outside its documented range."""


class BudgetExceeded(VspError):
    """An exact exponential procedure was asked to exceed its budget.

    Callers may fall back to the heuristic solver where one exists.
    """
