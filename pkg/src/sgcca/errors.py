"""Exception types. Each carries a short machine-readable ``code`` used by the CLI."""


class SGCCAError(Exception):
    code = "error"


class InvalidArgumentError(SGCCAError, ValueError):
    code = "invalid-argument"


class InfeasibleBudgetError(InvalidArgumentError):
    code = "infeasible-budget"


class DegenerateInputError(SGCCAError, ValueError):
    code = "degenerate-input"


class BranchConditionError(SGCCAError, RuntimeError):
    """Raised when a root search is requested on a domain without a sign change."""
    code = "branch-condition-violated"


class UnsupportedSchemeError(SGCCAError, ValueError):
    code = "unsupported-scheme"


class DegenerateColumnError(SGCCAError, ValueError):
    code = "degenerate-column"


class DataFormatError(SGCCAError, ValueError):
    code = "parse-error"


class ConfigError(SGCCAError, ValueError):
    code = "config-error"
