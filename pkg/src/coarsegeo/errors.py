"""Exception hierarchy shared by all modules.

Exit-code conventions of the CLI map onto these classes: configuration or
validation problems exit 1, rejected preconditions exit 2, numerical
failures exit 3.
"""


class CoarseGeoError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(CoarseGeoError):
    """Malformed input data (bad group spec, bad path file, bad config).

    Carries a list of human-readable violation strings.
    """

    exit_code = 1

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PreconditionError(CoarseGeoError):
    """An operation's stated precondition failed.

    ``inequality`` names the violated condition, e.g. ``"2*r <= h0/2"``.
    """

    exit_code = 2

    def __init__(self, inequality, detail=""):
        self.inequality = inequality
        self.detail = detail
        msg = inequality if not detail else f"{inequality} ({detail})"
        super().__init__(msg)


class NumericalError(CoarseGeoError):
    """A numerical routine failed to converge (bisection, fit, ...)."""

    exit_code = 3
