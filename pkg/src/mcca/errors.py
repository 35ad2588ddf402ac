"""Exception hierarchy shared across the package.

Validation problems (shapes, values) derive from ``ValueError`` so that
callers who do not care about the distinction can catch the builtin.
Numerical degeneracies derive from ``ArithmeticError``; the command-line
front end maps the two families onto distinct exit codes.
"""


class DimensionError(ValueError):
    """Shapes or dimension lists are inconsistent with each other."""


class DataError(ValueError):
    """Input values are malformed: non-finite, unparseable, or empty."""


class DegeneracyError(ArithmeticError):
    """The problem instance is numerically degenerate."""


class RankDeficiencyError(DegeneracyError):
    """The block-diagonal covariance is singular and cannot be inverted."""


class DegenerateSetError(DegeneracyError):
    """One data set carries no usable variance at all.

    ``set_number`` is 1-based, matching the numbering used in reports.
    """

    def __init__(self, set_number: int, n_sets: int, detail: str = ""):
        self.set_number = set_number
        self.n_sets = n_sets
        msg = f"data set {set_number} of {n_sets} is degenerate"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class UndefinedIscError(DegeneracyError):
    """Within-set variance is zero, so inter-set correlation is undefined."""
