"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 1 and ``ComputationError``
subclasses to exit code 2.
"""


class BibSimcaError(Exception):
    exit_code = 2


class InputError(BibSimcaError, ValueError):
    exit_code = 1


class ComputationError(BibSimcaError, ArithmeticError):
    exit_code = 2


class MissingBaselineError(InputError):
    """One or more (year, category) cells are absent from the reference baseline."""

    def __init__(self, missing, pub_ids=()):
        self.missing = sorted(set(missing))
        self.pub_ids = tuple(pub_ids)
        cells = ", ".join(f"({y}, {c})" for y, c in self.missing)
        msg = f"missing baseline cell(s): {cells}"
        if self.pub_ids:
            msg += f" for publication(s) {', '.join(map(str, self.pub_ids))}"
        super().__init__(msg)


class ValidationIssue:
    __slots__ = ("file", "line", "message", "kind")

    def __init__(self, file, line, message, kind="parse"):
        self.file = file
        self.line = line
        self.message = message
        self.kind = kind

    def __str__(self):
        return f"{self.file}:{self.line}: [{self.kind}] {self.message}"

    def __repr__(self):
        return f"ValidationIssue({self.file!r}, {self.line!r}, {self.message!r}, {self.kind!r})"


class DataValidationError(InputError):
    """Aggregated report of every malformed row found while loading inputs."""

    def __init__(self, issues):
        self.issues = list(issues)
        lines = "\n  ".join(str(i) for i in self.issues)
        super().__init__(f"{len(self.issues)} validation issue(s):\n  {lines}")

    @property
    def kinds(self):
        return {i.kind for i in self.issues}


class IntegrityError(DataValidationError):
    """Referential gap between input files (e.g. authorship of an unknown publication)."""


class DegenerateInputError(ComputationError):
    pass


class InsufficientDataError(ComputationError):
    pass


class RankDeficiencyError(ComputationError):
    pass


class UndefinedCorrelationError(ComputationError):
    pass


class AbsentPositiveMeanError(ComputationError):
    """An indicator column has no positive entries, so its positive mean is undefined."""

    def __init__(self, column=None):
        self.column = column
        what = f"indicator {column!r}" if column is not None else "column"
        super().__init__(f"{what} has no values above 0; positive mean is undefined")


class PipelineError(BibSimcaError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
        super().__init__(f"stage '{stage}' failed: {cause}")
