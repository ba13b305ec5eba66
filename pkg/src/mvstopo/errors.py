"""Exception hierarchy.

Input problems (bad documents, axiom violations, refused theorem hypotheses)
derive from :class:`InputError`; a failed theorem conclusion is a
:class:`ClauseFailure` and always indicates a bug in this library.
"""


class MvsTopoError(Exception):
    """Base class for every error raised by mvstopo."""


class InputError(MvsTopoError, ValueError):
    """Malformed or out-of-range input."""


class AxiomViolation(InputError):
    """A structure fails one of its defining axioms.

    ``axiom`` is a short tag such as ``"M3"``, ``"f1"`` or ``"UB3"``;
    ``witness`` is the offending tuple of indices.
    """

    def __init__(self, axiom, witness=None, message=""):
        self.axiom = axiom
        self.witness = witness
        text = f"{axiom} violated"
        if witness is not None:
            text += f" (witness {witness})"
        if message:
            text += f": {message}"
        super().__init__(text)


class HypothesisError(InputError):
    """A construction was called outside its theorem's hypotheses."""


class ClauseFailure(MvsTopoError, AssertionError):
    """A checked theorem clause did not hold."""

    def __init__(self, clause, report=None):
        self.clause = clause
        self.report = report
        super().__init__(f"{clause.anchor}: FAIL (witness {clause.witness!r})")
