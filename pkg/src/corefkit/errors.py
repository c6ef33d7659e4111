"""Exception hierarchy shared across the toolkit.

Every error raised by corefkit derives from CorefError and carries a stable
``code`` used by the CLI and the HTTP service when reporting failures.
"""


class CorefError(Exception):
    code = "CorefError"


# ---- markup / document errors ----

class UnclosedTag(CorefError):
    """A COREF or container tag was opened and never closed (or vice versa)."""
    code = "UnclosedTag"


class DuplicateId(CorefError):
    code = "DuplicateId"


class DanglingRef(CorefError):
    """REF names a mention id that does not exist in the document."""
    code = "DanglingRef"

    def __init__(self, ref_id, message=None):
        super().__init__(message or f"REF names unknown mention id {ref_id!r}")
        self.ref_id = ref_id


class CrossingSpans(CorefError):
    """Two mention spans overlap without one strictly containing the other."""
    code = "CrossingSpans"


class BadAttribute(CorefError):
    """Missing ID, unknown TYPE, malformed or unacceptable attribute value."""
    code = "BadAttribute"


class InvariantViolation(CorefError):
    """A document or mention violates its structural invariants."""
    code = "InvariantViolation"


class UnknownMention(CorefError):
    code = "UnknownMention"


# ---- alignment / scoring errors ----

class TextMismatch(CorefError):
    """Key and response base texts differ; the files are mis-paired."""
    code = "TextMismatch"


class AmbiguousMin(CorefError):
    """MIN head not found inside its mention span (a defective key file)."""
    code = "AmbiguousMin"


class AlignmentMismatch(CorefError):
    """Alignment cites mention ids unknown to one of the chain sets."""
    code = "AlignmentMismatch"


class TooLarge(CorefError):
    """Input exceeds the size bound of a brute-force reference routine."""
    code = "TooLarge"


class UndefinedResult(CorefError):
    """A ratio whose denominator is zero; reported as '-' in renderings."""
    code = "UndefinedResult"


# ---- workflow service errors ----

class ParseError(CorefError):
    """A corpus file failed to parse; carries the offending file name."""
    code = "ParseError"

    def __init__(self, name, cause):
        super().__init__(f"{name}: {cause}")
        self.name = name
        self.cause = cause


class ImportConflict(CorefError):
    code = "ImportConflict"


class WrongStage(CorefError):
    code = "WrongStage"


class RevisionConflict(CorefError):
    code = "RevisionConflict"


class SpanError(CorefError):
    """Markable geometry rejected: out of bounds, crossing or duplicate spans."""
    code = "SpanError"


class UnknownId(CorefError):
    """Unknown project, document or annotator identifier."""
    code = "UnknownId"


class ValidationError(CorefError):
    code = "ValidationError"
