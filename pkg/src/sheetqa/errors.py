"""Exception taxonomy shared by all sheetqa modules."""

from __future__ import annotations


class SheetQAError(Exception):
    """Base class for every error raised by this package."""


# --- notation -------------------------------------------------------------

class UnsupportedToken(SheetQAError):
    """The tune body contains a token outside the supported ABC subset."""

    def __init__(self, position: int, token: str, reason: str = ""):
        self.position = position
        self.token = token
        self.reason = reason
        msg = f"unsupported token {token!r} at position {position}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class MalformedHeader(SheetQAError):
    """A header line could not be interpreted."""

    def __init__(self, line: str, reason: str = ""):
        self.line = line
        self.reason = reason
        msg = f"malformed header line {line!r}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class EmptyBody(SheetQAError):
    """The tune has no measures."""


class TooShort(SheetQAError):
    """The tune has fewer measures than the operation requires."""


# --- theory ---------------------------------------------------------------

class UnsupportedKey(SheetQAError):
    """Key outside the 7-sharps..7-flats range."""


class OutOfRange(SheetQAError):
    """Interval beyond the octave, or pitch outside the supported register."""


class NonNameable(SheetQAError):
    """No quality name exists for this letter/semitone combination."""


class Unspellable(SheetQAError):
    """The result would need an accidental beyond double sharp/flat."""


class NotATriad(SheetQAError):
    """The pitch classes fit no triad quality in any rotation."""


class NotMembers(SheetQAError):
    """A given pitch is not a member of the target triad."""


class Ambiguous(SheetQAError):
    """The given pitches do not determine the missing chord member."""


class NoCandidates(SheetQAError):
    """Accidental usage is inconsistent with every supported key signature."""


# --- question generation ----------------------------------------------------

class Ineligible(SheetQAError):
    """The source tune cannot support this question template."""


class InsufficientCandidates(SheetQAError):
    """Fewer than three falsifiable distractors could be produced."""


class GenerationError(SheetQAError):
    """A generated record failed its own verification (internal bug guard)."""


# --- dataset ---------------------------------------------------------------

class EmptyCorpus(SheetQAError):
    """No parseable tunes were found in the corpus directory."""


class InsufficientCorpus(SheetQAError):
    """The eligible tune pool is too small for the requested counts."""

    def __init__(self, category: str, needed: int, available: int):
        self.category = category
        self.needed = needed
        self.available = available
        super().__init__(
            f"category {category}: need {needed} records but only "
            f"{available} eligible tunes are available"
        )


class SchemaError(SheetQAError):
    """A JSONL line does not match the dataset schema."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class ConfigError(SheetQAError):
    """The dataset configuration is invalid."""


# --- grading -----------------------------------------------------------------

class GroupTooSmall(SheetQAError):
    """Advantage groups need at least two rewards."""


class EmptySet(SheetQAError):
    """An aggregate was requested over zero verdicts."""


# --- rendering ---------------------------------------------------------------

class RenderError(SheetQAError):
    """Base class for external-tool failures."""


class ToolMissing(RenderError):
    """A configured engraving/raster binary is not on PATH."""


class ToolFailed(RenderError):
    """The external tool exited nonzero."""

    def __init__(self, tool: str, stderr: str):
        self.tool = tool
        self.stderr = stderr
        excerpt = stderr.strip().splitlines()[-1] if stderr.strip() else "(no output)"
        super().__init__(f"{tool} failed: {excerpt}")


class ToolTimeout(RenderError):
    """The external tool exceeded its time budget."""
