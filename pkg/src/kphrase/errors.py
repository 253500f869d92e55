"""Exception hierarchy shared by every kphrase module."""

from __future__ import annotations


class KPError(Exception):
    """Base class for all kphrase errors."""


class ParseError(KPError):
    """A motion, suite or manifest file could not be parsed."""


class SchemaError(KPError):
    """A file parsed but its content violates the expected schema."""


class DegenerateFrameError(KPError):
    """The egocentric reference frame is undefined at some frame."""

    def __init__(self, frame: int, reason: str = "hip axis is degenerate"):
        self.frame = frame
        super().__init__(f"frame {frame}: {reason}")


class DegenerateLimbError(KPError):
    """A limb vector used by an angle phrase has zero length."""

    def __init__(self, frame: int, chain, phrase_id: int | None = None):
        self.frame = frame
        self.chain = chain
        self.phrase_id = phrase_id
        where = f" (phrase {phrase_id})" if phrase_id is not None else ""
        super().__init__(f"frame {frame}: zero-length limb in chain {chain}{where}")


class ConfigError(KPError):
    """Invalid configuration or reference to an unknown phrase."""


class IntegrityError(KPError):
    """A knowledge-base index references missing or inconsistent files."""


class SynthesisError(KPError):
    """A requested pattern cannot be realised by the fixture synthesizer."""
