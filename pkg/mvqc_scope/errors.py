"""
Exception hierarchy for MVQC Scope.
"""


class MvqcError(Exception):
    """Base class for all errors raised by the pipeline."""


class PnmParseError(MvqcError, ValueError):
    """Malformed PGM/PPM content."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class NoDarkPixelsError(MvqcError, ValueError):
    """The histogram has no counts inside the dark range."""

    def __init__(self, t_dark: int):
        super().__init__(f"no dark pixels in intensity range [0, {t_dark}]")
        self.t_dark = t_dark


class EmptySignatureError(MvqcError, ValueError):
    """A signature image has no ink after binarization."""

    def __init__(self, message: str = "empty signature"):
        super().__init__(message)


class EmptyTileError(MvqcError, ValueError):
    """Central moments requested for a tile without foreground pixels."""


class ImageSizeError(MvqcError, ValueError):
    """Image dimensions do not match what an operation requires."""


class WindowError(MvqcError, ValueError):
    """Degenerate or out-of-bounds crop rectangle."""


class ManifestError(MvqcError, ValueError):
    """Invalid dataset manifest."""


class TemplateFormatError(MvqcError, ValueError):
    """Invalid serialized template record."""
