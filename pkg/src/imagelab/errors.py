"""Exception hierarchy shared across the package."""


class ImageLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(ImageLabError):
    """Image dimensions must be >= 1."""


class BoundsError(ImageLabError):
    """Pixel coordinate outside the image."""


class ArityMismatchError(ImageLabError):
    """Sample tuple arity does not match the channel count."""


class FormatError(ImageLabError):
    """Operator applied to an image of the wrong color format."""


class InvalidKernelError(ImageLabError):
    """Kernel size must be an odd integer >= 1."""


class ParameterError(ImageLabError):
    """Operator parameter outside its valid range."""


class NoBackgroundError(ImageLabError):
    """Distance transform needs at least one zero pixel."""


class DecodeError(ImageLabError):
    """Malformed image byte stream.

    ``offset`` is the byte position where decoding failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(ImageLabError):
    """Valid stream but outside the supported subset (e.g. 16-bit PNG)."""


class UnknownOperatorError(ImageLabError):
    """Operator id not present in the block catalog."""


class TemplateError(ImageLabError):
    """Malformed or incompatible pipeline/template document."""


class EmptyStackError(ImageLabError):
    """Undo/redo requested on an empty stack."""


class ExecutionPreconditionError(ImageLabError):
    """Pipeline execution attempted without meeting its preconditions."""
