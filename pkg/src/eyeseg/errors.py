"""Exception types shared across the package."""


class EyesegError(Exception):
    """Base class for all package errors."""


class EmptyMaskError(EyesegError):
    """An operation requiring foreground pixels received an empty mask."""


class ShapeMismatchError(EyesegError):
    """Two masks that must share dimensions do not."""


class InvalidFactorError(EyesegError):
    """Box scale factor must be strictly positive."""


class InvalidFractionError(EyesegError):
    """Perturbation fraction must lie in [0, 1)."""


class NoBackgroundError(EyesegError):
    """A box holds no pixels outside the mask to sample from."""


class NoDataError(EyesegError):
    """An aggregate was requested over zero usable records."""


class InvalidLabelMapError(EyesegError):
    """A label map holds values outside the known class codes."""


class ManifestError(EyesegError):
    """A dataset root does not match its declared layout."""


class DecodeError(EyesegError):
    """An image buffer could not be decoded."""


class InvalidHandleError(EyesegError):
    """An embedding handle was used with the wrong backend or image."""


class EmptyPromptError(EyesegError):
    """predict() requires at least one point or a box."""


class CapabilityError(EyesegError):
    """The backend does not support the requested mode."""
