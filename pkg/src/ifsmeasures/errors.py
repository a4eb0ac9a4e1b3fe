"""Exception hierarchy shared by all modules."""


class IFSMeasureError(Exception):
    """Base class for errors raised by this package."""


class MalformedBank(IFSMeasureError, ValueError):
    """Filter count does not match the channel count, or N < 2."""


class ChannelOutOfRange(IFSMeasureError, IndexError):
    pass


class WindowTooSmall(IFSMeasureError, ValueError):
    """The coefficient window is not mapped into itself by every adjoint."""


class DepthOverflow(IFSMeasureError, RuntimeError):
    """Tree or cascade enumeration would exceed the configured node cap."""


class NotUnitVector(IFSMeasureError, ValueError):
    pass


class DepthMismatch(IFSMeasureError, ValueError):
    pass
