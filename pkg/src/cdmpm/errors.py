class CDMPMError(Exception):
    pass


class InputValidationError(CDMPMError, ValueError):
    """Input data or parameters the codec cannot accept."""


class CorruptContainerError(CDMPMError):
    """Header is malformed: bad magic, unknown version, truncated fields."""


class DesyncError(CorruptContainerError):
    """Payload does not decode consistently (exhausted bits, Repeat out of range)."""
