"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for every domain error raised by this package."""


class ValidationError(WorkbenchError):
    """An operation violated a domain invariant."""


class UnknownIdError(WorkbenchError):
    """A referenced id does not resolve."""


class DuplicateIdError(WorkbenchError):
    """An id is already taken."""


class StaleSuggestionError(WorkbenchError):
    """The suggestion no longer matches the current ontology state."""


class NoEvidenceError(WorkbenchError):
    """The requested attitude scope holds no property instances."""


class ConversionError(WorkbenchError):
    """A Godet/MyChoice conversion cannot proceed.

    ``offenders`` lists the ids that block the conversion, so callers can
    surface them without parsing the message.
    """

    def __init__(self, message: str, offenders: list[str] | None = None):
        super().__init__(message)
        self.offenders = offenders or []


class VariableSetMismatchError(WorkbenchError):
    """Two inputs that must range over the same variables do not."""


class ProjectFileError(WorkbenchError):
    """The project file cannot be read or written."""


class ChecksumError(ProjectFileError):
    """Stored checksum does not match the payload (corrupt or truncated file)."""


class VersionError(ProjectFileError):
    """The file was written by a newer format version."""


class SchemaError(ProjectFileError):
    """The file payload violates the storage schema.

    ``pointer`` is a JSON-pointer-style location of the offending value.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{message} (at {pointer})" if pointer else message)
        self.pointer = pointer
