"""Exception types shared across the package."""


class QosBrokerError(Exception):
    """Base class for all package errors."""


class ParseError(QosBrokerError):
    """Input bytes/text are not a well-formed document."""


class ValidationError(QosBrokerError):
    """Well-formed input violates a domain invariant."""


class InvalidK(QosBrokerError):
    """Cluster count out of the admissible range."""


class MissingLabel(QosBrokerError):
    """A provider has no decision label."""


class TooManyAttributes(QosBrokerError):
    """Attribute count exceeds the enumeration guard."""


class EmptyRDS(QosBrokerError):
    """Weight assignment over a reduced system with no attributes."""


class SchemaMismatch(QosBrokerError):
    """Provider profile does not validate against the registry schema."""


class BackendUnavailable(QosBrokerError):
    """Dynamic-QoS backend could not serve the request."""


class UnknownAttribute(QosBrokerError):
    """Requested attribute is absent or not eligible for the operation."""


class EmptyRegistry(QosBrokerError):
    """Operation requires at least one registered provider."""


class UnknownProvider(QosBrokerError):
    """Provider id is not known to the registry or ranked list."""


class NotRanked(QosBrokerError):
    """Selection attempted without a prior ranking for the user."""


class OutOfRange(QosBrokerError):
    """Feedback level outside the schema's level range."""
