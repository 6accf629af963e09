"""Exception hierarchy shared across the package."""


class MetaTrustError(Exception):
    """Base class for all package errors."""


class MalformedInput(MetaTrustError):
    """Raw sidecar content could not be decoded in the declared format."""


class SchemaViolation(MetaTrustError):
    """A tag decoded fine but its value is outside the attribute's domain."""

    def __init__(self, tag, message):
        super().__init__(f"{tag}: {message}")
        self.tag = tag


class DuplicateId(MetaTrustError):
    pass


class MissingChannel(MetaTrustError):
    """A delta cannot be computed because one side lacks the channel."""


class EmptyCorpus(MetaTrustError):
    pass


class EmptyVocabulary(MetaTrustError):
    pass


class ZeroMatrix(MetaTrustError):
    pass


class RankDeficient(MetaTrustError):
    pass


class DimensionMismatch(MetaTrustError):
    pass


class DegenerateLabels(MetaTrustError):
    pass


class CollinearClass(MetaTrustError):
    pass


class VerticalPlane(MetaTrustError):
    pass


class KTooLarge(MetaTrustError):
    pass


class NoPlanes(MetaTrustError):
    pass


class EmptyKeywordSet(MetaTrustError):
    pass


class ChannelMissing(MetaTrustError):
    """A mutation plan touches a channel the record does not carry."""


class ModelVersionError(MetaTrustError):
    """A model or profile file carries an unsupported format tag."""
