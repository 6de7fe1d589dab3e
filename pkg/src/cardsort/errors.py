"""Exception hierarchy shared by all cardsort modules."""


class CardSortError(ValueError):
    """Base class for every error raised by cardsort."""


class ParseError(CardSortError):
    pass


class ValidationError(CardSortError):
    def __init__(self, reason, record_index=None):
        self.reason = reason
        self.record_index = record_index
        if record_index is None:
            msg = reason
        else:
            msg = f"record {record_index}: {reason}"
        super().__init__(msg)


class InvalidK(CardSortError):
    pass


class InvalidRange(CardSortError):
    pass


class DomainMismatch(CardSortError):
    pass


class EmptyInput(CardSortError):
    pass


class TooLarge(CardSortError):
    pass


class DegenerateTable(CardSortError):
    pass


class EmptyGroup(CardSortError):
    pass


class ConstantInput(CardSortError):
    pass


class DimensionMismatch(CardSortError):
    pass


class TooFewPairs(CardSortError):
    pass


class MissingCovariate(CardSortError):
    pass


class SubgroupTooLarge(CardSortError):
    pass


class NTooLarge(CardSortError):
    pass


class TooFewPoints(CardSortError):
    pass


class InvalidRatio(CardSortError):
    pass


class NoTokens(CardSortError):
    pass


class UnmappedCategory(CardSortError):
    pass


class InvalidConfig(CardSortError):
    pass


class FitDivergedWarning(UserWarning):
    """A growth family failed to converge and was left out of the results."""


class DegenerateSplitWarning(UserWarning):
    """Tercile boundaries fell inside a run of tied covariate values."""
