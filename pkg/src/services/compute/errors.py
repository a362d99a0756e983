"""Exception hierarchy for the flip-sort toolkit.

Compute functions raise these; the tool layer turns them into
``{"status": "error", ...}`` payloads. ``FlipSortError`` marks bad input
(CLI exit code 2); ``SingularSystem`` is an internal arithmetic fault
(CLI exit code 1).
"""


class FlipSortError(ValueError):
    """Base class for every domain error raised by the compute layer."""


class InvalidPermutation(FlipSortError):
    pass


class InnerRunOfSizeOne(FlipSortError):
    pass


class NotPopStacked(FlipSortError):
    pass


class NotLayeredPopstacked(FlipSortError):
    pass


class SizeMismatch(FlipSortError):
    pass


class NotARunWord(FlipSortError):
    pass


class SingularSystem(ArithmeticError):
    """State equations without a unique solution; never expected for a finite automaton."""


class PoleAtOrigin(FlipSortError):
    pass


class NonSplittingDenominator(FlipSortError):
    pass


class NonUnitConstantTerm(FlipSortError):
    pass


class CompositionConstantTerm(FlipSortError):
    pass


class TruncationTooLarge(FlipSortError):
    pass


class RootPermutation(FlipSortError):
    pass


class Not2PSS(FlipSortError):
    pass


class InvalidColouring(FlipSortError):
    pass


class ThresholdOutOfRange(FlipSortError):
    pass


class IncomparableShape(FlipSortError):
    pass


class TooLarge(FlipSortError):
    pass


class OutOfAllowedRegion(FlipSortError):
    pass


class NotInImage(FlipSortError):
    pass


class FormatError(FlipSortError):
    pass
