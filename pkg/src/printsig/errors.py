"""Exception hierarchy.

Every error raised by the pipeline derives from :class:`PrintSigError`.
The two intermediate classes decide the CLI exit code: bad or
inconsistent input data is a :class:`DataError` (exit 2), a computation
that cannot proceed on well-formed input is a :class:`NumericalError`
(exit 3).
"""


class PrintSigError(Exception):
    """Base class for all pipeline errors."""


class DataError(PrintSigError):
    pass


class NumericalError(PrintSigError):
    pass


# raster-preprocess
class DegenerateHistogram(NumericalError):
    pass


class InsufficientPoints(NumericalError):
    pass


class VerticalDegenerate(NumericalError):
    pass


class ExcessiveSkew(DataError):
    pass


class EmptyInput(DataError):
    pass


class CornerOutOfBounds(DataError):
    pass


# charbox-ingest
class MalformedLine(DataError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MissingPageHeight(DataError):
    pass


class NoBaselineChars(DataError):
    pass


# align-match
class NoMatches(DataError):
    pass


# distortion-features
class ZeroScanDimension(DataError):
    pass


class DegenerateGeometry(NumericalError):
    pass


# classifier
class SingleClass(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# ptmp-baseline
class DegenerateConfiguration(NumericalError):
    pass


# synth-sim
class PageOverflow(DataError):
    pass
