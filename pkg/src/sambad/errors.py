"""Exception hierarchy shared across the package."""


class SambadError(Exception):
    """Base class for all package errors."""


# --- data / corpus ---

class ParseError(SambadError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(SambadError):
    pass


class EmptyDataset(SambadError):
    pass


class TooFewPairs(SambadError):
    pass


class EmptyCorpus(SambadError):
    pass


class UnknownId(SambadError):
    pass


# --- numerics ---

class ShapeMismatch(SambadError):
    pass


class NotScalar(SambadError):
    pass


class OddDModel(SambadError):
    pass


class FullyMaskedRow(SambadError):
    pass


class TargetOutOfRange(SambadError):
    pass


class AllIgnored(SambadError):
    pass


# --- training / inference ---

class DivergedLoss(SambadError):
    pass


class UnseenCategoryInEval(SambadError):
    pass


class EmptyAfterPreprocessing(SambadError):
    pass


class EmptyEvalSet(SambadError):
    pass


# --- metrics ---

class LengthMismatch(SambadError):
    pass


class EmptyCandidate(SambadError):
    pass


# --- dialogue ---

class BackendFailure(SambadError):
    pass
