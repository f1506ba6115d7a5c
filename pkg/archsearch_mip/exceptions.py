"""Error hierarchy shared by every archsearch_mip module."""

from typing import Optional


class ArchSearchError(Exception):
    """Base class for all errors raised by archsearch_mip."""


class GraphValidationError(ArchSearchError):
    pass


class SpaceTooLargeError(ArchSearchError):
    def __init__(self, estimated_count: int, cap: int):
        self.estimated_count = estimated_count
        self.cap = cap
        super().__init__(f"Graph space has an estimated {estimated_count:,} members, above the enumeration cap of {cap:,}")


class ConflictingRestrictionError(ArchSearchError):
    pass


class LabelVocabularyError(ArchSearchError):
    pass


class KernelSizeMismatchError(ArchSearchError):
    pass


class NotPositiveDefiniteError(ArchSearchError):
    def __init__(self, jitter: float):
        self.jitter = jitter
        super().__init__(f"Gram matrix is not positive definite even with jitter {jitter:.3g}")


class GpNotFittedError(ArchSearchError):
    pass


class ModelBuildError(ArchSearchError):
    pass


class LpParseError(ArchSearchError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"{message}{where}")


class SolverError(ArchSearchError):
    def __init__(self, message: str, returncode: Optional[int] = None, output: str = ""):
        self.returncode = returncode
        self.output = output
        super().__init__(message)


class SolutionParseError(SolverError):
    pass


class InfeasibleClaimError(SolverError):
    pass


class SpaceExhaustedError(ArchSearchError):
    pass


class BenchmarkLookupError(ArchSearchError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Benchmark has no record for architecture {key}")


class BenchmarkSchemaError(ArchSearchError):
    def __init__(self, record_index: int, detail: str):
        self.record_index = record_index
        self.detail = detail
        super().__init__(f"Benchmark record {record_index} is invalid: {detail}")
