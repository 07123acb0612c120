"""Exception hierarchy shared by every repsel module."""


class RepselError(Exception):
    """Base class for all errors raised by repsel."""


class MatrixError(RepselError, ValueError):
    """A representation matrix failed validation."""


class NonSquare(MatrixError):
    def __init__(self, shape):
        self.shape = shape
        super().__init__(f"matrix is not square: row lengths {shape}")


class NegativeEntry(MatrixError):
    def __init__(self, i, j, value):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"negative entry {value} at ({i}, {j})")


class RowSumNotOne(MatrixError):
    def __init__(self, i, total):
        self.i, self.total = i, total
        super().__init__(f"row {i} sums to {total}, not 1")


class ZeroVector(RepselError, ValueError):
    """Normalization of a vector whose entries are all zero."""


class InvalidCandidates(RepselError, ValueError):
    pass


class InvalidBodySize(RepselError, ValueError):
    pass


class InvalidSpec(RepselError, ValueError):
    pass


class StateSpaceTooLarge(RepselError):
    """Exact enumeration would exceed the configured guard; use Monte Carlo."""

    def __init__(self, size, guard):
        self.size, self.guard = size, guard
        super().__init__(
            f"exact enumeration needs {size} profiles (guard {guard}); "
            "use Monte Carlo (--method mc) or raise the guard"
        )


class ZeroWeightVector(RepselError, ValueError):
    pass


class ZeroTotalWeight(RepselError, ValueError):
    pass


class EmptyDomain(RepselError, ValueError):
    pass


class DimensionMismatch(RepselError, ValueError):
    pass
