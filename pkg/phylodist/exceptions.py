"""
Exceptions raised by the phylodist engines.

Everything derives from PhyloDistError. TreeInputError covers bad input
(malformed files, invalid trees, out-of-range arguments); EngineError covers
failures inside an algorithm run on valid input.
"""


class PhyloDistError(Exception):
    """Base class for every phylodist error"""


class TreeInputError(PhyloDistError):
    """The input is invalid"""


class EngineError(PhyloDistError):
    """An algorithm could not complete on valid input"""


class NewickSyntaxError(TreeInputError):
    """Malformed Newick text"""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at character {position})"
        super().__init__(message)


class LabelError(TreeInputError):
    """Leaf labels are not exactly 1..n"""


class ShapeError(TreeInputError):
    """The tree violates a structural rule (degree-2 vertex, negative weight, ...)"""


class UnknownLabel(TreeInputError):
    pass


class LeafEdgeError(TreeInputError):
    pass


class SizeError(TreeInputError):
    """An argument is outside the supported size range"""


class DomainError(TreeInputError):
    pass


class SizeMismatch(TreeInputError):
    pass


class LabelSetMismatch(TreeInputError):
    pass


class EmptySide(TreeInputError):
    pass


class ZeroLengthTree(TreeInputError):
    pass


class NotShared(TreeInputError):
    pass


class InvalidClassAssignment(TreeInputError):
    pass


class TopologyCountOverflow(TreeInputError):
    pass


class VectorFormatError(TreeInputError):
    """Malformed split-vector text"""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IncompatibleSplits(TreeInputError):
    """Two splits of a set cannot coexist in one tree"""

    def __init__(self, first, second):
        self.pair = (first, second)
        super().__init__(f"incompatible splits {first} and {second}")


class DegenerateCover(EngineError):
    """A sub-1 cover left one block of the refinement empty"""

    def __init__(self, split, message=None):
        self.split = split
        super().__init__(message or f"degenerate cover: split {split} is compatible with the whole opposite set")


class InternalInvariantViolation(EngineError):
    pass


class IterationCap(EngineError):
    pass
