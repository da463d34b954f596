"""Exception types raised by treegkr."""


class GkrError(Exception):
    """Base class for all treegkr errors."""


class InvalidTree(GkrError, ValueError):
    """Raised when an edge list does not describe a tree."""


class CycleDetected(InvalidTree):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge} closes a cycle")


class Disconnected(InvalidTree):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node} is not connected to node 0")


class NegativeWeight(InvalidTree):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge} has a negative or non-finite weight")


class BadNodeId(InvalidTree, IndexError):
    def __init__(self, node, n):
        self.node = node
        super().__init__(f"node id {node!r} is out of range for n={n}")


class DuplicateEdge(InvalidTree):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge} duplicates an earlier edge")


class DimensionMismatch(GkrError, ValueError):
    pass


class UnbalancedMeasures(GkrError, ValueError):
    pass


class Infeasible(GkrError):
    """Raised by operations that need a finite distance."""


class BadKappa(GkrError, ValueError):
    pass


class EmptyAnchorSet(GkrError, ValueError):
    pass


class EmptyClouds(GkrError, ValueError):
    pass


class TooFewLeaves(GkrError, ValueError):
    pass


class EmptyTrainingSet(GkrError, ValueError):
    pass


class ZeroEuclideanDistance(GkrError, ValueError):
    pass


class TooLarge(GkrError, ValueError):
    pass


class ParseError(GkrError, ValueError):
    """Malformed input file; ``line`` is 1-based (0 when not line-specific)."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line else self.path
        super().__init__(f"{where}: {message}")
