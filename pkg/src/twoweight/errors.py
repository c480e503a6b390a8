"""Exception types raised by the evaluators."""


class TwoWeightError(Exception):
    """Base class for evaluator errors surfaced by the command line."""


class ZeroMassCube(TwoWeightError):
    def __init__(self, cube):
        super().__init__(f"cube {cube} has zero mass")
        self.cube = cube


class EmptySet(TwoWeightError):
    pass


class MassUnavailable(TwoWeightError):
    def __init__(self, requested, available):
        super().__init__(f"requested mass {requested} exceeds available mass {available}")
        self.requested = requested
        self.available = available


class Infeasible(TwoWeightError):
    """Raised when a cube cannot receive its prescribed share of mass."""

    def __init__(self, cube, needed, remaining):
        super().__init__(f"Infeasible({cube}): needs {needed}, only {remaining} left")
        self.cube = cube
        self.needed = needed
        self.remaining = remaining


class TooLarge(TwoWeightError):
    pass


class NotCovered(TwoWeightError):
    def __init__(self, cube):
        super().__init__(f"no family cube contains {cube}")
        self.cube = cube


class DegenerateTerm(TwoWeightError):
    def __init__(self, cube):
        super().__init__(f"term for {cube} has zero denominator and nonzero numerator")
        self.cube = cube
        self.value = float("inf")


class ZeroDenominator(TwoWeightError):
    pass


class OverlappingAllocation(TwoWeightError):
    def __init__(self, leaf, total):
        super().__init__(f"leaf {leaf} is allocated {total} > 1")
        self.leaf = leaf
        self.total = total


class ZeroMeasure(TwoWeightError):
    pass


class ZeroFunction(TwoWeightError):
    pass
