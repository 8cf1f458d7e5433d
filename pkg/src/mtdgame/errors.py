"""Exception hierarchy shared by all modules."""


class MTDError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfig(MTDError, ValueError):
    """A game configuration violates one or more invariants.

    ``problems`` lists every violation found as ``(code, message)`` pairs;
    the concrete subclass raised corresponds to the first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{code}: {msg}" for code, msg in self.problems))

    @property
    def codes(self):
        return [code for code, _ in self.problems]


class InvalidInterval(InvalidConfig):
    pass


class NegativeCost(InvalidConfig):
    pass


class NonMonotoneReward(InvalidConfig):
    pass


class BadDistribution(InvalidConfig):
    pass


class NegativeInput(MTDError, ValueError):
    pass


class OutOfDomain(MTDError, ValueError):
    pass


class WrongInstantiation(MTDError):
    """A closed form was requested for a reward/collocation pair it does not cover."""


class QuadratureNotConverged(MTDError, ArithmeticError):
    pass


class NoEquilibriumFound(MTDError):
    pass


class MaxItersExceeded(MTDError):
    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


class RequiresZeroLambdaMin(MTDError, ValueError):
    pass
