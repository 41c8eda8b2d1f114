"""Exception hierarchy shared by the construction modules."""


class GraphableError(Exception):
    """Base class for every error raised by this package."""


class BudgetExhausted(GraphableError):
    """A bounded search ran out of budget before finding what it looked for.

    For semi-decidable questions this is not a negative answer.
    """


class InternalContradiction(GraphableError):
    """A postcondition the construction guarantees did not hold."""


class ContractViolation(GraphableError):
    """A caller-supplied object broke its declared contract."""
