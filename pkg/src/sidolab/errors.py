"""Exception hierarchy shared by all modules."""


class SidolabError(Exception):
    pass


class GraphError(SidolabError, ValueError):
    """Invalid graph data: malformed text, self-loops, duplicate edges, bad sizes."""


class PreconditionError(SidolabError, ValueError):
    """An operation was called outside its documented domain."""


class BudgetExceeded(SidolabError):
    """An enumeration or search hit its configured limit."""


class DecompositionError(SidolabError, ValueError):
    """A tree decomposition is structurally malformed."""
