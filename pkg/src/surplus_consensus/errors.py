"""Exception types shared across the package."""


class ConsensusError(Exception):
    """Base class for all package errors."""


class GraphFormatError(ConsensusError):
    """Malformed graph file (bad header, field, or index)."""


class InvalidEdge(ConsensusError):
    """Edge endpoint out of range."""


class SelfLoopRejected(ConsensusError):
    """Self-loops are excluded by the graph model."""


class InvalidParameter(ConsensusError):
    """Parameter outside its admissible domain (e.g. negative epsilon)."""


class PreconditionViolated(ConsensusError):
    """Operation called on an input that fails its stated precondition."""


class NumericalFailure(ConsensusError):
    """Iteration or eigensolver did not converge to the required residual."""


class NoAdmissibleEpsilon(ConsensusError):
    """No grid point yields a stable augmented system."""


class InvalidConfig(ConsensusError):
    """Simulation configuration violates its invariants."""
