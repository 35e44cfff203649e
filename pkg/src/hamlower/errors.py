"""Exception types shared across the package."""


class HamlowerError(Exception):
    """Base class for all package errors."""


class DenseDimensionExceeded(HamlowerError):
    """Raised when a dense matrix would exceed the configured qubit cap."""


class DimensionMismatch(HamlowerError):
    """Raised when a state vector does not match the Hamiltonian dimension."""


class NonHermitianResult(HamlowerError):
    """Raised when a product that should be Hermitian carries an imaginary part."""


class UnknownVertex(HamlowerError):
    """Raised when a vertex is not present in an interaction graph."""


class MissingCoordinates(HamlowerError):
    """Raised when a geometric audit needs plane coordinates that are absent."""


class MalformedCircuit(HamlowerError):
    """Raised for malformed circuit descriptions."""


class HypothesisViolated(HamlowerError):
    """Raised when a gadget's perturbative precondition does not hold."""


class InvalidTerm(HamlowerError):
    """Raised when a gadget is applied to an unsuitable term."""


class NotPlanar(HamlowerError):
    """Raised when a drawing cannot be made crossing free."""


class ResourceCapExceeded(HamlowerError):
    """Raised when a computation would exceed a configured resource cap."""


class SingularResolvent(HamlowerError):
    """Raised when a resolvent is too ill-conditioned to invert reliably."""


class DivergentExpansion(HamlowerError):
    """Raised when a perturbation series is evaluated outside its convergence region."""


class NoConvergence(HamlowerError):
    """Raised when an iterative eigensolver misses its residual target."""


class DegeneracyMismatch(HamlowerError):
    """Raised when a requested low-energy space is not separated by a gap."""


class InvalidParameter(HamlowerError):
    """Raised for out-of-range numeric parameters."""


class NotFactorable(HamlowerError):
    """Raised when a term cannot be split as a product across a bipartition."""


class OverlappingJobs(HamlowerError):
    """Raised when parallel gadget jobs act on the same term."""


class SharedSupport(HamlowerError):
    """Raised when operators that must act on distinct qubits overlap."""


class NotCrossing(HamlowerError):
    """Raised when two edges handed to the cross gadget do not cross."""


class MismatchedAxis(HamlowerError):
    """Raised when fork edges do not share the Pauli axis at the common vertex."""


class PlanInfeasible(HamlowerError):
    """Raised when a reduction plan cannot be completed."""


class AuditFailed(HamlowerError):
    """Raised when an input drawing fails the spatial-sparsity or locality audit."""


class RoutingFailed(HamlowerError):
    """Raised when lattice routing fails after the maximum number of refinements."""


class OutOfRange(HamlowerError):
    """Raised when a path parameter lies outside ``[0, 1]``."""
