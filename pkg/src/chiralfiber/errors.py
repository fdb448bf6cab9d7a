"""Exception types shared by the solver modules."""


class ChiralFiberError(Exception):
    """Base class for all package-specific errors."""


class NoGuidedMode(ChiralFiberError):
    """The HE11 characteristic equation has no root in (k, k*n_f)."""


class NonConvergence(ChiralFiberError):
    """An iterative solver failed to reach its tolerance."""


class InvalidPosition(ChiralFiberError):
    """Atom placed inside the fiber."""


class CoincidentAtoms(ChiralFiberError):
    """Two occupied sites share the same position."""


class HermiticityViolation(ChiralFiberError):
    """A coupling matrix failed its Hermiticity check."""


class PSDViolation(ChiralFiberError):
    """A dissipation matrix has a negative eigenvalue beyond tolerance."""


class DimensionMismatch(ChiralFiberError):
    """Vector/matrix dimensions do not agree."""


class DimensionCap(ChiralFiberError):
    """Requested register size exceeds the hard cap."""


class SingularSystem(ChiralFiberError):
    """The weak-drive linear system is numerically singular."""


class DegenerateSteadyState(ChiralFiberError):
    """The Liouvillian null space has dimension larger than one."""


class NonConvexInput(ChiralFiberError):
    """A curve fed to the Legendre transform violates convexity."""


class InsufficientAngles(ChiralFiberError):
    """Too few quadrature angles for a Radon inversion."""


class ConfigError(ChiralFiberError):
    """Invalid or incomplete scenario configuration."""


class SchemaMismatch(ChiralFiberError):
    """A CSV input does not match the expected column schema."""


class BoundaryMassWarning(UserWarning):
    """Non-negligible Wigner mass at the grid boundary."""
