"""Exception and warning taxonomy shared across the package.

DomainError subclasses map to CLI exit code 1 (math-domain failures,
poles, infeasible configurations); SchemaError maps to exit code 2
(malformed configs).  Warnings never abort a computation.
"""


class DomainError(ValueError):
    """Base class for mathematical domain errors."""


class SchemaError(ValueError):
    """A configuration file or record violates the published schema."""


# -- boundary-condition algebra ------------------------------------------

class SplitHasNoLambda(DomainError):
    """Split conditions decouple the line; no transmission matrix exists."""


class GammaPole(DomainError):
    """theta = (2+gamma)/(2-gamma) degenerates at |gamma| = 2."""


class SingularD(DomainError):
    """B-to-Lambda denominator D vanishes (decoupling limit)."""


class PlaneNotGraph(DomainError):
    """A boundary plane admits no unitary parametrization numerically."""


class DegenerateComposition(DomainError):
    """gamma-composition denominator 1 + g1*g2/4 vanishes."""


class CharacteristicPole(DomainError):
    """Additive characteristic undefined at |gamma| = 2."""


# -- transfer matrices / approximation families --------------------------

class ComplexCoefficient(DomainError):
    """Three-atom family coefficients are real only for |gamma| > 2."""


class AmbiguousClassification(DomainError):
    """Neither the limit nor the decoupling criterion stabilizes."""


# -- line spectra ----------------------------------------------------------

class NotAnEigenvalue(DomainError):
    """Eigenfunction extraction requested off a secular root."""


class SplitNotSupported(DomainError):
    """Split conditions are out of scope for full-line systems."""


class NonRealSystem(Warning):
    """Condition matrices are complex; secular value falls back to |det|^2."""


class GridTooCoarse(Warning):
    """A |secular| dip could not be resolved into bracketed roots."""


# -- variational certificates ---------------------------------------------

class InfeasibleEps(DomainError):
    """No (eps, r) solves the half-intensity calibration under eps0."""


class SupportOverlap(DomainError):
    """Chosen test-function supports collide."""


class NeighborhoodOverlap(DomainError):
    """delta-neighborhoods of distinct subsets intersect."""


class SubsetNotNegative(DomainError):
    """A subset carries non-negative intensity mass."""


# -- measures / kernels -----------------------------------------------------

class DepthTooLarge(DomainError):
    """Cantor construction depth capped at 20."""


class JumpOffSupport(DomainError):
    """Function jumps at a point carrying no measure."""


class EvaluationOnAtom(DomainError):
    """Kernel or derivative-family evaluation requested on an atom."""


class UnconvergedEigenvalue(DomainError):
    """Grid refinement disagrees beyond 10x the estimated rate."""


# -- deficiency elements ----------------------------------------------------

class BranchCut(DomainError):
    """Spectral parameter lies on [0, +inf)."""


class IllConditioned(Warning):
    """Gram singular values cluster at the rank tolerance."""
