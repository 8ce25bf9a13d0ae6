"""Exception and warning types shared across the package."""


class ReductionError(Exception):
    """Base class for all numerical failures raised by this package."""


# --- linear algebra / LTI fundamentals ---

class SingularResolvent(ReductionError):
    """zI - A is singular to working precision at the requested point."""

    def __init__(self, z, smin=None):
        self.z = z
        self.smin = smin
        super().__init__(f"resolvent singular at z={z!r} (smallest sv {smin!r})")


class UnstableA(ReductionError):
    """A has an eigenvalue with nonnegative real part (within tolerance)."""


class NearSingularGramian(ReductionError):
    """Balancing would truncate more than half of the state space."""


class EvaluationFailure(ReductionError):
    """A grid evaluation failed; carries the offending grid point."""

    def __init__(self, z, cause):
        self.z = z
        self.cause = cause
        super().__init__(f"evaluation failed at z={z!r}: {cause}")


# --- rational fitting ---

class SingularLeftFactor(ReductionError):
    """The barycentric left factor I + sum W_j/(z-z_j) is singular at z
    (signals a spurious pole of the fit)."""


class DegenerateNormalEquations(ReductionError):
    """lambda = 0 and the Loewner matrix is rank deficient to working
    precision; the unregularized weight solve is not well posed."""


class VerificationFailed(ReductionError):
    """State-space realization disagrees with the barycentric form on the
    verification grid; carries the worst point and mismatch."""

    def __init__(self, z, mismatch, tol):
        self.z = z
        self.mismatch = mismatch
        self.tol = tol
        super().__init__(
            f"realization mismatch {mismatch:.3e} > {tol:.3e} at z={z!r}; "
            "increasing the regularization parameter usually helps"
        )


# --- stabilization ---

class ImaginaryAxisEigenvalue(ReductionError):
    """An eigenvalue lies on the imaginary axis within tolerance; the
    stable/antistable split is undefined there."""

    def __init__(self, lam):
        self.lam = lam
        super().__init__(f"eigenvalue {lam!r} within tolerance of the imaginary axis")


class DefectiveA(ReductionError):
    """Eigenvector matrix numerically rank deficient; A is treated as
    defective and the modal split refuses."""


# --- Hankel norm approximation ---

class ClusterTouchesTop(ReductionError):
    """The singular-value cluster around the target includes the largest
    Hankel singular value, so no state can be kept."""


class DeltaTooSmall(ReductionError):
    """Cluster gap delta does not exceed the cluster tolerance epsilon."""


class OrderingMismatch(ReductionError):
    """Balanced system is not ordered with the selected cluster at the tail."""


class AllSingularValuesBelowGamma(ReductionError):
    """Largest singular value of the cluster output block is at or below the
    threshold gamma; no usable rank for the U construction."""


class SingularX(ReductionError):
    """X(z) singular at a grid point; carries the point."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"X(z) singular at z={z!r}")


# --- sample generators ---

class PoleAtMinusOne(ReductionError):
    """The truncated-Hilbert series is undefined at z = -1."""


class CholeskyFailure(ReductionError):
    """Prescribed Gramian construction produced an indefinite right-hand
    side beyond tolerance; reseeding is advised."""


# --- warnings ---

class IllConditionedEigvecs(UserWarning):
    """Eigenvector matrix condition number exceeds 1e8; solve results may
    lose accuracy."""


class RankMismatch(UserWarning):
    """Final reduced system rank differs from the requested target."""


class NoProgress(UserWarning):
    """Greedy fit stalled; best iterate so far was returned."""
