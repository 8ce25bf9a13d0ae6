"""Dense complex LTI fundamentals.

State-space containers, transfer-function evaluation, Lyapunov solves,
Gramians, Hankel singular values, balanced realizations, and grid-based
norm estimates. Everything here is a pure function of its inputs; matrices
are dense complex ndarrays and sizes are desk scale (n up to ~1000).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EvaluationFailure,
    IllConditionedEigvecs,
    NearSingularGramian,
    SingularResolvent,
    UnstableA,
)

__all__ = [
    "StateSpaceSystem",
    "BalancedSystem",
    "SampleSet",
    "eval_transfer",
    "transfer_callable",
    "solve_lyapunov",
    "gramians",
    "hankel_singular_values",
    "balanced_realization",
    "hinf_norm_grid",
    "hankel_error",
    "axis_tolerance",
    "spectral_norm",
]

_EPS = np.finfo(float).eps


def _as_complex_matrix(x, rows=None, cols=None, name="matrix"):
    a = np.atleast_2d(np.asarray(x, dtype=complex))
    if rows is not None and a.shape != (rows, cols):
        raise ValueError(f"{name} must have shape {(rows, cols)}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def spectral_norm(a):
    """Matrix 2-norm; 0 for empty matrices."""
    a = np.atleast_2d(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def axis_tolerance(A):
    """Scale-relative distance below which an eigenvalue counts as lying on
    the imaginary axis: 1e-10 * max(1, ||A||_2)."""
    return 1e-10 * max(1.0, spectral_norm(A))


@dataclass
class StateSpaceSystem:
    """Continuous-time system x' = Ax + Bu, y = Cx + Du with complex
    matrices A (n x n), B (n x m), C (p x n), D (p x m).

    Zero-dimensional state (n = 0) is supported; the transfer function is
    then the constant D.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    stable: bool | None = field(default=None, compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if A.size == 0:
            A = A.reshape(0, 0)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=complex)
        if B.ndim != 2:
            B = B.reshape(n, -1)
        C = np.asarray(self.C, dtype=complex)
        if C.ndim != 2:
            C = C.reshape(-1, n)
        D = np.asarray(self.D, dtype=complex)
        if D.ndim != 2:
            D = D.reshape(C.shape[0], B.shape[1])
        if B.shape[0] != n or C.shape[1] != n or D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(
                f"incompatible dimensions: A {A.shape}, B {B.shape}, C {C.shape}, D {D.shape}"
            )
        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if mat.size and not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} contains non-finite entries")
        self.A, self.B, self.C, self.D = A, B, C, D

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def is_stable(self) -> bool:
        """Spectral check: every eigenvalue has Re < -axis_tolerance(A).
        The result is cached on the `stable` flag."""
        if self.stable is None:
            if self.n == 0:
                self.stable = True
            else:
                lam = np.linalg.eigvals(self.A)
                self.stable = bool(np.all(lam.real < -axis_tolerance(self.A)))
        return self.stable

    def dual(self) -> "StateSpaceSystem":
        """The dual system (A*, C*, B*, D*); its transfer function is G(z)*."""
        return StateSpaceSystem(
            self.A.conj().T, self.C.conj().T, self.B.conj().T, self.D.conj().T
        )


@dataclass
class BalancedSystem:
    """A state-space system together with its diagonal Gramian P = Q =
    diag(sigma). The ordering of `sigma` is whatever the constructing call
    imposed (descending, possibly with a cluster moved to the tail)."""

    sys: StateSpaceSystem
    sigma: np.ndarray
    n_truncated: int = 0

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float).ravel()
        if self.sigma.size != self.sys.n:
            raise ValueError("sigma length must equal the state dimension")
        if self.sigma.size and self.sigma.min() < 0:
            raise ValueError("sigma entries must be nonnegative")


@dataclass
class SampleSet:
    """Samples (z_i, G(z_i)) of a p x m transfer function on the imaginary
    axis. `points` has shape (N,), `values` shape (N, p, m)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1, 1)
        if vals.ndim != 3 or vals.shape[0] != self.points.size:
            raise ValueError("values must have shape (N, p, m)")
        self.values = vals
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values contain non-finite entries")
        scale = np.abs(self.points).max(initial=0.0)
        atol_axis = 1e-12 * max(scale, 1.0)
        if np.any(np.abs(self.points.real) > atol_axis):
            raise ValueError("sample points must lie on the imaginary axis")
        if len(np.unique(self.points)) != self.points.size:
            raise ValueError("sample points must be pairwise distinct")

    @property
    def N(self) -> int:
        return self.points.size

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]


def eval_transfer(sys: StateSpaceSystem, z: complex) -> np.ndarray:
    """Evaluate G(z) = D + C (zI - A)^{-1} B via one linear solve.

    Raises SingularResolvent when z is within tolerance of an eigenvalue
    of A (smallest singular value of zI - A below n*eps*max(|z|, ||A||)).
    """
    if sys.n == 0:
        return sys.D.copy()
    M = z * np.eye(sys.n) - sys.A
    sv = np.linalg.svd(M, compute_uv=False)
    smin = sv[-1]
    tol = sys.n * _EPS * max(sv[0], 1e-300)
    if smin <= tol:
        raise SingularResolvent(z, smin=float(smin))
    return sys.D + sys.C @ np.linalg.solve(M, sys.B)


def transfer_callable(sys: StateSpaceSystem):
    """Return z -> G(z) for use with grid scans."""
    return lambda z: eval_transfer(sys, z)


def solve_lyapunov(A: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Solve A P + P A* + W = 0 for Hermitian W and stable A.

    Uses the eigendecomposition of A: transform W, divide entrywise by
    -(lam_i + conj(lam_j)), transform back, then symmetrize. Raises
    UnstableA if any eigenvalue has Re >= -axis_tolerance(A); warns
    (IllConditionedEigvecs) when the eigenvector matrix has condition
    number above 1e8.
    """
    A = _as_complex_matrix(A, name="A")
    n = A.shape[0]
    W = _as_complex_matrix(W, n, n, name="W")
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    lam, X = np.linalg.eig(A)
    atol = axis_tolerance(A)
    if np.any(lam.real >= -atol):
        raise UnstableA(f"eigenvalue with Re = {lam.real.max():.3e} >= -{atol:.3e}")
    kappa = np.linalg.cond(X)
    if kappa > 1e8:
        warnings.warn(
            f"eigenvector matrix condition number {kappa:.2e} > 1e8",
            IllConditionedEigvecs,
            stacklevel=2,
        )
    Xi = np.linalg.inv(X)
    Wt = Xi @ W @ Xi.conj().T
    denom = lam[:, None] + lam.conj()[None, :]
    Pt = -Wt / denom
    P = X @ Pt @ X.conj().T
    return 0.5 * (P + P.conj().T)


def gramians(sys: StateSpaceSystem):
    """Controllability and observability Gramians (P, Q) of a stable system:
    A P + P A* + B B* = 0 and A* Q + Q A + C* C = 0."""
    P = solve_lyapunov(sys.A, sys.B @ sys.B.conj().T)
    Q = solve_lyapunov(sys.A.conj().T, sys.C.conj().T @ sys.C)
    return P, Q


def _psd_factor(P):
    # Factor a Hermitian PSD matrix as L L* via its eigendecomposition.
    # Eigenvalues below n*eps*max(e) are zeroed: they are rounding
    # artifacts whose sqrt would otherwise inject sqrt(eps)-level noise
    # into downstream singular values.
    e, V = np.linalg.eigh(0.5 * (P + P.conj().T))
    if e.size:
        e[e < P.shape[0] * _EPS * max(e.max(), 0.0)] = 0.0
    return V * np.sqrt(e)[None, :]


def hankel_singular_values(sys: StateSpaceSystem) -> np.ndarray:
    """Hankel singular values sigma_j = sqrt(lambda_j(PQ)), descending.

    Computed as the singular values of L_Q* L_P with P = L_P L_P* and
    Q = L_Q L_Q*, which keeps the result real and nonnegative.
    """
    P, Q = gramians(sys)
    LP = _psd_factor(P)
    LQ = _psd_factor(Q)
    sv = np.linalg.svd(LQ.conj().T @ LP, compute_uv=False)
    return np.sort(sv)[::-1]


def balanced_realization(
    sys: StateSpaceSystem, cluster: tuple[int, int] | None = None
) -> BalancedSystem:
    """Balance a stable system by the square-root method.

    Returns a BalancedSystem whose Gramians are P = Q = diag(sigma) with
    sigma descending, except that when `cluster = (j1, j2)` (0-based,
    inclusive, indices into the descending order) the designated entries
    are moved to the tail:

        sigma_1, ..., sigma_{j1-1}, sigma_{j2+1}, ..., sigma_K,
        sigma_{j1}, ..., sigma_{j2}.

    States with sigma <= n*eps*sigma_max are truncated (count recorded on
    the result); NearSingularGramian is raised when more than half the
    states would be dropped.
    """
    P, Q = gramians(sys)
    LP = _psd_factor(P)
    LQ = _psd_factor(Q)
    U, s, Vh = np.linalg.svd(LQ.conj().T @ LP)
    n = sys.n
    keep = s > n * _EPS * (s[0] if s.size else 0.0)
    K = int(keep.sum())
    if K < n - n // 2:
        raise NearSingularGramian(
            f"balancing would truncate {n - K} of {n} states"
        )
    U, s, Vh = U[:, :K], s[:K], Vh[:K, :]
    s_isqrt = 1.0 / np.sqrt(s)
    T = s_isqrt[:, None] * (U.conj().T @ LQ.conj().T)
    Ti = (LP @ Vh.conj().T) * s_isqrt[None, :]
    A = T @ sys.A @ Ti
    B = T @ sys.B
    C = sys.C @ Ti
    sigma = s.copy()
    if cluster is not None:
        j1, j2 = cluster
        if not (0 <= j1 <= j2 < K):
            raise ValueError(f"cluster {cluster} out of range for K={K}")
        perm = np.r_[np.arange(0, j1), np.arange(j2 + 1, K), np.arange(j1, j2 + 1)]
        A = A[np.ix_(perm, perm)]
        B = B[perm, :]
        C = C[:, perm]
        sigma = sigma[perm]
    bal = StateSpaceSystem(A, B, C, sys.D.copy())
    bal.stable = sys.stable
    return BalancedSystem(sys=bal, sigma=sigma, n_truncated=n - K)


def _chebyshev_interior(lo, hi, count):
    # Chebyshev points of the open interval (lo, hi).
    k = np.arange(1, count + 1)
    t = np.cos((2 * k - 1) * np.pi / (2 * count))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t


def hinf_norm_grid(f, grid, refine_rounds: int = 3, refine_points: int = 8):
    """Grid surrogate of ess sup_{Re z = 0} ||f(z)||_2.

    Scans the grid sequentially (fixed reduction order), then refines by
    inserting Chebyshev-spaced points between the two neighbors of the
    current argmax for `refine_rounds` rounds. Returns (value, argmax
    point). Purely a lower bound of the essential supremum; no claim of
    capturing it is made.
    """
    pts = np.asarray(grid, dtype=complex).ravel()
    if pts.size == 0:
        raise ValueError("grid must be nonempty")
    order = np.argsort(pts.imag, kind="stable")
    omega = list(pts.imag[order])

    def _norm_at(w):
        z = 1j * w
        try:
            return spectral_norm(np.atleast_2d(np.asarray(f(z))))
        except Exception as exc:  # attach the grid point per contract
            raise EvaluationFailure(z, exc) from exc

    vals = [_norm_at(w) for w in omega]
    best = int(np.argmax(vals))
    for _ in range(refine_rounds):
        lo = omega[best - 1] if best > 0 else None
        hi = omega[best + 1] if best < len(omega) - 1 else None
        new_w = []
        if lo is not None:
            new_w.extend(_chebyshev_interior(lo, omega[best], refine_points // 2))
        if hi is not None:
            new_w.extend(_chebyshev_interior(omega[best], hi, refine_points // 2))
        if not new_w:
            break
        for w in sorted(new_w):
            i = int(np.searchsorted(omega, w))
            omega.insert(i, w)
            vals.insert(i, _norm_at(w))
        best = int(np.argmax(vals))
    return float(vals[best]), 1j * omega[best]


def _block_difference(sysA: StateSpaceSystem, sysB: StateSpaceSystem) -> StateSpaceSystem:
    na, nb = sysA.n, sysB.n
    A = np.zeros((na + nb, na + nb), dtype=complex)
    A[:na, :na] = sysA.A
    A[na:, na:] = sysB.A
    B = np.vstack([sysA.B, sysB.B])
    C = np.hstack([sysA.C, -sysB.C])
    D = sysA.D - sysB.D
    return StateSpaceSystem(A, B, C, D)


def hankel_error(sysA: StateSpaceSystem, sysB: StateSpaceSystem) -> float:
    """Hankel norm of the difference of two stable systems: the largest
    Hankel singular value of the block-diagonal difference realization."""
    for s in (sysA, sysB):
        if not s.is_stable():
            raise UnstableA("hankel_error requires stable systems")
    diff = _block_difference(sysA, sysB)
    if diff.n == 0:
        return 0.0
    sv = hankel_singular_values(diff)
    return float(sv[0]) if sv.size else 0.0
