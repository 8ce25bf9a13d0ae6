"""Cluster-tolerant Hankel norm approximation.

Stage II of the pipeline: pick the cluster of Hankel singular values
around the target level (tolerance epsilon), partition the reordered
balanced realization, build the unitary-like matrix U (SVD threshold
gamma, or the classical pseudoinverse form), and assemble the all-pass
dilation

    A_hat = Phi^{-1} (s^2 A11* + S1 A11 S1 - s C1* U B1*),
    B_hat = Phi^{-1} (S1 B1 + s C1* U),
    C_hat = C1 S1 + s U B1*,
    D_hat = D - s U,        Phi = S1^2 - s^2 I,

where s is the target singular value and S1 the retained diagonal. The
cluster tolerance keeps every diagonal entry of Phi at magnitude above
s * epsilon, which bounds the entry growth of A_hat and B_hat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BalancedSystem, StateSpaceSystem
from .errors import (
    AllSingularValuesBelowGamma,
    ClusterTouchesTop,
    DeltaTooSmall,
    OrderingMismatch,
    UnstableA,
)

__all__ = [
    "ClusterSelection",
    "HnaPartition",
    "AllPassDilation",
    "select_cluster",
    "partition",
    "glover_U",
    "build_U",
    "hna_reduce",
]


@dataclass
class ClusterSelection:
    """Contiguous index range [j1, j2] (0-based, into the descending
    singular values) containing every sigma_j with
    |sigma_j - sigma_{k+1}| <= epsilon, together with the gap delta to the
    nearest excluded value (+inf when the cluster reaches an end)."""

    j1: int
    j2: int
    sigma_hat: float
    epsilon: float
    delta: float

    @property
    def r(self) -> int:
        return self.j2 - self.j1 + 1


@dataclass
class HnaPartition:
    """Blocks of the reordered balanced realization: the cluster occupies
    the trailing r states."""

    A11: np.ndarray
    A12: np.ndarray
    A21: np.ndarray
    A22: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D: np.ndarray
    Sigma1: np.ndarray  # (K-r,) diagonal entries
    Sigma2: np.ndarray  # (r,) diagonal entries


@dataclass
class AllPassDilation:
    """Output of the modified HNA step, plus the quantities the
    diagnostics module consumes."""

    sys: StateSpaceSystem
    U: np.ndarray
    q: int
    qe: float  # ||B2 + C2* U||_2
    qu: float  # ||I - U U*||_2
    selection: ClusterSelection
    part: HnaPartition
    u_mode: str
    gamma: float
    dualized: bool = False
    inner: "AllPassDilation | None" = None

    def diagnostic_run(self) -> "AllPassDilation":
        """The self-consistent run for identity checks: for dualized
        reductions the analysis lives on the dual problem."""
        return self.inner if self.inner is not None else self


def select_cluster(sigma, k: int, epsilon: float) -> ClusterSelection:
    """Find the maximal contiguous range around index k (0-based, sigma
    descending) of values within epsilon of sigma[k].

    Raises ClusterTouchesTop when k >= 1 and the cluster includes
    sigma[0] (nothing would be left to keep), and DeltaTooSmall when the
    gap to the nearest excluded value does not exceed epsilon.
    """
    sigma = np.asarray(sigma, dtype=float).ravel()
    K = sigma.size
    if not 0 <= k <= K - 1:
        raise ValueError(f"k must be in [0, {K - 1}], got {k}")
    if np.any(np.diff(sigma) > 0):
        raise ValueError("sigma must be sorted descending")
    s_hat = float(sigma[k])
    inside = np.abs(sigma - s_hat) <= epsilon
    j1 = k
    while j1 > 0 and inside[j1 - 1]:
        j1 -= 1
    j2 = k
    while j2 < K - 1 and inside[j2 + 1]:
        j2 += 1
    if j1 == 0 and k > 0:
        raise ClusterTouchesTop(
            f"cluster around sigma[{k}] = {s_hat:.3e} includes sigma[0]"
        )
    left = sigma[j1 - 1] - s_hat if j1 >= 1 else np.inf
    right = s_hat - sigma[j2 + 1] if j2 <= K - 2 else np.inf
    delta = float(min(left, right))
    if delta <= epsilon:
        raise DeltaTooSmall(f"delta = {delta:.3e} <= epsilon = {epsilon:.3e}")
    return ClusterSelection(j1=j1, j2=j2, sigma_hat=s_hat, epsilon=epsilon, delta=delta)


def partition(bal: BalancedSystem, sel: ClusterSelection) -> HnaPartition:
    """Extract the blocks of a balanced system whose trailing r states are
    the selected cluster; raises OrderingMismatch otherwise."""
    K = bal.sys.n
    r = sel.r
    if K < r:
        raise OrderingMismatch(f"system has {K} states, cluster needs {r}")
    tail = bal.sigma[K - r :]
    tol = 1e-12 * max(1.0, sel.sigma_hat)
    if np.any(np.abs(tail - sel.sigma_hat) > sel.epsilon + tol):
        raise OrderingMismatch("trailing sigma entries are not the selected cluster")
    head = bal.sigma[: K - r]
    if np.any(np.abs(head - sel.sigma_hat) <= sel.epsilon - tol):
        raise OrderingMismatch("cluster entries remain outside the tail")
    A, B, C = bal.sys.A, bal.sys.B, bal.sys.C
    c = K - r
    return HnaPartition(
        A11=A[:c, :c],
        A12=A[:c, c:],
        A21=A[c:, :c],
        A22=A[c:, c:],
        B1=B[:c, :],
        B2=B[c:, :],
        C1=C[:, :c],
        C2=C[:, c:],
        D=bal.sys.D,
        Sigma1=head.copy(),
        Sigma2=tail.copy(),
    )


def glover_U(B2: np.ndarray, C2: np.ndarray) -> np.ndarray:
    """Classical choice U = -C2 (B2*)^+, pseudoinverse truncated at
    relative tolerance 1e-12."""
    B2 = np.atleast_2d(np.asarray(B2, dtype=complex))
    C2 = np.atleast_2d(np.asarray(C2, dtype=complex))
    return -C2 @ np.linalg.pinv(B2.conj().T, rcond=1e-12)


def _complement_columns(V1: np.ndarray, count: int) -> np.ndarray:
    # Orthonormal basis of the orthogonal complement of span(V1) in C^m,
    # ordered by the canonical coordinate carrying each basis vector's
    # largest weight (then by column norm of the projection) so the
    # completion is deterministic.
    m = V1.shape[0]
    if count == 0:
        return np.zeros((m, 0), dtype=complex)
    U, s, _ = np.linalg.svd(V1, full_matrices=True)
    rank = int(np.sum(s > max(V1.shape) * np.finfo(float).eps * (s[0] if s.size else 0)))
    comp = U[:, rank:]
    scores = [(int(np.argmax(np.abs(comp[:, j]))), j) for j in range(comp.shape[1])]
    order = [j for _, j in sorted(scores)]
    return comp[:, order[:count]]


def build_U(B2: np.ndarray, C2: np.ndarray, gamma: float):
    """Construct U from the SVD of C2* with singular values below gamma
    discarded.

    With C2* = U_C S_C V_C*, q counts the singular values exceeding gamma
    (at least one is required), the leading block of V_B solves the
    least-squares system U_C1 S_C1 X = -B2, the remaining p - q columns
    are a deterministic orthonormal completion orthogonal to its span, and
    U = V_C V_B*. Requires p <= m (callers dualize otherwise). Returns
    (U, q).
    """
    B2 = np.atleast_2d(np.asarray(B2, dtype=complex))
    C2 = np.atleast_2d(np.asarray(C2, dtype=complex))
    r, m = B2.shape
    p = C2.shape[0]
    if p > m:
        raise ValueError("build_U requires p <= m; dualize the system first")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    UC, s, VCh = np.linalg.svd(C2.conj().T, full_matrices=True)  # (r,r),(min),(p,p)
    if s.size == 0 or s[0] <= gamma:
        raise AllSingularValuesBelowGamma(
            f"largest singular value {s[0] if s.size else 0.0:.3e} <= gamma"
        )
    q = int(np.sum(s > gamma))
    VC = VCh.conj().T
    UC1 = UC[:, :q]
    VB1h = -(UC1.conj().T @ B2) / s[:q, None]  # (q, m) = (V_B1)*
    VB1 = VB1h.conj().T
    VB = np.hstack([VB1, _complement_columns(VB1, p - q)])
    return VC @ VB.conj().T, q


def _dilation_formulas(part: HnaPartition, sel: ClusterSelection, U: np.ndarray):
    s_hat = sel.sigma_hat
    S1 = part.Sigma1
    phi = S1**2 - s_hat**2
    c = S1.size
    if c == 0:
        m = part.B2.shape[1]
        p = part.C2.shape[0]
        A_hat = np.zeros((0, 0), dtype=complex)
        B_hat = np.zeros((0, m), dtype=complex)
        C_hat = np.zeros((p, 0), dtype=complex)
    else:
        A11, B1, C1 = part.A11, part.B1, part.C1
        core = (
            s_hat**2 * A11.conj().T
            + S1[:, None] * A11 * S1[None, :]
            - s_hat * C1.conj().T @ U @ B1.conj().T
        )
        A_hat = core / phi[:, None]
        B_hat = (S1[:, None] * B1 + s_hat * C1.conj().T @ U) / phi[:, None]
        C_hat = C1 * S1[None, :] + s_hat * U @ B1.conj().T
    D_hat = part.D - s_hat * U
    return StateSpaceSystem(A_hat, B_hat, C_hat, D_hat)


def hna_reduce(
    bal: BalancedSystem,
    k: int,
    epsilon: float,
    gamma: float,
    u_mode: str = "modified",
) -> AllPassDilation:
    """Run the (modified) HNA step on a balanced system whose trailing
    states are the singular-value cluster around sigma[k].

    u_mode selects the U construction: "modified" (SVD with threshold
    gamma) or "glover" (pseudoinverse form). Systems with p > m are
    handled through the dual. The returned dilation has state dimension
    K - r and carries Q_E, Q_U and the partition for diagnostics.
    """
    if u_mode not in ("modified", "glover"):
        raise ValueError(f"unknown u_mode {u_mode!r}")
    sys = bal.sys
    if sys.stable is False or (sys.stable is None and not sys.is_stable()):
        raise UnstableA("hna_reduce requires a stable balanced system")
    if sys.p > sys.m:
        dual = BalancedSystem(sys.dual(), bal.sigma.copy())
        dual.sys.stable = True
        res = hna_reduce(dual, k, epsilon, gamma, u_mode)
        return AllPassDilation(
            sys=res.sys.dual(),
            U=res.U.conj().T,
            q=res.q,
            qe=res.qe,
            qu=res.qu,
            selection=res.selection,
            part=res.part,
            u_mode=u_mode,
            gamma=gamma,
            dualized=True,
            inner=res,
        )

    sigma_desc = np.sort(bal.sigma)[::-1]
    sel = select_cluster(sigma_desc, k, epsilon)
    if bal.sys.n - sel.r < k:
        raise ValueError(
            f"retained dimension {bal.sys.n - sel.r} smaller than target rank {k}"
        )
    part = partition(bal, sel)
    if u_mode == "glover":
        U = glover_U(part.B2, part.C2)
        q = min(part.B2.shape[0], part.C2.shape[0])
    else:
        U, q = build_U(part.B2, part.C2, gamma)
    delta1 = part.B2 + part.C2.conj().T @ U
    delta2 = np.eye(U.shape[0]) - U @ U.conj().T
    qe = float(np.linalg.norm(delta1, 2)) if delta1.size else 0.0
    qu = float(np.linalg.norm(delta2, 2)) if delta2.size else 0.0
    hat = _dilation_formulas(part, sel, U)
    return AllPassDilation(
        sys=hat,
        U=U,
        q=q,
        qe=qe,
        qu=qu,
        selection=sel,
        part=part,
        u_mode=u_mode,
        gamma=gamma,
    )
