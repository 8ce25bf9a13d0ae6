"""Greedy barycentric rational fitting of matrix-valued samples.

Stage I of the reduction pipeline: a block variant of the adaptive
Antoulas-Anderson method with Tikhonov-regularized weight solves, a
state-space realization of the fitted rational, and a bisection search
that balances fit error against realization conditioning to choose the
regularization parameter.

The fitted object is

    R_d(z) = (I + sum_j W_j/(z - z_j))^{-1} (sum_j W_j G(z_j)/(z - z_j)),

with p x p weight matrices W_j at support points z_j drawn greedily from
the sample set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import SampleSet, StateSpaceSystem, eval_transfer
from .errors import DegenerateNormalEquations, SingularLeftFactor, VerificationFailed

__all__ = [
    "BarycentricRational",
    "AaaOptions",
    "AaaResult",
    "LambdaTuning",
    "eval_barycentric",
    "eval_barycentric_batch",
    "solve_weights",
    "aaa_fit",
    "realize",
    "tune_lambda",
    "aaa_two_pass",
]

# Distance (relative to the support scale) below which evaluation snaps to
# the stored interpolation value.
_SUPPORT_SNAP = 1e-13


@dataclass
class BarycentricRational:
    """Barycentric rational with matrix weights.

    support : (d,) complex support points
    weights : (d, p, p) weight matrices
    values  : (d, p, m) stored sample values at the support points
    lam     : regularization parameter used in the weight solve
    """

    support: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    lam: float = 0.0

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=complex).ravel()
        self.weights = np.asarray(self.weights, dtype=complex)
        self.values = np.asarray(self.values, dtype=complex)
        d = self.support.size
        if self.weights.ndim == 1 and d:
            self.weights = self.weights.reshape(d, 1, 1)
        if self.values.ndim == 1 and d:
            self.values = self.values.reshape(d, 1, 1)
        if self.weights.shape[0] != d or self.values.shape[0] != d:
            raise ValueError("weights, values and support must have equal length")
        if len(np.unique(self.support)) != d:
            raise ValueError("support points must be pairwise distinct")

    @property
    def degree(self) -> int:
        return self.support.size

    @property
    def p(self) -> int:
        return self.weights.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    def scale(self) -> float:
        return max(1.0, float(np.abs(self.support).max(initial=0.0)))

    def __call__(self, z):
        return eval_barycentric(self, z)


@dataclass
class AaaOptions:
    """Options for the greedy fit: maximum degree, relative error target
    on non-support samples, regularization parameter, optional initial
    support indices."""

    d_max: int = 60
    tol: float = 1e-8
    lam: float = 0.0
    seed_support: list[int] | None = None

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class AaaResult:
    rational: BarycentricRational
    history: np.ndarray  # E1 after each greedy step
    support_indices: list[int]
    no_progress: bool = False

    @property
    def e1(self) -> float:
        return float(self.history[-1])


def solve_weights(samples: SampleSet, support, lam: float) -> np.ndarray:
    """Minimize ||G_d - W M_d||_F^2 + lam ||W||_F^2 for the stacked weight
    row W = [W_1 ... W_d].

    M_d is the block Loewner matrix of divided differences
    (G(z_k) - G(z_j))/(z_k - z_j) over non-support samples, G_d stacks
    -G(z_k). Solved through the augmented least-squares system
    [M_d*; sqrt(lam) I] for conditioning; raises
    DegenerateNormalEquations when lam = 0 and M_d is rank deficient.
    Returns the (d, p, p) weight array.
    """
    support = list(support)
    d = len(support)
    if d == 0:
        raise ValueError("support must be nonempty")
    if len(set(support)) != d:
        raise ValueError("support indices must be distinct")
    others = [i for i in range(samples.N) if i not in set(support)]
    if not others:
        raise ValueError("support must be a strict subset of the samples")
    p, m = samples.p, samples.m

    zs = samples.points[support]
    zo = samples.points[others]
    Gs = samples.values[support]  # (d, p, m)
    Go = samples.values[others]  # (N-d, p, m)
    diffs = (Go[None, :, :, :] - Gs[:, None, :, :]) / (
        (zo[None, :] - zs[:, None])[:, :, None, None]
    )
    # (d, p) x (N-d, m) block matrix, row-major over blocks
    M = diffs.transpose(0, 2, 1, 3).reshape(d * p, len(others) * m)
    Gd = -Go.transpose(1, 0, 2).reshape(p, len(others) * m)

    A = M.conj().T
    rhs = Gd.conj().T
    if lam > 0:
        A = np.vstack([A, np.sqrt(lam) * np.eye(d * p, dtype=complex)])
        rhs = np.vstack([rhs, np.zeros((d * p, p), dtype=complex)])
    X, _, rank, _ = scipy.linalg.lstsq(A, rhs, lapack_driver="gelsd")
    if lam == 0 and rank < d * p:
        raise DegenerateNormalEquations(
            f"Loewner matrix rank {rank} < {d * p} with lam = 0"
        )
    W = X.conj().T  # (p, d*p)
    return W.reshape(p, d, p).transpose(1, 0, 2)


def eval_barycentric_batch(R: BarycentricRational, zs) -> np.ndarray:
    """Evaluate R at many points; shape (len(zs), p, m)."""
    zs = np.asarray(zs, dtype=complex).ravel()
    d, p, m = R.degree, R.p, R.m
    out = np.empty((zs.size, p, m), dtype=complex)
    snap = _SUPPORT_SNAP * R.scale()
    dist = np.abs(zs[:, None] - R.support[None, :])
    near = dist.min(axis=1) <= snap
    far = ~near
    if near.any():
        out[near] = R.values[dist[near].argmin(axis=1)]
    if far.any():
        C = 1.0 / (zs[far, None] - R.support[None, :])
        WG = np.einsum("jab,jbc->jac", R.weights, R.values)
        L = np.eye(p, dtype=complex)[None, :, :] + np.einsum("nj,jab->nab", C, R.weights)
        Nmat = np.einsum("nj,jab->nab", C, WG)
        try:
            out[far] = np.linalg.solve(L, Nmat)
        except np.linalg.LinAlgError:
            # find the offending point for the error message
            for z, Lz in zip(zs[far], L):
                if np.linalg.matrix_rank(Lz) < p:
                    raise SingularLeftFactor(
                        f"left factor singular at z={z!r} (spurious pole)"
                    ) from None
            raise
    return out


def eval_barycentric(R: BarycentricRational, z: complex) -> np.ndarray:
    """Evaluate R(z); returns the stored value when z coincides with a
    support point (within 1e-13 of the support scale)."""
    return eval_barycentric_batch(R, [z])[0]


def _frob_errors(R, samples, indices):
    vals = eval_barycentric_batch(R, samples.points[indices])
    return np.linalg.norm(
        vals - samples.values[indices], axis=(1, 2)
    )


def aaa_fit(samples: SampleSet, opts: AaaOptions) -> AaaResult:
    """Greedy block fit.

    Starting from R_0 = 0, repeatedly adds the non-support sample with the
    largest Frobenius misfit as a support point (ties broken by lowest
    index) and re-solves the regularized weight problem. E1 after each
    step is the largest non-support misfit relative to the largest sample
    norm. Stops when E1 <= opts.tol or the degree reaches opts.d_max; if
    E1 fails to improve for 5 consecutive steps the best iterate so far is
    returned with the no_progress flag set.
    """
    if samples.N <= opts.d_max:
        raise ValueError("need more samples than d_max")
    norms = np.linalg.norm(samples.values, axis=(1, 2))
    scale = float(norms.max(initial=0.0))
    if scale == 0.0:
        scale = 1.0

    support: list[int] = list(opts.seed_support or [])
    resid = norms.copy()  # misfit of R_0 = 0
    history: list[float] = []
    best: tuple[float, BarycentricRational, list[int]] | None = None
    stall = 0
    no_progress = False
    R = None

    while True:
        if not support or (R is not None):
            # greedy pick from the residuals of the current iterate
            masked = resid.copy()
            masked[support] = -np.inf
            support.append(int(np.argmax(masked)))
        weights = solve_weights(samples, support, opts.lam)
        R = BarycentricRational(
            samples.points[support], weights, samples.values[support], opts.lam
        )
        others = [i for i in range(samples.N) if i not in set(support)]
        resid = np.zeros(samples.N)
        resid[others] = _frob_errors(R, samples, others)
        e1 = float(resid.max() / scale)
        history.append(e1)
        if best is None or e1 < best[0]:
            best = (e1, R, list(support))
            stall = 0
        else:
            stall += 1
        if e1 <= opts.tol or len(support) >= opts.d_max:
            break
        if stall >= 5:
            no_progress = True
            _, R, support = best
            break

    if no_progress:
        e_best, R, support = best
        hist = np.array(history[: history.index(e_best) + 1])
        return AaaResult(R, hist, support, no_progress=True)
    return AaaResult(R, np.array(history), support)


def realize(R: BarycentricRational, verify: bool = True) -> StateSpaceSystem:
    """State-space realization of R with state dimension p*d:

        A = diag(z_1, ..., z_d) (x) I_p - (1_d (x) I_p) C,
        B = stacked stored values,  C = [W_1 ... W_d],  D = 0.

    With verify=True the transfer function is compared against the
    barycentric form on a 64-point grid avoiding the support; a mismatch
    beyond 1e-8 * max(1, ||R(z)||) raises VerificationFailed (a symptom of
    conditioning loss in the weights; a larger lam usually cures it).
    """
    d, p, m = R.degree, R.p, R.m
    W = np.hstack(list(R.weights))  # (p, d*p)
    A = np.kron(np.diag(R.support), np.eye(p)) - np.kron(
        np.ones((d, 1)), np.eye(p)
    ) @ W
    B = R.values.reshape(d * p, m)
    sys = StateSpaceSystem(A, B, W, np.zeros((p, m), dtype=complex))
    if verify:
        grid = _verification_grid(R.support, 64)
        worst = (0.0, None, 1.0)
        for z in grid:
            rv = eval_barycentric(R, z)
            tv = eval_transfer(sys, z)
            mism = float(np.linalg.norm(tv - rv, 2))
            tol = 1e-8 * max(1.0, float(np.linalg.norm(rv, 2)))
            if mism / tol > worst[0] / worst[2]:
                worst = (mism, z, tol)
        if worst[0] > worst[2]:
            raise VerificationFailed(worst[1], worst[0], worst[2])
    return sys


def _verification_grid(support, count):
    # Moebius-mapped points with a half-step phase offset so sample grids
    # of the usual sizes do not collide with the support.
    theta = (np.arange(count) + 0.5) * 2 * np.pi / count - np.pi
    margin = np.pi / (4 * count)
    theta = theta * (np.pi - margin) / np.pi
    s = np.exp(1j * theta)
    z = (s - 1.0) / (s + 1.0)
    z = 1j * z.imag
    if len(support):
        scale = max(1.0, float(np.abs(support).max()))
        dist = np.abs(z[:, None] - np.asarray(support)[None, :]).min(axis=1)
        z = z[dist > 1e-6 * scale]
    return z


@dataclass
class LambdaTuning:
    lam: float
    gap: float  # |log10 E1 - log10 E2| at the returned lam
    e1: float
    e2: float
    evaluations: list[tuple[float, float, float]] = field(default_factory=list)


def tune_lambda(samples: SampleSet, d: int) -> LambdaTuning:
    """Pick a regularization parameter by balancing fit error against
    realization conditioning.

    E1(lam) is the fit error of a degree-d run; E2(lam) is the largest
    grid mismatch between the barycentric form and the transfer function
    of its realization (the conditioning proxy: oversized weights corrupt
    the realization's A). Bisection on log10(lam) over [-16, 0] stops when
    the two errors agree within one order of magnitude; otherwise the
    evaluated point with the smallest gap is returned after 20 steps.
    """
    norms = np.linalg.norm(samples.values, axis=(1, 2))
    scale = float(norms.max(initial=0.0)) or 1.0
    floor = 1e-18
    evals: list[tuple[float, float, float]] = []

    def errors(log_lam: float) -> float:
        lam = 10.0**log_lam
        res = aaa_fit(samples, AaaOptions(d_max=d, tol=0.0, lam=lam))
        R = res.rational
        sys = realize(R, verify=False)
        grid = _verification_grid(R.support, 64)
        e2 = 0.0
        for z in grid:
            mism = np.linalg.norm(
                eval_transfer(sys, z) - eval_barycentric(R, z)
            )
            e2 = max(e2, float(mism) / scale)
        e1 = res.e1
        evals.append((lam, e1, e2))
        return np.log10(max(e1, floor)) - np.log10(max(e2, floor))

    def result(lam, gap):
        match = min(evals, key=lambda t: abs(t[0] - lam))
        return LambdaTuning(lam=lam, gap=gap, e1=match[1], e2=match[2], evaluations=evals)

    lo, hi = -16.0, 0.0
    g_lo = errors(lo)
    if g_lo >= -1.0:
        # realization error already at or below the fit error: no
        # regularization needed
        return result(10.0**lo, abs(g_lo))
    g_hi = errors(hi)
    if g_hi <= 1.0:
        return result(10.0**hi, abs(g_hi))
    best = min((abs(g_lo), lo), (abs(g_hi), hi))
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        g_mid = errors(mid)
        if abs(g_mid) <= 1.0:
            return result(10.0**mid, abs(g_mid))
        best = min(best, (abs(g_mid), mid))
        if g_mid < 0:
            lo = mid
        else:
            hi = mid
    return result(10.0 ** best[1], best[0])


def aaa_two_pass(
    samples: SampleSet, d1: int, lambda1: float, d2: int, lambda2: float
) -> StateSpaceSystem:
    """Two fits at different regularization levels, summed.

    The first pass captures the dominant scale of multiscale data with a
    strong lam; the second fits the residual samples accurately with a
    weak lam. Returns the block-diagonal concatenation of the two
    realizations (transfer functions add).
    """
    if d1 + d2 > samples.N - 1:
        raise ValueError("d1 + d2 must be at most N - 1")
    res1 = aaa_fit(samples, AaaOptions(d_max=d1, tol=0.0, lam=lambda1))
    fitted = eval_barycentric_batch(res1.rational, samples.points)
    residual = SampleSet(samples.points, samples.values - fitted)
    res2 = aaa_fit(residual, AaaOptions(d_max=d2, tol=0.0, lam=lambda2))
    s1 = realize(res1.rational, verify=False)
    s2 = realize(res2.rational, verify=False)
    A = scipy.linalg.block_diag(s1.A, s2.A)
    B = np.vstack([s1.B, s2.B])
    C = np.hstack([s1.C, s2.C])
    return StateSpaceSystem(A, B, C, s1.D + s2.D)
