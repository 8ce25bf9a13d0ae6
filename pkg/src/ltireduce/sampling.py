"""Sample-grid generators and built-in experiment constructors."""

from __future__ import annotations

import numpy as np

from .core import SampleSet, StateSpaceSystem, eval_transfer
from .errors import CholeskyFailure, PoleAtMinusOne

__all__ = [
    "sample_moebius_uniform",
    "sample_log",
    "hilbert_example",
    "hilbert_samples",
    "hermitian_test_system",
    "prescribed_balanced_system",
    "sample_system",
]

HILBERT_TERMS = 500


def sample_moebius_uniform(N: int, exclude_arc: float | None = None) -> np.ndarray:
    """N purely imaginary points: uniform points on the unit circle,
    avoiding s = -1 by an arc of exclude_arc (default pi/(4N)), mapped
    through z = (s - 1)/(s + 1). Sorted by imaginary part."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if exclude_arc is None:
        exclude_arc = np.pi / (4 * N)
    theta = np.linspace(-np.pi + exclude_arc, np.pi - exclude_arc, N)
    s = np.exp(1j * theta)
    z = (s - 1.0) / (s + 1.0)
    # the map carries the circle onto the axis exactly; drop rounding residue
    return 1j * np.sort(z.imag)


def sample_log(a: float, b: float, N: int) -> np.ndarray:
    """2N imaginary points with N log-spaced magnitudes in [a, b],
    mirrored to the negative half-axis, sorted by imaginary part."""
    if a <= 0 or (N > 1 and b <= a):
        raise ValueError("need 0 < a < b")
    mags = np.logspace(np.log10(a), np.log10(b), N)
    omega = np.concatenate([-mags[::-1], mags])
    return 1j * omega


def hilbert_example(z: complex) -> complex:
    """Truncated series sum_{j=1}^{500} j^{-1} (1+z)^{-j} (1-z)^j,
    evaluated through s = (1-z)/(1+z) and Horner summation."""
    z = complex(z)
    if abs(1.0 + z) < 1e-14:
        raise PoleAtMinusOne("the series is undefined at z = -1")
    s = (1.0 - z) / (1.0 + z)
    acc = 0.0 + 0.0j
    for j in range(HILBERT_TERMS, 0, -1):
        acc = acc * s + 1.0 / j
    return acc * s


def hilbert_samples(points) -> SampleSet:
    """SampleSet of the truncated-Hilbert function on the given grid."""
    pts = np.asarray(points, dtype=complex).ravel()
    vals = np.array([[[hilbert_example(z)]] for z in pts])
    return SampleSet(pts, vals)


def _psd_factor_clamped(S, tol=1e-12):
    # Hermitian factor L with L L* = S; eigenvalues below -tol*scale raise,
    # smaller negatives clamp to zero.
    S = 0.5 * (S + S.conj().T)
    e, V = np.linalg.eigh(S)
    scale = max(abs(e).max(initial=0.0), 1.0)
    if e.min(initial=0.0) < -tol * scale:
        raise CholeskyFailure(
            f"indefinite right-hand side (min eigenvalue {e.min():.3e}); reseed advised"
        )
    e = np.clip(e, 0.0, None)
    return V * np.sqrt(e)[None, :]


def prescribed_balanced_system(
    sigma, seed: int, skew: float = 0.0
) -> StateSpaceSystem:
    """Exactly balanced system with Gramians P = Q = diag(sigma).

    A = -(M M* + n I) + skew * (S - S*)/2 for seeded standard-normal
    complex M, S; B and C are Hermitian factors of -(A P + P A*) and
    -(A* Q + Q A). The Hermitian part of A is negative definite, so the
    system is always stable; skew = 0 makes A Hermitian.
    """
    sigma = np.asarray(sigma, dtype=float).ravel()
    n = sigma.size
    rng = np.random.default_rng(seed)
    M = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    A = -(M @ M.conj().T + n * np.eye(n))
    if skew:
        S = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        A = A + skew * 0.5 * (S - S.conj().T)
    P = np.diag(sigma).astype(complex)
    WB = -(A @ P + P @ A.conj().T)
    WC = -(A.conj().T @ P + P @ A)
    B = _psd_factor_clamped(WB)
    C = _psd_factor_clamped(WC).conj().T
    sys = StateSpaceSystem(A, B, C, np.zeros((n, n), dtype=complex))
    sys.stable = True
    return sys


def hermitian_test_system(
    epsilon: float, delta: float, seed: int
) -> StateSpaceSystem:
    """16-state Hermitian construction with the prescribed Gramian

    P = Q = diag(1/10, ..., 4/10, 1/2-delta, 1/2-eps, 1/2-eps/2, 1/2,
                 1/2+eps/2, 1/2+eps, 1/2+delta, 6/10, ..., 1),

    used to probe the error of the cluster-tolerant reduction as a
    function of epsilon. The five central entries form the cluster around
    1/2 at spread epsilon; delta is the gap to the nearest neighbors.
    """
    low = np.arange(1, 5) / 10.0
    mid = 0.5 + np.array([-delta, -epsilon, -epsilon / 2, 0.0, epsilon / 2, epsilon, delta])
    high = np.arange(6, 11) / 10.0
    sigma = np.concatenate([low, mid, high])
    return prescribed_balanced_system(sigma, seed=seed, skew=0.0)


def sample_system(sys: StateSpaceSystem, points) -> SampleSet:
    """Evaluate a system's transfer function on a grid of imaginary
    points and package the result."""
    pts = np.asarray(points, dtype=complex).ravel()
    vals = np.stack([eval_transfer(sys, z) for z in pts])
    return SampleSet(pts, vals)
