"""Stable/antistable splitting that preserves the Hankel operator.

A diagonalizable system with no eigenvalue on the imaginary axis is split
into a stable part (which keeps the feedthrough D) and an antistable
branch whose transfer function lies in H-infinity. Both parts are returned
in modal coordinates (diagonal A), which is all downstream stages need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import StateSpaceSystem, axis_tolerance
from .errors import DefectiveA, ImaginaryAxisEigenvalue

__all__ = ["StabilizationResult", "split_stable"]


@dataclass
class StabilizationResult:
    stable: StateSpaceSystem
    antistable: StateSpaceSystem
    kappa: float


def _modal_part(lam, Bm, Cm, D, mask):
    # Retained eigenvalues sorted ascending by imaginary part, ties by
    # real part, for determinism.
    idx = np.flatnonzero(mask)
    if idx.size:
        order = np.lexsort((lam[idx].real, lam[idx].imag))
        idx = idx[order]
    return StateSpaceSystem(np.diag(lam[idx]), Bm[idx, :], Cm[:, idx], D)


def split_stable(sys: StateSpaceSystem) -> StabilizationResult:
    """Split a system into stable and antistable parts with the same
    Hankel operator as the input.

    Diagonalizes A and partitions the modes by the sign of Re(lambda).
    Raises ImaginaryAxisEigenvalue when an eigenvalue lies within
    1e-10 * max(1, ||A||_2) of the axis, and DefectiveA when the
    eigenvector matrix has condition number above 1e12.
    """
    n = sys.n
    m, p = sys.m, sys.p
    if n == 0:
        empty = StateSpaceSystem(
            np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), np.zeros((p, m))
        )
        stable = StateSpaceSystem(
            np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), sys.D.copy()
        )
        stable.stable = True
        return StabilizationResult(stable=stable, antistable=empty, kappa=1.0)

    lam, X = np.linalg.eig(sys.A)
    atol = axis_tolerance(sys.A)
    on_axis = np.abs(lam.real) <= atol
    if np.any(on_axis):
        raise ImaginaryAxisEigenvalue(lam[on_axis][0])
    kappa = float(np.linalg.cond(X))
    if not np.isfinite(kappa) or kappa > 1e12:
        raise DefectiveA(f"eigenvector matrix condition number {kappa:.2e}")

    Bm = np.linalg.solve(X, sys.B)
    Cm = sys.C @ X
    stable = _modal_part(lam, Bm, Cm, sys.D.copy(), lam.real < 0)
    antistable = _modal_part(lam, Bm, Cm, np.zeros((p, m), dtype=complex), lam.real > 0)
    stable.stable = True
    return StabilizationResult(stable=stable, antistable=antistable, kappa=kappa)
