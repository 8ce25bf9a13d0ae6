"""Numerical verification of the reduction analysis.

Everything here is measurement, not proof: residuals of the algebraic
identities tying the dilation to the balanced blocks, the pseudospectral
rank criteria with their thresholds rho_1..rho_3, the X(z) conditioning
probe, and the a-priori bounds on Q_E and Q_U. All quantities are
reported; the only assertions live in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import axis_tolerance, spectral_norm
from .errors import SingularX
from .hna import AllPassDilation, HnaPartition
from .sampling import sample_moebius_uniform

__all__ = [
    "HnaDiagnostics",
    "qe_qu",
    "lemma_residuals",
    "rank_criteria",
    "xz_probe",
    "qequ_bounds",
    "inertia",
    "full_diagnostics",
]


def qe_qu(B2, C2, U):
    """Spectral norms of Delta_1 = B2 + C2* U and Delta_2 = I - U U*."""
    B2 = np.atleast_2d(np.asarray(B2, dtype=complex))
    C2 = np.atleast_2d(np.asarray(C2, dtype=complex))
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    d1 = B2 + C2.conj().T @ U
    d2 = np.eye(U.shape[0]) - U @ U.conj().T
    return spectral_norm(d1), spectral_norm(d2)


def _rel_residual(lhs, rhs):
    lhs = np.atleast_2d(lhs)
    rhs = np.atleast_2d(rhs)
    if lhs.size == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / (1.0 + np.linalg.norm(rhs)))


def lemma_residuals(run: AllPassDilation) -> dict[str, float]:
    """Relative residuals of the seven identities that the dilation
    satisfies exactly for an exactly balanced input.

    Each entry is ||LHS - RHS||_F / (1 + ||RHS||_F); for inputs whose
    Lyapunov residual is at most 1e-8 every entry stays below 1e-8.
    Identities involving empty blocks report 0.
    """
    run = run.diagnostic_run()
    part, sel, U, hat = run.part, run.selection, run.U, run.sys
    s = sel.sigma_hat
    S1, S2 = part.Sigma1, part.Sigma2
    phi = S1**2 - s**2
    A11, A12, A21, A22 = part.A11, part.A12, part.A21, part.A22
    B1, B2, C1, C2 = part.B1, part.B2, part.C1, part.C2
    Ah, Bh, Ch = hat.A, hat.B, hat.C
    Uh = U.conj().T
    d1 = B2 + C2.conj().T @ U
    d2 = np.eye(U.shape[0]) - U @ U.conj().T

    res = {}
    res["b2_u_adjoint"] = _rel_residual(
        B2 @ Uh, d1 @ Uh + C2.conj().T @ d2 - C2.conj().T
    )
    res["a11_plus_ahat"] = _rel_residual(
        A11 + Ah.conj().T + B1 @ Bh.conj().T, np.zeros_like(A11)
    )
    if S1.size:
        rhs3 = (
            s * ((S2 - s)[:, None] * A21)
            + (s - S2)[:, None] * (A12.conj().T * S1[None, :])
            + s * d1 @ Uh @ C1
            + s * C2.conj().T @ d2 @ C1
        ) / phi[None, :]
    else:
        rhs3 = np.zeros_like(A21)
    res["a21_plus_b2bhat"] = _rel_residual(A21 + B2 @ Bh.conj().T, rhs3)
    if S1.size:
        s1phi = S1 / phi
        lhs4 = Ah * s1phi[None, :] + s1phi[:, None] * Ah.conj().T + Bh @ Bh.conj().T
        rhs4 = -(s**2) * (C1.conj().T @ d2 @ C1) / phi[:, None] / phi[None, :]
        res["ahat_gramian"] = _rel_residual(lhs4, rhs4)
        res["a11_phi_chat"] = _rel_residual(
            A11.conj().T * phi[None, :] + phi[:, None] * Ah + C1.conj().T @ Ch,
            np.zeros_like(A11),
        )
        rhs6 = (
            s * ((S2 - s)[:, None] * A12.conj().T)
            - (S2 - s)[:, None] * (A21 * S1[None, :])
            + s * d1 @ B1.conj().T
        )
        res["a12_phi_chat"] = _rel_residual(
            A12.conj().T * phi[None, :] + C2.conj().T @ Ch, rhs6
        )
    else:
        res["ahat_gramian"] = 0.0
        res["a11_phi_chat"] = 0.0
        res["a12_phi_chat"] = 0.0

    # augmented residual gain: D_e B_e* + C_e P_e against its closed form
    K_r = S1.size
    De = s * U
    Be = np.vstack([B1, B2, Bh])
    Ce = np.hstack([C1, C2, -Ch])
    n_e = Be.shape[0]
    Pe = np.zeros((n_e, n_e), dtype=complex)
    Pe[:K_r, :K_r] = np.diag(S1)
    Pe[K_r : K_r + sel.r, K_r : K_r + sel.r] = s * np.eye(sel.r)
    Pe[:K_r, K_r + sel.r :] = np.eye(K_r)
    Pe[K_r + sel.r :, :K_r] = np.eye(K_r)
    if K_r:
        Pe[K_r + sel.r :, K_r + sel.r :] = np.diag(S1 / phi)
    mid = s * (U @ d1.conj().T + d2.conj().T @ C2)
    right = (
        -(s**2) * (d2 @ C1) / phi[None, :]
        if K_r
        else np.zeros((U.shape[0], 0), dtype=complex)
    )
    closed = np.hstack([np.zeros((U.shape[0], K_r), dtype=complex), mid, right])
    res["residual_gain"] = _rel_residual(De @ Be.conj().T + Ce @ Pe, closed)
    return res


def _grid_margin(M: np.ndarray, grid) -> float:
    """min over the grid of the smallest singular value of zI - M."""
    M = np.atleast_2d(M)
    if M.shape[0] == 0:
        return np.inf
    margin = np.inf
    eye = np.eye(M.shape[0])
    for z in np.asarray(grid, dtype=complex).ravel():
        sv = np.linalg.svd(z * eye - M, compute_uv=False)
        margin = min(margin, float(sv[-1]))
    return margin


def inertia(M: np.ndarray, tol: float | None = None):
    """Eigenvalue counts with real part below, within, above +/- tol."""
    M = np.atleast_2d(M)
    if M.shape[0] == 0:
        return (0, 0, 0)
    if tol is None:
        tol = axis_tolerance(M)
    re = np.linalg.eigvals(M).real
    return (
        int(np.sum(re < -tol)),
        int(np.sum(np.abs(re) <= tol)),
        int(np.sum(re > tol)),
    )


def rank_criteria(run: AllPassDilation, grid=None) -> dict:
    """Thresholds rho_1..rho_3 and the pseudospectral margins of
    (A_hat, A11, A) on an imaginary-axis grid.

    Criterion j passes when the grid margin exceeds rho_j; a pass
    certifies (up to grid resolution) that A_hat carries exactly j1
    eigenvalues in the left half-plane. Nothing is claimed on failure.
    """
    run = run.diagnostic_run()
    part, sel = run.part, run.selection
    qe, qu = run.qe, run.qu
    delta, eps = sel.delta, sel.epsilon
    if grid is None:
        grid = sample_moebius_uniform(512)
    c1 = spectral_norm(part.C1)
    b1 = spectral_norm(part.B1)
    inv_d = 0.0 if np.isinf(delta) else 1.0 / delta
    rho1 = 0.5 * c1**2 * inv_d * qu
    rho2 = rho1 + b1 * np.sqrt(c1**2 * qu * inv_d**2 + 2 * rho1 * inv_d)
    rho3 = 2 * rho2 + inv_d * (
        eps * spectral_norm(part.A21)
        + eps * spectral_norm(part.A12)
        + qe * np.sqrt(1 + qu) * c1
        + c1 * spectral_norm(part.C2) * qu
    )
    A_full = np.block(
        [[part.A11, part.A12], [part.A21, part.A22]]
    ) if part.Sigma1.size else part.A22
    margins = {
        "a_hat": _grid_margin(run.sys.A, grid),
        "a11": _grid_margin(part.A11, grid),
        "a_full": _grid_margin(A_full, grid),
    }
    return {
        "rho1": float(rho1),
        "rho2": float(rho2),
        "rho3": float(rho3),
        "margins": margins,
        "passes": {
            "a": bool(margins["a_hat"] > rho1),
            "b": bool(margins["a11"] > rho2),
            "c": bool(margins["a_full"] > rho3),
        },
        "expected_inertia": (sel.j1, 0, part.Sigma1.size - sel.j1),
    }


def xz_probe(run: AllPassDilation, grid=None):
    """sup over the grid of ||X(z)^{-1}||_2 for

        X(z) = -z Phi - s^2 A11 + S1 A11* S1 - s B1 U* C1,

    together with the argmax point. Raises SingularX when X is singular
    at a grid point."""
    run = run.diagnostic_run()
    part, sel, U = run.part, run.selection, run.U
    S1 = part.Sigma1
    if S1.size == 0:
        raise ValueError("X(z) needs at least one retained state")
    if grid is None:
        grid = sample_moebius_uniform(512)
    s = sel.sigma_hat
    phi = S1**2 - s**2
    X0 = (
        -(s**2) * part.A11
        + S1[:, None] * part.A11.conj().T * S1[None, :]
        - s * part.B1 @ U.conj().T @ part.C1
    )
    sup, arg = 0.0, None
    for z in np.asarray(grid, dtype=complex).ravel():
        X = -z * np.diag(phi) + X0
        smin = float(np.linalg.svd(X, compute_uv=False)[-1])
        if smin == 0.0:
            raise SingularX(z)
        if 1.0 / smin > sup:
            sup, arg = 1.0 / smin, z
    return sup, arg


def _is_hermitian(M, rtol=1e-12):
    M = np.atleast_2d(M)
    scale = max(1.0, float(np.linalg.norm(M)))
    return float(np.linalg.norm(M - M.conj().T)) <= rtol * scale


def qequ_bounds(run: AllPassDilation) -> dict:
    """A-priori bounds on Q_E and Q_U from the cluster data.

    Q_E <= Q1 + Q2 with Q1 = gamma + sqrt(gamma^2 + 4 eps ||A22||) (zero
    for q = r) and Q2 the singular-vector perturbation term (zero for
    q = r or Hermitian A22, not applicable unless the singular-value gap
    of C2 exceeds 4 eps ||A22||_F). Q_U <= 4 s_q^{-2} eps ||A22|| (zero
    for Hermitian A22). Pass flags compare the measured values with
    1e-10 absolute slack.
    """
    run = run.diagnostic_run()
    part, sel, q = run.part, run.selection, run.q
    eps, gamma = sel.epsilon, run.gamma
    r = sel.r
    svals = np.linalg.svd(part.C2, compute_uv=False)
    s_q = float(svals[q - 1])
    s_q1 = float(svals[q]) if q < svals.size else 0.0
    nu = s_q - s_q1
    a22_2 = spectral_norm(part.A22)
    a22_f = float(np.linalg.norm(part.A22))
    b2_2 = spectral_norm(part.B2)
    hermitian = _is_hermitian(part.A22)

    q1 = 0.0 if q == r else gamma + np.sqrt(gamma**2 + 4 * eps * a22_2)
    q2_applicable = q == r or hermitian or nu > 4 * eps * a22_f
    if q == r or hermitian:
        q2 = 0.0
    elif q2_applicable:
        q2 = 4 * np.sqrt(2) * eps * a22_f / (nu - 4 * eps * a22_f) * b2_2
    else:
        q2 = np.nan
    qe_bound = q1 + q2
    qu_bound = 0.0 if hermitian else 4 * eps * a22_2 / s_q**2
    return {
        "q1": float(q1),
        "q2": float(q2),
        "qe_bound": float(qe_bound),
        "qu_bound": float(qu_bound),
        "qe_measured": run.qe,
        "qu_measured": run.qu,
        "s_q": s_q,
        "gap": float(nu),
        "a22_hermitian": hermitian,
        "qe_applicable": bool(q2_applicable),
        "qe_pass": bool(q2_applicable and run.qe <= qe_bound + 1e-10),
        "qu_pass": bool(run.qu <= qu_bound + 1e-10),
    }


@dataclass
class HnaDiagnostics:
    """Bundle of every measured diagnostic for one reduction run."""

    qe: float
    qu: float
    delta: float
    epsilon: float
    sigma_hat: float
    rho1: float
    rho2: float
    rho3: float
    margins: dict[str, float]
    criteria_pass: dict[str, bool]
    expected_inertia: tuple[int, int, int]
    lemma: dict[str, float] = field(default_factory=dict)
    xz_inv_sup: float | None = None
    bound_checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def _clean(v):
            if isinstance(v, dict):
                return {k: _clean(x) for k, x in v.items()}
            if isinstance(v, (tuple, list)):
                return [_clean(x) for x in v]
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return v if np.isfinite(v) else repr(v)
            if isinstance(v, (np.integer, int)):
                return int(v)
            if isinstance(v, (np.bool_, bool)):
                return bool(v)
            return v

        return {
            "qe": _clean(self.qe),
            "qu": _clean(self.qu),
            "delta": _clean(self.delta),
            "epsilon": _clean(self.epsilon),
            "sigma_hat": _clean(self.sigma_hat),
            "rho": _clean({"rho1": self.rho1, "rho2": self.rho2, "rho3": self.rho3}),
            "margins": _clean(self.margins),
            "criteria_pass": _clean(self.criteria_pass),
            "expected_inertia": _clean(self.expected_inertia),
            "lemma_residuals": _clean(self.lemma),
            "xz_inv_sup": _clean(self.xz_inv_sup),
            "bound_checks": _clean(self.bound_checks),
        }


def full_diagnostics(run: AllPassDilation, grid=None) -> HnaDiagnostics:
    """Assemble every diagnostic for one dilation: Q_E/Q_U, the lemma
    residuals, the rank criteria, the X(z) probe, and the bound checks."""
    inner = run.diagnostic_run()
    rc = rank_criteria(run, grid)
    xz = None
    if inner.part.Sigma1.size:
        xz = xz_probe(run, grid)[0]
    return HnaDiagnostics(
        qe=inner.qe,
        qu=inner.qu,
        delta=inner.selection.delta,
        epsilon=inner.selection.epsilon,
        sigma_hat=inner.selection.sigma_hat,
        rho1=rc["rho1"],
        rho2=rc["rho2"],
        rho3=rc["rho3"],
        margins=rc["margins"],
        criteria_pass=rc["passes"],
        expected_inertia=tuple(rc["expected_inertia"]),
        lemma=lemma_residuals(run),
        xz_inv_sup=xz,
        bound_checks=qequ_bounds(run),
    )
