"""Matrix-free Lanczos for the lowest eigenpair of a Hermitian operator."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import SolverError

__all__ = ["LanczosResult", "lanczos_ground"]

logger = logging.getLogger(__name__)


@dataclass
class LanczosResult:
    eigenvalue: float
    eigenvector: np.ndarray
    iterations: int
    converged: bool
    residual: float
    restarts: int = 0


def _lowest(alpha, beta):
    if len(alpha) == 1:
        return float(alpha[0]), np.ones(1)
    w, v = scipy.linalg.eigh_tridiagonal(np.asarray(alpha), np.asarray(beta), select="i", select_range=(0, 0))
    return float(w[0]), v[:, 0]


def _run(matvec, v0, max_iter, tol, reorthogonalize, residual_tol=None):
    n = v0.size
    dtype = v0.dtype
    eps = float(np.finfo(dtype).eps)
    m_max = min(max_iter, n)
    basis = np.empty((m_max, n), dtype=dtype)
    basis[0] = v0
    alpha, beta = [], []
    theta_prev = None
    scale = 0.0
    theta, y = 0.0, np.ones(1)
    for j in range(m_max):
        w = np.asarray(matvec(basis[j]), dtype=dtype).reshape(-1)
        a = float(np.vdot(basis[j], w).real)
        alpha.append(a)
        w = w - a * basis[j]
        if j > 0:
            w = w - beta[-1] * basis[j - 1]
        if reorthogonalize:
            for _ in range(2):
                w = w - basis[:j + 1].T @ (basis[:j + 1].conj() @ w)
        b = float(np.linalg.norm(w))
        theta, y = _lowest(alpha, beta)
        scale = max(scale, abs(a), b, abs(theta))
        tol_eff = max(tol, 4.0 * eps * max(1.0, abs(theta)))
        residual = b * abs(float(y[-1]))
        if j + 1 == n:
            return theta, y, basis[:j + 1], j + 1, True, residual, "exhausted"
        small_residual = residual_tol is None or residual <= residual_tol * max(1.0, abs(theta))
        if theta_prev is not None and abs(theta - theta_prev) < tol_eff and small_residual:
            return theta, y, basis[:j + 1], j + 1, True, residual, "converged"
        if b <= 10.0 * eps * max(scale, 1.0) * np.sqrt(n):
            return theta, y, basis[:j + 1], j + 1, True, residual, "breakdown"
        theta_prev = theta
        beta.append(b)
        if j + 1 < m_max:
            basis[j + 1] = w / b
    return theta, y, basis[:m_max], m_max, False, residual, "max_iter"


def lanczos_ground(matvec: Callable[[np.ndarray], np.ndarray], v0: np.ndarray, max_iter: int = 100,
                   tol: float = 1e-7, reorthogonalize: bool = True, seed=None,
                   residual_tol: float | None = None) -> LanczosResult:
    """Lowest eigenpair of the operator ``matvec`` via a Krylov space grown from ``v0``.

    Convergence is declared when the lowest Ritz value changes by less than
    ``tol`` between iterations (raised to a few ulps of the working
    precision for single-precision vectors).  With ``residual_tol`` the
    residual norm ``|H v - theta v|`` must also be below
    ``residual_tol * max(1, |theta|)``, which guards against stagnation when
    the two lowest eigenvalues are nearly degenerate.  A breakdown, i.e. an invariant
    subspace found before convergence, triggers one restart from ``v0`` plus
    a seeded random perturbation.  If the restarted run breaks down as well,
    its Ritz pair is exact on a larger generic subspace and is accepted
    unless it lies above the first one, which raises :class:`SolverError`.
    """
    v0 = np.array(v0, copy=True).reshape(-1)
    if v0.size == 0:
        raise SolverError("empty eigenproblem")
    rng = np.random.default_rng(seed)
    nrm = float(np.linalg.norm(v0))
    if not np.isfinite(nrm):
        raise SolverError("non-finite start vector")
    if nrm == 0.0:
        v0 = _random_like(v0, rng)
        nrm = float(np.linalg.norm(v0))
    v0 = v0 / nrm

    theta, y, basis, its, converged, residual, why = _run(matvec, v0, max_iter, tol, reorthogonalize, residual_tol)
    restarts = 0
    if why == "breakdown":
        logger.debug("Lanczos breakdown after %d iterations; restarting with a perturbed vector", its)
        restarts = 1
        first = (theta, y, basis, residual)
        pert = _random_like(v0, rng)
        v0 = v0 + 1e-2 * pert / np.linalg.norm(pert)
        v0 = v0 / np.linalg.norm(v0)
        theta, y, basis, its2, converged, residual, why = _run(matvec, v0, max_iter, tol, reorthogonalize, residual_tol)
        its += its2
        slack = max(tol, 4.0 * float(np.finfo(v0.dtype).eps) * max(1.0, abs(first[0])))
        if why == "breakdown" and theta > first[0] + slack:
            raise SolverError(f"Lanczos broke down twice (Ritz values {first[0]:.12g} then {theta:.12g}, "
                              f"residual {residual:.2e})")
        if first[0] <= theta:
            # The first pair is exact (zero residual); keep it unless the restart found a lower one.
            theta, y, basis, residual = first
            converged = True

    vec = y.astype(basis.dtype) @ basis
    vec = vec / np.linalg.norm(vec)
    if not np.isfinite(theta) or not np.all(np.isfinite(vec)):
        raise SolverError("Lanczos produced non-finite values")
    return LanczosResult(theta, vec, its, converged, residual, restarts)


def _random_like(v: np.ndarray, rng) -> np.ndarray:
    out = rng.uniform(-1.0, 1.0, size=v.shape)
    if np.iscomplexobj(v):
        out = out + 1j * rng.uniform(-1.0, 1.0, size=v.shape)
    return out.astype(v.dtype)
