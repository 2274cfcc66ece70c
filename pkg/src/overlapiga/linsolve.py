"""Diagonally preconditioned CG and condition numbers of rescaled matrices."""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

DENSE_LIMIT = 4000
DEFAULT_TOL = 1e-12


class SolverError(RuntimeError):
    """CG did not reach the tolerance; carries the residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual: float
    history: list = field(default_factory=list)


def pcg_solve(A, b, tol=DEFAULT_TOL, max_iter=None, x0=None):
    """Conjugate gradients with Jacobi preconditioning.

    Stops when the preconditioned residual norm ``sqrt(r . D^-1 r)``
    relative to that of ``b`` drops below ``tol``.

    Raises
    ------
    SolverError
        When ``max_iter`` is exceeded or the iteration breaks down.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = len(b)
    d = A.diagonal()
    if np.any(d <= 0):
        raise ValueError('diagonal must be strictly positive')
    dinv = 1.0 / d
    if max_iter is None:
        max_iter = max(10 * n, 100)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    z = dinv * r
    rz = float(r @ z)
    ref = np.sqrt(float(b @ (dinv * b)))
    if ref == 0.0:
        return SolveReport(np.zeros(n), 0, 0.0, [0.0])
    history = [np.sqrt(max(rz, 0.0)) / ref]
    if history[-1] <= tol:
        return SolveReport(x, 0, history[-1], history)
    p = z.copy()
    for k in range(1, max_iter + 1):
        q = A @ p
        pq = float(p @ q)
        if not pq > 0:
            raise SolverError('CG breakdown (p.Ap = %.3g) at iteration %d' % (pq, k), history)
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = dinv * r
        rz_new = float(r @ z)
        history.append(np.sqrt(max(rz_new, 0.0)) / ref)
        if history[-1] <= tol:
            return SolveReport(x, k, history[-1], history)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError('CG did not converge in %d iterations (residual %.3g)'
                      % (max_iter, history[-1]), history)


@dataclass
class ConditionEstimate:
    lam_max: float
    lam_min: float
    kappa: float
    method: str
    definite: bool = True
    converged: bool = True


def rescale(A):
    """``D^{-1/2} A D^{-1/2}`` with ``D`` the diagonal of ``A``."""
    A = sp.csr_matrix(A)
    s = 1.0 / np.sqrt(np.abs(A.diagonal()))
    S = sp.diags(s)
    return (S @ A @ S).tocsr()


def lanczos_extremes(A, tol=1e-6, max_iter=None, seed=0):
    """Extreme eigenvalues of a symmetric operator by Lanczos.

    Full reorthogonalization; both ends come from the same tridiagonal
    matrix. Stops when the residual bounds of both extreme Ritz values are
    below ``tol`` relative to the spectral radius.
    """
    n = A.shape[0]
    if max_iter is None:
        max_iter = min(n, 1500)
    rng = np.random.default_rng(seed)
    V = np.zeros((max_iter + 1, n))
    v = rng.standard_normal(n)
    V[0] = v / np.linalg.norm(v)
    alpha, beta = [], []
    converged = False
    theta = np.array([0.0])
    for k in range(max_iter):
        w = A @ V[k]
        a = float(V[k] @ w)
        w -= a * V[k]
        if k > 0:
            w -= beta[-1] * V[k - 1]
        # two passes of full reorthogonalization
        for _ in range(2):
            w -= V[:k + 1].T @ (V[:k + 1] @ w)
        b = float(np.linalg.norm(w))
        alpha.append(a)
        if k >= 1 and (k % 10 == 0 or b < 1e-14):
            theta, S = la.eigh_tridiagonal(np.array(alpha), np.array(beta))
            bound = b * np.abs(S[-1, [0, -1]])
            scale = max(abs(theta[0]), abs(theta[-1]))
            if np.all(bound <= tol * scale):
                converged = True
                break
        if b < 1e-14:
            converged = True
            break
        beta.append(b)
        V[k + 1] = w / b
    theta = la.eigh_tridiagonal(np.array(alpha), np.array(beta[:len(alpha) - 1]))[0]
    return float(theta[0]), float(theta[-1]), converged


def estimate_condition(A, dense_limit=DENSE_LIMIT, tol=1e-6, seed=0):
    """Spectral condition number of the diagonally rescaled matrix.

    ``kappa = max |lambda| / min |lambda|``, which equals
    ``lambda_max / lambda_min`` for definite matrices; ``definite`` flags
    whether all eigenvalues are positive. Dense symmetric eigensolve up to
    ``dense_limit`` unknowns, Lanczos beyond (definite matrices only: an
    indefinite spectrum there yields ``kappa = inf``). An eigenvalue not
    distinguishable from zero also yields ``kappa = inf``. ``seed`` fixes the
    Lanczos start vector.
    """
    R = rescale(A)
    n = R.shape[0]
    if n == 0:
        return ConditionEstimate(1.0, 1.0, 1.0, 'dense')
    if n <= dense_limit:
        lam = la.eigvalsh(R.toarray())
        mag = np.abs(lam)
        top, bottom = float(mag.max()), float(mag.min())
        floor = n * np.finfo(float).eps * top
        definite = bool(lam[0] > floor)
        kappa = top / bottom if bottom > floor else float('inf')
        return ConditionEstimate(float(lam[-1]), float(lam[0]), kappa, 'dense', definite)
    lo, hi, conv = lanczos_extremes(R, tol, seed=seed)
    if lo <= tol * abs(hi):
        return ConditionEstimate(hi, lo, float('inf'), 'lanczos', False, conv)
    return ConditionEstimate(hi, lo, hi / lo, 'lanczos', True, conv)
