"""Point inversion, containment and boundary curves of spline patches."""
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .kernels import basis_ders, find_spans
from .splines import SIDES

INVERSION_RTOL = 1e-11
BOUNDARY_TOL = 1e-10
MAX_NEWTON = 30
MULTISTART = 5

_OUTWARD = {
    'left': np.array([-1.0, 0.0]),
    'right': np.array([1.0, 0.0]),
    'bottom': np.array([0.0, -1.0]),
    'top': np.array([0.0, 1.0]),
}


@dataclass
class InversionResult:
    uv: np.ndarray
    residual: float
    converged: bool


def _newton(patch, x, uv, tol, max_iter=MAX_NEWTON):
    """Clamped, damped Newton iteration for ``F(uv) = x`` (vectorized)."""
    uv = uv.copy()
    res = np.full(len(x), np.inf)
    active = np.ones(len(x), dtype=bool)
    best_uv = uv.copy()
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        y, J = patch.map_points(uv[idx])
        r = x[idx] - y
        rn = np.hypot(r[:, 0], r[:, 1])
        better = rn < res[idx]
        res[idx[better]] = rn[better]
        best_uv[idx[better]] = uv[idx[better]]
        done = rn <= tol
        active[idx[done]] = False
        idx, r, J = idx[~done], r[~done], J[~done]
        if len(idx) == 0:
            break
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        det = np.where(np.abs(det) < 1e-300, 1e-300, det)
        du = (J[:, 1, 1] * r[:, 0] - J[:, 0, 1] * r[:, 1]) / det
        dv = (-J[:, 1, 0] * r[:, 0] + J[:, 0, 0] * r[:, 1]) / det
        step = np.stack([du, dv], axis=1)
        new = uv[idx] + step
        over = np.any((new < 0.0) | (new > 1.0), axis=1)
        new[over] = uv[idx[over]] + 0.5 * step[over]
        np.clip(new, 0.0, 1.0, out=new)
        stalled = np.all(np.abs(new - uv[idx]) < 1e-15, axis=1)
        active[idx[stalled]] = False
        uv[idx] = new
    return best_uv, res


class PatchInverter:
    """Batched inversion of the patch map with cached initial guesses."""

    def __init__(self, patch, resolution=None):
        self.patch = patch
        if resolution is None:
            resolution = 4 * max(patch.space.mesh_shape) + 1
        resolution = int(np.clip(resolution, 9, 401))
        g = np.linspace(0.0, 1.0, resolution)
        U, V = np.meshgrid(g, g, indexing='ij')
        self.samples_uv = np.stack([U.ravel(), V.ravel()], axis=1)
        xs = patch.map_points(self.samples_uv, jacobian=False)
        grid = xs.reshape(resolution, resolution, 2)
        du = np.hypot(*np.moveaxis(np.diff(grid, axis=0), -1, 0)).max()
        dv = np.hypot(*np.moveaxis(np.diff(grid, axis=1), -1, 0)).max()
        self.spacing = float(max(du, dv))
        self.tree = cKDTree(xs)
        self.tol = INVERSION_RTOL * patch.diameter()
        # iterate well past the acceptance tolerance; Newton converges quadratically
        self.polish_tol = 1e-3 * self.tol

    def __call__(self, x, uv0=None):
        """Invert points ``x`` of shape (n, 2).

        Returns ``uv`` (n, 2), ``residual`` (n,) and ``converged`` (n,).
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        dist, near = self.tree.query(x)
        # points farther than two sample spacings from every sample lie outside
        candidate = dist <= 2.0 * self.spacing
        uv = self.samples_uv[near].copy()
        res = dist.copy()
        if uv0 is not None:
            uv0 = np.atleast_2d(np.asarray(uv0, dtype=float))
            uv[candidate] = np.clip(uv0[candidate], 0.0, 1.0)
        idx = np.flatnonzero(candidate)
        if len(idx):
            u1, r1 = _newton(self.patch, x[idx], uv[idx], self.polish_tol)
            if uv0 is not None:
                bad = r1 > self.tol
                if np.any(bad):
                    u2, r2 = _newton(self.patch, x[idx[bad]], self.samples_uv[near[idx[bad]]], self.polish_tol)
                    take = r2 < r1[bad]
                    u1[np.flatnonzero(bad)[take]] = u2[take]
                    r1[np.flatnonzero(bad)[take]] = r2[take]
            uv[idx], res[idx] = u1, r1
        bad = idx[res[idx] > self.tol]
        if len(bad):
            bad = bad[~self._exits(x[bad], uv[bad])]
        if len(bad):
            g = (np.arange(MULTISTART) + 0.5) / MULTISTART
            for su in g:
                for sv in g:
                    if len(bad) == 0:
                        break
                    start = np.tile([su, sv], (len(bad), 1))
                    u2, r2 = _newton(self.patch, x[bad], start, self.polish_tol)
                    take = r2 < res[bad]
                    uv[bad[take]] = u2[take]
                    res[bad[take]] = r2[take]
                    bad = bad[res[bad] > self.tol]
        return uv, res, res <= self.tol


    def _exits(self, x, uv):
        """Points whose Newton step leaves the unit square through a side it rests on.

        Such points lie outside the image (for maps without folds), so the
        multistart is skipped for them.
        """
        y, J = self.patch.map_points(uv)
        r = x - y
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        du = (J[:, 1, 1] * r[:, 0] - J[:, 0, 1] * r[:, 1]) / det
        dv = (-J[:, 1, 0] * r[:, 0] + J[:, 0, 0] * r[:, 1]) / det
        tol = 1e-12
        out_u = ((uv[:, 0] <= tol) & (du < 0)) | ((uv[:, 0] >= 1 - tol) & (du > 0))
        out_v = ((uv[:, 1] <= tol) & (dv < 0)) | ((uv[:, 1] >= 1 - tol) & (dv > 0))
        return out_u | out_v


def inverter(patch):
    """Cached :class:`PatchInverter` of a patch."""
    inv = getattr(patch, '_inverter', None)
    if inv is None:
        inv = PatchInverter(patch)
        patch._inverter = inv
    return inv


def invert_point(patch, x):
    """Parametric preimage of the physical point ``x``.

    Non-convergence is a valid outcome and means ``x`` lies outside the
    patch image; the result then carries the best residual found.
    """
    uv, res, ok = inverter(patch)(np.asarray(x, dtype=float).reshape(1, 2))
    return InversionResult(uv[0], float(res[0]), bool(ok[0]))


def boundary_distance(uv):
    """Parametric distance to the boundary of the unit square."""
    uv = np.atleast_2d(uv)
    return np.minimum(np.minimum(uv[:, 0], 1.0 - uv[:, 0]),
                      np.minimum(uv[:, 1], 1.0 - uv[:, 1]))


def contains_points(patch, x, closed=False, tol=BOUNDARY_TOL):
    """Membership of points in the patch image.

    With ``closed=False`` a point must lie more than ``tol`` (parametric)
    inside the unit square; with ``closed=True`` boundary points count as
    inside.
    """
    uv, _, ok = inverter(patch)(x)
    if closed:
        return ok
    return ok & (boundary_distance(uv) > tol)


def contains(patch, x, closed=False):
    """Whether the physical point ``x`` lies inside the image of ``patch``."""
    return bool(contains_points(patch, np.asarray(x, dtype=float).reshape(1, 2), closed)[0])


class BoundaryCurve:
    """One parametric side of a patch, seen as a planar NURBS curve.

    The curve parameter ``t`` runs along the increasing parametric
    coordinate of the side.
    """

    def __init__(self, patch, side, owner=None):
        if side not in SIDES:
            raise ValueError('unknown side %r' % side)
        self.patch = patch
        self.side = side
        self.owner = owner
        kvu, kvv = patch.basis.kvs
        cp = patch.control_points
        w = patch.weights if patch.weights is not None else np.ones(patch.basis.shape)
        if side == 'left':
            self.kv, P, W = kvv, cp[0], w[0]
        elif side == 'right':
            self.kv, P, W = kvv, cp[-1], w[-1]
        elif side == 'bottom':
            self.kv, P, W = kvu, cp[:, 0], w[:, 0]
        else:
            self.kv, P, W = kvu, cp[:, -1], w[:, -1]
        self._P = np.asarray(P, dtype=float)
        self._W = np.asarray(W, dtype=float)

    def __repr__(self):
        return 'BoundaryCurve(owner=%r, side=%r)' % (self.owner, self.side)

    def params(self, t):
        """Parametric points of the owner patch on this side."""
        return self.patch.side_params(self.side, t)

    def evaluate(self, t, nders=0):
        """Points and derivatives; returns an array (nders + 1, n, 2)."""
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, 1.0)
        p = self.kv.p
        spans = find_spans(self.kv.knots, p, t)
        N = basis_ders(self.kv.knots, p, t, spans, min(nders, p))
        idx = spans[:, None] - p + np.arange(p + 1)
        P, W = self._P[idx], self._W[idx]
        A = [np.einsum('ni,nik->nk', N[:, k], P * W[..., None]) if k < N.shape[1]
             else np.zeros((len(t), 2)) for k in range(nders + 1)]
        w = [np.einsum('ni,ni->n', N[:, k], W) if k < N.shape[1]
             else np.zeros(len(t)) for k in range(nders + 1)]
        C = [A[0] / w[0][:, None]]
        if nders >= 1:
            C.append((A[1] - w[1][:, None] * C[0]) / w[0][:, None])
        if nders >= 2:
            C.append((A[2] - 2 * w[1][:, None] * C[1] - w[2][:, None] * C[0]) / w[0][:, None])
        return np.array(C)

    def points(self, t):
        return self.evaluate(t)[0]

    def tangents(self, t):
        return self.evaluate(t, 1)[1]

    def normals(self, t):
        """Unit outward normals (with respect to the owner patch)."""
        uv = self.params(t)
        _, J = self.patch.map_points(uv)
        axis = 1 if self.side in ('left', 'right') else 0
        tan = J[:, :, axis]
        if np.any(np.hypot(tan[:, 0], tan[:, 1]) < 1e-14):
            raise ValueError('degenerate boundary parameterization')
        n_hat = _OUTWARD[self.side]
        # cofactor of J maps parametric normals to physical normals
        nx = J[:, 1, 1] * n_hat[0] - J[:, 1, 0] * n_hat[1]
        ny = -J[:, 0, 1] * n_hat[0] + J[:, 0, 0] * n_hat[1]
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        s = np.sign(det)
        n = np.stack([nx * s, ny * s], axis=1)
        return n / np.hypot(n[:, 0], n[:, 1])[:, None]

    def length(self, t0=0.0, t1=1.0, n=16):
        """Arc length between two curve parameters (per knot span Gauss)."""
        br = self.kv.breaks
        cuts = np.unique(np.concatenate([[t0, t1], br[(br > t0) & (br < t1)]]))
        x, w = np.polynomial.legendre.leggauss(n)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            t = 0.5 * (a + b) + 0.5 * (b - a) * x
            d = self.tangents(t)
            total += 0.5 * (b - a) * np.dot(w, np.hypot(d[:, 0], d[:, 1]))
        return total


def normal_on_boundary(curve, t):
    """Unit outward normal of ``curve`` at parameter ``t``."""
    return curve.normals(np.array([float(t)]))[0]


def project_to_curve(curve, x, samples=64):
    """Closest point of ``curve`` to ``x``.

    Returns ``(t, foot, distance)``.
    """
    x = np.asarray(x, dtype=float)
    t = np.unique(np.concatenate([np.linspace(0.0, 1.0, samples), curve.kv.breaks]))
    d = curve.points(t) - x
    k = int(np.argmin(np.einsum('ij,ij->i', d, d)))
    tk = t[k]
    for _ in range(50):
        C, C1, C2 = curve.evaluate(np.array([tk]), 2)[:, 0]
        r = C - x
        g = np.dot(r, C1)
        dg = np.dot(C1, C1) + np.dot(r, C2)
        if dg <= 0:
            dg = np.dot(C1, C1)
        step = -g / dg
        tn = min(1.0, max(0.0, tk + step))
        if abs(tn - tk) < 1e-16:
            tk = tn
            break
        tk = tn
    foot = curve.points(np.array([tk]))[0]
    return tk, foot, float(np.hypot(*(x - foot)))


def solve_line_crossing(patch, curve, axis, value, t_guess, other_guess, t_range, max_iter=40):
    """Solve ``F(u, v) = C(t)`` with parametric coordinate ``axis`` fixed.

    Unknowns are the free parametric coordinate and the curve parameter.
    Returns ``(t, other, ok)``.
    """
    t, s = float(t_guess), float(other_guess)
    lo, hi = t_range
    free = 1 - axis
    for _ in range(max_iter):
        uv = np.empty((1, 2))
        uv[0, axis] = value
        uv[0, free] = s
        y, J = patch.map_points(uv)
        C, dC = curve.evaluate(np.array([t]), 1)[:, 0]
        r = y[0] - C
        if np.hypot(*r) < 1e-15 * (1.0 + np.hypot(*C)):
            break
        A = np.array([[J[0, 0, free], -dC[0]], [J[0, 1, free], -dC[1]]])
        try:
            ds, dt = np.linalg.solve(A, -r)
        except np.linalg.LinAlgError:
            return t, s, False
        s = min(1.0, max(0.0, s + ds))
        t = min(hi, max(lo, t + dt))
        if abs(ds) < 1e-16 and abs(dt) < 1e-16:
            break
    uv = np.empty((1, 2))
    uv[0, axis] = value
    uv[0, free] = s
    y = patch.map_points(uv, jacobian=False)[0]
    C = curve.points(np.array([t]))[0]
    ok = np.hypot(*(y - C)) <= 1e-10 * (1.0 + patch.diameter())
    return t, s, bool(ok)
