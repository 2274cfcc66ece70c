"""B-spline and NURBS machinery: knot vectors, tensor bases and spline patches.

The parametric domain of every patch is the unit square. Knot vectors given
on another interval are rescaled affinely when they are created through
:meth:`KnotVector.rescaled`.

Patches carry two tensor bases: the *geometry* basis that defines the map
``F: [0,1]^2 -> R^2`` and an *analysis* space (``patch.space``) on which the
discrete solution lives. By default the two coincide; fixtures usually
describe a coarse (often single-element) geometry and attach a finer analysis
space with :meth:`SplinePatch.with_space`.
"""
from functools import lru_cache

import numpy as np

from .kernels import basis_ders, find_spans

MAX_DERIVATIVE = 2
SIDES = ('left', 'right', 'bottom', 'top')


@lru_cache(maxsize=64)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


class KnotVector:
    """Open knot vector of degree ``p`` on [0, 1].

    Parameters
    ----------
    degree : int
        Polynomial degree.
    knots : array_like
        Non-decreasing knot sequence. The first and last knot must be
        repeated exactly ``degree + 1`` times and equal 0 and 1.
    """

    def __init__(self, degree, knots):
        knots = np.asarray(knots, dtype=float)
        p = int(degree)
        if p < 0:
            raise ValueError('degree must be non-negative')
        if knots.ndim != 1 or len(knots) < 2 * (p + 1):
            raise ValueError('knot vector too short for degree %d' % p)
        if np.any(np.diff(knots) < 0):
            raise ValueError('knots must be non-decreasing')
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValueError('knot vector must span [0, 1]; use KnotVector.rescaled')
        if np.any(knots[:p + 1] != 0.0) or np.any(knots[-p - 1:] != 1.0):
            raise ValueError('knot vector is not open')
        if knots[p + 1] == 0.0 or knots[-p - 2] == 1.0:
            raise ValueError('end knots repeated more than degree + 1 times')
        breaks, mult = np.unique(knots, return_counts=True)
        if len(mult) > 2 and mult[1:-1].max() > p:
            raise ValueError('interior knot multiplicity exceeds degree')
        self.p = p
        self.knots = knots
        self.knots.flags.writeable = False

    @classmethod
    def rescaled(cls, degree, knots):
        """Build a knot vector after mapping ``knots`` affinely onto [0, 1]."""
        knots = np.asarray(knots, dtype=float)
        a, b = knots[0], knots[-1]
        if b <= a:
            raise ValueError('degenerate knot vector')
        scaled = (knots - a) / (b - a)
        scaled[knots == a] = 0.0
        scaled[knots == b] = 1.0
        return cls(degree, scaled)

    @classmethod
    def from_breaks(cls, degree, breaks, multiplicities=None):
        """Open knot vector from breakpoints and interior multiplicities."""
        breaks = np.asarray(breaks, dtype=float)
        if multiplicities is None:
            multiplicities = np.ones(len(breaks) - 2, dtype=int)
        knots = [breaks[0]] * (degree + 1)
        for b, m in zip(breaks[1:-1], multiplicities):
            knots += [b] * int(m)
        knots += [breaks[-1]] * (degree + 1)
        return cls.rescaled(degree, knots)

    @classmethod
    def uniform(cls, degree, n_elements, continuity=None):
        """Uniform knot vector with ``n_elements`` elements."""
        if continuity is None:
            continuity = degree - 1
        mult = degree - continuity
        return cls.from_breaks(degree, np.linspace(0.0, 1.0, n_elements + 1),
                               [mult] * (n_elements - 1))

    def __repr__(self):
        return 'KnotVector(%d, %s)' % (self.p, np.array2string(self.knots, precision=4))

    def __eq__(self, other):
        return (isinstance(other, KnotVector) and self.p == other.p
                and np.array_equal(self.knots, other.knots))

    def __hash__(self):
        return hash((self.p, self.knots.tobytes()))

    @property
    def numdofs(self):
        """Number of basis functions."""
        return len(self.knots) - self.p - 1

    @property
    def breaks(self):
        """Distinct knot values."""
        return np.unique(self.knots)

    @property
    def numelements(self):
        return len(self.breaks) - 1

    def multiplicities(self):
        return np.unique(self.knots, return_counts=True)[1]

    def element_spans(self):
        """Knot span index of every element (non-empty interval)."""
        return find_spans(self.knots, self.p, 0.5 * (self.breaks[:-1] + self.breaks[1:]))

    def element_of(self, u):
        """Element index containing each parameter (right end -> last)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        e = np.searchsorted(self.breaks, u, side='right') - 1
        return np.clip(e, 0, self.numelements - 1)

    def greville(self):
        """Greville abscissae (knot averages)."""
        p = self.p
        if p == 0:
            return 0.5 * (self.knots[:-1] + self.knots[1:])
        kv = self.knots
        return np.array([kv[i + 1:i + p + 1].mean() for i in range(self.numdofs)])

    def continuity(self):
        """Continuity order at each interior breakpoint."""
        return self.p - self.multiplicities()[1:-1]

    def refine(self, n_subdiv):
        """Split every element into ``n_subdiv`` equal parts (knot insertion)."""
        n_subdiv = int(n_subdiv)
        if n_subdiv < 1:
            raise ValueError('n_subdiv must be >= 1')
        if n_subdiv == 1:
            return self
        br = self.breaks
        new = [br[k] + (br[k + 1] - br[k]) * np.arange(1, n_subdiv) / n_subdiv
               for k in range(len(br) - 1)]
        knots = np.sort(np.concatenate([self.knots] + new))
        return KnotVector(self.p, knots)

    def insertion_matrix(self, fine):
        """Matrix ``T`` with ``B_coarse = T.T @ B_fine`` (``fine`` must be a refinement)."""
        if fine.p != self.p:
            raise ValueError('degree mismatch')
        T = np.eye(self.numdofs)
        knots = self.knots.copy()
        extra = _knot_difference(fine.knots, knots)
        p = self.p
        for u in extra:
            k = int(find_spans(knots, p, u)[0])
            n_old = len(knots) - p - 1
            A = np.zeros((n_old + 1, n_old))
            for i in range(n_old + 1):
                if i <= k - p:
                    A[i, i] = 1.0
                elif i > k:
                    A[i, i - 1] = 1.0
                else:
                    alpha = (u - knots[i]) / (knots[i + p] - knots[i])
                    A[i, i] = alpha
                    A[i, i - 1] = 1.0 - alpha
            T = A @ T
            knots = np.sort(np.append(knots, u))
        return T


def _knot_difference(fine, coarse):
    fine = list(fine)
    for u in coarse:
        for k, v in enumerate(fine):
            if v == u:
                del fine[k]
                break
        else:
            raise ValueError('fine knot vector does not refine the coarse one')
    return np.array(fine)


def find_span(kv, u):
    """Knot span index ``s`` with ``knots[s] <= u < knots[s+1]``.

    ``u == 1`` maps to the last non-empty span.
    """
    return int(find_spans(kv.knots, kv.p, np.array([float(u)]))[0])


def eval_basis(kv, u, n_derivs=0):
    """Nonzero basis functions of ``kv`` at ``u`` and their derivatives.

    Returns an array of shape ``(n_derivs + 1, p + 1)`` for the basis
    functions ``span - p, ..., span`` where ``span = find_span(kv, u)``.
    """
    if n_derivs > MAX_DERIVATIVE:
        raise ValueError('derivatives above order %d are not supported' % MAX_DERIVATIVE)
    x = np.array([float(u)])
    spans = find_spans(kv.knots, kv.p, x)
    return basis_ders(kv.knots, kv.p, x, spans, n_derivs)[0]


def collocation_matrix(kv, x):
    """Dense matrix ``A[r, k] = N_k(x_r)`` of the basis of ``kv``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    spans = find_spans(kv.knots, kv.p, x)
    N = basis_ders(kv.knots, kv.p, x, spans, 0)[:, 0]
    A = np.zeros((len(x), kv.numdofs))
    cols = spans[:, None] - kv.p + np.arange(kv.p + 1)
    A[np.arange(len(x))[:, None], cols] = N
    return A


class TensorBasis:
    """Tensor-product B-spline basis on the unit square.

    Basis function ``(a, b)`` has flat index ``a * n_v + b``; element
    ``(eu, ev)`` has flat index ``eu * ne_v + ev``.
    """

    def __init__(self, kv_u, kv_v):
        self.kvs = (kv_u, kv_v)
        self.degrees = (kv_u.p, kv_v.p)
        self.shape = (kv_u.numdofs, kv_v.numdofs)
        self.mesh_shape = (kv_u.numelements, kv_v.numelements)
        self.breaks = (kv_u.breaks, kv_v.breaks)
        self._espans = (kv_u.element_spans(), kv_v.element_spans())

    def __eq__(self, other):
        return isinstance(other, TensorBasis) and self.kvs == other.kvs

    def __hash__(self):
        return hash(self.kvs)

    @property
    def numdofs(self):
        return self.shape[0] * self.shape[1]

    @property
    def numelements(self):
        return self.mesh_shape[0] * self.mesh_shape[1]

    @property
    def degree(self):
        return max(self.degrees)

    def element_index(self, eu, ev):
        return eu * self.mesh_shape[1] + ev

    def element_ij(self, e):
        return divmod(int(e), self.mesh_shape[1])

    def element_box(self, e):
        """Parametric box ``((u0, u1), (v0, v1))`` of element ``e``."""
        eu, ev = self.element_ij(e)
        bu, bv = self.breaks
        return (bu[eu], bu[eu + 1]), (bv[ev], bv[ev + 1])

    def element_boxes(self):
        """Array of shape ``(numelements, 4)`` with ``u0, u1, v0, v1``."""
        bu, bv = self.breaks
        U0, V0 = np.meshgrid(bu[:-1], bv[:-1], indexing='ij')
        U1, V1 = np.meshgrid(bu[1:], bv[1:], indexing='ij')
        return np.stack([U0.ravel(), U1.ravel(), V0.ravel(), V1.ravel()], axis=1)

    def element_dofs(self, e):
        """Flat indices of the ``(p_u+1)(p_v+1)`` functions active on element ``e``."""
        eu, ev = self.element_ij(e)
        pu, pv = self.degrees
        su, sv = self._espans[0][eu], self._espans[1][ev]
        a = np.arange(su - pu, su + 1)
        b = np.arange(sv - pv, sv + 1)
        return (a[:, None] * self.shape[1] + b[None, :]).ravel()

    def support_elements(self, dof):
        """Element ranges ``(eu0, eu1), (ev0, ev1)`` (half-open) of a function's support."""
        a, b = divmod(int(dof), self.shape[1])
        out = []
        for k, idx in enumerate((a, b)):
            kv = self.kvs[k]
            lo, hi = kv.knots[idx], kv.knots[idx + kv.p + 1]
            br = self.breaks[k]
            out.append((int(np.searchsorted(br, lo)), int(np.searchsorted(br, hi))))
        return tuple(out)

    def eval(self, uv, nders=1, elements=None):
        """Evaluate the active basis functions at parametric points.

        Parameters
        ----------
        uv : ndarray, shape (n, 2)
        nders : int
            0 for values only, 1 to include first derivatives.
        elements : ndarray of int, optional
            Element of each point; overrides the span search, which matters
            for points lying on element boundaries.

        Returns
        -------
        dofs : ndarray (n, nloc) of flat basis indices
        vals : ndarray (nders + 1 + nders, n, nloc)
            ``vals[0]`` values, ``vals[1]`` d/du and ``vals[2]`` d/dv when
            ``nders >= 1``.
        """
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        (kvu, kvv), (pu, pv) = self.kvs, self.degrees
        if elements is None:
            su = find_spans(kvu.knots, pu, uv[:, 0])
            sv = find_spans(kvv.knots, pv, uv[:, 1])
        else:
            eu, ev = np.divmod(np.asarray(elements, dtype=np.intp), self.mesh_shape[1])
            su, sv = self._espans[0][eu], self._espans[1][ev]
        nd = min(nders, 1)
        Nu = basis_ders(kvu.knots, pu, uv[:, 0], su, nd)
        Nv = basis_ders(kvv.knots, pv, uv[:, 1], sv, nd)
        a = su[:, None] - pu + np.arange(pu + 1)
        b = sv[:, None] - pv + np.arange(pv + 1)
        dofs = (a[:, :, None] * self.shape[1] + b[:, None, :]).reshape(len(uv), -1)
        vals = [np.einsum('ni,nj->nij', Nu[:, 0], Nv[:, 0]).reshape(len(uv), -1)]
        if nd:
            vals.append(np.einsum('ni,nj->nij', Nu[:, 1], Nv[:, 0]).reshape(len(uv), -1))
            vals.append(np.einsum('ni,nj->nij', Nu[:, 0], Nv[:, 1]).reshape(len(uv), -1))
        return dofs, np.array(vals)

    def refine(self, n_subdiv):
        nu, nv = np.broadcast_to(np.asarray(n_subdiv, dtype=int), (2,))
        return TensorBasis(self.kvs[0].refine(nu), self.kvs[1].refine(nv))


def analysis_knots(geometry_kv, degree, subdivisions):
    """Analysis knot vector of ``degree`` on a geometry knot vector.

    Every geometry element is split into ``subdivisions`` equal parts. The
    continuity at geometry breakpoints is inherited (capped at ``degree-1``);
    new breakpoints get maximal smoothness.
    """
    br = geometry_kv.breaks
    inherited = geometry_kv.continuity()
    breaks = [br[0]]
    mult = []
    for k in range(len(br) - 1):
        inner = br[k] + (br[k + 1] - br[k]) * np.arange(1, subdivisions) / subdivisions
        breaks.extend(inner)
        mult.extend([1] * len(inner))
        breaks.append(br[k + 1])
        if k < len(br) - 2:
            mult.append(degree - min(degree - 1, int(inherited[k])))
    return KnotVector.from_breaks(degree, np.array(breaks), mult)


class SplinePatch:
    """B-spline or NURBS map of the unit square into the plane.

    Parameters
    ----------
    kv_u, kv_v : KnotVector
        Geometry knot vectors.
    control_points : array_like, shape (n_u, n_v, 2)
    weights : array_like, shape (n_u, n_v), optional
        Positive NURBS weights.
    space : TensorBasis, optional
        Analysis basis; defaults to the geometry basis.
    check : bool
        Verify the Jacobian sign at Gauss points of every element.
    """

    def __init__(self, kv_u, kv_v, control_points, weights=None, space=None, check=True):
        self.basis = TensorBasis(kv_u, kv_v)
        cp = np.array(control_points, dtype=float)
        if cp.shape != self.basis.shape + (2,):
            raise ValueError('control grid %s does not match basis %s'
                             % (cp.shape[:2], self.basis.shape))
        self.control_points = cp
        if weights is not None:
            weights = np.array(weights, dtype=float)
            if weights.shape != self.basis.shape:
                raise ValueError('weight grid does not match basis')
            if np.any(weights <= 0):
                raise ValueError('NURBS weights must be positive')
        self.weights = weights
        self.space = space if space is not None else self.basis
        self.orientation = 1.0
        if check:
            self.orientation = self._check_jacobian()

    @property
    def is_rational(self):
        return self.weights is not None

    def with_space(self, degree, subdivisions):
        """Copy of the patch with an analysis space of the given degree.

        ``subdivisions`` is the number of analysis elements per geometry
        element in each direction (int or pair).
        """
        su, sv = np.broadcast_to(np.asarray(subdivisions, dtype=int), (2,))
        du, dv = np.broadcast_to(np.asarray(degree, dtype=int), (2,))
        space = TensorBasis(analysis_knots(self.basis.kvs[0], int(du), int(su)),
                            analysis_knots(self.basis.kvs[1], int(dv), int(sv)))
        out = SplinePatch(*self.basis.kvs, self.control_points, self.weights,
                          space=space, check=False)
        out.orientation = self.orientation
        return out

    def interpolate(self, func):
        """Coefficients of the analysis-space interpolant of ``func(x)``.

        Interpolates at the tensor Greville points; exact for functions in
        the push-forward of the space (e.g. polynomials of degree ``<= p``
        on affine patches). Returns a flat array in basis order.
        """
        kvu, kvv = self.space.kvs
        gu, gv = kvu.greville(), kvv.greville()
        U, V = np.meshgrid(gu, gv, indexing='ij')
        x = self.map_points(np.stack([U.ravel(), V.ravel()], axis=1), jacobian=False)
        F = np.asarray(func(x), dtype=float).reshape(len(gu), len(gv))
        Au, Av = collocation_matrix(kvu, gu), collocation_matrix(kvv, gv)
        return np.linalg.solve(Av, np.linalg.solve(Au, F).T).T.ravel()

    def _check_jacobian(self):
        pu, pv = self.basis.degrees
        xg, _ = gauss_legendre(max(pu, pv) + 1)
        pts = []
        for box in self.basis.element_boxes():
            u = box[0] + (box[1] - box[0]) * xg
            v = box[2] + (box[3] - box[2]) * xg
            U, V = np.meshgrid(u, v, indexing='ij')
            pts.append(np.stack([U.ravel(), V.ravel()], axis=1))
        _, J = self.map_points(np.concatenate(pts))
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if np.all(det > 0):
            return 1.0
        if np.all(det < 0):
            return -1.0
        raise ValueError('patch map is not regular: Jacobian determinant changes sign')

    def map_points(self, uv, jacobian=True):
        """Physical points and Jacobians ``dx/d(u,v)`` at parametric points.

        Returns ``x`` of shape (n, 2) and ``J`` of shape (n, 2, 2) with
        ``J[:, k, 0] = dx_k/du`` and ``J[:, k, 1] = dx_k/dv``.
        """
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        (kvu, kvv), (pu, pv) = self.basis.kvs, self.basis.degrees
        su = find_spans(kvu.knots, pu, uv[:, 0])
        sv = find_spans(kvv.knots, pv, uv[:, 1])
        nd = 1 if jacobian else 0
        Nu = basis_ders(kvu.knots, pu, uv[:, 0], su, nd)
        Nv = basis_ders(kvv.knots, pv, uv[:, 1], sv, nd)
        a = su[:, None] - pu + np.arange(pu + 1)
        b = sv[:, None] - pv + np.arange(pv + 1)
        P = self.control_points[a[:, :, None], b[:, None, :]]
        if self.weights is None:
            x = np.einsum('ni,nj,nijk->nk', Nu[:, 0], Nv[:, 0], P)
            if not jacobian:
                return x
            xu = np.einsum('ni,nj,nijk->nk', Nu[:, 1], Nv[:, 0], P)
            xv = np.einsum('ni,nj,nijk->nk', Nu[:, 0], Nv[:, 1], P)
            return x, np.stack([xu, xv], axis=2)
        w = self.weights[a[:, :, None], b[:, None, :]]
        Pw = P * w[..., None]
        W = np.einsum('ni,nj,nij->n', Nu[:, 0], Nv[:, 0], w)
        A = np.einsum('ni,nj,nijk->nk', Nu[:, 0], Nv[:, 0], Pw)
        x = A / W[:, None]
        if not jacobian:
            return x
        Wu = np.einsum('ni,nj,nij->n', Nu[:, 1], Nv[:, 0], w)
        Wv = np.einsum('ni,nj,nij->n', Nu[:, 0], Nv[:, 1], w)
        Au = np.einsum('ni,nj,nijk->nk', Nu[:, 1], Nv[:, 0], Pw)
        Av = np.einsum('ni,nj,nijk->nk', Nu[:, 0], Nv[:, 1], Pw)
        xu = (Au - Wu[:, None] * x) / W[:, None]
        xv = (Av - Wv[:, None] * x) / W[:, None]
        return x, np.stack([xu, xv], axis=2)

    def map_point(self, uv):
        """Single-point version of :meth:`map_points`."""
        x, J = self.map_points(np.asarray(uv, dtype=float).reshape(1, 2))
        return x[0], J[0]

    def corner_images(self):
        """Physical images of the element corners of the analysis mesh.

        Returns an array of shape ``(ne_u + 1, ne_v + 1, 2)``.
        """
        bu, bv = self.space.breaks
        U, V = np.meshgrid(bu, bv, indexing='ij')
        x = self.map_points(np.stack([U.ravel(), V.ravel()], axis=1), jacobian=False)
        return x.reshape(len(bu), len(bv), 2)

    def element_diameters(self, samples=3):
        """Physical element sizes ``h_K`` (diagonal of the bounding box).

        The bounding box is taken over the images of ``samples`` points per
        element edge, which includes the element corners.
        """
        boxes = self.space.element_boxes()
        t = np.linspace(0.0, 1.0, samples)
        T0, T1 = np.meshgrid(t, t, indexing='ij')
        m = (T0 == 0) | (T0 == 1) | (T1 == 0) | (T1 == 1)
        s, r = T0[m], T1[m]
        u = boxes[:, 0:1] + (boxes[:, 1:2] - boxes[:, 0:1]) * s
        v = boxes[:, 2:3] + (boxes[:, 3:4] - boxes[:, 2:3]) * r
        x = self.map_points(np.stack([u.ravel(), v.ravel()], axis=1), jacobian=False)
        x = x.reshape(len(boxes), -1, 2)
        ext = x.max(axis=1) - x.min(axis=1)
        return np.hypot(ext[:, 0], ext[:, 1])

    def diameter(self):
        """Diagonal of the control-point bounding box (encloses the image)."""
        cp = self.control_points.reshape(-1, 2)
        ext = cp.max(axis=0) - cp.min(axis=0)
        return float(np.hypot(*ext))

    def side_params(self, side, t):
        """Parametric points on ``side`` for curve parameters ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z = np.zeros_like(t)
        return {
            'left': np.stack([z, t], axis=1),
            'right': np.stack([z + 1.0, t], axis=1),
            'bottom': np.stack([t, z], axis=1),
            'top': np.stack([t, z + 1.0], axis=1),
        }[side]

    def side_breaks(self, side):
        """Analysis breakpoints along ``side`` in the curve parameter."""
        return self.space.breaks[1 if side in ('left', 'right') else 0]

    def h_refine(self, n_subdiv):
        """Patch with every geometry and analysis element split ``n_subdiv`` times."""
        return h_refine(self, n_subdiv)


def h_refine(patch, n_subdiv):
    """Uniform knot-insertion refinement of a patch (geometry preserved)."""
    nu, nv = np.broadcast_to(np.asarray(n_subdiv, dtype=int), (2,))
    if nu < 1 or nv < 1:
        raise ValueError('n_subdiv must be >= 1')
    if nu == 1 and nv == 1:
        return patch
    kvu, kvv = patch.basis.kvs
    fu, fv = kvu.refine(nu), kvv.refine(nv)
    Tu, Tv = kvu.insertion_matrix(fu), kvv.insertion_matrix(fv)
    w = patch.weights if patch.weights is not None else np.ones(patch.basis.shape)
    Pw = np.concatenate([patch.control_points * w[..., None], w[..., None]], axis=2)
    Pw = np.einsum('ia,jb,abk->ijk', Tu, Tv, Pw)
    wf = Pw[..., 2]
    cp = Pw[..., :2] / wf[..., None]
    space = patch.space.refine((nu, nv))
    out = SplinePatch(fu, fv, cp, wf if patch.weights is not None else None,
                      space=space, check=False)
    out.orientation = patch.orientation
    return out


def map_point(patch, uv):
    """Physical point and 2x2 Jacobian of ``patch`` at ``uv``."""
    return patch.map_point(uv)


def bilinear_patch(corners, degree=1):
    """Bezier patch of the given degree reproducing a bilinear quadrilateral.

    ``corners`` are ordered (u0v0, u1v0, u0v1, u1v1).
    """
    c = np.asarray(corners, dtype=float)
    kv = KnotVector(degree, [0.0] * (degree + 1) + [1.0] * (degree + 1))
    g = np.linspace(0.0, 1.0, degree + 1)
    U, V = np.meshgrid(g, g, indexing='ij')
    cp = ((1 - U)[..., None] * (1 - V)[..., None] * c[0] + U[..., None] * (1 - V)[..., None] * c[1]
          + (1 - U)[..., None] * V[..., None] * c[2] + U[..., None] * V[..., None] * c[3])
    return SplinePatch(kv, kv, cp)


def rectangle_patch(x0, x1, y0, y1):
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]`` as a bilinear patch."""
    return bilinear_patch([(x0, y0), (x1, y0), (x0, y1), (x1, y1)])


def quarter_annulus(r_inner, r_outer):
    """Exact quarter annulus (9 control points, biquadratic NURBS).

    ``u`` runs radially outward, ``v`` counter-clockwise from the x-axis.
    """
    kv = KnotVector(2, [0, 0, 0, 1, 1, 1])
    kv_u = kv_v = kv
    s = np.sqrt(0.5)
    cp = np.zeros((3, 3, 2))
    w = np.ones((3, 3))
    for a, r in enumerate((r_inner, 0.5 * (r_inner + r_outer), r_outer)):
        cp[a] = [(r, 0.0), (r, r), (0.0, r)]
        w[a] = [1.0, s, 1.0]
    return SplinePatch(kv_u, kv_v, cp, w)
