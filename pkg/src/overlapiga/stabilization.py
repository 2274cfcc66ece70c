"""Minimal stabilization of interface fluxes on badly cut elements.

A cut element whose visible area ratio is below ``theta`` is bad. Its
normal flux is replaced by the normal derivative of a polynomial: the
L2 projection of the basis functions of a nearby good element onto tensor
Bernstein polynomials, extended naturally onto the bad element.
"""
import csv
from dataclasses import dataclass
from math import comb

import numpy as np

from .cutcell import tensor_rule
from .multimesh import COVERED, CUT

DEFAULT_THETA = 0.1
RING_RADIUS = 2
DISTANCE_FACTOR = 2.0
BOX_MARGIN = 0.1
MAX_PROJECTION_COND = 1e12


class IsolatedBadElementError(RuntimeError):
    """No good neighbor exists within the doubled search radius."""


class IllConditionedProjectionError(RuntimeError):
    """The local Bernstein mass matrix is numerically singular."""


@dataclass
class GoodBadPartition:
    """Good and bad visible elements per patch.

    ``good[i]`` and ``bad[i]`` are boolean arrays over the elements of
    patch ``i``; covered elements are neither.
    """
    theta: float
    good: dict
    bad: dict
    n_cut: int

    @property
    def n_bad(self):
        return int(sum(b.sum() for b in self.bad.values()))

    @property
    def bad_fraction(self):
        """Share of bad elements among all cut elements."""
        return self.n_bad / self.n_cut if self.n_cut else 0.0

    def is_bad(self, i, e):
        return bool(self.bad[i][e])


def classify_good_bad(union, theta=DEFAULT_THETA):
    """Split visible elements into good and bad ones.

    An element is bad iff it is cut with visible ratio below ``theta``.
    The top patch is never cut, hence never bad.
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError('theta must lie in (0, 1]')
    good, bad, n_cut = {}, {}, 0
    for i in range(len(union)):
        st = union.classify(i)
        cut = st.status == CUT
        n_cut += int(cut.sum())
        bad[i] = cut & (st.ratio < theta)
        good[i] = (st.status != COVERED) & ~bad[i]
    return GoodBadPartition(float(theta), good, bad, n_cut)


@dataclass
class NeighborPairing:
    """Bad element ``(patch, element)`` paired with a good one."""
    patch: int
    element: int
    neighbor_patch: int
    neighbor_element: int
    step: int
    radius: float
    ratio: float


def bernstein(p, s, deriv=False):
    """Bernstein polynomials of degree ``p`` (and derivatives) at ``s``.

    Returns an array (len(s), p + 1), or a pair with the derivatives.
    """
    s = np.asarray(s, dtype=float)[:, None]
    a = np.arange(p + 1)
    c = np.array([comb(p, k) for k in a], dtype=float)
    B = c * s ** a * (1.0 - s) ** (p - a)
    if not deriv:
        return B
    if p == 0:
        return B, np.zeros_like(B)
    lower = bernstein(p - 1, s[:, 0])
    D = np.zeros_like(B)
    D[:, 1:] += p * lower
    D[:, :-1] -= p * lower
    return B, D


@dataclass
class BernsteinExtension:
    """Polynomial extension of the basis functions active on a good element.

    ``coef`` has shape (len(dofs), (p + 1)**2): row ``k`` holds the
    Bernstein coefficients of the projection of basis function ``dofs[k]``
    of patch ``patch``. The Bernstein basis lives on ``box`` (the good
    element's box with margin); ``domain`` is the box covering both the good
    and the bad element, on which the polynomials are evaluated.
    """
    patch: int
    element: int
    box: tuple
    domain: tuple
    degree: int
    dofs: np.ndarray
    coef: np.ndarray
    cond: float

    def _basis(self, x):
        x0, x1, y0, y1 = self.box
        p = self.degree
        bx, dx = bernstein(p, (x[:, 0] - x0) / (x1 - x0), True)
        by, dy = bernstein(p, (x[:, 1] - y0) / (y1 - y0), True)
        val = np.einsum('na,nb->nab', bx, by).reshape(len(x), -1)
        gx = np.einsum('na,nb->nab', dx / (x1 - x0), by).reshape(len(x), -1)
        gy = np.einsum('na,nb->nab', bx, dy / (y1 - y0)).reshape(len(x), -1)
        return val, np.stack([gx, gy], axis=-1)

    def values(self, x):
        """Extended values at physical points, shape (n, len(dofs))."""
        val, _ = self._basis(np.atleast_2d(x))
        return val @ self.coef.T

    def gradients(self, x):
        """Extended gradients, shape (n, len(dofs), 2)."""
        _, grad = self._basis(np.atleast_2d(x))
        return np.einsum('kl,nlc->nkc', self.coef, grad)

    def normal_derivatives(self, x, normal):
        """Extended normal derivatives, shape (n, len(dofs))."""
        return np.einsum('nkc,nc->nk', self.gradients(x), np.atleast_2d(normal))


def _box_gap(a, boxes):
    dx = np.maximum(0.0, np.maximum(boxes[:, 0] - a[1], a[0] - boxes[:, 1]))
    dy = np.maximum(0.0, np.maximum(boxes[:, 2] - a[3], a[2] - boxes[:, 3]))
    return np.hypot(dx, dy)


def _candidates(union, partition, i, e, ring, dist_factor):
    """Ordered good-neighbor candidates: Step 1 first, then Step 2."""
    space = union.patches[i].space
    eu, ev = space.element_ij(e)
    nu, nv = space.mesh_shape
    ratio = union.classify(i).ratio
    step1 = []
    for du in range(-ring, ring + 1):
        for dv in range(-ring, ring + 1):
            a, b = eu + du, ev + dv
            if (du, dv) == (0, 0) or not (0 <= a < nu and 0 <= b < nv):
                continue
            k = space.element_index(a, b)
            if partition.good[i][k]:
                step1.append(((du * du + dv * dv, -ratio[k], i, k), (i, k, 1, ring)))
    if step1:
        return [c for _, c in sorted(step1)]
    box = union.element_bboxes(i)[e]
    radius = dist_factor * union.element_sizes(i)[e]
    step2 = []
    for m in range(i + 1, len(union)):
        gap = _box_gap(box, union.element_bboxes(m))
        r_m = union.classify(m).ratio
        for k in np.flatnonzero((gap <= radius) & partition.good[m]):
            step2.append(((gap[k], -r_m[k], m, int(k)), (m, int(k), 2, radius)))
    return [c for _, c in sorted(step2)]


def build_extension(union, pairing):
    """Bernstein projection of the basis functions of the good neighbor.

    The projection is computed over the visible part of the neighbor
    element with (p+2)^2 Gauss points (per subcell when it is cut). The
    Bernstein basis is set on the neighbor's box with a relative margin and
    evaluated on the bad element by natural polynomial extension.
    """
    k, e = pairing.neighbor_patch, pairing.neighbor_element
    patch = union.patches[k]
    space = patch.space
    p = space.degree
    x0, x1, y0, y1 = union.element_bboxes(k)[e]
    mx, my = BOX_MARGIN * (x1 - x0), BOX_MARGIN * (y1 - y0)
    box = (x0 - mx, x1 + mx, y0 - my, y1 + my)
    bb = np.vstack([box, union.element_bboxes(pairing.patch)[pairing.element]])
    domain = (bb[:, 0].min(), bb[:, 1].max(), bb[:, 2].min(), bb[:, 3].max())
    if union.classify(k).status[e] == CUT:
        uv, w = union.cut_quadrature(k, e, p + 2)
    else:
        uv, w = tensor_rule(space.element_box(e), p + 2)
    x, J = patch.map_points(uv)
    wx = w * np.abs(J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0])
    dofs, vals = space.eval(uv, 0, elements=np.full(len(uv), e))
    ext = BernsteinExtension(k, e, box, domain, p, dofs[0], np.empty(0), 0.0)
    b, _ = ext._basis(x)
    M = b.T @ (wx[:, None] * b)
    F = b.T @ (wx[:, None] * vals[0])
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > MAX_PROJECTION_COND:
        raise IllConditionedProjectionError('ill-conditioned local projection (cond %.3g)' % cond)
    L = np.linalg.cholesky(M)
    c = np.linalg.solve(L.T, np.linalg.solve(L, F))
    ext.coef = c.T
    ext.cond = cond
    return ext


def find_good_neighbor(union, partition, i, e):
    """Good neighbor of the bad element ``e`` of patch ``i``.

    Returns ``(pairing, extension)``. Step 1 searches the same patch in
    rings of ``RING_RADIUS`` element layers; Step 2 searches higher patches
    within ``DISTANCE_FACTOR * h``. Both radii are doubled once before
    giving up. Candidates with an ill-conditioned projection are skipped.
    """
    ratio = union.classify(i).ratio[e]
    for scale in (1, 2):
        for cand in _candidates(union, partition, i, e, RING_RADIUS * scale, DISTANCE_FACTOR * scale):
            m, k, step, radius = cand
            pairing = NeighborPairing(i, int(e), m, k, step, float(radius), float(ratio))
            try:
                return pairing, build_extension(union, pairing)
            except IllConditionedProjectionError:
                continue
    x = union.element_bboxes(i)[e]
    raise IsolatedBadElementError('isolated bad element %d of patch %d near (%.6g, %.6g)'
                                  % (e, i, 0.5 * (x[0] + x[1]), 0.5 * (x[2] + x[3])))


class Stabilizer:
    """Pairings and extensions for every bad element of a union."""

    def __init__(self, union, theta=DEFAULT_THETA):
        self.union = union
        self.partition = classify_good_bad(union, theta)
        self.pairings = {}
        self.extensions = {}
        for i, mask in self.partition.bad.items():
            for e in np.flatnonzero(mask):
                pair, ext = find_good_neighbor(union, self.partition, i, int(e))
                self.pairings[(i, int(e))] = pair
                self.extensions[(i, int(e))] = ext

    def is_bad(self, i, e):
        return (i, int(e)) in self.pairings

    def write_csv(self, path):
        """Diagnostic table with one row per bad element."""
        with open(path, 'w', newline='') as fh:
            w = csv.writer(fh)
            w.writerow(['patch', 'element', 'ratio', 'neighbor_patch', 'neighbor_element', 'step'])
            for (i, e) in sorted(self.pairings):
                p = self.pairings[(i, e)]
                w.writerow([i, e, repr(p.ratio), p.neighbor_patch, p.neighbor_element, p.step])
        return path


def plain_normal_derivatives(patch, uv, elements, normal):
    """Normal derivatives of the active basis functions of a patch.

    Returns ``(dofs, values)`` with shapes (n, nloc).
    """
    dofs, vals = patch.space.eval(uv, 1, elements=elements)
    _, J = patch.map_points(uv)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    # grad = J^{-T} (d/du, d/dv)
    gx = (J[:, 1, 1, None] * vals[1] - J[:, 1, 0, None] * vals[2]) / det[:, None]
    gy = (-J[:, 0, 1, None] * vals[1] + J[:, 0, 0, None] * vals[2]) / det[:, None]
    return dofs, gx * normal[:, 0:1] + gy * normal[:, 1:2]


def stabilized_flux(union, stabilizer, mesh, side):
    """Normal fluxes of the basis functions at all nodes of an interface mesh.

    ``side`` is ``'i'`` (upper patch) or ``'j'`` (lower patch); the normal
    is always the outward normal of patch ``i``. Returns ``(patch_of_node,
    dofs, values)`` where ``dofs`` index the tensor basis of
    ``patch_of_node`` (the neighbor patch on stabilized nodes). Rows are
    padded with dof 0 and value 0.
    """
    if side == 'i':
        p_idx, uv, elem = mesh.patch, mesh.uv_i, mesh.elem_i
    else:
        p_idx, uv, elem = mesh.other, mesh.uv_j, mesh.elem_j
    patch = union.patches[p_idx]
    dofs, vals = plain_normal_derivatives(patch, uv, elem, mesh.normal)
    owner = np.full(len(uv), p_idx)
    if stabilizer is None:
        return owner, dofs, vals
    bad = np.array([stabilizer.is_bad(p_idx, e) for e in elem], dtype=bool)
    if not bad.any():
        return owner, dofs, vals
    width = max(dofs.shape[1], max(len(stabilizer.extensions[(p_idx, int(e))].dofs)
                                   for e in np.unique(elem[bad])))
    D = np.zeros((len(uv), width), dtype=dofs.dtype)
    V = np.zeros((len(uv), width))
    D[:, :dofs.shape[1]] = dofs
    V[:, :dofs.shape[1]] = vals
    for e in np.unique(elem[bad]):
        ext = stabilizer.extensions[(p_idx, int(e))]
        rows = np.flatnonzero(elem == e)
        n = len(ext.dofs)
        D[rows] = 0
        V[rows] = 0.0
        D[rows, :n] = ext.dofs
        V[rows, :n] = ext.normal_derivatives(mesh.x[rows], mesh.normal[rows])
        owner[rows] = ext.patch
    return owner, D, V
