"""Quadrature on trimmed (cut) parametric elements.

The covered part of an element is bounded by preimages of boundary curves of
higher patches. Each preimage piece is held as a Chebyshev interpolant
``t -> (u(t), v(t))``. The visible region is integrated slab by slab: along
one parametric direction the element is split at piece end points and
turning points, and inside every slab the lines of constant slab coordinate
cross each piece exactly once. Gauss rules are then applied in the slab
direction and, between consecutive crossings, across it. All weights are
positive by construction.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from .splines import gauss_legendre

TRIM_DEGREE = 6
MAX_DEPTH = 8
MIN_QUALITY = 0.2
_FLAT = 1e-12


class DegenerateCutError(RuntimeError):
    """Raised when a cut element cannot be reparameterized."""


@dataclass
class TrimPiece:
    """Preimage of a trimming curve restricted to ``[t0, t1]``."""
    cu: np.ndarray
    cv: np.ndarray
    t0: float
    t1: float
    domain: tuple

    def _x(self, t):
        a, b = self.domain
        return (2.0 * np.asarray(t, dtype=float) - (a + b)) / (b - a)

    def coord(self, axis, t):
        return C.chebval(self._x(t), self.cu if axis == 0 else self.cv)

    def dcoord(self, axis, t):
        a, b = self.domain
        c = C.chebder(self.cu if axis == 0 else self.cv) * (2.0 / (b - a))
        return C.chebval(self._x(t), c)

    def points(self, t):
        x = self._x(t)
        return np.stack([C.chebval(x, self.cu), C.chebval(x, self.cv)], axis=-1)

    def restrict(self, t0, t1):
        return TrimPiece(self.cu, self.cv, float(t0), float(t1), self.domain)

    def extent(self, axis):
        t = np.linspace(self.t0, self.t1, 9)
        c = self.coord(axis, t)
        return float(c.max() - c.min())

    def solve(self, axis, value, t_range, values_at_ends):
        """Parameters where the coordinate ``axis`` equals ``value``.

        Requires a monotone coordinate on ``t_range``; ``value`` is an array.
        """
        lo = np.full(len(value), t_range[0])
        hi = np.full(len(value), t_range[1])
        flo, fhi = values_at_ends
        incr = fhi >= flo
        t = lo + (hi - lo) * np.clip((value - flo) / (fhi - flo if fhi != flo else 1.0), 0, 1)
        for _ in range(60):
            f = self.coord(axis, t) - value
            pos = (f > 0) == incr
            hi = np.where(pos, t, hi)
            lo = np.where(pos, lo, t)
            df = self.dcoord(axis, t)
            with np.errstate(divide='ignore', invalid='ignore'):
                tn = t - f / df
            bad = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
            tn = np.where(bad, 0.5 * (lo + hi), tn)
            if np.all(np.abs(tn - t) <= 1e-15 * (1.0 + np.abs(t))):
                t = tn
                break
            t = tn
        return t


def fit_piece(t0, t1, uv_at, degree=TRIM_DEGREE):
    """Chebyshev interpolant of a preimage curve on ``[t0, t1]``.

    ``uv_at(t)`` returns exact preimage points; it is sampled at the
    Chebyshev-Lobatto points so that the end points are reproduced.
    """
    s = C.chebpts2(degree + 1)
    t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * s
    uv = uv_at(t)
    V = C.chebvander(s, degree)
    coef = np.linalg.solve(V, uv)
    return TrimPiece(coef[:, 0], coef[:, 1], float(t0), float(t1), (float(t0), float(t1)))


def _roots_in(coef, domain, t0, t1):
    """Real roots of a Chebyshev series (on ``domain``) inside ``(t0, t1)``."""
    if len(coef) < 2 or np.all(np.abs(coef[1:]) < 1e-300):
        return np.empty(0)
    r = C.chebroots(coef)
    r = r[np.abs(r.imag) < 1e-9].real
    a, b = domain
    t = 0.5 * (a + b) + 0.5 * (b - a) * r
    span = t1 - t0
    return np.sort(t[(t > t0 + 1e-9 * span) & (t < t1 - 1e-9 * span)])


def turning_points(piece, axis):
    """Interior parameters where the ``axis`` coordinate is stationary."""
    if piece.extent(axis) < _FLAT:
        return np.empty(0)
    a, b = piece.domain
    d = C.chebder(piece.cu if axis == 0 else piece.cv)
    return _roots_in(d, piece.domain, piece.t0, piece.t1)


def line_crossings(piece, axis, value):
    """Interior parameters where the piece crosses ``coord[axis] = value``."""
    c = (piece.cu if axis == 0 else piece.cv).copy()
    c[0] -= value
    return _roots_in(c, piece.domain, piece.t0, piece.t1)


def _split(piece, ts):
    cuts = [piece.t0] + list(ts) + [piece.t1]
    return [piece.restrict(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def _clip_to_box(pieces, box):
    """Restrict pieces to a parametric box (after splitting at its edges)."""
    (u0, u1), (v0, v1) = box
    out = []
    for pc in pieces:
        ts = np.sort(np.concatenate([line_crossings(pc, 0, u0), line_crossings(pc, 0, u1),
                                     line_crossings(pc, 1, v0), line_crossings(pc, 1, v1)]))
        for sub in _split(pc, ts):
            m = sub.points(0.5 * (sub.t0 + sub.t1))
            tol = 1e-13
            if u0 - tol <= m[0] <= u1 + tol and v0 - tol <= m[1] <= v1 + tol:
                out.append(sub)
    return out


def _quality(pc, axis):
    """Smallest |d coord_axis / dt| relative to the tangent length."""
    if pc.extent(axis) < _FLAT:
        return 1.0
    t = np.linspace(pc.t0, pc.t1, 17)
    da = np.abs(pc.dcoord(axis, t))
    db = np.abs(pc.dcoord(1 - axis, t))
    return float(np.min(da / np.maximum(np.hypot(da, db), 1e-300)))


def _choose_axis(pieces):
    """Slab coordinate whose lines cross every piece transversally."""
    q = [min(_quality(pc, a) for pc in pieces) for a in (0, 1)]
    best = int(np.argmax(q))
    return best if q[best] >= MIN_QUALITY else None


def _split_line(pieces, box):
    """Axis-aligned line through the point where a piece turns by 45 degrees."""
    worst = min(pieces, key=lambda pc: max(_quality(pc, 0), _quality(pc, 1)))
    t = np.linspace(worst.t0, worst.t1, 65)
    g = np.abs(worst.dcoord(0, t)) - np.abs(worst.dcoord(1, t))
    k = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
    if len(k):
        ts = t[k[len(k) // 2]]
        p = worst.points(ts)
        for axis in (0, 1):
            lo, hi = box[axis]
            if lo + 1e-3 * (hi - lo) < p[axis] < hi - 1e-3 * (hi - lo):
                return axis, float(p[axis])
    axis = int(np.argmax([box[0][1] - box[0][0], box[1][1] - box[1][0]]))
    return axis, 0.5 * (box[axis][0] + box[axis][1])


def cut_rule(box, pieces, covered, n, depth=0):
    """Quadrature rule for the visible part of a parametric box.

    Parameters
    ----------
    box : ((u0, u1), (v0, v1))
    pieces : list of TrimPiece
        Trim curve preimages intersecting the box.
    covered : callable
        ``covered(uv) -> bool array`` for points of shape (m, 2).
    n : int
        Gauss points per direction and per slab.

    Returns
    -------
    uv : ndarray (m, 2) and w : ndarray (m,) with parametric weights.
    """
    pieces = _clip_to_box(pieces, box)
    axis = _choose_axis(pieces) if pieces else 0
    if axis is None:
        if depth < MAX_DEPTH:
            split_axis, c = _split_line(pieces, box)
            lo, hi = box[split_axis]
            parts = []
            for rng in ((lo, c), (c, hi)):
                sub = list(box)
                sub[split_axis] = rng
                parts.append(cut_rule(tuple(sub), pieces, covered, n, depth + 1))
            return (np.concatenate([p[0] for p in parts]),
                    np.concatenate([p[1] for p in parts]))
        ext = [sum(pc.extent(a) for pc in pieces) for a in (0, 1)]
        axis = int(np.argmax(ext))
        if any(len(turning_points(pc, axis)) for pc in pieces):
            axis = 1 - axis
    return _slab_rule(box, pieces, covered, n, axis)


def _slab_rule(box, pieces, covered, n, axis):
    other = 1 - axis
    lo_a, hi_a = box[axis]
    lo_b, hi_b = box[other]
    monotone = []
    cuts = [lo_a, hi_a]
    for pc in pieces:
        for sub in _split(pc, turning_points(pc, axis)):
            ends = sub.coord(axis, np.array([sub.t0, sub.t1]))
            cuts.extend(np.clip(ends, lo_a, hi_a))
            if abs(ends[1] - ends[0]) > _FLAT * (hi_a - lo_a):
                monotone.append((sub, ends))
    cuts = np.unique(np.clip(cuts, lo_a, hi_a))
    keep = np.concatenate([[True], np.diff(cuts) > 1e-14 * (hi_a - lo_a)])
    cuts = cuts[keep]
    cuts[-1] = hi_a
    xg, wg = gauss_legendre(n)
    all_uv, all_w = [], []
    for a0, a1 in zip(cuts[:-1], cuts[1:]):
        span = [(sub, ends) for sub, ends in monotone
                if min(ends) <= a0 + 1e-12 * (hi_a - lo_a) and max(ends) >= a1 - 1e-12 * (hi_a - lo_a)]
        a_nodes = np.concatenate([[0.5 * (a0 + a1)], a0 + (a1 - a0) * xg])
        cross = np.empty((len(span), len(a_nodes)))
        for k, (sub, ends) in enumerate(span):
            t = sub.solve(axis, a_nodes, (sub.t0, sub.t1), ends)
            cross[k] = sub.coord(other, t)
        cross = np.clip(np.sort(cross, axis=0), lo_b, hi_b)
        bounds = np.vstack([np.full(len(a_nodes), lo_b), cross, np.full(len(a_nodes), hi_b)])
        # classify each gap on the mid line of the slab
        mids = 0.5 * (bounds[:-1, 0] + bounds[1:, 0])
        widths = bounds[1:, 0] - bounds[:-1, 0]
        test = np.empty((len(mids), 2))
        test[:, axis] = a_nodes[0]
        test[:, other] = mids
        vis = ~covered(test)
        for g in np.flatnonzero(vis & (widths > 0)):
            b0, b1 = bounds[g, 1:], bounds[g + 1, 1:]
            if np.any(b1 < b0):
                raise DegenerateCutError('degenerate cut reparameterization')
            B = b0[:, None] + (b1 - b0)[:, None] * xg[None, :]
            W = ((a1 - a0) * wg)[:, None] * (b1 - b0)[:, None] * wg[None, :]
            uv = np.empty((B.size, 2))
            uv[:, axis] = np.repeat(a_nodes[1:], n)
            uv[:, other] = B.ravel()
            all_uv.append(uv)
            all_w.append(W.ravel())
    if not all_uv:
        return np.empty((0, 2)), np.empty(0)
    return np.concatenate(all_uv), np.concatenate(all_w)


def tensor_rule(box, n):
    """Tensor Gauss rule with ``n`` points per direction on a box."""
    (u0, u1), (v0, v1) = box
    xg, wg = gauss_legendre(n)
    U, V = np.meshgrid(u0 + (u1 - u0) * xg, v0 + (v1 - v0) * xg, indexing='ij')
    W = np.outer(wg, wg) * (u1 - u0) * (v1 - v0)
    return np.stack([U.ravel(), V.ravel()], axis=1), W.ravel()


def area_oracle(box, covered, depth=10, samples=4):
    """Visible area of a box by recursive quadtree containment sampling.

    Independent reference for :func:`cut_rule`. Leaves whose sample points
    agree are counted as fully visible or fully covered; mixed leaves at the
    final depth contribute their sampled visible fraction.
    """
    (u0, u1), (v0, v1) = box
    g = (np.arange(samples) + 0.5) / samples
    U, V = np.meshgrid(u0 + (u1 - u0) * g, v0 + (v1 - v0) * g, indexing='ij')
    c = covered(np.stack([U.ravel(), V.ravel()], axis=1))
    area = (u1 - u0) * (v1 - v0)
    if depth == 0:
        return area * (1.0 - c.mean())
    if c.all():
        return 0.0
    if not c.any() and depth < 6:
        return area
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    return sum(area_oracle(((a0, a1), (b0, b1)), covered, depth - 1, samples)
               for a0, a1 in ((u0, um), (um, u1)) for b0, b1 in ((v0, vm), (vm, v1)))
