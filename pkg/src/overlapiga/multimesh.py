"""Union of ordered overlapping patches.

Patch ``i`` is visible wherever no higher patch ``l > i`` covers it. This
module classifies elements by visibility, builds quadrature rules on cut
elements and traces every patch side against the other patches to obtain
the interface quadrature meshes and the external boundary segments.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cutcell import DegenerateCutError, TRIM_DEGREE, cut_rule, fit_piece
from .geometry import (BOUNDARY_TOL, BoundaryCurve, boundary_distance,
                       inverter, solve_line_crossing)
from .splines import SIDES, gauss_legendre

STATUS_OUT, STATUS_ON, STATUS_IN = 0, 1, 2
INTERIOR, COVERED, CUT = 'interior', 'covered', 'cut'
EVENT_TOL = 1e-10
RATIO_TOL = 1e-12
SUPPORT_TOL = 1e-14
SNAP_TOL = 1e-12
CUT_EXTRA_POINTS = 3
SIZE_RATIO_WARN = 10.0
ROUGHNESS_WARN = 4.0


class InterfacePreimageError(RuntimeError):
    """Raised when an interface node cannot be located in the lower patch."""


def _snap(uv, breaks):
    """Move coordinates lying within ``SNAP_TOL`` of a knot onto it."""
    uv = uv.copy()
    for k in (0, 1):
        br = breaks[k]
        idx = np.clip(np.searchsorted(br, uv[:, k]), 1, len(br) - 1)
        lo, hi = br[idx - 1], br[idx]
        near = np.where(uv[:, k] - lo < hi - uv[:, k], lo, hi)
        hit = np.abs(uv[:, k] - near) < SNAP_TOL
        uv[hit, k] = near[hit]
    return uv


def _dedupe(t, tol=EVENT_TOL):
    """Sorted parameters in [0, 1] with near duplicates merged."""
    t = np.sort(np.clip(np.asarray(t, dtype=float), 0.0, 1.0))
    out = [0.0]
    for x in t:
        if x - out[-1] > tol:
            out.append(float(x))
    if 1.0 - out[-1] <= tol:
        out[-1] = 1.0
    else:
        out.append(1.0)
    return np.array(out)


@dataclass
class Trace:
    """A boundary curve of one patch traced through another patch.

    Pieces partition the curve parameter range; each carries the status
    (outside, on the boundary, strictly inside) and, when inside, the
    element of the target patch.
    """
    source: tuple
    target: int
    events: np.ndarray
    cuts: np.ndarray
    status: np.ndarray
    eu: np.ndarray
    ev: np.ndarray

    def locate(self, t):
        k = np.searchsorted(self.cuts, np.asarray(t, dtype=float), side='right') - 1
        return np.clip(k, 0, len(self.status) - 1)

    def status_at(self, t):
        return self.status[self.locate(t)]


class _Tracer:
    def __init__(self, curve, patch):
        self.curve = curve
        self.patch = patch
        self.inv = inverter(patch)
        self.breaks = patch.space.breaks
        self.kvs = patch.space.kvs

    def state(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        uv, _, ok = self.inv(self.curve.points(t))
        uv = _snap(uv, self.breaks)
        bd = boundary_distance(uv)
        status = np.where(ok, np.where(bd > BOUNDARY_TOL, STATUS_IN, STATUS_ON), STATUS_OUT)
        inside = status == STATUS_IN
        eu = np.where(inside, self.kvs[0].element_of(uv[:, 0]), -1)
        ev = np.where(inside, self.kvs[1].element_of(uv[:, 1]), -1)
        return status, eu, ev, uv

    def run(self):
        ne = max(self.patch.space.mesh_shape)
        n0 = 4 * ne + 4 * len(self.curve.kv.breaks) + 17
        t = np.unique(np.concatenate([np.linspace(0.0, 1.0, n0), self.curve.kv.breaks]))
        status, eu, ev, uv = self.state(t)
        width = [np.diff(b).min() for b in self.breaks]
        for _ in range(12):
            both = (status[:-1] == STATUS_IN) & (status[1:] == STATUS_IN)
            duv = np.abs(np.diff(uv, axis=0))
            need = both & ((duv[:, 0] > 0.5 * width[0]) | (duv[:, 1] > 0.5 * width[1]))
            if not need.any():
                break
            tm = 0.5 * (t[:-1] + t[1:])[need]
            s2 = self.state(tm)
            t = np.concatenate([t, tm])
            order = np.argsort(t, kind='stable')
            t = t[order]
            status, eu, ev, uv = (np.concatenate([a, b])[order]
                                  for a, b in zip((status, eu, ev, uv), s2))
        change = (np.diff(status) != 0) | (np.diff(eu) != 0) | (np.diff(ev) != 0)
        events = []
        for k in np.flatnonzero(change):
            a = (t[k], status[k], eu[k], ev[k], uv[k])
            b = (t[k + 1], status[k + 1], eu[k + 1], ev[k + 1], uv[k + 1])
            events.extend(self._resolve(a, b, 0))
        ev_t = _dedupe(events)
        cuts = ev_t
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        st, pu, pv, _ = self.state(mids)
        return ev_t[1:-1], cuts, st, pu, pv

    def _single(self, t):
        s, a, b, uv = self.state(np.array([t]))
        return (t, s[0], a[0], b[0], uv[0])

    def _in_range(self, axis, e, value, tol=1e-9):
        br = self.breaks[axis]
        return br[e] - tol <= value <= br[e + 1] + tol

    def _same(self, t, ref):
        s, eu, ev, _ = self.state(np.array([t]))
        return s[0] == ref[1] and eu[0] == ref[2] and ev[0] == ref[3]

    def _side_crossing(self, a, b):
        """Status change located on a side line of the target patch.

        Candidates solve ``C(t) = F(u, v)`` with one parametric coordinate
        fixed at 0 or 1; a candidate is accepted when the states just before
        and after it match the bracket ends. This places transitions
        involving the boundary band exactly instead of at its
        ``BOUNDARY_TOL`` offset. Returns ``None`` when no unique candidate
        is confirmed.
        """
        ta, tb = a[0], b[0]
        delta = min(1e-8, 0.25 * (tb - ta))
        found = []
        for ref in (a, b):
            for axis in (0, 1):
                other = 1 - axis
                for value in (0.0, 1.0):
                    t, s, ok = solve_line_crossing(self.patch, self.curve, axis, value,
                                                   ref[0], ref[4][other], (ta, tb))
                    if not ok or any(abs(t - f) <= EVENT_TOL for f in found):
                        continue
                    if t - delta > ta and not self._same(t - delta, a):
                        continue
                    if t + delta < tb and not self._same(t + delta, b):
                        continue
                    found.append(t)
        return found[0] if len(found) == 1 else None

    def _resolve(self, a, b, depth):
        ta, sa, ua, va, uva = a
        tb, sb, ub, vb, uvb = b
        if sa == sb and ua == ub and va == vb:
            return []
        if tb - ta < 1e-13 or depth > 60:
            return [0.5 * (ta + tb)]
        if sa == STATUS_IN and sb == STATUS_IN and abs(ua - ub) + abs(va - vb) == 1:
            axis = 0 if ua != ub else 1
            other = 1 - axis
            e = (ua, va)
            value = self.breaks[axis][max(e[axis], (ub, vb)[axis])]
            d = uvb[axis] - uva[axis]
            w = 0.5 if d == 0 else min(1.0, max(0.0, (value - uva[axis]) / d))
            t, s, ok = solve_line_crossing(self.patch, self.curve, axis, value,
                                           ta + w * (tb - ta), uva[other] + w * (uvb[other] - uva[other]),
                                           (ta, tb))
            if ok and self._in_range(other, e[other], s):
                return [t]
        elif sa != sb:
            t = self._side_crossing(a, b)
            if t is not None:
                return [t]
        m = self._single(0.5 * (ta + tb))
        return self._resolve(a, m, depth + 1) + self._resolve(m, b, depth + 1)


@dataclass
class SideSegment:
    """Part of a patch side with a single role."""
    patch: int
    side: str
    t0: float
    t1: float
    kind: str  # 'interface', 'boundary' or 'hidden'
    other: int = -1


@dataclass
class LineQuadrature:
    """Quadrature nodes on segments of patch sides.

    Arrays are per node; ``segments`` lists ``(side, t0, t1)`` and
    ``segment`` maps nodes to it.
    """
    patch: int
    other: int
    segments: list
    segment: np.ndarray
    side: np.ndarray
    t: np.ndarray
    x: np.ndarray
    w: np.ndarray
    normal: np.ndarray
    uv_i: np.ndarray
    elem_i: np.ndarray
    uv_j: np.ndarray = None
    elem_j: np.ndarray = None
    h_i: np.ndarray = None
    h_j: np.ndarray = None
    h_ij: np.ndarray = None

    @property
    def pair(self):
        return (self.patch, self.other)

    @property
    def numnodes(self):
        return len(self.w)

    @property
    def length(self):
        return float(self.w.sum())

    def breakpoints(self):
        """Interior segment end points along each side (curve parameter)."""
        cuts = set()
        for side, t0, t1 in self.segments:
            cuts.update((round(t0, 14), round(t1, 14)))
        return sorted(cuts)


InterfaceQuadMesh = LineQuadrature


@dataclass
class ElementStatus:
    """Visibility of the elements of one patch."""
    status: np.ndarray
    ratio: np.ndarray
    pieces: dict = field(default_factory=dict)

    def of(self, e):
        return self.status[e], self.ratio[e]


class MultiPatchUnion:
    """Ordered union of patches; index 0 is the bottom patch.

    Parameters
    ----------
    patches : sequence of SplinePatch
        Patches with their analysis spaces; later patches lie on top.
    """

    def __init__(self, patches):
        self.patches = list(patches)
        if not self.patches:
            raise ValueError('a union needs at least one patch')
        self.curves = {(i, s): BoundaryCurve(p, s, owner=i)
                       for i, p in enumerate(self.patches) for s in SIDES}
        self._traces = {}
        self._sides = {}
        self._status = {}
        self._rules = {}
        self._interfaces = {}
        self._boundary = {}
        self._h = {}
        self.diameter = max(p.diameter() for p in self.patches)

    def __len__(self):
        return len(self.patches)

    @property
    def top(self):
        return len(self.patches) - 1

    # ----- tracing -----------------------------------------------------------
    def trace(self, i, side, m):
        key = (i, side, m)
        if key not in self._traces:
            ev, cuts, st, eu, evv = _Tracer(self.curves[(i, side)], self.patches[m]).run()
            self._traces[key] = Trace((i, side), m, ev, cuts, st, eu, evv)
        return self._traces[key]

    def covered(self, i, uv):
        """Points of patch ``i`` (parametric) covered by a higher patch."""
        uv = np.atleast_2d(uv)
        out = np.zeros(len(uv), dtype=bool)
        if i == self.top or len(uv) == 0:
            return out
        x = self.patches[i].map_points(uv, jacobian=False)
        for m in range(i + 1, len(self.patches)):
            rest = np.flatnonzero(~out)
            if len(rest) == 0:
                break
            _, _, ok = inverter(self.patches[m])(x[rest])
            out[rest[ok]] = True
        return out

    def visible_points(self, x, closed=True):
        """Index of the patch owning each physical point (-1 outside)."""
        x = np.atleast_2d(x)
        owner = np.full(len(x), -1)
        for m in range(len(self.patches) - 1, -1, -1):
            rest = np.flatnonzero(owner < 0)
            if len(rest) == 0:
                break
            uv, _, ok = inverter(self.patches[m])(x[rest])
            if not closed:
                ok &= boundary_distance(uv) > BOUNDARY_TOL
            owner[rest[ok]] = m
        return owner

    def side_segments(self, i, side):
        """Split a side of patch ``i`` into hidden, interface and boundary parts.

        A side point is hidden if a higher patch contains it (closed); it
        belongs to the interface with ``j`` if ``j`` is the highest lower
        patch containing it strictly; otherwise it is external boundary.
        """
        key = (i, side)
        if key in self._sides:
            return self._sides[key]
        others = [m for m in range(len(self.patches)) if m != i]
        traces = {m: self.trace(i, side, m) for m in others}
        cuts = _dedupe(np.concatenate([traces[m].events for m in others] + [np.empty(0)]))
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        kinds = []
        for tm in mids:
            st = {m: int(traces[m].status_at(tm)) for m in others}
            if any(st[m] >= STATUS_ON for m in others if m > i):
                kinds.append(('hidden', -1))
                continue
            lower = [m for m in others if m < i and st[m] == STATUS_IN]
            kinds.append(('interface', max(lower)) if lower else ('boundary', -1))
        segs = []
        for k, (kind, other) in enumerate(kinds):
            if segs and segs[-1].kind == kind and segs[-1].other == other:
                segs[-1].t1 = float(cuts[k + 1])
            else:
                segs.append(SideSegment(i, side, float(cuts[k]), float(cuts[k + 1]), kind, other))
        self._sides[key] = segs
        return segs

    def side_is_external(self, i, side):
        """Whether a whole side is untrimmed external boundary."""
        segs = self.side_segments(i, side)
        return len(segs) == 1 and segs[0].kind == 'boundary'

    # ----- element classification ------------------------------------------
    def element_sizes(self, i):
        if i not in self._h:
            self._h[i] = self.patches[i].element_diameters()
        return self._h[i]

    def element_bboxes(self, i, samples=5):
        """Physical axis-aligned boxes ``(xmin, xmax, ymin, ymax)`` of the elements."""
        key = ('bbox', i)
        if key not in self._h:
            boxes = self.patches[i].space.element_boxes()
            t = np.linspace(0.0, 1.0, samples)
            T0, T1 = np.meshgrid(t, t, indexing='ij')
            m = (T0 == 0) | (T0 == 1) | (T1 == 0) | (T1 == 1)
            u = boxes[:, 0:1] + (boxes[:, 1:2] - boxes[:, 0:1]) * T0[m]
            v = boxes[:, 2:3] + (boxes[:, 3:4] - boxes[:, 2:3]) * T1[m]
            x = self.patches[i].map_points(np.stack([u.ravel(), v.ravel()], axis=1), jacobian=False)
            x = x.reshape(len(boxes), -1, 2)
            self._h[key] = np.stack([x[:, :, 0].min(1), x[:, :, 0].max(1),
                                     x[:, :, 1].min(1), x[:, :, 1].max(1)], axis=1)
        return self._h[key]

    def _trim_records(self, i):
        """Parts of higher-patch sides lying strictly inside patch ``i``."""
        space = self.patches[i].space
        recs = []
        for l in range(i + 1, len(self.patches)):
            for s in SIDES:
                tr = self.trace(l, s, i)
                if not np.any(tr.status == STATUS_IN):
                    continue
                rivals = [self.trace(l, s, m) for m in range(i + 1, len(self.patches)) if m != l]
                cuts = _dedupe(np.concatenate([tr.events, self.curves[(l, s)].kv.breaks]
                                              + [r.events for r in rivals]))
                for a, b in zip(cuts[:-1], cuts[1:]):
                    tm = 0.5 * (a + b)
                    k = tr.locate(tm)
                    if tr.status[k] != STATUS_IN:
                        continue
                    drop = False
                    for r in rivals:
                        st = r.status_at(tm)
                        if st == STATUS_IN or (st == STATUS_ON and r.target > l):
                            drop = True
                    if drop:
                        continue
                    e = space.element_index(tr.eu[k], tr.ev[k])
                    if recs and recs[-1][0] == (l, s) and recs[-1][2] == a and recs[-1][3] == e:
                        recs[-1][2] = b
                    else:
                        recs.append([(l, s), a, b, e])
        return recs

    def _fit_pieces(self, i, recs, degree):
        """Chebyshev preimages in patch ``i`` of the trim records."""
        inv = inverter(self.patches[i])
        breaks = self.patches[i].space.breaks
        pieces = {}
        for (l, s), a, b, e in recs:
            curve = self.curves[(l, s)]

            def uv_at(t, curve=curve):
                uv, _, ok = inv(curve.points(t))
                if not np.all(ok):
                    raise DegenerateCutError('degenerate cut reparameterization')
                return _snap(uv, breaks)

            pc = fit_piece(a, b, uv_at, degree)
            ends = pc.points(np.array([a, b]))
            mid = pc.points(np.array([0.5 * (a + b)]))
            pts = np.vstack([ends, mid])
            on_line = False
            for k in (0, 1):
                if np.ptp(pts[:, k]) < SNAP_TOL and np.min(np.abs(breaks[k] - pts[0, k])) < SNAP_TOL:
                    on_line = True
            if not on_line:
                pieces.setdefault(e, []).append(pc)
        return pieces

    def classify(self, i):
        """Visibility status and visible-area ratio of every element of patch ``i``."""
        if i in self._status:
            return self._status[i]
        space = self.patches[i].space
        ne = space.numelements
        status = np.full(ne, INTERIOR, dtype=object)
        ratio = np.ones(ne)
        pieces = {}
        if i < self.top:
            recs = self._trim_records(i)
            pieces = self._fit_pieces(i, recs, TRIM_DEGREE)
            boxes = space.element_boxes()
            plain = np.array([e not in pieces for e in range(ne)])
            centers = np.stack([0.5 * (boxes[:, 0] + boxes[:, 1]),
                                0.5 * (boxes[:, 2] + boxes[:, 3])], axis=1)
            cov = np.zeros(ne, dtype=bool)
            cov[plain] = self.covered(i, centers[plain])
            status[cov] = COVERED
            ratio[cov] = 0.0
            n = space.degree + 1 + CUT_EXTRA_POINTS
            for e in list(pieces):
                _, w = self._cut_rule(i, e, pieces, n)
                area = (boxes[e, 1] - boxes[e, 0]) * (boxes[e, 3] - boxes[e, 2])
                r = float(w.sum() / area)
                if r < RATIO_TOL:
                    status[e], ratio[e] = COVERED, 0.0
                elif r > 1.0 - RATIO_TOL:
                    status[e], ratio[e] = INTERIOR, 1.0
                else:
                    status[e], ratio[e] = CUT, r
        st = ElementStatus(status, ratio, pieces)
        self._status[i] = st
        return st

    def _cut_rule(self, i, e, pieces, n):
        box = self.patches[i].space.element_box(e)
        cov = lambda uv: self.covered(i, uv)
        try:
            return cut_rule(box, pieces[e], cov, n)
        except DegenerateCutError:
            recs = [r for r in self._trim_records(i) if r[3] == e]
            retry = self._fit_pieces(i, recs, 2 * TRIM_DEGREE)
            pieces[e] = retry.get(e, [])
            return cut_rule(box, pieces[e], cov, n)

    def cut_quadrature(self, i, e, n=None):
        """Parametric points and weights on the visible part of a cut element."""
        st = self.classify(i)
        if st.status[e] != CUT:
            raise ValueError('element %d of patch %d is not cut' % (e, i))
        if n is None:
            n = self.patches[i].space.degree + 1 + CUT_EXTRA_POINTS
        return self._cut_rule(i, e, st.pieces, n)

    def volume_rule(self, i, n=None):
        """Quadrature on the visible part of patch ``i``.

        Returns parametric points (m, 2), parametric weights (m,) and the
        element of each point.
        """
        if n is None:
            n = self.patches[i].space.degree + 1
        key = (i, n)
        if key in self._rules:
            return self._rules[key]
        st = self.classify(i)
        space = self.patches[i].space
        boxes = space.element_boxes()
        inner = np.flatnonzero(st.status == INTERIOR)
        xg, wg = gauss_legendre(n)
        U = boxes[inner, 0:1] + (boxes[inner, 1:2] - boxes[inner, 0:1]) * xg
        V = boxes[inner, 2:3] + (boxes[inner, 3:4] - boxes[inner, 2:3]) * xg
        WU = (boxes[inner, 1:2] - boxes[inner, 0:1]) * wg
        WV = (boxes[inner, 3:4] - boxes[inner, 2:3]) * wg
        uv = [np.stack([np.repeat(U, n, axis=1).ravel(), np.tile(V, (1, n)).ravel()], axis=1)]
        w = [(WU[:, :, None] * WV[:, None, :]).ravel()]
        el = [np.repeat(inner, n * n)]
        for e in np.flatnonzero(st.status == CUT):
            p, q = self._cut_rule(i, e, st.pieces, n + CUT_EXTRA_POINTS)
            uv.append(p)
            w.append(q)
            el.append(np.full(len(q), e))
        out = (np.concatenate(uv), np.concatenate(w), np.concatenate(el))
        self._rules[key] = out
        return out

    def visible_area(self, i, n=None):
        """Physical area of the visible part of patch ``i``."""
        uv, w, _ = self.volume_rule(i, n)
        _, J = self.patches[i].map_points(uv)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        return float(np.dot(w, np.abs(det)))

    def active_dofs(self, i):
        """Mask of basis functions of patch ``i`` with visible support."""
        st = self.classify(i)
        space = self.patches[i].space
        boxes = space.element_boxes()
        area = (boxes[:, 1] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 2]) * st.ratio
        acc = np.zeros(space.numdofs)
        for e in np.flatnonzero(area > 0):
            acc[space.element_dofs(e)] += area[e]
        return acc > SUPPORT_TOL

    # ----- interfaces and boundaries ---------------------------------------
    def _line_nodes(self, i, pieces, npts):
        """Gauss nodes on ``(side, t0, t1)`` pieces of the sides of patch ``i``."""
        patch = self.patches[i]
        xg, wg = gauss_legendre(npts)
        out = {k: [] for k in ('segment', 'side', 't', 'x', 'w', 'normal', 'uv', 'elem')}
        for k, (side, a, b) in enumerate(pieces):
            curve = self.curves[(i, side)]
            t = a + (b - a) * xg
            C1 = curve.tangents(t)
            uv = patch.side_params(side, t)
            mid = patch.side_params(side, np.array([0.5 * (a + b)]))
            e = patch.space.element_index(patch.space.kvs[0].element_of(mid[:, 0])[0],
                                          patch.space.kvs[1].element_of(mid[:, 1])[0])
            out['segment'].append(np.full(npts, k))
            out['side'].append(np.full(npts, SIDES.index(side)))
            out['t'].append(t)
            out['x'].append(curve.points(t))
            out['w'].append((b - a) * wg * np.hypot(C1[:, 0], C1[:, 1]))
            out['normal'].append(curve.normals(t))
            out['uv'].append(uv)
            out['elem'].append(np.full(npts, e))
        if not pieces:
            return {'segment': np.empty(0, int), 'side': np.empty(0, int), 't': np.empty(0),
                    'x': np.empty((0, 2)), 'w': np.empty(0), 'normal': np.empty((0, 2)),
                    'uv': np.empty((0, 2)), 'elem': np.empty(0, int)}
        return {k: np.concatenate(v) for k, v in out.items()}

    def _split_at(self, i, side, a, b, extra):
        br = self.patches[i].side_breaks(side)
        inner = np.concatenate([br[(br > a) & (br < b)], extra[(extra > a) & (extra < b)]])
        cuts = np.sort(np.concatenate([[a, b], inner]))
        keep = [cuts[0]]
        for c in cuts[1:]:
            if c - keep[-1] > EVENT_TOL:
                keep.append(c)
        keep[-1] = b
        return list(zip(keep[:-1], keep[1:]))

    def interface_mesh(self, i, j):
        """Quadrature mesh on the interface between patch ``i`` and lower patch ``j``."""
        if not i > j:
            raise ValueError('interface pairs need i > j')
        key = (i, j)
        if key in self._interfaces:
            return self._interfaces[key]
        pieces = []
        for side in SIDES:
            tr = self.trace(i, side, j)
            for seg in self.side_segments(i, side):
                if seg.kind == 'interface' and seg.other == j:
                    for a, b in self._split_at(i, side, seg.t0, seg.t1, tr.events):
                        pieces.append((side, a, b))
        pi, pj = self.patches[i], self.patches[j]
        npts = max(pi.space.degree, pj.space.degree) + 1
        d = self._line_nodes(i, pieces, npts)
        uv_j = np.empty((len(d['w']), 2))
        elem_j = np.empty(len(d['w']), dtype=int)
        if len(d['w']):
            uv_j, res, ok = inverter(pj)(d['x'])
            if not np.all(ok):
                k = int(np.flatnonzero(~ok)[0])
                raise InterfacePreimageError('interface preimage failure at x = (%.12g, %.12g)'
                                             % tuple(d['x'][k]))
            for k, (side, a, b) in enumerate(pieces):
                tr = self.trace(i, side, j)
                m = tr.locate(0.5 * (a + b))
                elem_j[d['segment'] == k] = pj.space.element_index(tr.eu[m], tr.ev[m])
        h_i = self.element_sizes(i)[d['elem']]
        h_j = self.element_sizes(j)[elem_j]
        mesh = LineQuadrature(i, j, pieces, d['segment'], d['side'], d['t'], d['x'], d['w'],
                              d['normal'], d['uv'], d['elem'], uv_j, elem_j, h_i, h_j,
                              1.0 / (1.0 / h_i + 1.0 / h_j) if len(h_i) else np.empty(0))
        self._interfaces[key] = mesh
        return mesh

    def boundary_mesh(self, i, side, npts=None):
        """Quadrature on the external boundary parts of one side of patch ``i``."""
        key = (i, side, npts)
        if key in self._boundary:
            return self._boundary[key]
        if npts is None:
            npts = self.patches[i].space.degree + 1
        pieces = []
        for seg in self.side_segments(i, side):
            if seg.kind == 'boundary':
                pieces.extend((side, a, b) for a, b in
                              self._split_at(i, side, seg.t0, seg.t1, np.empty(0)))
        d = self._line_nodes(i, pieces, npts)
        mesh = LineQuadrature(i, -1, pieces, d['segment'], d['side'], d['t'], d['x'], d['w'],
                              d['normal'], d['uv'], d['elem'])
        self._boundary[key] = mesh
        return mesh

    def pairs(self):
        """Interface pairs ``(i, j)`` with a non-empty quadrature mesh."""
        return [(i, j) for i in range(len(self.patches)) for j in range(i)
                if self.interface_mesh(i, j).numnodes > 0]

    def delta(self, i, j):
        return int(self.interface_mesh(max(i, j), min(i, j)).numnodes > 0)

    @property
    def n_gamma(self):
        return len(self.pairs())

    def build(self):
        """Build every classification and interface mesh eagerly."""
        for i in range(len(self.patches)):
            self.classify(i)
        self.pairs()
        return self


def classify_elements(union, i):
    """Element visibility of patch ``i``; see :meth:`MultiPatchUnion.classify`."""
    return union.classify(i)


def build_cut_quadrature(union, i, element):
    """Quadrature on the visible part of a cut element."""
    return union.cut_quadrature(i, element)


def build_interface_mesh(union, i, j):
    """Interface quadrature mesh of the pair ``(i, j)``, ``i > j``."""
    return union.interface_mesh(i, j)


@dataclass
class AssumptionReport:
    max_size_ratio: float
    min_size_ratio: float
    max_roughness: float
    warnings: list

    @property
    def ok(self):
        return not self.warnings


def check_assumptions(union, size_threshold=SIZE_RATIO_WARN, rough_threshold=ROUGHNESS_WARN):
    """Diagnostics of local mesh compatibility and interface roughness.

    Reports the extreme ratios ``h_i|K_i / h_j|K_j`` over interface nodes
    and the largest interface length inside one lower-patch element
    relative to its size. Thresholds only trigger warnings.
    """
    ratios, rough = [], []
    for i, j in union.pairs():
        m = union.interface_mesh(i, j)
        ratios.append(m.h_i / m.h_j)
        meas = np.bincount(m.elem_j, weights=m.w, minlength=union.patches[j].space.numelements)
        hit = np.flatnonzero(meas > 0)
        rough.append(meas[hit] / union.element_sizes(j)[hit])
    r = np.concatenate(ratios) if ratios else np.ones(1)
    g = np.concatenate(rough) if rough else np.zeros(1)
    hi = float(max(r.max(), 1.0 / r.min()))
    msgs = []
    if hi > size_threshold:
        msgs.append('interface element size ratio %.3g exceeds %g' % (hi, size_threshold))
    if g.max() > rough_threshold:
        msgs.append('interface roughness %.3g exceeds %g' % (g.max(), rough_threshold))
    for msg in msgs:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return AssumptionReport(float(r.max()), float(r.min()), float(g.max()), msgs)


_COLORS = {INTERIOR: '#dfe8f5', CUT: '#f5d76e', COVERED: 'none'}


def dump_svg(union, path, bad=None, size=800):
    """Write an SVG picture of meshes, interfaces and element classes.

    ``bad`` optionally maps patch index to a boolean array of bad elements,
    drawn in red.
    """
    pts = [p.corner_images().reshape(-1, 2) for p in union.patches]
    allp = np.concatenate(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    scale = size / max(hi - lo)
    pad = 10

    def xy(x):
        x = np.atleast_2d(x)
        sx = pad + (x[:, 0] - lo[0]) * scale
        sy = pad + (hi[1] - x[:, 1]) * scale
        return ' '.join('%.3f,%.3f' % (a, b) for a, b in zip(sx, sy))

    span = hi - lo
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">'
           % (int(span[0] * scale) + 2 * pad, int(span[1] * scale) + 2 * pad)]
    s = np.linspace(0.0, 1.0, 9)
    for i, p in enumerate(union.patches):
        st = union.classify(i)
        out.append('<g id="patch%d">' % i)
        for e, box in enumerate(p.space.element_boxes()):
            color = _COLORS[st.status[e]]
            if bad is not None and i in bad and bad[i][e]:
                color = '#e74c3c'
            u0, u1, v0, v1 = box
            ring = np.concatenate([
                np.stack([u0 + (u1 - u0) * s, np.full(9, v0)], 1),
                np.stack([np.full(9, u1), v0 + (v1 - v0) * s], 1),
                np.stack([u1 - (u1 - u0) * s, np.full(9, v1)], 1),
                np.stack([np.full(9, u0), v1 - (v1 - v0) * s], 1)])
            x = p.map_points(ring, jacobian=False)
            out.append('<polygon points="%s" fill="%s" fill-opacity="0.5" stroke="#555" '
                       'stroke-width="0.5"/>' % (xy(x), color))
        out.append('</g>')
    for i, j in union.pairs():
        m = union.interface_mesh(i, j)
        out.append('<g id="interface%d_%d">' % (i, j))
        for side, a, b in m.segments:
            t = np.linspace(a, b, 9)
            x = union.curves[(i, side)].points(t)
            out.append('<polyline points="%s" fill="none" stroke="#c0392b" stroke-width="2"/>'
                       % xy(x))
        out.append('</g>')
    out.append('</svg>')
    with open(path, 'w') as fh:
        fh.write('\n'.join(out) + '\n')
    return path
