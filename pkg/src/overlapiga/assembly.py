"""Assembly of the stabilized Nitsche system on a union of patches.

The bilinear form is

    sum_i int_{O_i} grad u . grad v
    - sum_{ij} int_{G_ij} (<R(u)>_t [v] + [u] <R(v)>_t)
    + beta sum_{ij} int_{G_ij} h_ij^{-1} [u][v]

with ``[v] = v_i - v_j``, ``<R(v)>_t = t R_i(v) + (1 - t) R_j(v)`` and the
normal of the upper patch ``i``. ``R`` is the plain normal derivative or,
on bad elements, the stabilized one.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .solutions import ManufacturedSolution, get_solution
from .splines import SIDES, collocation_matrix
from .stabilization import DEFAULT_THETA, Stabilizer, stabilized_flux

FLUX_T = {'onesided': 1.0, 'symmetric': 0.5}
_CHUNK = 4_000_000


class TrimmedDirichletError(ValueError):
    """Dirichlet data was assigned to a side that is not fully external."""


@dataclass
class ProblemSpec:
    """Discrete problem settings.

    ``dirichlet`` lists ``(patch, side)`` pairs; every other external
    boundary part carries Neumann data from the solution.
    """
    solution: ManufacturedSolution
    flux: str = 'onesided'
    stabilize: bool = True
    beta: object = '6p2'
    theta: float = DEFAULT_THETA
    dirichlet: list = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.solution, str):
            self.solution = get_solution(self.solution)
        if self.flux not in FLUX_T:
            raise ValueError('flux must be one of %s' % sorted(FLUX_T))
        if not 0.0 < self.theta <= 1.0:
            raise ValueError('theta must lie in (0, 1]')
        if self.beta != '6p2' and not float(self.beta) > 0:
            raise ValueError('beta must be positive')
        self.dirichlet = [(int(i), str(s)) for i, s in self.dirichlet]

    @property
    def t(self):
        return FLUX_T[self.flux]

    def beta_value(self, degree):
        """Penalty parameter; the default rule is ``6 p^2``."""
        return 6.0 * degree ** 2 if self.beta == '6p2' else float(self.beta)


class DofMap:
    """Global numbering of the basis functions with visible support."""

    def __init__(self, union):
        self.active = [union.active_dofs(i) for i in range(len(union))]
        self.glob = []
        offset = 0
        self.offsets = []
        for mask in self.active:
            g = np.full(len(mask), -1, dtype=np.int64)
            g[mask] = offset + np.arange(int(mask.sum()))
            self.offsets.append(offset)
            offset += int(mask.sum())
            self.glob.append(g)
        self.n = offset

    def __len__(self):
        return self.n

    def to_global(self, patch, local):
        return self.glob[patch][local]


@dataclass
class LinearSystem:
    """Assembled matrix and right-hand side with Dirichlet elimination data."""
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap
    fixed: np.ndarray
    fixed_values: np.ndarray
    free: np.ndarray = None

    def __post_init__(self):
        mask = np.ones(self.dofmap.n, dtype=bool)
        mask[self.fixed] = False
        self.free = np.flatnonzero(mask)

    def reduced(self):
        """Free-DOF matrix and right-hand side with the Dirichlet lift."""
        K = self.matrix
        Kff = K[self.free][:, self.free].tocsr()
        b = self.rhs[self.free] - K[self.free][:, self.fixed] @ self.fixed_values
        return Kff, b

    def expand(self, u_free):
        u = np.zeros(self.dofmap.n)
        u[self.free] = u_free
        u[self.fixed] = self.fixed_values
        return u


def _physical_gradients(J, vals):
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    gx = (J[:, 1, 1, None] * vals[1] - J[:, 1, 0, None] * vals[2]) / det[:, None]
    gy = (-J[:, 0, 1, None] * vals[1] + J[:, 0, 0, None] * vals[2]) / det[:, None]
    return gx, gy, det


class _Coo:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, rows, cols, vals):
        """Add dense blocks: rows (n, a), cols (n, b), vals (n, a, b)."""
        R = np.broadcast_to(rows[:, :, None], vals.shape)
        C = np.broadcast_to(cols[:, None, :], vals.shape)
        keep = (R >= 0) & (C >= 0) & (vals != 0.0)
        self.rows.append(R[keep])
        self.cols.append(C[keep])
        self.vals.append(vals[keep])

    def matrix(self, n):
        if not self.rows:
            return sp.csr_matrix((n, n))
        return sp.coo_matrix((np.concatenate(self.vals),
                              (np.concatenate(self.rows), np.concatenate(self.cols))),
                             shape=(n, n)).tocsr()


def assemble_volume(union, spec, dofmap, coo=None, rhs=None):
    """Stiffness and load contributions of the visible patch regions."""
    coo = coo if coo is not None else _Coo()
    rhs = rhs if rhs is not None else np.zeros(dofmap.n)
    for i, patch in enumerate(union.patches):
        uv, w, el = union.volume_rule(i)
        if len(w) == 0:
            continue
        starts = np.concatenate([[0], np.flatnonzero(np.diff(el)) + 1])
        nloc = patch.space.element_dofs(0).size
        per = max(1, _CHUNK // (nloc * nloc))
        k = 0
        while k < len(starts):
            # chunk of whole elements
            lo = starts[k]
            kk = min(len(starts), k + 1 + np.searchsorted(starts[k + 1:], lo + per))
            hi = starts[kk] if kk < len(starts) else len(w)
            sl = slice(lo, hi)
            x, J = patch.map_points(uv[sl])
            dofs, vals = patch.space.eval(uv[sl], 1, elements=el[sl])
            gx, gy, det = _physical_gradients(J, vals)
            wx = w[sl] * np.abs(det)
            P = wx[:, None, None] * (gx[:, :, None] * gx[:, None, :] + gy[:, :, None] * gy[:, None, :])
            loc = starts[k:kk] - lo
            Ke = np.add.reduceat(P, loc, axis=0)
            G = dofmap.glob[i][dofs[loc]]
            coo.add(G, G, Ke)
            fv = (wx * spec.solution.f(x))[:, None] * vals[0]
            g_all = dofmap.glob[i][dofs]
            ok = g_all >= 0
            np.add.at(rhs, g_all[ok], fv[ok])
            k = kk
    return coo, rhs


def _values(union, patch_idx, uv, elem):
    dofs, vals = union.patches[patch_idx].space.eval(uv, 0, elements=elem)
    return dofs, vals[0]


def _to_global(dofmap, owner, dofs):
    out = np.empty(dofs.shape, dtype=np.int64)
    for p in np.unique(owner):
        rows = owner == p
        out[rows] = dofmap.glob[p][dofs[rows]]
    return out


def interface_terms(union, spec, dofmap, stabilizer, i, j):
    """Node-wise jump and flux vectors of one interface.

    Returns ``(mesh, JD, JV, FD, FV)``: global dofs and values of the jump
    ``[v]`` and of the averaged flux ``<R(v)>_t`` at every node.
    """
    mesh = union.interface_mesh(i, j)
    t = spec.t
    di, vi = _values(union, i, mesh.uv_i, mesh.elem_i)
    dj, vj = _values(union, j, mesh.uv_j, mesh.elem_j)
    JD = np.hstack([dofmap.glob[i][di], dofmap.glob[j][dj]])
    JV = np.hstack([vi, -vj])
    stab_i = stabilizer if (spec.stabilize and i != union.top) else None
    oi, fdi, fvi = stabilized_flux(union, stab_i, mesh, 'i')
    parts_d, parts_v = [_to_global(dofmap, oi, fdi)], [t * fvi]
    if t < 1.0:
        stab_j = stabilizer if spec.stabilize else None
        oj, fdj, fvj = stabilized_flux(union, stab_j, mesh, 'j')
        parts_d.append(_to_global(dofmap, oj, fdj))
        parts_v.append((1.0 - t) * fvj)
    return mesh, JD, JV, np.hstack(parts_d), np.hstack(parts_v)


def assemble_interface(union, spec, dofmap, stabilizer=None, coo=None):
    """Nitsche consistency, symmetry and penalty terms of all interfaces."""
    coo = coo if coo is not None else _Coo()
    beta = spec.beta_value(max(p.space.degree for p in union.patches))
    for i, j in union.pairs():
        mesh, JD, JV, FD, FV = interface_terms(union, spec, dofmap, stabilizer, i, j)
        w = mesh.w
        coo.add(JD, FD, -w[:, None, None] * JV[:, :, None] * FV[:, None, :])
        coo.add(FD, JD, -w[:, None, None] * FV[:, :, None] * JV[:, None, :])
        coo.add(JD, JD, (beta * w / mesh.h_ij)[:, None, None] * JV[:, :, None] * JV[:, None, :])
    return coo


def assemble_neumann(union, spec, dofmap, rhs):
    """Neumann load on the visible external boundary outside Dirichlet sides."""
    dirichlet = set(spec.dirichlet)
    for i, patch in enumerate(union.patches):
        for side in SIDES:
            if (i, side) in dirichlet:
                continue
            m = union.boundary_mesh(i, side)
            if m.numnodes == 0:
                continue
            g = spec.solution.neumann(m.x, m.normal)
            dofs, vals = _values(union, i, m.uv_i, m.elem_i)
            G = dofmap.glob[i][dofs]
            fv = (m.w * g)[:, None] * vals
            ok = G >= 0
            np.add.at(rhs, G[ok], fv[ok])
    return rhs


def side_dofs(space, side):
    """Flat indices of the basis functions on one parametric side."""
    nu, nv = space.shape
    if side == 'left':
        return np.arange(nv)
    if side == 'right':
        return (nu - 1) * nv + np.arange(nv)
    if side == 'bottom':
        return np.arange(nu) * nv
    return np.arange(nu) * nv + nv - 1


def dirichlet_values(union, spec, dofmap):
    """Prescribed values from interpolation at the Greville abscissae.

    Returns global indices and values.
    """
    idx, val = [], []
    for i, side in spec.dirichlet:
        if not union.side_is_external(i, side):
            raise TrimmedDirichletError('Dirichlet on trimmed side unsupported (patch %d, %s)'
                                        % (i, side))
        patch = union.patches[i]
        kv = patch.space.kvs[1 if side in ('left', 'right') else 0]
        g = kv.greville()
        x = patch.map_points(patch.side_params(side, g), jacobian=False)
        c = np.linalg.solve(collocation_matrix(kv, g), spec.solution.u(x))
        G = dofmap.glob[i][side_dofs(patch.space, side)]
        ok = G >= 0
        idx.append(G[ok])
        val.append(c[ok])
    if not idx:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx, val = np.concatenate(idx), np.concatenate(val)
    # shared corners receive identical values from both sides; keep the last
    uniq, last = np.unique(idx[::-1], return_index=True)
    return uniq, val[::-1][last]


def apply_boundary_conditions(union, spec, dofmap, matrix, rhs):
    """Add Neumann loads and record the Dirichlet constraints."""
    rhs = assemble_neumann(union, spec, dofmap, rhs)
    fixed, values = dirichlet_values(union, spec, dofmap)
    return LinearSystem(matrix, rhs, dofmap, fixed, values)


def assemble_system(union, spec, stabilizer=None):
    """Full stabilized system with boundary conditions.

    A :class:`Stabilizer` is built on demand when stabilization is enabled.
    Returns ``(system, stabilizer)``.
    """
    if spec.stabilize and stabilizer is None:
        stabilizer = Stabilizer(union, spec.theta)
    dofmap = DofMap(union)
    coo, rhs = assemble_volume(union, spec, dofmap)
    assemble_interface(union, spec, dofmap, stabilizer if spec.stabilize else None, coo)
    K = coo.matrix(dofmap.n)
    return apply_boundary_conditions(union, spec, dofmap, K, rhs), stabilizer


def export_matrix(matrix, path):
    """Write a sparse matrix as ``row col value`` lines (17 significant digits)."""
    M = sp.coo_matrix(matrix)
    order = np.lexsort((M.col, M.row))
    with open(path, 'w') as fh:
        fh.write('%d %d %d\n' % (M.shape[0], M.shape[1], M.nnz))
        for r, c, v in zip(M.row[order], M.col[order], M.data[order]):
            fh.write('%d %d %.17g\n' % (r, c, v))
    return path


def read_matrix(path):
    """Inverse of :func:`export_matrix`."""
    with open(path) as fh:
        n, m, nnz = (int(s) for s in fh.readline().split())
        if nnz == 0:
            return sp.csr_matrix((n, m))
        data = np.loadtxt(fh, ndmin=2)
    return sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                         shape=(n, m)).tocsr()
