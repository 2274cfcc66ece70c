"""Solve driver, error norms and the convergence and conditioning studies."""
import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .assembly import _physical_gradients, assemble_system
from .linsolve import SolverError, estimate_condition, pcg_solve
from .multimesh import MultiPatchUnion

CSV_COLUMNS = ['level', 'h', 'dofs', 'l2_error', 'h1_error', 'jump_norm', 'kappa',
               'bad_fraction', 'iterations', 'wall_ms']


@dataclass
class Solution:
    union: MultiPatchUnion
    system: object
    coefficients: np.ndarray
    report: object
    stabilizer: object

    def evaluate(self, i, uv, elements=None, gradient=False):
        """Discrete field of patch ``i`` (and its physical gradient) at parametric points."""
        patch = self.union.patches[i]
        dofs, vals = patch.space.eval(uv, 1 if gradient else 0, elements=elements)
        g = self.system.dofmap.glob[i][dofs]
        c = np.where(g >= 0, self.coefficients[np.maximum(g, 0)], 0.0)
        u = np.einsum('nk,nk->n', vals[0], c)
        if not gradient:
            return u
        _, J = patch.map_points(uv)
        gx, gy, _ = _physical_gradients(J, vals)
        return u, np.stack([np.einsum('nk,nk->n', gx, c), np.einsum('nk,nk->n', gy, c)], axis=1)

    def at_points(self, x):
        """Discrete field at physical points, taken from the visible patch."""
        x = np.atleast_2d(x)
        owner = self.union.visible_points(x)
        out = np.full(len(x), np.nan)
        from .geometry import inverter
        for i in np.unique(owner[owner >= 0]):
            rows = np.flatnonzero(owner == i)
            uv, _, _ = inverter(self.union.patches[i])(x[rows])
            out[rows] = self.evaluate(i, uv)
        return out


def solve(union, spec, tol=1e-12, max_iter=None):
    """Assemble and solve; returns a :class:`Solution`."""
    system, stab = assemble_system(union, spec)
    Kff, b = system.reduced()
    rep = pcg_solve(Kff, b, tol=tol, max_iter=max_iter)
    return Solution(union, system, system.expand(rep.solution), rep, stab)


def error_norms(solution, exact, extra_points=2):
    """L2 error, H1-seminorm error and weighted interface jump norm.

    Volume integrals use the cut-aware rules with ``p + 1 + extra_points``
    Gauss points per direction; the jump norm is
    ``sqrt(sum int h_ij^{-1} [u_h]^2)`` over all interfaces.
    """
    union = solution.union
    l2 = h1 = 0.0
    for i, patch in enumerate(union.patches):
        uv, w, el = union.volume_rule(i, patch.space.degree + 1 + extra_points)
        if len(w) == 0:
            continue
        x, J = patch.map_points(uv)
        wx = w * np.abs(J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0])
        uh, gh = solution.evaluate(i, uv, el, gradient=True)
        l2 += float(np.dot(wx, (uh - exact.u(x)) ** 2))
        h1 += float(np.dot(wx, np.sum((gh - exact.grad(x)) ** 2, axis=1)))
    jump = 0.0
    for i, j in union.pairs():
        m = union.interface_mesh(i, j)
        d = solution.evaluate(i, m.uv_i, m.elem_i) - solution.evaluate(j, m.uv_j, m.elem_j)
        jump += float(np.dot(m.w / m.h_ij, d * d))
    return np.sqrt(l2), np.sqrt(h1), np.sqrt(jump)


def rates(errors):
    """Observed rates ``log2(e_k / e_{k+1})`` of consecutive levels."""
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.log2(e[:-1] / e[1:])


def mesh_size(union):
    """Largest physical element diameter over all patches."""
    return float(max(union.element_sizes(i).max() for i in range(len(union))))


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ''
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(rows, path=None, timings=True):
    """Write study rows with the fixed column order; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) if (c != 'wall_ms' or timings) else '' for c in CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, 'w', newline='') as fh:
            fh.write(text)
    return text


def run_level(patches, spec, level, kappa='auto', tol=1e-12, seed=0):
    """Solve one refinement level; returns a CSV row dict (plus extras)."""
    t0 = time.perf_counter()
    union = MultiPatchUnion(patches)
    row = {'level': level, 'h': mesh_size(union)}
    try:
        sol = solve(union, spec, tol=tol)
    except (SolverError, RuntimeError, ValueError) as exc:
        row.update(dofs=None, l2_error='failed', error=str(exc),
                   wall_ms=1e3 * (time.perf_counter() - t0))
        return row, None
    l2, h1, jump = error_norms(sol, spec.solution)
    Kff, _ = sol.system.reduced()
    kap = float('nan')
    if kappa == 'always' or (kappa == 'auto' and Kff.shape[0] <= 4000):
        kap = estimate_condition(Kff, seed=seed).kappa
    bad = sol.stabilizer.partition.bad_fraction if sol.stabilizer is not None else \
        _bad_fraction(union, spec.theta)
    row.update(dofs=sol.system.dofmap.n, l2_error=l2, h1_error=h1, jump_norm=jump, kappa=kap,
               bad_fraction=bad, iterations=sol.report.iterations,
               wall_ms=1e3 * (time.perf_counter() - t0))
    return row, sol


def _bad_fraction(union, theta):
    from .stabilization import classify_good_bad
    return classify_good_bad(union, theta).bad_fraction


def run_convergence_study(patch_builder, spec, levels=4, kappa='auto', log=None, seed=0):
    """Solve on nested refinements ``patch_builder(level)``, levels 0..levels-1."""
    rows = []
    for lev in range(levels):
        row, _ = run_level(patch_builder(lev), spec, lev, kappa=kappa, seed=seed)
        rows.append(row)
        if log is not None:
            log(row)
    return rows


def run_conditioning_study(patch_builder, spec, parameters, level=0, log=None, seed=0):
    """Condition numbers of the rescaled free-DOF matrix over a parameter sweep.

    ``patch_builder(param, level)`` returns the patches; ``level=None``
    sweeps the refinement level itself (``param`` is the level). Rows carry the
    parameter under ``param`` (not a CSV column). A failed assembly gives a
    row with ``kappa='failed'`` and the sweep continues; ``kappa = inf``
    marks a singular matrix.
    """
    rows = []
    for k, param in enumerate(parameters):
        t0 = time.perf_counter()
        lev = param if level is None else level
        union = MultiPatchUnion(patch_builder(param, lev))
        row = {'level': lev, 'h': mesh_size(union), 'param': param}
        try:
            system, stab = assemble_system(union, spec)
        except (RuntimeError, ValueError) as exc:
            row.update(kappa='failed', error=str(exc), wall_ms=1e3 * (time.perf_counter() - t0))
        else:
            Kff, _ = system.reduced()
            est = estimate_condition(Kff, seed=seed)
            bad = stab.partition.bad_fraction if stab is not None else \
                _bad_fraction(union, spec.theta)
            row.update(dofs=system.dofmap.n, kappa=est.kappa, definite=est.definite,
                       bad_fraction=bad, wall_ms=1e3 * (time.perf_counter() - t0))
        rows.append(row)
        if log is not None:
            log(row)
    return rows
