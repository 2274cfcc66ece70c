"""Command line interface: ``overlapiga {solve,convergence,conditioning,dump-geometry} <config>``.

``<config>`` is a JSON file or the name of a shipped fixture (``square``,
``disk-annulus-top``, ``disk-rectangle-top``, ``three-patch``).
"""
import argparse
import json
import os
import sys
import time
import warnings

import numpy as np

from .assembly import export_matrix
from .fixtures import BUILTIN, load_config
from .multimesh import MultiPatchUnion, check_assumptions, dump_svg
from .stabilization import Stabilizer, classify_good_bad
from .study import (error_norms, mesh_size, rates, run_conditioning_study,
                    run_convergence_study, solve, write_csv)

CASES = {
    'one-sided': ('onesided', True),
    'symmetric-stabilized': ('symmetric', True),
    'symmetric-unstabilized': ('symmetric', False),
}


def _degrees(text):
    return [int(s) for s in text.split(',') if s.strip()]


def _beta(text):
    if text == '6p2':
        return text
    return float(text)


def build_parser():
    ap = argparse.ArgumentParser(prog='overlapiga', description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest='command', required=True)

    def common(p):
        p.add_argument('config', help='JSON config path or shipped fixture name (%s)'
                       % ', '.join(BUILTIN))
        p.add_argument('--flux', choices=['onesided', 'symmetric'])
        p.add_argument('--stabilize', choices=['on', 'off'])
        p.add_argument('--theta', type=float)
        p.add_argument('--beta', type=_beta, help='penalty value or "6p2"')
        p.add_argument('--levels', type=int)
        p.add_argument('--degrees', type=_degrees, help='comma separated, e.g. 2,3,4')
        p.add_argument('--out', default='.', help='output directory')
        p.add_argument('--seed', type=int, default=0, help='Lanczos start vector seed')
        p.add_argument('--timings', action='store_true',
                       help='fill wall_ms (CSV no longer byte-reproducible)')
        return p

    p = common(sub.add_parser('solve', help='solve one level and report errors'))
    p.add_argument('--level', type=int, default=0)
    p.add_argument('--kappa', action='store_true', help='also estimate the condition number')
    p.add_argument('--export-matrix', action='store_true',
                   help='write the free-DOF matrix in coordinate text format')
    p.add_argument('--svg', action='store_true', help='also write the geometry SVG')

    common(sub.add_parser('convergence', help='nested refinement study'))

    p = common(sub.add_parser('conditioning', help='condition numbers vs epsilon or h'))
    p.add_argument('--sweep', choices=['epsilon', 'h'], default='epsilon')
    p.add_argument('--cases', default=None,
                   help='comma separated subset of %s or "all"; default from --flux/--stabilize'
                   % ','.join(CASES))
    p.add_argument('--start-level', type=int, default=None,
                   help='first level of the h sweep (default from the config)')

    p = common(sub.add_parser('dump-geometry', help='SVG of meshes, interfaces and classes'))
    p.add_argument('--level', type=int, default=0)
    return ap


def _overrides(args):
    stab = None if args.stabilize is None else args.stabilize == 'on'
    return {'flux': args.flux, 'stabilize': stab, 'theta': args.theta, 'beta': args.beta}


def _settings(problem, args):
    study = problem.study
    degrees = args.degrees or study['degrees']
    levels = args.levels or study['levels']
    return degrees, levels


def _log(row):
    keys = ('level', 'dofs', 'l2_error', 'h1_error', 'kappa', 'bad_fraction', 'iterations')
    print('  ' + ' '.join('%s=%s' % (k, _short(row.get(k))) for k in keys if k in row),
          flush=True)


def _short(v):
    if isinstance(v, float):
        return '%.4g' % v
    return str(v)


def cmd_solve(problem, args):
    degree = _settings(problem, args)[0][0]
    spec = problem.spec(**_overrides(args))
    t0 = time.perf_counter()
    union = MultiPatchUnion(problem.patches(args.level, degree))
    sol = solve(union, spec)
    l2, h1, jump = error_norms(sol, spec.solution)
    Kff, _ = sol.system.reduced()
    kappa = float('nan')
    if args.kappa:
        from .linsolve import estimate_condition
        kappa = estimate_condition(Kff, seed=args.seed).kappa
    stab = sol.stabilizer
    bad = stab.partition.bad_fraction if stab is not None else \
        classify_good_bad(union, spec.theta).bad_fraction
    row = {'level': args.level, 'h': mesh_size(union), 'dofs': sol.system.dofmap.n,
           'l2_error': l2, 'h1_error': h1, 'jump_norm': jump, 'kappa': kappa,
           'bad_fraction': bad, 'iterations': sol.report.iterations,
           'wall_ms': 1e3 * (time.perf_counter() - t0)}
    base = os.path.join(args.out, '%s_p%d_l%d' % (problem.name, degree, args.level))
    write_csv([row], base + '.csv', timings=args.timings)
    _log(row)
    if stab is not None:
        stab.write_csv(base + '_bad_elements.csv')
    if args.export_matrix:
        export_matrix(Kff, base + '_matrix.txt')
    if args.svg:
        dump_svg(union, base + '.svg', bad=stab.partition.bad if stab else None)
    print('wrote %s.csv' % base)
    return 0


def cmd_convergence(problem, args):
    degrees, levels = _settings(problem, args)
    spec = problem.spec(**_overrides(args))
    kappa = problem.study.get('kappa', 'auto')
    for p in degrees:
        print('p=%d' % p, flush=True)
        rows = run_convergence_study(lambda lev: problem.patches(lev, p), spec, levels,
                                     kappa=kappa, log=_log, seed=args.seed)
        path = os.path.join(args.out, '%s_convergence_p%d.csv' % (problem.name, p))
        write_csv(rows, path, timings=args.timings)
        ok = [r for r in rows if not isinstance(r['l2_error'], str)]
        if len(ok) >= 2:
            print('  L2 rates %s' % np.round(rates([r['l2_error'] for r in ok]), 2).tolist())
            print('  H1 rates %s' % np.round(rates([r['h1_error'] for r in ok]), 2).tolist())
        print('wrote %s' % path)
    return 0


def _cases(args):
    if args.cases == 'all':
        return list(CASES)
    if args.cases:
        names = [c.strip() for c in args.cases.split(',')]
        for c in names:
            if c not in CASES:
                raise SystemExit('unknown case %r' % c)
        return names
    flux = args.flux or 'onesided'
    stab = args.stabilize != 'off'
    for name, (f, s) in CASES.items():
        if f == flux and (s == stab or f == 'onesided'):
            return [name]
    return ['one-sided']


def cmd_conditioning(problem, args):
    degrees, levels = _settings(problem, args)
    study = problem.study
    for case in _cases(args):
        flux, stab = CASES[case]
        over = _overrides(args)
        over.update(flux=flux, stabilize=stab)
        spec = problem.spec(**over)
        for p in degrees:
            print('%s p=%d' % (case, p), flush=True)
            if args.sweep == 'epsilon':
                params = study['epsilons']
                rows = run_conditioning_study(
                    lambda eps, lev: problem.with_epsilon(eps).patches(lev, p), spec, params,
                    level=0, log=_log, seed=args.seed)
            else:
                start = args.start_level
                if start is None:
                    start = study.get('conditioning_levels', [0])[0]
                lev_list = list(range(start, start + (args.levels or 4)))
                rows = run_conditioning_study(
                    lambda lev, _: problem.patches(lev, p), spec, lev_list, level=None,
                    log=_log, seed=args.seed)
            tag = '%s_conditioning_%s_%s_p%d' % (problem.name, args.sweep, case, p)
            path = os.path.join(args.out, tag + '.csv')
            write_csv(rows, path, timings=args.timings)
            with open(os.path.join(args.out, tag + '_params.json'), 'w') as fh:
                json.dump({'sweep': args.sweep, 'values': [r['param'] for r in rows]}, fh)
                fh.write('\n')
            print('wrote %s' % path)
    return 0


def cmd_dump_geometry(problem, args):
    degree = _settings(problem, args)[0][0]
    union = MultiPatchUnion(problem.patches(args.level, degree))
    theta = args.theta if args.theta is not None else problem.study['theta']
    part = classify_good_bad(union, theta)
    base = os.path.join(args.out, '%s_p%d_l%d' % (problem.name, degree, args.level))
    dump_svg(union, base + '.svg', bad=part.bad)
    with warnings.catch_warnings():
        warnings.simplefilter('always')
        report = check_assumptions(union)
    print('patches %d, interfaces %s' % (len(union), union.pairs()))
    print('cut elements %d, bad %d (%.3f)' % (part.n_cut, part.n_bad, part.bad_fraction))
    print('interface size ratio [%.3g, %.3g], roughness %.3g'
          % (report.min_size_ratio, report.max_size_ratio, report.max_roughness))
    Stabilizer(union, theta).write_csv(base + '_bad_elements.csv')
    print('wrote %s.svg' % base)
    return 0


COMMANDS = {
    'solve': cmd_solve,
    'convergence': cmd_convergence,
    'conditioning': cmd_conditioning,
    'dump-geometry': cmd_dump_geometry,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    problem = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    try:
        return COMMANDS[args.command](problem, args)
    except (RuntimeError, ValueError) as exc:
        print('error: %s' % exc, file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
