import csv
import json
import os
import subprocess
import sys

import pytest

from overlapiga.cli import main
from overlapiga.fixtures import square_config
from overlapiga.study import CSV_COLUMNS


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_outputs(tmp_path, capsys):
    out = str(tmp_path)
    assert main(['solve', 'square', '--degrees', '2', '--level', '1', '--kappa',
                 '--export-matrix', '--svg', '--out', out]) == 0
    rows = read_rows(os.path.join(out, 'square_p2_l1.csv'))
    assert list(rows[0]) == CSV_COLUMNS
    assert float(rows[0]['l2_error']) < 1e-2 and float(rows[0]['kappa']) > 1
    assert rows[0]['wall_ms'] == ''
    for suffix in ('_bad_elements.csv', '_matrix.txt', '.svg'):
        assert os.path.exists(os.path.join(out, 'square_p2_l1' + suffix))
    assert 'wrote' in capsys.readouterr().out


def test_solve_from_json_file_with_overrides(tmp_path):
    cfg = tmp_path / 'sq.json'
    cfg.write_text(json.dumps(square_config(1e-3)))
    out = str(tmp_path / 'o')
    assert main(['solve', str(cfg), '--degrees', '2', '--flux', 'symmetric', '--theta', '0.2',
                 '--beta', '30', '--timings', '--out', out]) == 0
    rows = read_rows(os.path.join(out, 'square_p2_l0.csv'))
    assert float(rows[0]['wall_ms']) > 0
    assert float(rows[0]['bad_fraction']) == 1.0


def test_solver_failure_is_reported(tmp_path, capsys):
    # without stabilization the sliver makes the symmetric matrix indefinite
    cfg = tmp_path / 'sq.json'
    cfg.write_text(json.dumps(square_config(1e-3)))
    assert main(['solve', str(cfg), '--degrees', '2', '--flux', 'symmetric', '--stabilize', 'off',
                 '--out', str(tmp_path)]) == 1
    assert capsys.readouterr().err.startswith('error:')


def test_convergence_csv_is_reproducible(tmp_path, capsys):
    a, b = str(tmp_path / 'a'), str(tmp_path / 'b')
    for out in (a, b):
        main(['convergence', 'square', '--degrees', '2', '--levels', '2', '--out', out])
    name = 'square_convergence_p2.csv'
    assert open(os.path.join(a, name), 'rb').read() == open(os.path.join(b, name), 'rb').read()
    assert 'L2 rates' in capsys.readouterr().out
    assert len(read_rows(os.path.join(a, name))) == 2


def test_conditioning_sweeps(tmp_path):
    out = str(tmp_path)
    main(['conditioning', 'square', '--degrees', '2', '--cases', 'all', '--out', out, '--seed', '3'])
    for case in ('one-sided', 'symmetric-stabilized', 'symmetric-unstabilized'):
        tag = os.path.join(out, 'square_conditioning_epsilon_%s_p2' % case)
        rows = read_rows(tag + '.csv')
        params = json.load(open(tag + '_params.json'))
        assert len(rows) == len(params['values']) == 5
    main(['conditioning', 'square', '--degrees', '2', '--sweep', 'h', '--start-level', '0',
          '--levels', '2', '--out', out])
    rows = read_rows(os.path.join(out, 'square_conditioning_h_one-sided_p2.csv'))
    assert [r['level'] for r in rows] == ['0', '1']
    with pytest.raises(SystemExit):
        main(['conditioning', 'square', '--cases', 'bogus', '--out', out])


def test_dump_geometry(tmp_path, capsys):
    out = str(tmp_path)
    main(['dump-geometry', 'three-patch', '--level', '1', '--out', out])
    text = capsys.readouterr().out
    assert 'interfaces [(1, 0), (2, 0), (2, 1)]' in text
    assert os.path.exists(os.path.join(out, 'three-patch_p2_l1.svg'))
    assert os.path.exists(os.path.join(out, 'three-patch_p2_l1_bad_elements.csv'))


def test_unknown_command_fails():
    with pytest.raises(SystemExit):
        main(['frobnicate', 'square'])


def test_pure_python_backend(tmp_path):
    env = dict(os.environ, OVERLAPIGA_PURE_PYTHON='1')
    code = ('import overlapiga, sys; from overlapiga.cli import main; '
            'print(overlapiga.BACKEND); sys.exit(main(sys.argv[1:]))')
    res = subprocess.run([sys.executable, '-c', code, 'solve', 'square', '--degrees', '2',
                          '--out', str(tmp_path)], env=env, capture_output=True, text=True,
                         timeout=600)
    assert res.returncode == 0, res.stderr
    assert res.stdout.splitlines()[0] == 'python'
    ref = str(tmp_path / 'ref')
    main(['solve', 'square', '--degrees', '2', '--out', ref])
    a = read_rows(str(tmp_path / 'square_p2_l0.csv'))[0]
    b = read_rows(os.path.join(ref, 'square_p2_l0.csv'))[0]
    assert float(a['l2_error']) == pytest.approx(float(b['l2_error']), rel=1e-9)
