import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import union_of
from overlapiga.fixtures import load_config, square_config
from overlapiga.multimesh import (COVERED, CUT, INTERIOR, MultiPatchUnion, _dedupe,
                                  build_interface_mesh, check_assumptions, classify_elements,
                                  dump_svg)
from overlapiga.splines import rectangle_patch


def test_square_interface_segments(square_union):
    m = build_interface_mesh(square_union, 1, 0)
    assert len(m.segments) == 4
    assert np.allclose(m.breakpoints(), [0, 1 / 3, 1 / 2, 2 / 3, 1], atol=1e-14)
    assert m.length == pytest.approx(1.0, abs=1e-12)
    assert np.all(m.normal[:, 0] == pytest.approx(-1.0))


def test_square_side_roles(square_union):
    roles = {s: [(g.kind, g.other) for g in square_union.side_segments(1, s)]
             for s in ('left', 'right', 'bottom', 'top')}
    assert roles['left'] == [('interface', 0)]
    assert roles['right'] == [('boundary', -1)]
    bottom = square_union.side_segments(0, 'bottom')
    assert [g.kind for g in bottom] == ['boundary', 'hidden']
    assert bottom[0].t1 == pytest.approx(0.5 + 1e-6, abs=1e-15)
    assert square_union.side_is_external(0, 'left')
    assert not square_union.side_is_external(0, 'bottom')


def test_square_classification(square_union):
    st0 = classify_elements(square_union, 0)
    assert (st0.status == CUT).sum() == 3
    assert np.allclose(st0.ratio[st0.status == CUT], 4e-6, rtol=1e-8)
    assert (st0.status == COVERED).sum() == 3
    assert (st0.status == INTERIOR).sum() == 6
    assert (classify_elements(square_union, 1).status == INTERIOR).all()


def _area_partition(union):
    return sum(union.visible_area(i) for i in range(len(union)))


@pytest.mark.parametrize('name,exact', [
    ('square', 1.0),
    ('disk-annulus-top', np.pi),
    ('disk-rectangle-top', np.pi),
    ('three-patch', None),
])
def test_visible_area_partition(name, exact):
    union = union_of(name, 1, 2)
    if exact is None:
        exact = _three_patch_area()
    assert _area_partition(union) == pytest.approx(exact, rel=1e-7)


def _clip(poly, a, b):
    """Sutherland-Hodgman clip of a polygon by the left half-plane of edge a->b."""
    def side(p):
        return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    out = []
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        sp, sq = side(p), side(q)
        if sp >= 0:
            out.append(p)
        if sp * sq < 0:
            out.append(p + sp / (sp - sq) * (q - p))
    return out


def _intersect(*polys):
    res = list(polys[0])
    for other in polys[1:]:
        for k in range(len(other)):
            if not res:
                return res
            res = _clip(res, other[k], other[(k + 1) % len(other)])
    return res


def _area(poly):
    if len(poly) < 3:
        return 0.0
    x = np.array(poly)
    return 0.5 * abs(np.dot(x[:, 0], np.roll(x[:, 1], -1)) - np.dot(x[:, 1], np.roll(x[:, 0], -1)))


def _three_patch_area():
    # inclusion-exclusion over the convex counter-clockwise quads
    polys = []
    for pc in load_config('three-patch').config['patches']:
        cp = np.asarray(pc['control_points'], float)
        polys.append([cp[0, 0], cp[1, 0], cp[1, 1], cp[0, 1]])
    a, b, c = polys
    return (_area(a) + _area(b) + _area(c) - _area(_intersect(a, b)) - _area(_intersect(a, c))
            - _area(_intersect(b, c)) + _area(_intersect(a, b, c)))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.2, 0.6), st.floats(0.2, 0.6))
def test_area_partition_random_rectangles(x0, y0, w, h):
    top = rectangle_patch(x0, x0 + w, y0, y0 + h).with_space(2, (3, 2))
    bottom = rectangle_patch(0.0, 1.0, 0.0, 1.0).with_space(2, (4, 5))
    union = MultiPatchUnion([bottom, top])
    ix = max(0.0, min(1.0, x0 + w) - x0)
    iy = max(0.0, min(1.0, y0 + h) - y0)
    exact = 1.0 + w * h - ix * iy
    assert _area_partition(union) == pytest.approx(exact, rel=1e-12)


def test_disk_interface_lengths():
    # the arc speed of the rational map is not polynomial, so Gauss length is inexact
    a = union_of('disk-annulus-top', 1, 2)
    assert a.interface_mesh(1, 0).length == pytest.approx(np.pi / 2, rel=1e-10)
    r = union_of('disk-rectangle-top', 1, 2)
    assert r.interface_mesh(1, 0).length == pytest.approx(1.13 + 1.17, rel=1e-12)


def test_interface_nodes_match_between_patches(three_patch_union):
    u = three_patch_union
    for i, j in u.pairs():
        m = u.interface_mesh(i, j)
        xi = u.patches[i].map_points(m.uv_i, jacobian=False)
        xj = u.patches[j].map_points(m.uv_j, jacobian=False)
        assert np.max(np.abs(xi - m.x)) < 1e-14
        assert np.max(np.abs(xj - m.x)) < 1e-10
        # each node lies in the element reported for it
        boxes = u.patches[j].space.element_boxes()[m.elem_j]
        assert np.all(m.uv_j[:, 0] >= boxes[:, 0] - 1e-12)
        assert np.all(m.uv_j[:, 0] <= boxes[:, 1] + 1e-12)


def test_three_patch_topology(three_patch_union):
    u = three_patch_union
    assert u.pairs() == [(1, 0), (2, 0), (2, 1)]
    left = [(g.kind, g.other) for g in u.side_segments(2, 'left')]
    assert left == [('interface', 1), ('interface', 0)]
    # blue supplies flux to orange along its top side while green cuts blue
    top = [(g.kind, g.other) for g in u.side_segments(1, 'top')]
    assert top[0] == ('interface', 0)
    assert ('hidden', -1) in top


def test_active_dofs_drop_covered_support(square_union):
    act = square_union.active_dofs(0)
    assert 0 < act.sum() < len(act)
    assert square_union.active_dofs(1).all()


def test_dedupe_merges_close_events():
    assert np.allclose(_dedupe([0.3, 0.3 + 1e-12, 0.7]), [0.0, 0.3, 0.7, 1.0])
    assert np.allclose(_dedupe([1e-12, 1 - 1e-12]), [0.0, 1.0])


def test_empty_union_rejected():
    with pytest.raises(ValueError):
        MultiPatchUnion([])


def test_assumption_report_and_warning():
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        rep = check_assumptions(union_of('square', 0, 2))
    assert rep.ok
    fine = rectangle_patch(0.3, 0.7, 0.2, 0.8).with_space(2, (40, 40))
    coarse = rectangle_patch(0.0, 1.0, 0.0, 1.0).with_space(2, 1)
    with pytest.warns(RuntimeWarning):
        rep = check_assumptions(MultiPatchUnion([coarse, fine]))
    assert not rep.ok


def test_svg_dump(tmp_path, square_union):
    path = tmp_path / 'g.svg'
    dump_svg(square_union, str(path))
    text = path.read_text()
    assert text.startswith('<svg') and text.rstrip().endswith('</svg>')
    assert text.count('<polyline') >= 4
    with open(path) as fh:
        import xml.dom.minidom
        xml.dom.minidom.parse(fh)


def test_square_fixture_geometry_is_exact():
    cfg = square_config(1e-3)
    cp = np.asarray(cfg['patches'][1]['control_points'])
    assert cp[0, 0, 0] == 0.5 + 1e-3
