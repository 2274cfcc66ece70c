import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlapiga.cutcell import (area_oracle, cut_rule, fit_piece, line_crossings, tensor_rule,
                                turning_points)

BOX = ((0.0, 1.0), (0.0, 1.0))


def circle_piece(c, r, t0=0.0, t1=2 * np.pi):
    return fit_piece(t0, t1, lambda t: np.stack([c[0] + r * np.cos(t), c[1] + r * np.sin(t)],
                                                axis=1), degree=24)


def line_piece(p0, p1):
    p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
    return fit_piece(0.0, 1.0, lambda t: p0 + t[:, None] * (p1 - p0))


def test_tensor_rule_integrates_polynomials():
    uv, w = tensor_rule(((0.2, 0.7), (0.1, 0.4)), 3)
    assert w.sum() == pytest.approx(0.15)
    exact = (0.7 ** 6 - 0.2 ** 6) / 6 * (0.4 ** 2 - 0.1 ** 2) / 2
    assert np.dot(w, uv[:, 0] ** 5 * uv[:, 1]) == pytest.approx(exact, rel=1e-13)


def test_fit_reproduces_end_points():
    pc = line_piece([0.2, -0.1], [0.9, 1.3])
    assert np.allclose(pc.points(np.array([0.0, 1.0])), [[0.2, -0.1], [0.9, 1.3]], atol=1e-15)


def test_turning_points_and_crossings():
    pc = circle_piece((0.5, 0.5), 0.3)
    tp = np.sort(turning_points(pc, 0))
    assert np.allclose(tp, [0.0, np.pi, 2 * np.pi][:len(tp)] if len(tp) == 3 else [np.pi],
                       atol=1e-8) or np.allclose(tp, [np.pi], atol=1e-8)
    t = np.sort(line_crossings(pc, 0, 0.5))
    assert np.allclose(t, [np.pi / 2, 3 * np.pi / 2], atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-0.8, 0.8))
def test_half_plane_cut_is_exact_for_polynomials(x0, slope):
    # covered: x > x0 + slope * (y - 0.5), a straight trimming line
    def covered(uv):
        return uv[:, 0] > x0 + slope * (uv[:, 1] - 0.5)
    ya, yb = -0.1, 1.1
    pc = line_piece([x0 + slope * (ya - 0.5), ya], [x0 + slope * (yb - 0.5), yb])
    uv, w = cut_rule(BOX, [pc], covered, 4)
    assert np.all(w > 0)
    # slivers thinner than the flatness tolerance may keep nodes on the line
    assert np.all(uv[:, 0] <= x0 + slope * (uv[:, 1] - 0.5) + 1e-12)
    # int over the visible part of x^2 y: Gauss in y between the clip kinks
    kinks = [0.0, 1.0]
    if slope != 0:
        kinks += [0.5 - x0 / slope, 0.5 + (1 - x0) / slope]
    kinks = np.unique(np.clip(kinks, 0.0, 1.0))
    yg, wy = np.polynomial.legendre.leggauss(6)
    exact = 0.0
    for a, b in zip(kinks[:-1], kinks[1:]):
        y = 0.5 * (a + b) + 0.5 * (b - a) * yg
        xm = np.clip(x0 + slope * (y - 0.5), 0, 1)
        exact += 0.5 * (b - a) * np.dot(wy, xm ** 3 / 3 * y)
    assert np.dot(w, uv[:, 0] ** 2 * uv[:, 1]) == pytest.approx(exact, abs=1e-13)


def test_circle_cut_converges():
    c, r = (0.3, 0.4), 0.45

    def covered(uv):
        return np.hypot(uv[:, 0] - c[0], uv[:, 1] - c[1]) < r
    errs = []
    exact_visible = 1.0 - _disk_in_box_area(c, r)
    for n in (2, 4, 8, 16):
        uv, w = cut_rule(BOX, [circle_piece(c, r)], covered, n)
        errs.append(abs(w.sum() - exact_visible))
        assert np.all(w > 0)
    assert errs[-1] < 1e-13
    assert errs[0] > errs[-1]


def _disk_in_box_area(c, r):
    """Closed-form area of a disk intersected with the unit square."""
    def prim(x):
        # antiderivative of sqrt(r^2 - (x - c0)^2)
        d = np.clip(x - c[0], -r, r)
        return 0.5 * (d * np.sqrt(r * r - d * d) + r * r * np.arcsin(d / r))

    def h(x):
        return np.sqrt(max(r * r - (x - c[0]) ** 2, 0.0))
    lo, hi = max(0.0, c[0] - r), min(1.0, c[0] + r)
    cuts = [lo, hi]
    for level in (0.0, 1.0):
        dy = abs(level - c[1])
        if dy < r:
            w = np.sqrt(r * r - dy * dy)
            cuts += [c[0] - w, c[0] + w]
    cuts = np.unique(np.clip(cuts, lo, hi))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = 0.5 * (a + b)
        # on each piece top and bottom are either clipped (constant) or on the circle
        top_clip = c[1] + h(m) > 1.0
        bot_clip = c[1] - h(m) < 0.0
        top = (b - a) * 1.0 if top_clip else c[1] * (b - a) + prim(b) - prim(a)
        bot = 0.0 if bot_clip else c[1] * (b - a) - (prim(b) - prim(a))
        total += top - bot
    return total


def test_thin_sliver_is_exact():
    eps = 1e-6

    def covered(uv):
        return uv[:, 0] > eps
    pc = line_piece([eps, -0.5], [eps, 1.5])
    uv, w = cut_rule(BOX, [pc], covered, 3)
    assert w.sum() == pytest.approx(eps, rel=1e-10)
    assert np.all(uv[:, 0] <= eps)


def test_tangent_curve_accuracy():
    # a circle tangent to the slab direction is handled by axis choice and splitting
    c, r = (0.5, 1.2), 0.7

    def covered(uv):
        return np.hypot(uv[:, 0] - c[0], uv[:, 1] - c[1]) < r
    uv, w = cut_rule(BOX, [circle_piece(c, r)], covered, 16)
    assert w.sum() == pytest.approx(1.0 - _disk_in_box_area(c, r), abs=1e-13)


def test_area_oracle_agrees():
    c, r = (0.6, 0.2), 0.5

    def covered(uv):
        return np.hypot(uv[:, 0] - c[0], uv[:, 1] - c[1]) < r
    _, w = cut_rule(BOX, [circle_piece(c, r)], covered, 6)
    assert area_oracle(BOX, covered) == pytest.approx(w.sum(), abs=2e-3)


def test_fully_covered_box_gives_empty_rule():
    uv, w = cut_rule(BOX, [], lambda uv: np.ones(len(uv), dtype=bool), 3)
    assert len(w) == 0
