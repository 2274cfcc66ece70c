import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlapiga import _kernels_py
from overlapiga.kernels import BACKEND
from overlapiga.splines import (KnotVector, SplinePatch, bilinear_patch, collocation_matrix,
                                eval_basis, find_span, h_refine, quarter_annulus)


def naive_basis(knots, p, k, u):
    """Cox-de Boor recursion for one basis function (right-closed at 1)."""
    if p == 0:
        if knots[k] <= u < knots[k + 1]:
            return 1.0
        last = u == knots[-1] and knots[k] < knots[k + 1] == knots[-1]
        return 1.0 if last else 0.0
    out = 0.0
    d1 = knots[k + p] - knots[k]
    d2 = knots[k + p + 1] - knots[k + 1]
    if d1 > 0:
        out += (u - knots[k]) / d1 * naive_basis(knots, p - 1, k, u)
    if d2 > 0:
        out += (knots[k + p + 1] - u) / d2 * naive_basis(knots, p - 1, k + 1, u)
    return out


@st.composite
def knot_vectors(draw):
    p = draw(st.integers(1, 4))
    nint = draw(st.integers(0, 6))
    inner = sorted(draw(st.lists(st.floats(0.01, 0.99), min_size=nint, max_size=nint)))
    # limit multiplicity to p
    kept = []
    for x in inner:
        if kept.count(x) < p:
            kept.append(x)
    return KnotVector(p, [0.0] * (p + 1) + kept + [1.0] * (p + 1))


@settings(max_examples=60, deadline=None)
@given(knot_vectors(), st.lists(st.floats(0.0, 1.0), min_size=1, max_size=20))
def test_partition_of_unity(kv, xs):
    for u in xs:
        N = eval_basis(kv, u, 1)
        assert abs(N[0].sum() - 1.0) <= 1e-13
        assert abs(N[1].sum()) <= 1e-10 * max(1.0, np.abs(N[1]).max())
        assert np.all(N[0] >= -1e-15)


@settings(max_examples=40, deadline=None)
@given(knot_vectors(), st.floats(0.0, 1.0))
def test_matches_naive_recursion(kv, u):
    s = find_span(kv, u)
    N = eval_basis(kv, u)[0]
    for r in range(kv.p + 1):
        assert N[r] == pytest.approx(naive_basis(kv.knots, kv.p, s - kv.p + r, u), abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(knot_vectors(), st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30))
def test_backends_agree(kv, xs):
    x = np.array(xs)
    from overlapiga import kernels
    s_py = _kernels_py.find_spans(kv.knots, kv.p, x)
    assert np.array_equal(s_py, kernels.find_spans(kv.knots, kv.p, x))
    a = _kernels_py.basis_ders(kv.knots, kv.p, x, s_py, 2)
    b = kernels.basis_ders(kv.knots, kv.p, x, s_py, 2)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-11)


def test_backend_name():
    assert BACKEND in ('cython', 'python')


def test_derivative_by_finite_difference():
    kv = KnotVector.uniform(3, 5)
    u, h = 0.37, 1e-6
    s = find_span(kv, u)
    N = eval_basis(kv, u, 2)
    fd = (eval_basis(kv, u + h)[0] - eval_basis(kv, u - h)[0]) / (2 * h)
    assert find_span(kv, u + h) == s
    assert np.allclose(N[1], fd, atol=1e-7)


def test_last_span_at_one():
    kv = KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    assert find_span(kv, 1.0) == 3
    assert eval_basis(kv, 1.0)[0][-1] == pytest.approx(1.0)


@pytest.mark.parametrize('knots,degree', [
    ([0, 0, 1, 1], -1),
    ([0, 1], 1),
    ([0, 0, 0.7, 0.5, 1, 1], 1),
    ([0, 0, 1, 2, 2], 1),
    ([0, 0, 0, 1, 1, 1], 1),
])
def test_invalid_knot_vectors(knots, degree):
    with pytest.raises(ValueError):
        KnotVector(degree, knots)


def test_rescaled_and_greville():
    kv = KnotVector.rescaled(2, [2, 2, 2, 3, 4, 4, 4])
    assert np.allclose(kv.knots, [0, 0, 0, 0.5, 1, 1, 1])
    assert np.allclose(kv.greville(), [0, 0.25, 0.75, 1])


def test_collocation_matrix_invertible_at_greville():
    kv = KnotVector.uniform(3, 7)
    A = collocation_matrix(kv, kv.greville())
    assert np.allclose(A.sum(axis=1), 1.0)
    assert np.linalg.cond(A) < 1e3


def test_quarter_annulus_is_exact_circle():
    patch = quarter_annulus(1.0, 2.0)
    t = np.linspace(0, 1, 41)
    for u, r in ((0.0, 1.0), (1.0, 2.0)):
        x = patch.map_points(np.stack([np.full_like(t, u), t], axis=1), jacobian=False)
        assert np.allclose(np.hypot(x[:, 0], x[:, 1]), r, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_h_refine_preserves_map(nu, nv, uv):
    patch = quarter_annulus(1.0, 2.0)
    fine = h_refine(patch, (nu, nv))
    x0, J0 = patch.map_points(np.array([uv]))
    x1, J1 = fine.map_points(np.array([uv]))
    assert np.allclose(x0, x1, atol=1e-13)
    assert np.allclose(J0, J1, atol=1e-12)


def test_jacobian_matches_finite_difference():
    patch = quarter_annulus(1.0, 2.0)
    uv = np.array([[0.3, 0.6]])
    _, J = patch.map_points(uv)
    h = 1e-6
    for k in range(2):
        e = np.zeros((1, 2))
        e[0, k] = h
        fd = (patch.map_points(uv + e, jacobian=False) - patch.map_points(uv - e, jacobian=False)) / (2 * h)
        assert np.allclose(J[0, :, k], fd[0], atol=1e-8)


def test_folded_patch_rejected():
    with pytest.raises(ValueError):
        bilinear_patch([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.mark.parametrize('degree', [2, 3, 4])
def test_interpolation_reproduces_polynomials(degree):
    patch = bilinear_patch([(0, 0), (1, 0.1), (0.2, 1), (1.1, 1.2)]).with_space(degree, 3)

    def f(x):
        return x[:, 0] ** degree - 2 * x[:, 1] ** degree + x[:, 0] * x[:, 1]
    # the bilinear map is not affine, so test an affine one for exactness
    affine = bilinear_patch([(0, 0), (1, 0.2), (0.3, 1), (1.3, 1.2)]).with_space(degree, 3)
    c = affine.interpolate(f)
    uv = np.random.default_rng(1).random((40, 2))
    dofs, vals = affine.space.eval(uv, 0)
    x = affine.map_points(uv, jacobian=False)
    assert np.max(np.abs((vals[0] * c[dofs]).sum(axis=1) - f(x))) < 1e-12
    assert patch.space.numdofs == (degree + 3) ** 2


def test_with_space_decouples_geometry():
    geo = SplinePatch(KnotVector(1, [0, 0, 1, 1]), KnotVector(1, [0, 0, 1, 1]),
                      np.array([[[0, 0], [0, 1]], [[2, 0], [2, 1]]], dtype=float))
    patch = geo.with_space(3, (4, 2))
    assert patch.space.mesh_shape == (4, 2)
    assert patch.space.degrees == (3, 3)
    assert np.allclose(patch.map_point([0.5, 0.5])[0], [1.0, 0.5])
