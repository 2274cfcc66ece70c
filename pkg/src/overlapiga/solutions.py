"""Manufactured solutions with exact gradients and forcing ``f = -lap u``."""
from dataclasses import dataclass
from typing import Callable

import numpy as np

PI = np.pi


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact field ``u`` with gradient and forcing; callables take (n, 2) points."""
    name: str
    u: Callable
    grad: Callable
    f: Callable
    description: str = ''

    def neumann(self, x, normal):
        """Normal derivative ``grad u . n``."""
        return np.einsum('nc,nc->n', self.grad(x), normal)


def _square():
    def u(x):
        return np.sin(0.5 * PI * x[:, 0]) * np.cos(PI * x[:, 1])

    def grad(x):
        return np.stack([0.5 * PI * np.cos(0.5 * PI * x[:, 0]) * np.cos(PI * x[:, 1]),
                         -PI * np.sin(0.5 * PI * x[:, 0]) * np.sin(PI * x[:, 1])], axis=1)

    def f(x):
        return 1.25 * PI ** 2 * u(x)

    return ManufacturedSolution('square', u, grad, f, 'sin(pi x/2) cos(pi y)')


def _disk():
    def parts(x):
        g = 4.0 - x[:, 0] ** 2 - x[:, 1] ** 2
        h = np.cos(PI * x[:, 0]) * np.cos(0.5 * PI * x[:, 1])
        hx = -PI * np.sin(PI * x[:, 0]) * np.cos(0.5 * PI * x[:, 1])
        hy = -0.5 * PI * np.cos(PI * x[:, 0]) * np.sin(0.5 * PI * x[:, 1])
        return g, h, hx, hy

    def u(x):
        g, h, _, _ = parts(x)
        return g * h

    def grad(x):
        g, h, hx, hy = parts(x)
        return np.stack([-2.0 * x[:, 0] * h + g * hx, -2.0 * x[:, 1] * h + g * hy], axis=1)

    def f(x):
        g, h, hx, hy = parts(x)
        lap = -4.0 * h + 2.0 * (-2.0 * x[:, 0] * hx - 2.0 * x[:, 1] * hy) - 1.25 * PI ** 2 * g * h
        return -lap

    return ManufacturedSolution('disk', u, grad, f, '(4 - x^2 - y^2) cos(pi x) cos(pi y/2)')


def _three_patch():
    def u(x):
        return np.sin(2 * PI * x[:, 0]) * np.sin(PI * x[:, 1])

    def grad(x):
        return np.stack([2 * PI * np.cos(2 * PI * x[:, 0]) * np.sin(PI * x[:, 1]),
                         PI * np.sin(2 * PI * x[:, 0]) * np.cos(PI * x[:, 1])], axis=1)

    def f(x):
        return 5.0 * PI ** 2 * u(x)

    return ManufacturedSolution('three_patch', u, grad, f, 'sin(2 pi x) sin(pi y)')


def _polynomial(name, c):
    """Quadratic ``c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2``."""
    c = np.asarray(c, dtype=float)

    def u(x):
        X, Y = x[:, 0], x[:, 1]
        return c[0] + c[1] * X + c[2] * Y + c[3] * X * X + c[4] * X * Y + c[5] * Y * Y

    def grad(x):
        X, Y = x[:, 0], x[:, 1]
        return np.stack([c[1] + 2 * c[3] * X + c[4] * Y, c[2] + c[4] * X + 2 * c[5] * Y], axis=1)

    def f(x):
        return np.full(len(x), -2.0 * (c[3] + c[5]))

    return ManufacturedSolution(name, u, grad, f, 'polynomial %s' % list(c))


SOLUTIONS = {
    'square': _square(),
    'disk': _disk(),
    'three_patch': _three_patch(),
    'zero': _polynomial('zero', [0, 0, 0, 0, 0, 0]),
    'constant': _polynomial('constant', [1, 0, 0, 0, 0, 0]),
    'linear': _polynomial('linear', [0.5, 2.0, -3.0, 0, 0, 0]),
    'quadratic': _polynomial('quadratic', [1.0, 1.0, -1.0, 1.0, 1.0, -0.5]),
}


def get_solution(name):
    """Manufactured solution by identifier."""
    try:
        return SOLUTIONS[name]
    except KeyError:
        raise ValueError('unknown solution %r (known: %s)' % (name, ', '.join(sorted(SOLUTIONS))))


def check_forcing(sol, x, h=1e-3):
    """Mismatch between ``f`` and a finite-difference ``-lap u``, relative to max(|f|, 1).

    Uses a fourth-order five-point stencil in each direction.
    """
    def d2(axis):
        e = np.zeros(2)
        e[axis] = h
        return (-sol.u(x + 2 * e) + 16 * sol.u(x + e) - 30 * sol.u(x)
                + 16 * sol.u(x - e) - sol.u(x - 2 * e)) / (12 * h * h)
    fd = -(d2(0) + d2(1))
    f = sol.f(x)
    return float(np.max(np.abs(fd - f)) / max(np.max(np.abs(f)), 1.0))
