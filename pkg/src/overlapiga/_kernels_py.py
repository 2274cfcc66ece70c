"""Pure NumPy implementations of the B-spline evaluation kernels.

These mirror the compiled routines in ``_kernels.pyx`` and are used when the
extension module is not available (or when ``OVERLAPIGA_PURE_PYTHON`` is set).
"""
import numpy as np


def find_spans(knots, p, x):
    """Knot span indices for an array of parameters.

    The last non-empty span is returned for ``x == knots[-1]``.
    """
    knots = np.asarray(knots, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(knots) - p - 1
    spans = np.searchsorted(knots, x, side='right') - 1
    return np.clip(spans, p, n - 1).astype(np.intp)


def basis_ders(knots, p, x, spans, nders):
    """Nonzero basis functions and derivatives at many points.

    Returns an array of shape ``(len(x), nders + 1, p + 1)``; entry
    ``[q, k, r]`` is the k-th derivative of basis ``spans[q] - p + r``.
    Vectorized form of Algorithm A2.3 of Piegl & Tiller.
    """
    knots = np.asarray(knots, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    spans = np.asarray(spans, dtype=np.intp)
    npts = x.shape[0]
    ndu = np.zeros((npts, p + 1, p + 1))
    left = np.zeros((npts, p + 1))
    right = np.zeros((npts, p + 1))
    ndu[:, 0, 0] = 1.0
    for j in range(1, p + 1):
        left[:, j] = x - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            ndu[:, j, r] = right[:, r + 1] + left[:, j - r]
            temp = ndu[:, r, j - 1] / ndu[:, j, r]
            ndu[:, r, j] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        ndu[:, j, j] = saved

    out = np.zeros((npts, nders + 1, p + 1))
    out[:, 0, :] = ndu[:, :, p]
    if nders == 0:
        return out
    a = np.zeros((npts, 2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:, 0, 0] = 1.0
        for k in range(1, nders + 1):
            d = np.zeros(npts)
            rk = r - k
            pk = p - k
            if r >= k:
                a[:, s2, 0] = a[:, s1, 0] / ndu[:, pk + 1, rk]
                d = a[:, s2, 0] * ndu[:, rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[:, s2, j] = (a[:, s1, j] - a[:, s1, j - 1]) / ndu[:, pk + 1, rk + j]
                d = d + a[:, s2, j] * ndu[:, rk + j, pk]
            if r <= pk:
                a[:, s2, k] = -a[:, s1, k - 1] / ndu[:, pk + 1, r]
                d = d + a[:, s2, k] * ndu[:, r, pk]
            out[:, k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nders + 1):
        out[:, k, :] *= fac
        fac *= p - k
    return out
