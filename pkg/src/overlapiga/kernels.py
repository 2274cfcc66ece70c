"""Backend selection for the B-spline evaluation kernels.

The compiled extension is used when it imports cleanly; otherwise the pure
NumPy fallback is selected. Setting ``OVERLAPIGA_PURE_PYTHON=1`` forces the
fallback.
"""
import os

BACKEND = 'python'

if not os.environ.get('OVERLAPIGA_PURE_PYTHON'):
    try:
        from ._kernels import basis_ders, find_spans
        BACKEND = 'cython'
    except ImportError:  # extension not built
        pass

if BACKEND == 'python':
    from ._kernels_py import basis_ders, find_spans

__all__ = ['BACKEND', 'basis_ders', 'find_spans']
