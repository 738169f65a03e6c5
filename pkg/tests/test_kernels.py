import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperquadric import _kernels_py, kernels

try:
    from hyperquadric import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def sorted_input(freqs, width, seed):
    rng = np.random.default_rng(seed)
    freqs = np.asarray(freqs, dtype=complex)
    coeffs = rng.normal(size=(len(freqs), width)) + 1j * rng.normal(size=(len(freqs), width))
    order = np.lexsort((freqs.imag, freqs.real))
    return (np.ascontiguousarray(freqs.real[order]), np.ascontiguousarray(freqs.imag[order]),
            np.ascontiguousarray(coeffs[order]))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython" or kernels.cluster_sum is _kernels_py.cluster_sum


def test_python_merges_close_frequencies():
    fre, fim, c = sorted_input([1.0, 1.0 + 1e-12, 2.0], 1, 0)
    hr, hi, out = _kernels_py.cluster_sum(fre, fim, c, 1e-9)
    assert len(hr) == 2
    assert np.allclose(out.sum(axis=0), c.sum(axis=0))


@needs_ext
@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=40),
       st.integers(0, 1000))
def test_backends_agree(points, seed):
    rng = np.random.default_rng(seed)
    freqs = [complex(x, y) * 0.5 + 1e-11 * rng.normal() for x, y in points]
    args = sorted_input(freqs, 3, seed) + (1e-9,)
    a = _kernels_py.cluster_sum(*args)
    b = compiled.cluster_sum(*args)
    for x, y in zip(a, b):
        assert x.shape == y.shape and np.allclose(x, y, rtol=0, atol=1e-13)


def test_pure_python_backend_selected_by_env():
    import subprocess
    import sys
    code = "import hyperquadric.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"HYPERQUADRIC_PURE_PYTHON": "1", "PATH": ""})
    assert out.stdout.strip() == "python"
