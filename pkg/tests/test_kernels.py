"""The compiled kernels and the pure-Python fallback must agree exactly."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hopcolor import _backend, _pykernels
from hopcolor.vector_method import _candidates, _near, exact_range

from conftest import random_graph

compiled = _backend.compiled
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def test_backend_name():
    assert _backend.name in ("cython", "python")
    assert (_backend.kernels is compiled) == (_backend.name == "cython")


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 25), st.floats(0.05, 0.5), st.integers(1, 4))
def test_bfs_and_ball(seed, n, p, h):
    t = random_graph(np.random.default_rng(seed), n, p)
    for src in range(n):
        a = compiled.bfs_dist(t.indptr, t.indices, src, h)
        b = _pykernels.bfs_dist(t.indptr, t.indices, src, h)
        assert np.array_equal(a, b)
    for x, y in zip(compiled.ball_csr(t.indptr, t.indices, h), _pykernels.ball_csr(t.indptr, t.indices, h)):
        assert np.array_equal(x, y)


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 10), st.floats(0.1, 0.7))
def test_exact_color(seed, n, p):
    t = random_graph(np.random.default_rng(seed), n, p)
    ptr, flat, _ = t.ball(2)
    upper = np.arange(n)
    ka, ca = compiled.exact_color(ptr, flat, 1, upper)
    kb, cb = _pykernels.exact_color(ptr, flat, 1, upper)
    assert ka == kb and np.array_equal(np.asarray(ca), np.asarray(cb))


@needs_compiled
@pytest.mark.parametrize("R,h", [(1, 2), (1, 3), (1.5, 3), (2, 2), (2.5, 3)])
def test_lattice_search(R, h):
    r = exact_range(R)
    near = _near(r, h)
    cx, cy = _candidates(r, h, int(np.ceil(h * R)) + 1, near, annulus=False)
    bound = np.iinfo(np.int64).max
    assert compiled.lattice_search(cx, cy, near[:, 0], near[:, 1], bound) == _pykernels.lattice_search(
        cx, cy, near[:, 0], near[:, 1], bound
    )


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.floats(0.02, 0.4), st.booleans())
def test_serena_rounds(seed, n, p, guarded):
    rng = np.random.default_rng(seed)
    t = random_graph(rng, n, p)
    rank = rng.permutation(n).astype(np.int32)
    nwords = 2
    a = compiled.serena_rounds(t.indptr, t.indices, rank, 10_000, nwords, int(guarded))
    b = _pykernels.serena_rounds(t.indptr, t.indices, rank, 10_000, nwords, int(guarded))
    assert np.array_equal(np.asarray(a[0]), np.asarray(b[0]))
    assert np.array_equal(np.asarray(a[1]), np.asarray(b[1]))
    assert tuple(a[2:]) == tuple(b[2:])
