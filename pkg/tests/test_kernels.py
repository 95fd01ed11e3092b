from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinbands._kernels import _pykernels
from thinbands.iet_rauzy import IETStage
from thinbands.surface_sections import _guard, bridge_faces, seed_vertex, start_point

ck = pytest.importorskip("thinbands._kernels._ckernels", reason="compiled kernels not built")


@pytest.fixture(scope="module")
def stage(doubling_solution):
    return IETStage.from_w([float(v) for v in doubling_solution.exact[0]])


@given(st.integers(min_value=1, max_value=3), st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=25)
def test_iet_orbit_backends_agree(stage, b, t):
    tables = stage.float_tables()
    o0 = t * float(stage.transversal_length(b))
    py = _pykernels.iet_orbit(*tables, b - 1, o0, 2000)
    c = ck.iet_orbit(*tables, b - 1, o0, 2000)
    assert py[3] == c[3]
    for x, y in zip(py[:3], c[:3]):
        assert np.array_equal(x, y)


def bfs_args(model, a, n1, n2, radius):
    n0 = seed_vertex(model, a, n1, n2)
    return (n0, float(a), model.H_float, model.w_float, float(model.sigma), radius, _guard(model))


@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)),
       st.integers(min_value=-500, max_value=500), st.integers(min_value=-500, max_value=500))
@settings(max_examples=20)
def test_gamma_bfs_backends_agree(doubling_model, t, n1, n2):
    args = bfs_args(doubling_model, doubling_model.sigma * t, n1, n2, 60)
    py, c = _pykernels.gamma_bfs(*args), ck.gamma_bfs(*args)
    assert py[4] == c[4]
    for x, y in zip(py[:4], c[:4]):
        assert np.array_equal(np.asarray(x), np.asarray(y))


def test_gamma_bfs_critical_flag(doubling_model):
    m = doubling_model
    n0 = (0, 0, 0)
    a = float(m.sigma - m.w[0])  # edge threshold at the seed
    args = (n0, a, m.H_float, m.w_float, float(m.sigma), 10, _guard(m))
    assert _pykernels.gamma_bfs(*args)[4] == ck.gamma_bfs(*args)[4] == _pykernels.BFS_CRITICAL


@pytest.mark.parametrize("t", [Fraction(3, 7), Fraction(1, 5), Fraction(5, 6)])
def test_trace_curve_backends_agree(doubling_model, t):
    m = doubling_model
    a = m.sigma * t
    n = seed_vertex(m, a, 2, 9)
    f, p = next((f, start_point(m, f, a)) for i in (1, 2, 3) for f in bridge_faces(m, n, i)
                if start_point(m, f, a) is not None)
    args = (f.axis, f.corner, p, m.H_float, float(a), 3000, 1e-12)
    py, c = _pykernels.trace_curve(*args), ck.trace_curve(*args)
    assert py[2] == c[2]
    assert np.array_equal(py[1], c[1])
    assert np.allclose(py[0], c[0], rtol=0, atol=1e-9)
