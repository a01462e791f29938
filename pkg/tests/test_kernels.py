import numpy as np
from hypothesis import given, strategies as st

from tracelab import _kernels as K

spectra = st.lists(
    st.tuples(st.sampled_from([0.0, 0.5, 1.0, 1.0 + 1e-14, 2.0, 3.0]) | st.floats(0, 10),
              st.floats(0.1, 4.0)),
    min_size=1, max_size=12,
)
times = st.lists(st.floats(0, 50), min_size=1, max_size=8)


def arrays(pairs):
    v = np.array([p[0] for p in pairs])
    ln = np.array([p[1] for p in pairs])
    return v, ln


def test_backend_flag():
    assert K.BACKEND in ("numba", "numpy")
    assert K.BACKEND == ("numba" if K._use_numba() else "numpy")


@given(spectra, times)
def test_numba_and_numpy_agree(pairs, ts):
    if not K.HAS_NUMBA:
        return
    v, ln = arrays(pairs)
    ts = np.array(ts)
    cv_np, cl_np = K.canonical_steps_np(v, ln)
    cv_nb, cl_nb = K.canonical_steps_nb(v, ln)
    assert np.array_equal(cv_np, cv_nb)
    assert np.allclose(cl_np, cl_nb, rtol=1e-14)
    assert np.isclose(K.weighted_sum_np(v, ln), K.weighted_sum_nb(v, ln), rtol=1e-13)
    assert np.allclose(K.distribution_np(v, ln, ts), K.distribution_nb(v, ln, ts), rtol=1e-13)
    assert np.array_equal(K.mu_eval_np(cv_np, cl_np, ts), K.mu_eval_nb(cv_np, cl_np, ts))
    assert np.array_equal(K.mu_inf_np(v, ln, ts), K.mu_inf_nb(v, ln, ts))


@given(spectra)
def test_canonical_steps_shape(pairs):
    v, ln = arrays(pairs)
    cv, cl = K.canonical_steps(v, ln)
    assert np.all(np.diff(cv) < 0)
    assert np.isclose(cl.sum(), ln.sum(), rtol=1e-13)
    assert np.all(cl > 0)


@given(spectra, times)
def test_inf_formula_matches_sorted_construction(pairs, ts):
    v, ln = arrays(pairs)
    cv, cl = K.canonical_steps(v, ln)
    # sample just inside steps so boundary summation order cannot matter
    bounds = np.r_[0.0, np.cumsum(cl)[:-1]]
    probe = np.r_[bounds + 1e-9 * cl, bounds + 0.5 * cl, cl.sum() * (1 + 1e-9) + np.abs(ts)]
    got = K.mu_eval(cv, cl, probe)
    ref = K.mu_inf(v, ln, probe)
    assert np.allclose(got, ref, rtol=1e-11, atol=1e-200)


def test_env_flag_selects_numpy_path():
    import os
    import subprocess
    import sys
    code = ("from tracelab._kernels import BACKEND; from tracelab.spectral import singular_values;"
            "from tracelab.algebra import make_algebra; import numpy as np;"
            "a = make_algebra([(1, 2.0), (2, 0.5)]);"
            "print(BACKEND, singular_values(a.element([np.array([[3.0]]), np.eye(2)])).steps)")
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, TRACELAB_NUMBA=flag)
        outs[flag] = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                                    text=True, check=True).stdout.split(" ", 1)
    assert outs["0"][0] == "numpy"
    assert outs["1"][0] == ("numba" if K.HAS_NUMBA else "numpy")
    assert outs["0"][1] == outs["1"][1]
