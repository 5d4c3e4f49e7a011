import os
import subprocess
import sys

import numpy as np
import pytest

from ewens_moments import backend
from ewens_moments.core import EwensParams
from ewens_moments.sampler import sample_crp

BACKENDS = sorted(backend.available_backends())
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")


def test_fallback_always_available():
    assert "python" in BACKENDS
    assert backend.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        backend.get_backend("fortran")


@needs_cython
@pytest.mark.parametrize("theta", [0.3, 1.0, 2.7])
def test_crp_backends_bit_identical(theta):
    a = backend.crp_cycle_lengths(500, theta, 77, 400, threads=1, backend="python")
    b = backend.crp_cycle_lengths(500, theta, 77, 400, threads=1, backend="cython")
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@pytest.mark.parametrize("name", BACKENDS)
def test_crp_independent_of_threads(name):
    ref = backend.crp_cycle_lengths(200, 1.4, 5, 999, threads=1, backend=name)
    for t in (2, 4, 7):
        got = backend.crp_cycle_lengths(200, 1.4, 5, 999, threads=t, backend=name)
        assert np.array_equal(ref[0], got[0]) and np.array_equal(ref[1], got[1])


@pytest.mark.parametrize("name", BACKENDS)
def test_crp_draw_depends_only_on_seed_and_index(name):
    full = sample_crp(EwensParams(60, 0.8), 50, seed=3, backend_name=name)
    impl = backend.get_backend(name)
    lengths, offsets = impl.crp_cycle_lengths(60, 0.8, 3, 20, 10)
    for d in range(10):
        assert np.array_equal(lengths[offsets[d]:offsets[d + 1]],
                              full.lengths[full.offsets[20 + d]:full.offsets[21 + d]])


@pytest.mark.parametrize("name", BACKENDS)
def test_convolution_backends(name):
    rng = np.random.default_rng(0)
    v = rng.random(300) * (rng.random(300) < 0.3)
    g = rng.random(300)
    want = np.convolve(v, g)[:300]
    got = backend.causal_convolve(v, g, 300, method="direct", backend=name)
    np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-13)
    fft = backend.causal_convolve(v, g, 300, method="fft")
    np.testing.assert_allclose(fft, want, rtol=1e-10, atol=1e-12)
    assert not backend.causal_convolve(np.zeros(5), g, 5).any()


def test_env_forces_fallback():
    env = dict(os.environ, EWENS_MOMENTS_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import ewens_moments; print(ewens_moments.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
