"""Kernel backend selection.

The compiled ``_kernels`` module is used when it was built; otherwise the
numpy fallback is used.  Set ``EWENS_MOMENTS_BACKEND=python`` to force the
fallback.  ``EWENS_MOMENTS_THREADS`` sets the default number of sampler
threads (the compiled kernel releases the GIL per draw).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.signal import fftconvolve

from . import _fallback

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

if os.environ.get("EWENS_MOMENTS_BACKEND", "").lower() == "python" or _kernels is None:
    _impl = _fallback
else:
    _impl = _kernels

BACKEND = _impl.NAME

# direct summation up to this many multiply-adds per convolution, FFT above
DIRECT_CONVOLVE_LIMIT = 20_000_000


def available_backends() -> dict:
    out = {"python": _fallback}
    if _kernels is not None:
        out["cython"] = _kernels
    return out


def get_backend(name: str | None = None):
    if name is None:
        return _impl
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available") from None


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("EWENS_MOMENTS_THREADS", "1")))
    except ValueError:
        return 1


def crp_cycle_lengths(n: int, theta: float, seed: int, count: int,
                      threads: int | None = None, backend: str | None = None):
    """Concatenated cycle lengths and offsets for ``count`` CRP draws.

    Draw ``d`` depends only on ``(seed, d)``, so the result does not depend on
    the thread count or chunking.
    """
    impl = get_backend(backend)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or count < 2 * threads:
        return impl.crp_cycle_lengths(n, float(theta), seed, 0, count)
    bounds = np.linspace(0, count, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda ab: impl.crp_cycle_lengths(n, float(theta), seed, ab[0], ab[1] - ab[0]),
            zip(bounds[:-1], bounds[1:]),
        ))
    lengths = np.concatenate([p[0] for p in parts])
    offsets = [np.zeros(1, dtype=np.int64)]
    base = 0
    for lens, offs in parts:
        offsets.append(offs[1:] + base)
        base += len(lens)
    return lengths, np.concatenate(offsets)


def causal_convolve(v: np.ndarray, g: np.ndarray, out_len: int,
                    method: str = "auto", backend: str | None = None) -> np.ndarray:
    """Truncated convolution out[m] = sum_{j<=m} v[j] g[m-j], m < out_len.

    ``method`` is ``"direct"``, ``"fft"`` or ``"auto"`` (direct while the
    sparse cost nnz(v) * out_len stays below ``DIRECT_CONVOLVE_LIMIT``).
    """
    v = np.asarray(v, dtype=np.float64)[:out_len]
    g = np.asarray(g, dtype=np.float64)[:out_len]
    idx = np.flatnonzero(v)
    if idx.size == 0 or not np.any(g):
        return np.zeros(out_len)
    if method == "auto":
        method = "direct" if idx.size * out_len <= DIRECT_CONVOLVE_LIMIT else "fft"
    if method == "fft":
        return fftconvolve(v, g)[:out_len]
    impl = get_backend(backend)
    return impl.causal_convolve(idx.astype(np.int64), np.ascontiguousarray(v[idx]),
                                np.ascontiguousarray(g), out_len)
