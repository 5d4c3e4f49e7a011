"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` must reproduce them
bit for bit.  Random numbers come from a counter-based SplitMix64 stream:
draw ``d`` of a batch seeded with ``seed`` uses the key
``mix64(seed + (d + 1) * GOLDEN)`` and its ``i``-th uniform is
``(mix64(key + (i + 1) * GOLDEN) >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1
_TWO53 = 1.0 / 9007199254740992.0


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, start: int, count: int) -> np.ndarray:
    d = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(seed & _MASK) + d * GOLDEN)


def uniforms(keys: np.ndarray, n: int) -> np.ndarray:
    """Matrix of uniforms, one row per key, n columns."""
    i = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = mix64(keys[:, None] + i[None, :] * GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _TWO53


def _crp_rows(u: np.ndarray, theta: float) -> list[np.ndarray]:
    rows, n = u.shape
    idx = np.arange(n, dtype=np.int64)
    x = u * (theta + idx.astype(np.float64))
    new = x < theta
    # element i joins the table of a uniformly chosen earlier element e < i
    e = np.floor(np.where(new, 0.0, x - theta)).astype(np.int64)
    e = np.minimum(e, np.maximum(idx - 1, 0))
    parent = np.where(new, idx, e)
    # pointer jumping to the table opener
    while True:
        nxt = np.take_along_axis(parent, parent, axis=1)
        if np.array_equal(nxt, parent):
            break
        parent = nxt
    out = []
    for r in range(rows):
        sizes = np.bincount(parent[r], minlength=n)
        sizes = sizes[sizes > 0]
        out.append(np.sort(sizes)[::-1])
    return out


def crp_cycle_lengths(n: int, theta: float, seed: int, start: int, count: int):
    """Cycle lengths of ``count`` CRP draws, concatenated per draw.

    Returns ``(lengths, offsets)``: draw ``d`` owns
    ``lengths[offsets[d]:offsets[d+1]]`` sorted in decreasing order.
    """
    keys = stream_keys(seed, start, count)
    rows_per_chunk = max(1, 4_000_000 // max(n, 1))
    chunks = []
    for c0 in range(0, count, rows_per_chunk):
        u = uniforms(keys[c0:c0 + rows_per_chunk], n)
        chunks.extend(_crp_rows(u, float(theta)))
    offsets = np.zeros(count + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(c) for c in chunks])
    lengths = np.concatenate(chunks).astype(np.int64) if chunks else np.zeros(0, np.int64)
    return lengths, offsets


def causal_convolve(idx: np.ndarray, vals: np.ndarray, g: np.ndarray, out_len: int) -> np.ndarray:
    """out[m] = sum_t vals[t] * g[m - idx[t]] for 0 <= m < out_len (direct sum)."""
    dense = np.zeros(out_len, dtype=np.float64)
    keep = idx < out_len
    dense[idx[keep]] = vals[keep]
    return np.convolve(dense, np.asarray(g[:out_len], dtype=np.float64))[:out_len]
