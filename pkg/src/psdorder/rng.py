"""Deterministic, counter-based random streams.

Everything stochastic in this package (inner inverse perturbations, sampled
order-preservation trials, Monte Carlo draws) is keyed by an integer seed and
produced by SplitMix64 counters mapped through Box-Muller.  Counter-based
generation means a stream can be sharded by offset: draws [k, k+m) are the
same whether produced in one call or many, so parallel shards and a single
sequential run agree bit for bit.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over uint64 arrays (wrapping arithmetic)."""
    x = x.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        x ^= x >> _U64(30)
        x *= _MIX1
        x ^= x >> _U64(27)
        x *= _MIX2
        x ^= x >> _U64(31)
    return x


def substream(seed: int, *indices: int) -> int:
    """Derive a child seed from a parent seed and a path of indices.

    Children of distinct paths are statistically independent streams; this is
    how trial loops and Monte Carlo shards get their private keys.
    """
    key = np.asarray(np.uint64(seed % (1 << 64)))
    with np.errstate(over="ignore"):
        for idx in indices:
            key = _mix64(key ^ (_mix64(np.asarray(np.uint64(idx % (1 << 64)))) + _GOLDEN))
    return int(key)


def _raw(seed: int, count: int, offset: int) -> np.ndarray:
    key = np.uint64(seed % (1 << 64))
    counters = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        states = key + counters * _GOLDEN
    return _mix64(states)


def uniforms(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """`count` doubles in [0, 1) from the stream keyed by `seed`, starting at
    counter position `offset`."""
    bits = _raw(seed, count, offset)
    return (bits >> _U64(11)).astype(np.float64) * (2.0 ** -53)


def normals(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """`count` standard normal doubles via Box-Muller.

    Each counter position yields one normal; positions pair up as (even, odd)
    so offset-based sharding remains exact as long as shard boundaries are
    even.  Internally u1 is reflected into (0, 1] to keep log finite.
    """
    if count == 0:
        return np.zeros(0)
    start = offset - (offset % 2)
    n_pos = (offset + count) - start
    n_pairs = (n_pos + 1) // 2
    u = uniforms(seed, 2 * n_pairs, start)
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * n_pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    lead = offset - start
    return out[lead:lead + count]


def normal_matrix(seed: int, rows: int, cols: int, offset: int = 0) -> np.ndarray:
    """Row-major (rows, cols) matrix of standard normals from one stream."""
    return normals(seed, rows * cols, offset).reshape(rows, cols)
