"""Counter-based SplitMix64 streams for reproducible Monte Carlo.

Substream i of a 64-bit root seed has base finalize(root + (i+1) * GOLDEN);
value j of a substream is finalize(base + (j+1) * GOLDEN), where finalize is
the SplitMix64 avalanche (xor-shift 30 / multiply 0xBF58476D1CE4E5B9 /
xor-shift 27 / multiply 0x94D049BB133111EB / xor-shift 31) and GOLDEN is
0x9E3779B97F4A7C15. Every draw is a pure function of (root, stream, counter),
so results are independent of evaluation order and parallelism. Stream 0 is
reserved for setup (e.g. mesh directions); trial i uses stream i + 1.

Uniforms map the top 53 bits to ((x >> 11) + 0.5) * 2^-53, which lies
strictly inside (0, 1). Normals use one Box-Muller cosine per pair of
uniforms.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53


def finalize(z):
    """SplitMix64 avalanche of uint64 scalar or array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def substream_seed(root_seed: int, index):
    """Base state of substream `index` (scalar or integer array)."""
    root = np.uint64(root_seed & 0xFFFFFFFFFFFFFFFF)
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return finalize(root + (idx + np.uint64(1)) * GOLDEN)


def uniforms(seeds, count: int) -> np.ndarray:
    """Uniform(0, 1) draws, shape seeds.shape + (count,), stateless.

    seeds are substream bases from substream_seed; column j holds that
    substream's j-th value.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    with np.errstate(over="ignore"):
        counters = (np.arange(count, dtype=np.uint64) + np.uint64(1)) * GOLDEN
        bits = finalize(seeds[..., None] + counters)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53


def normals(seeds, count: int) -> np.ndarray:
    """Standard normal draws, shape seeds.shape + (count,), stateless.

    Normal j consumes uniforms (2j, 2j+1) of the substream, so extending
    count preserves earlier values.
    """
    u = uniforms(seeds, 2 * count)
    radius = np.sqrt(-2.0 * np.log(u[..., 0::2]))
    return radius * np.cos(2.0 * np.pi * u[..., 1::2])
