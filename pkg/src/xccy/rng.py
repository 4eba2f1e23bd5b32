"""Stateless counter-based random numbers (Philox-4x64-10).

Every normal variate is a pure function of (seed, path, step, driver), so a
scenario is bit-identical no matter how paths are split across workers. The
core permutation matches the reference Philox-4x64-10: block ``c`` of this
module equals the first block numpy's ``np.random.Philox`` emits when seeded
with ``counter = c - 1`` (numpy pre-increments the counter word 0 before the
first draw); the unit tests pin that equivalence.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = (1 << 64) - 1
_SH = np.uint64(32)

# key schedule for 10 rounds, precomputed in python ints to avoid uint64 overflow
_KEY_OFFSETS = [((r * _W0) & _MASK64, (r * _W1) & _MASK64) for r in range(10)]


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full 128-bit product of a scalar and an array, as (high, low) 64-bit words."""
    lo = a * b
    a_hi, a_lo = a >> _SH, a & _MASK32
    b_hi, b_lo = b >> _SH, b & _MASK32
    t = a_hi * b_lo + ((a_lo * b_lo) >> _SH)
    hi = a_hi * b_hi + (t >> _SH) + ((a_lo * b_hi + (t & _MASK32)) >> _SH)
    return hi, lo


def philox4x64(counters: np.ndarray, key: int) -> np.ndarray:
    """Apply the Philox-4x64-10 permutation to an (n, 4) array of counters.

    Returns an (n, 4) uint64 array. ``key`` is reduced modulo 2**128 and split
    into two 64-bit words.
    """
    counters = np.ascontiguousarray(counters, dtype=np.uint64)
    x0 = counters[:, 0].copy()
    x1 = counters[:, 1].copy()
    x2 = counters[:, 2].copy()
    x3 = counters[:, 3].copy()
    key = int(key) & ((1 << 128) - 1)
    k0_base, k1_base = key & _MASK64, key >> 64
    for off0, off1 in _KEY_OFFSETS:
        k0 = np.uint64((k0_base + off0) & _MASK64)
        k1 = np.uint64((k1_base + off1) & _MASK64)
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    out = np.empty((counters.shape[0], 4), dtype=np.uint64)
    out[:, 0], out[:, 1], out[:, 2], out[:, 3] = x0, x1, x2, x3
    return out


def _to_uniform(bits: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles in the open interval (0, 1)."""
    return (bits >> np.uint64(11)).astype(np.float64) * (2.0**-53) + 2.0**-54


def normal_block(seed: int, paths: np.ndarray, n_steps: int, n_drivers: int) -> np.ndarray:
    """Standard normals for the requested paths, shape (len(paths), n_steps, n_drivers).

    The variate for (path p, step s, driver d) is read from Philox block
    ``counter = (d // 4, s, p, 0)``, word ``d % 4``, keyed by the seed, so the
    result for a given path does not depend on which other paths are in the
    block.
    """
    paths = np.asarray(paths, dtype=np.uint64)
    n_blocks = max(1, -(-n_drivers // 4))
    p_ix, s_ix, b_ix = np.meshgrid(
        paths, np.arange(n_steps, dtype=np.uint64), np.arange(n_blocks, dtype=np.uint64), indexing="ij"
    )
    counters = np.empty((p_ix.size, 4), dtype=np.uint64)
    counters[:, 0] = b_ix.ravel()
    counters[:, 1] = s_ix.ravel()
    counters[:, 2] = p_ix.ravel()
    counters[:, 3] = 0
    bits = philox4x64(counters, seed)
    uniforms = _to_uniform(bits).reshape(len(paths), n_steps, n_blocks * 4)[:, :, :n_drivers]
    return ndtri(uniforms)
