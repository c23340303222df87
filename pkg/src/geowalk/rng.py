"""Counter-based random number derivation for reproducible ensembles.

Seeding contract
----------------
The per-sample seed is a stated 64-bit mix of the master seed and the sample
index::

    seed(master, j) = mix64(master + (j + 1) * GAMMA   mod 2^64)

where ``mix64`` is the splitmix64 finalizer and ``GAMMA = 0x9E3779B97F4A7C15``.
Draw ``t`` of sample ``j`` is ``mix64(seed_j + (t + 1) * GAMMA)``, i.e. the
``t``-th output of a splitmix64 stream seeded at ``seed_j``.  Standard normal
variates consume two uniforms each through the Box-Muller map.

Because every variate is a pure function of ``(master_seed, sample_index,
draw_index)``, ensemble output is bit-identical for any worker count or
chunking of the sample range.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

_TWO53 = float(1 << 53)


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def sample_seeds(master_seed: int, n_samples: int, start: int = 0) -> np.ndarray:
    """Per-sample seeds for sample indices ``start .. start + n_samples - 1``."""
    master = np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    idx = np.arange(start + 1, start + n_samples + 1, dtype=np.uint64)
    return mix64(master + idx * GAMMA)


def uniforms(seeds: np.ndarray, n_draws: int, offset: int = 0) -> np.ndarray:
    """Uniform (0, 1] draws: shape ``(len(seeds), n_draws)``.

    ``offset`` shifts the draw counter, letting a caller consume the stream
    in slices.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    t = np.arange(offset + 1, offset + n_draws + 1, dtype=np.uint64)
    z = mix64(seeds[:, None] + t[None, :] * GAMMA)
    return (np.right_shift(z, np.uint64(11)).astype(np.float64) + 1.0) / _TWO53


def normals(seeds: np.ndarray, n_draws: int, offset: int = 0) -> np.ndarray:
    """Standard normal draws: shape ``(len(seeds), n_draws)``.

    Draw ``q`` uses uniforms ``2q`` and ``2q + 1`` of the sample's stream
    (plus ``2 * offset``), via Box-Muller.
    """
    u = uniforms(np.asarray(seeds, dtype=np.uint64), 2 * n_draws, offset=2 * offset)
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
