"""Counter-based random numbers for lattice noise.

Every innovation is a pure function of ``(seed, k, ell)``: the cell
coordinates form the Philox4x32-10 counter and the seed is the key.  Fields
are therefore reproducible independently of traversal order, of the triangle
order ``n`` and of how work is split across workers.
"""

from __future__ import annotations

import enum

import numpy as np

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

# lattice coordinates are offset into the unsigned 32-bit counter words
_COORD_OFFSET = 1 << 31


class NoiseKind(str, enum.Enum):
    """Innovation distributions; all have mean 0 and variance 1."""

    STANDARD_NORMAL = "normal"
    RADEMACHER = "rademacher"
    CENTERED_UNIFORM = "uniform"

    @property
    def fourth_moment(self) -> float:
        return {"normal": 3.0, "rademacher": 1.0, "uniform": 9.0 / 5.0}[self.value]


def philox4x32(counter, key, rounds: int = 10):
    """Vectorised Philox4x32 block function.

    ``counter`` is a sequence of four uint32 arrays (broadcastable), ``key`` a
    pair of Python ints.  Returns four uint32 arrays.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & MASK32 for c in counter)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & MASK32
        c0, c1, c2, c3 = (
            hi1 ^ c1 ^ np.uint64(k0),
            lo1,
            hi0 ^ c3 ^ np.uint64(k1),
            lo0,
        )
        k0 = (k0 + PHILOX_W0) & 0xFFFFFFFF
        k1 = (k1 + PHILOX_W1) & 0xFFFFFFFF
    return tuple(c.astype(np.uint32) for c in (c0, c1, c2, c3))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _unit_interval(hi, lo):
    # 53 random bits, shifted off zero so log() is always finite
    x = (hi.astype(np.uint64) >> np.uint64(5)) * np.uint64(1 << 26) + (
        lo.astype(np.uint64) >> np.uint64(6)
    )
    return (x.astype(np.float64) + 0.5) * 2.0**-53


def cell_uniforms(seed: int, k, ell, stream: int = 0):
    """Two independent U(0,1) arrays per cell ``(k, ell)``."""
    seed = _check_seed(seed)
    k = np.asarray(k, dtype=np.int64) + _COORD_OFFSET
    ell = np.asarray(ell, dtype=np.int64) + _COORD_OFFSET
    words = philox4x32(
        (k, ell, np.full_like(k, stream), np.zeros_like(k)),
        (seed & 0xFFFFFFFF, seed >> 32),
    )
    return _unit_interval(words[0], words[1]), _unit_interval(words[2], words[3])


def cell_noise(seed: int, k, ell, kind=NoiseKind.STANDARD_NORMAL):
    """Innovations at the given lattice cells; a pure function of its inputs."""
    kind = NoiseKind(kind)
    u1, u2 = cell_uniforms(seed, k, ell)
    if kind is NoiseKind.STANDARD_NORMAL:
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    if kind is NoiseKind.RADEMACHER:
        return np.where(u1 < 0.5, -1.0, 1.0)
    return np.sqrt(3.0) * (2.0 * u1 - 1.0)


def fmix64(x: int) -> int:
    """MurmurHash3 64-bit finaliser (a bijection on 64-bit words)."""
    mask = (1 << 64) - 1
    x &= mask
    x ^= x >> 33
    x = (x * 0xFF51AFD7ED558CCD) & mask
    x ^= x >> 33
    x = (x * 0xC4CEB9FE1A85EC53) & mask
    x ^= x >> 33
    return x


def replicate_seed(master_seed: int, n: int, replicate: int) -> int:
    """Seed for replicate ``replicate`` of triangle order ``n``.

    The map ``(n, replicate) -> seed`` is injective for a fixed master seed
    whenever both indices fit in 32 bits, so replicate streams never coincide.
    """
    master_seed = _check_seed(master_seed)
    if not (0 <= n < 1 << 32 and 0 <= replicate < 1 << 32):
        raise ValueError("n and replicate must fit in 32 bits")
    return fmix64(fmix64(master_seed) ^ ((n << 32) | replicate))


def standard_normal(seed: int, size: int, stream: int = 1):
    """``size`` standard normals from a 1-D counter stream (testing helper)."""
    idx = np.arange(size, dtype=np.int64)
    u1, u2 = cell_uniforms(seed, idx, np.zeros_like(idx), stream=stream)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
