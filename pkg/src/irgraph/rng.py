"""Seed derivation and random streams.

Every replica gets its own stream. Seeds are derived with SplitMix64::

    z = (x + 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)

``mix(master, i)`` applies SplitMix64 twice, to ``master`` and then to the
result xor ``i``. The 64-bit output keys a Philox4x64 counter-based bit
generator, wrapped in ``numpy.random.Generator``.
"""
import numpy as np

MASK64 = (1 << 64) - 1
DEFAULT_SEED = 20240611


def splitmix64(x):
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(master_seed, index):
    """Seed for replica ``index`` under ``master_seed``."""
    return splitmix64(splitmix64(master_seed & MASK64) ^ (index & MASK64))


def stream(seed):
    return np.random.Generator(np.random.Philox(key=seed & MASK64))
