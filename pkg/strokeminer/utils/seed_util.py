"""
Seed derivation for the synthetic generator.

The derived seeds feed numpy's PCG64 bit generator. Both algorithms are fully
specified, so the same master seed yields the same streams in any language.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 output for the state x (64-bit arithmetic)."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """
    Positional child seed: splitmix64(master + (index + 1) * gamma mod 2^64).

    Depends only on (master, index), never on how many seeds were drawn before.
    """
    return splitmix64((int(master) + (int(index) + 1) * GOLDEN_GAMMA) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))
