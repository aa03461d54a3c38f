"""
Seed-derived random streams.

One master seed governs every random draw. A stream is identified by a
module name and an index (usually the trial number); its id is the
64-bit FNV-1a hash of "module:index". Streams do not depend on how
trials are split across workers.

Example:
    from common.utils import stream_rng

    rng = stream_rng(seed=7, module="percolation", index=12)
    uniforms = rng.random(100)
"""

import numpy as np


FNV_OFFSET_64 = 0xCBF29CE484222325
FNV_PRIME_64 = 0x100000001B3
MASK_64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(text: str) -> int:
    """64-bit FNV-1a hash of the UTF-8 encoding of text."""
    value = FNV_OFFSET_64
    for byte in text.encode("utf-8"):
        value ^= byte
        value = (value * FNV_PRIME_64) & MASK_64
    return value


def stream_id(module: str, index: int) -> int:
    """Stream id of trial `index` inside `module`."""
    return fnv1a_64(f"{module}:{index}")


def stream_rng(seed: int, module: str, index: int) -> np.random.Generator:
    """
    Independent generator for one (module, index) stream.

    Args:
        seed: Master seed (any non-negative 64-bit integer)
        module: Stream namespace, e.g. "percolation"
        index: Trial or draw index

    Returns:
        A PCG64-backed numpy Generator
    """
    sequence = np.random.SeedSequence([int(seed) & MASK_64, stream_id(module, index)])
    return np.random.Generator(np.random.PCG64(sequence))
