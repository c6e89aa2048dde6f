"""Seeded random sub-streams.

Every consumer of randomness derives its own generator from the master seed
and a tuple of integer keys, so draws for one segment never depend on how many
numbers another segment consumed.
"""
import numpy as np

# stream namespaces
LOS_PHASE = 1
SEGMENT = 2
SHADOW = 3
MLP = 4
CORPUS = 5
ENSEMBLE = 6


def substream(seed, *keys):
    """Return a ``numpy.random.Generator`` for ``(seed, *keys)``."""
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def ensemble_seed(seed, member):
    """Seed of ensemble member ``member``; member 0 is the master seed itself."""
    if member == 0:
        return int(seed)
    return int(substream(seed, ENSEMBLE, member).integers(0, 2**63))
