"""Counter-based random substreams.

Every random quantity in the coverage experiment is addressed by
``(seed, stream, index)`` so that any block of users can be generated
independently and still reproduce the serial stream bit for bit.  The
backing generator is numpy's Philox, whose 128-bit counter advances by one
per four 64-bit outputs.
"""

import numpy as np
from numpy.random import Philox

WORDS_PER_INDEX = 4

# stream ids; channel streams are CHANNEL_BASE + haps index
USER_PLACEMENT = 0
CHANNEL_BASE = 1

_MASK64 = (1 << 64) - 1


def _key(seed, stream):
    return np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)


def uniforms(seed, stream, start, count):
    """Open-interval uniforms for indices ``start .. start+count-1``.

    Returns an array of shape ``(count, 4)``; row ``i`` depends only on
    ``(seed, stream, start + i)``.
    """
    if count <= 0:
        return np.empty((0, WORDS_PER_INDEX))
    bits = Philox(counter=int(start), key=_key(seed, stream)).random_raw(
        WORDS_PER_INDEX * int(count)
    )
    # 53-bit mantissa, shifted by half an ulp to stay strictly inside (0, 1)
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return u.reshape(count, WORDS_PER_INDEX)


def generator(seed, stream=0):
    """A numpy Generator on its own keyed stream, for scalar helpers."""
    return np.random.Generator(Philox(key=_key(seed, stream)))
