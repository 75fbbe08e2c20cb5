"""Deterministic random number streams.

All stochastic output in this package is drawn through the functions in
this module, which fix both the generator and the bit-to-float pipeline.
The construction is documented below precisely enough to be reproduced
with no reference to this code or to numpy.

Generator
    Philox-4x64 with 10 rounds (the counter based generator of Salmon,
    Moraes, Dror and Shaw), keyed by the pair ``(seed, stream)``.  Both
    key words are the arguments reduced modulo 2**64.  The 256 bit
    counter starts at zero and is incremented (little endian, word 0
    first) *before* each block is generated, so the first emitted block
    is the encryption of counter value 1.  Each block contributes its
    four 64 bit words in order.

Uniforms
    Each 64 bit word ``w`` is mapped to the open unit interval through
    ``u = ((w >> 12) + 0.5) * 2**-52``.  The result lies in
    ``[2**-53, 1 - 2**-53]``, so it is never 0.0 or 1.0 and the inverse
    normal transform below is always finite.

Normals
    Standard normal draws apply the inverse of the standard normal
    distribution function to the uniforms.

Distinct ``(seed, stream)`` pairs index statistically independent
streams, which is what the simulation code relies on for reproducible
parallelism: replication ``j`` owns a fixed set of stream numbers, so
results do not depend on scheduling or on the number of workers.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import ParameterError

_MASK64 = (1 << 64) - 1


def _bit_generator(seed: int, stream: int) -> np.random.Philox:
    return np.random.Philox(
        key=np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    )


def raw64(seed: int, stream: int, size: int) -> np.ndarray:
    """Return ``size`` raw 64 bit words from the ``(seed, stream)`` stream."""
    if size < 0:
        raise ParameterError(f"size must be >= 0, got {size}")
    if size == 0:
        return np.empty(0, dtype=np.uint64)
    return _bit_generator(seed, stream).random_raw(size)


def uniform_open(seed: int, stream: int, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1).

    Uses the top 52 bits of each raw word, centred half a step away from
    both endpoints, so downstream inverse transforms cannot overflow.
    """
    w = raw64(seed, stream, size)
    return ((w >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def standard_normal(seed: int, stream: int, size: int) -> np.ndarray:
    """Standard normal draws via the inverse distribution function."""
    return ndtri(uniform_open(seed, stream, size))
