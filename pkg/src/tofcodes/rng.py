"""Keyed, counter-based random streams.

Every random draw in the package comes from ``stream(seed, tag, *index)``.
The stream is numpy's Philox-4x64 counter-based generator whose 128-bit key
is ``(seed mod 2**64, h)`` with ``h`` the first 8 bytes (little endian) of the
BLAKE2b digest of ``tag`` and the optional integer indices. Philox output for
a fixed key is specified bit-for-bit, so streams are reproducible across
platforms and can be regenerated in any language that implements Philox-4x64-10.
"""
import hashlib

import numpy as np

DEFAULT_SEED = 20221107

_MASK64 = (1 << 64) - 1


def _tag_hash(tag, index):
    h = hashlib.blake2b(digest_size=8)
    h.update(tag.encode("utf-8"))
    for i in index:
        h.update(b"/")
        h.update(str(int(i)).encode("ascii"))
    return int.from_bytes(h.digest(), "little")


def stream_key(seed, tag, *index):
    """Return the Philox key ``[seed, hash(tag, index)]`` as two uint64 words."""
    return np.array([int(seed) & _MASK64, _tag_hash(tag, index)], dtype=np.uint64)


def stream(seed, tag, *index):
    """Independent generator for the purpose ``tag`` (and sub-index) under ``seed``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, tag, *index)))


def derive_seed(seed, tag, *index):
    """A 63-bit child seed drawn from ``stream(seed, tag, *index)``."""
    return int(stream(seed, tag, *index).integers(0, 2 ** 63))
