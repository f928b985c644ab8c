"""Keyed hashing used for user ordering, capping sub-streams and noise streams."""

import hashlib

_MASK64 = (1 << 64) - 1


def _key(seed: int) -> bytes:
    return (int(seed) & _MASK64).to_bytes(8, "little")


def keyed_hash128(seed: int, *parts: str) -> int:
    """128-bit keyed BLAKE2b digest of ``parts`` under ``seed``, as an int."""
    h = hashlib.blake2b(key=_key(seed), digest_size=16)
    for part in parts:
        data = part.encode("utf-8")
        h.update(len(data).to_bytes(4, "little"))
        h.update(data)
    return int.from_bytes(h.digest(), "little")


def unit_uniform(bits: int) -> float:
    """Map the top 52 of 64 bits to a float strictly inside (0, 1).

    52 bits plus a half-step offset is exactly representable at both ends;
    with 53 bits the largest value would round up to 1.0.
    """
    return ((bits >> 12) + 0.5) * 2.0 ** -52
