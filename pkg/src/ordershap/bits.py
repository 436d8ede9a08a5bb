"""Bit-mask subset primitives used by every exact enumerator.

Coalitions are plain Python ints in these helpers: bit ``p`` set means
player ``p`` is present.  All iteration orders are deterministic.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterator


def full_mask(n: int) -> int:
    """Mask with all of the first ``n`` player bits set."""
    return (1 << n) - 1


def bit_positions(mask: int) -> list[int]:
    """Ascending player indices present in ``mask``."""
    out = []
    while mask:
        lsb = mask & -mask
        out.append(lsb.bit_length() - 1)
        mask ^= lsb
    return out


def mask_of(players) -> int:
    """OR together single-player bits."""
    m = 0
    for p in players:
        m |= 1 << p
    return m


def iter_submasks(mask: int) -> Iterator[int]:
    """Yield every submask of ``mask``, including 0 and ``mask`` itself.

    Uses the standard ``sub = (sub - 1) & mask`` walk, so the order is
    descending in the submask's integer value.
    """
    sub = mask
    while True:
        yield sub
        if not sub:
            return
        sub = (sub - 1) & mask


def iter_submasks_of_size(mask: int, m: int) -> Iterator[int]:
    """Yield submasks of ``mask`` with exactly ``m`` bits, in lexicographic
    order of their member tuples."""
    for combo in combinations(bit_positions(mask), m):
        acc = 0
        for p in combo:
            acc |= 1 << p
        yield acc


def swap_bits(mask: int, i: int, j: int) -> int:
    """Exchange bits ``i`` and ``j`` of ``mask``."""
    bi = (mask >> i) & 1
    bj = (mask >> j) & 1
    if bi == bj:
        return mask
    return mask ^ ((1 << i) | (1 << j))
