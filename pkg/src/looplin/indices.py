"""Index bookkeeping for the two mode lattices Z and Z+1/2.

All indices are stored doubled (an index n is represented by the integer 2n),
so both lattices live inside the integers: even values belong to Z, odd
values to Z+1/2.  Window arrays are always ``range(-m, m+1, 2)`` for the
largest representable value ``m`` of the right parity.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Parity(IntEnum):
    INT = 0   # Z:     doubled indices even
    HALF = 1  # Z+1/2: doubled indices odd

    @property
    def other(self) -> "Parity":
        return Parity(1 - int(self))

    def __add__(self, other):  # parity of a sum of indices
        return Parity((int(self) + int(other)) % 2)


def max_index2(parity: Parity, radius2: int) -> int:
    """Largest doubled index of the given parity that is <= radius2."""
    if radius2 < 0:
        raise ValueError("negative radius")
    m = radius2 if radius2 % 2 == int(parity) else radius2 - 1
    if m < 0:
        raise ValueError("window of parity %s empty at radius2=%d" % (parity, radius2))
    return m


def window2(parity: Parity, radius2: int) -> np.ndarray:
    """Doubled indices of the window, ascending."""
    m = max_index2(parity, radius2)
    return np.arange(-m, m + 1, 2)


def window_size(parity: Parity, radius2: int) -> int:
    return max_index2(parity, radius2) + 1


def pos_of(parity: Parity, radius2: int, idx2: int) -> int:
    """Array position of a doubled index inside the window."""
    m = max_index2(parity, radius2)
    if idx2 % 2 != int(parity):
        raise ValueError("index %s has wrong parity" % (idx2 / 2))
    if abs(idx2) > m:
        raise IndexError("index %s outside window radius %s" % (idx2 / 2, radius2 / 2))
    return (idx2 + m) // 2
