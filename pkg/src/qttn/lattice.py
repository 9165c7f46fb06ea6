"""Maps from an N x N lattice to the 1D leaf order of the tree."""

from __future__ import annotations

import numpy as np

__all__ = ["MAPPINGS", "morton_code", "leaf_order", "lattice_index"]


def morton_code(x: int, y: int) -> int:
    """Interleave the bits of ``x`` (even positions) and ``y`` (odd positions)."""
    code = 0
    bit = 0
    while (x >> bit) or (y >> bit):
        code |= ((x >> bit) & 1) << (2 * bit)
        code |= ((y >> bit) & 1) << (2 * bit + 1)
        bit += 1
    return code


def lattice_index(x: int, y: int, n: int) -> int:
    return y * n + x


def _morton(n: int) -> np.ndarray:
    codes = [morton_code(i % n, i // n) for i in range(n * n)]
    # Rank the codes so that non-power-of-two sizes still give a permutation.
    order = np.argsort(codes, kind="stable")
    leaf = np.empty(n * n, dtype=int)
    leaf[order] = np.arange(n * n)
    return leaf


def _row_major(n: int) -> np.ndarray:
    return np.arange(n * n)


def _snake(n: int) -> np.ndarray:
    leaf = np.empty(n * n, dtype=int)
    for y in range(n):
        for x in range(n):
            xx = x if y % 2 == 0 else n - 1 - x
            leaf[lattice_index(x, y, n)] = y * n + xx
    return leaf


MAPPINGS = {"morton": _morton, "row_major": _row_major, "snake": _snake}


def leaf_order(n: int, mapping: str = "morton") -> np.ndarray:
    """``leaf[lattice_index(x, y)]`` is the tree leaf that hosts site (x, y)."""
    try:
        fn = MAPPINGS[mapping]
    except KeyError:
        raise ValueError(f"unknown mapping {mapping!r}; available: {sorted(MAPPINGS)}") from None
    return fn(int(n))
