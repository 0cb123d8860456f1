"""Matrix permanents.

Ryser's inclusion-exclusion formula, walked in Gray-code order so each step
updates the row sums with a single column.
"""

from itertools import permutations

import numpy as np


def _gray_steps(n):
    """Yield ``(column, sign_of_update, parity)`` for subsets 1..2^n-1 in Gray order."""
    prev = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        diff = g ^ prev
        col = diff.bit_length() - 1
        added = bool(g & diff)
        prev = g
        yield col, added, bin(g).count("1") & 1


def permanent_batch(mats):
    """Permanents of a stack of square matrices, shape ``(..., n, n)``.

    The Gray-code loop runs once for the whole stack, so thousands of small
    permanents cost about as much as one.
    """
    mats = np.asarray(mats)
    n = mats.shape[-1]
    if mats.shape[-2] != n:
        raise ValueError(f"permanent needs square matrices, got {mats.shape[-2:]}")
    batch = mats.shape[:-2]
    if n == 0:
        return np.ones(batch, dtype=mats.dtype)
    row_sums = np.zeros(batch + (n,), dtype=np.result_type(mats, complex))
    total = np.zeros(batch, dtype=row_sums.dtype)
    for col, added, odd in _gray_steps(n):
        if added:
            row_sums += mats[..., :, col]
        else:
            row_sums -= mats[..., :, col]
        term = np.prod(row_sums, axis=-1)
        # (-1)^(n - |S|)
        if (n - odd) & 1:
            total -= term
        else:
            total += term
    if not np.iscomplexobj(mats):
        total = total.real
    return total


def permanent(matrix):
    return permanent_batch(np.asarray(matrix)[None])[0]


def permanent_by_permutations(matrix):
    """Definition-level permanent, O(n * n!). Reference only."""
    a = np.asarray(matrix)
    n = a.shape[0]
    rows = np.arange(n)
    return sum(np.prod(a[rows, list(p)]) for p in permutations(range(n))) if n else 1.0
