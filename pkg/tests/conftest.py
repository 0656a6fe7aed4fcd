"""Shared test helpers: independent oracles and tiny builders.

The knapsack oracle enumerates every subset in lexicographic order of the
sorted id tuples (numpy-vectorized), independently of the DP solver under
test.  Builders keep instance construction terse.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from tfm_lab.model import Transaction


@lru_cache(maxsize=None)
def lex_subset_masks(n: int):
    """All bitmasks over n items, ordered by lexicographic sorted-tuple order."""
    order: list[int] = []

    def gen(prefix: int, start: int) -> None:
        order.append(prefix)
        for i in range(start, n):
            gen(prefix | (1 << i), i + 1)

    gen(0, 0)
    rows = np.zeros((len(order), n), dtype=np.int64)
    for r, mask in enumerate(order):
        for i in range(n):
            if mask >> i & 1:
                rows[r, i] = 1
    return tuple(order), rows


def knapsack_oracle(items, capacity):
    """Brute-force reference for knapsack_max: same contract, independent path."""
    pos = sorted(it for it in items if it[2] > 0 and it[1] <= capacity)
    n = len(pos)
    if n == 0:
        return (), 0
    order, rows = lex_subset_masks(n)
    tot_s = rows @ np.array([s for _, s, _ in pos], dtype=np.int64)
    tot_w = rows @ np.array([w for _, _, w in pos], dtype=np.int64)
    masked = np.where(tot_s <= capacity, tot_w, np.iinfo(np.int64).min)
    idx = int(np.argmax(masked))  # first max = lexicographically smallest set
    mask = order[idx]
    chosen = tuple(pos[i][0] for i in range(n) if mask >> i & 1)
    return chosen, int(masked[idx])


def tx(id, size, valuation, bid=None, fee_cap=None, tip=None):
    """Transaction builder; a bare ``bid`` sets fee_cap = tip = bid."""
    if bid is not None:
        fee_cap, tip = bid, bid
    return Transaction(id=id, size=size, valuation=valuation,
                       fee_cap=fee_cap or 0, tip=tip or 0)


@pytest.fixture
def tmp_json(tmp_path):
    import json

    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return p

    return write
