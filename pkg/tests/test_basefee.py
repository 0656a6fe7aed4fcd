import random

import pytest

from conftest import tx
from tfm_lab.basefee import (
    BaseFeeSchedule,
    advance,
    is_excessively_low,
    next_base_fee,
    replay,
    verify_chain,
)


@pytest.fixture
def sched():
    return BaseFeeSchedule(genesis_fee=1000, target_size=4)


def test_endpoints_and_midpoint(sched):
    assert next_base_fee(sched, 1000, 0) == 875        # empty block: -12.5%
    assert next_base_fee(sched, 1000, 8) == 1125       # full block: +12.5%
    assert next_base_fee(sched, 1000, 4) == 1000       # target: unchanged
    assert next_base_fee(sched, 1000, 6) == 1062       # 1062.5 truncated


def test_truncation_toward_zero(sched):
    # 1000 * (-2) / 32 = -62.5 -> -62, not -63
    assert next_base_fee(sched, 1000, 2) == 938


def test_block_size_bounds(sched):
    with pytest.raises(ValueError):
        next_base_fee(sched, 1000, 9)
    with pytest.raises(ValueError):
        next_base_fee(sched, 1000, -1)


def test_monotone_signal(sched):
    rng = random.Random(7)
    for _ in range(200):
        r = rng.randint(0, 5000)
        s = rng.randint(0, 8)
        nxt = next_base_fee(sched, r, s)
        if s > 4:
            assert nxt >= r
        elif s < 4:
            assert nxt <= r
        else:
            assert nxt == r
    # strict version on exactly divisible fees
    for k in (1, 3, 10):
        r = k * 8 * 4
        assert next_base_fee(sched, r, 5) > r
        assert next_base_fee(sched, r, 3) < r


def test_scale_covariance(sched):
    r = 8 * 4 * 7  # divisible by quotient * target
    for s in range(0, 9):
        base = next_base_fee(sched, r, s)
        for m in (2, 5):
            assert next_base_fee(sched, m * r, s) == m * base


def test_replay_determinism(sched):
    sizes = [0, 8, 8, 4, 2, 7, 0, 6]
    chain = replay(sched, sizes)
    assert verify_chain(sched, chain)
    step = replay(sched, [])
    for s in sizes:
        step = advance(sched, step, s)
    assert step == chain


def test_clamped_at_zero():
    s = BaseFeeSchedule(genesis_fee=1, target_size=1, adjustment_quotient=1)
    assert next_base_fee(s, 1, 0) == 0
    assert next_base_fee(s, 0, 2) == 0  # zero fee stays zero


@pytest.mark.parametrize(
    "total_size,expected",
    [(6, True), (4, False), (0, False)],
)
def test_is_excessively_low(total_size, expected):
    txs = []
    remaining = total_size
    i = 1
    while remaining > 0:
        s = min(remaining, 2)
        txs.append(tx(i, s, 10, bid=10))
        remaining -= s
        i += 1
    assert is_excessively_low(10, 0, txs, 4) is expected


def test_excessively_low_counts_only_high_valuations():
    txs = [tx(1, 3, 9, bid=9), tx(2, 3, 10, bid=10)]
    assert not is_excessively_low(10, 0, txs, 4)  # only tx2 demands at price 10
    assert is_excessively_low(10, 0, txs + [tx(3, 2, 12, bid=12)], 4)
