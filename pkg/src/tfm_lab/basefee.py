"""Base-fee dynamics: the per-block update rule and the excessively-low test.

The update rule interpolates linearly between -1/q at an empty block and
+1/q at a maximum-size block (q = adjustment_quotient, default 8, i.e. the
deployed 12.5% endpoints), pivoting on the target size.  Arithmetic is exact:
the fractional adjustment truncates toward zero, and the fee is clamped at 0.
There is no minimum base fee above zero; a zero base fee is legal and makes
the 1559 mechanism degrade toward a first-price auction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import ChainState, Money, Transaction


@dataclass(frozen=True)
class BaseFeeSchedule:
    """Parameters of the base-fee update rule."""

    genesis_fee: Money
    target_size: int
    adjustment_quotient: int = 8

    def __post_init__(self) -> None:
        if self.genesis_fee < 0:
            raise ValueError("genesis_fee must be non-negative")
        if self.target_size < 1:
            raise ValueError("target_size must be >= 1")
        if self.adjustment_quotient < 1:
            raise ValueError("adjustment_quotient must be >= 1")

    @property
    def max_size(self) -> int:
        return 2 * self.target_size


def next_base_fee(sched: BaseFeeSchedule, base_fee: Money, block_size: int) -> Money:
    """Base fee of the next block given this block's realized total size.

    Computes base_fee * (1 + (block_size - target) / (quotient * target)) in
    exact integer arithmetic, the division truncating toward zero, clamped at
    zero.  Empty blocks hit the -1/quotient endpoint, maximum-size blocks the
    +1/quotient endpoint, and target-size blocks leave the fee unchanged.
    """
    if block_size < 0 or block_size > sched.max_size:
        raise ValueError(f"block_size {block_size} outside [0, {sched.max_size}]")
    num = base_fee * (block_size - sched.target_size)
    den = sched.adjustment_quotient * sched.target_size
    delta = abs(num) // den
    if num < 0:
        delta = -delta
    return max(base_fee + delta, 0)


def replay(sched: BaseFeeSchedule, sizes: Sequence[int]) -> ChainState:
    """Fold the update rule over a block-size history from genesis."""
    fee = sched.genesis_fee
    for s in sizes:
        fee = next_base_fee(sched, fee, s)
    return ChainState(base_fee=fee, block_size_history=tuple(sizes), height=len(sizes))


def advance(sched: BaseFeeSchedule, chain: ChainState, block_size: int) -> ChainState:
    """Chain state after appending one block of the given size."""
    return ChainState(
        base_fee=next_base_fee(sched, chain.base_fee, block_size),
        block_size_history=chain.block_size_history + (block_size,),
        height=chain.height + 1,
    )


def verify_chain(sched: BaseFeeSchedule, chain: ChainState) -> bool:
    """Replay determinism check: the recorded base fee matches its history."""
    return replay(sched, chain.block_size_history).base_fee == chain.base_fee


def is_excessively_low(r: Money, mu: Money, txs: Iterable[Transaction], max_size: int) -> bool:
    """True iff demand at price r + mu strictly exceeds the maximum block size.

    Demand is the total size of transactions whose (private) valuation is at
    least r + mu.  This is the regime gate: the 1559 mechanism loses DSIC and
    the tipless mechanism loses OCA-proofness exactly when this holds.
    """
    demand = sum(t.size for t in txs if t.valuation >= r + mu)
    return demand > max_size
