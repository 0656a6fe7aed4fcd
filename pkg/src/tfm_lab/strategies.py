"""Canonical bidding strategies and their evaluation.

Each strategy maps a private valuation to a per-size bid given the current
base fee r, marginal cost mu, and (for tipless) the hard-coded tip delta:

* ``truthful``             v
* ``tipless``              min(r + delta, v)
* ``straightforward-1559`` min(r + mu, v)
* ``scaled-fpa``           min(v, mu + gamma * (v - mu))
* ``scaled-1559``          min(v, mu + r + gamma * (v - mu - r))

The scaled strategies shade the surplus by a rational factor gamma in (0, 1];
their bids are floored to whole money units.  Every strategy here is
individually rational for its paired mechanism: the total price an included
transaction faces never exceeds its valuation.  The audit layer re-checks
that empirically per instance rather than trusting this note.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Money

TRUTHFUL = "truthful"
TIPLESS_CAP = "tipless"
STRAIGHTFORWARD_1559 = "straightforward-1559"
SCALED_FPA = "scaled-fpa"
SCALED_1559 = "scaled-1559"

STRATEGY_KINDS = (TRUTHFUL, TIPLESS_CAP, STRAIGHTFORWARD_1559, SCALED_FPA, SCALED_1559)
_SCALED = (SCALED_FPA, SCALED_1559)


@dataclass(frozen=True)
class BiddingStrategy:
    kind: str
    gamma: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if not isinstance(self.gamma, Fraction):
            object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.kind in _SCALED and not (0 < self.gamma <= 1):
            raise ValueError("gamma must be in (0, 1] for scaled strategies")


def eval_strategy(
    strategy: BiddingStrategy, valuation: Money, base_fee: Money, mu: Money, delta: Money
) -> Money:
    """Per-size bid the strategy submits for one valuation.

    Scaled bids are computed in exact rationals and floored; results are
    clamped at zero so they remain valid Money.
    """
    k = strategy.kind
    if k == TRUTHFUL:
        return valuation
    if k == TIPLESS_CAP:
        return min(base_fee + delta, valuation)
    if k == STRAIGHTFORWARD_1559:
        return min(base_fee + mu, valuation)
    if k == SCALED_FPA:
        scaled = mu + (strategy.gamma * (valuation - mu)).__floor__()
        return max(min(valuation, scaled), 0)
    if k == SCALED_1559:
        pivot = mu + base_fee
        scaled = pivot + (strategy.gamma * (valuation - pivot)).__floor__()
        return max(min(valuation, scaled), 0)
    raise AssertionError(k)


def bid_parameters(
    strategy: BiddingStrategy, valuation: Money, base_fee: Money, mu: Money, delta: Money
) -> tuple[Money, Money]:
    """(fee_cap, tip) a creator following the strategy submits at creation time.

    Fee caps are not re-submitted when the base fee moves, so for the
    posted-price strategies the cap carries the valuation and the tip carries
    the fixed component; the induced bid then tracks the current base fee on
    its own.  For pay-your-bid strategies cap and tip both pin the bid.
    """
    k = strategy.kind
    if k == TIPLESS_CAP:
        return valuation, 0  # tip is hard-coded by the mechanism
    if k == STRAIGHTFORWARD_1559:
        return valuation, mu
    bid = eval_strategy(strategy, valuation, base_fee, mu, delta)
    if k == SCALED_1559:
        return bid, max(bid - base_fee, 0)
    return bid, bid
