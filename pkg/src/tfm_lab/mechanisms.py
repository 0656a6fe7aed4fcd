"""The six transaction fee mechanisms as (allocation, payment, burning) triples.

Mechanisms:

* ``fpa``            pay-your-bid, nothing burned, capacity C
* ``spa``            greedy bid-descending prefix, all pay the lowest included
                     bid, nothing burned, capacity C
* ``beta-burn-fpa``  pay-your-bid with a beta fraction of each fee burned
* ``1559``           base fee r burned, payment = bid - r, capacity 2C,
                     eligibility fee_cap >= r
* ``beta-burn-1559`` burn beta*r, payment = bid - beta*r, same eligibility
* ``tipless``        hard-coded tip delta; only bids equal to r + delta are
                     eligible; payment = delta, burn = r, size-maximizing
                     allocation

The shared allocation kernel is an exact 0/1 knapsack (dynamic programming
over integer total size).  Real miners often use a greedy heuristic instead;
that variant is available as an opt-in miner behavior in the simulator, the
audit layer needs the true optimum.

Zero-weight handling: the knapsack kernel itself never includes items whose
weight is <= 0 (dropping them cannot lower the objective, ties prefer the
lexicographically smallest id set).  The four knapsack mechanisms then add
zero-weight *eligible* transactions in id order while capacity remains: a
transaction bidding exactly its marginal value to the miner is included when
there is room.  This is what makes the 1559 family behave as a posted-price
mechanism for straightforward bidders, and it applies uniformly so that the
1559 mechanism at r = 0 coincides with the FPA allocation for allocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import BlockOutcome, ChainState, Mempool, Money, Transaction, induced_bid

FPA = "fpa"
SPA = "spa"
BETA_BURN_FPA = "beta-burn-fpa"
M1559 = "1559"
BETA_BURN_1559 = "beta-burn-1559"
TIPLESS = "tipless"

KINDS = (FPA, SPA, BETA_BURN_FPA, M1559, BETA_BURN_1559, TIPLESS)
BASE_FEE_KINDS = frozenset({M1559, BETA_BURN_1559, TIPLESS})
KNAPSACK_KINDS = frozenset({FPA, BETA_BURN_FPA, M1559, BETA_BURN_1559})
SEPARABLE_KINDS = frozenset({FPA, BETA_BURN_FPA, M1559, BETA_BURN_1559, TIPLESS})


@dataclass(frozen=True)
class Mechanism:
    """Descriptor of one mechanism: kind plus its parameters.

    ``target_size`` houses C.  ``max_size`` is 2C for the three base-fee
    mechanisms (variable-size blocks with target C) and C otherwise; it may be
    passed explicitly but must respect that invariant.  ``beta`` is meaningful
    for beta-burn-fpa (0 < beta <= 1) and beta-burn-1559 (0 <= beta < 1),
    ``delta`` is the tipless hard-coded tip, ``mu`` the miner's marginal cost
    per unit of size (common knowledge).
    """

    kind: str
    target_size: int
    max_size: int | None = None
    beta: Fraction = Fraction(0)
    delta: Money = 0
    mu: Money = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if self.target_size < 1:
            raise ValueError("target_size must be >= 1")
        if not isinstance(self.beta, Fraction):
            object.__setattr__(self, "beta", Fraction(self.beta))
        expected = 2 * self.target_size if self.kind in BASE_FEE_KINDS else self.target_size
        if self.max_size is None:
            object.__setattr__(self, "max_size", expected)
        elif self.max_size != expected:
            raise ValueError(
                f"max_size must be {expected} for kind {self.kind} with target_size "
                f"{self.target_size}, got {self.max_size}"
            )
        if self.kind == BETA_BURN_FPA and not (0 < self.beta <= 1):
            raise ValueError("beta must be in (0, 1] for beta-burn-fpa")
        if self.kind == BETA_BURN_1559 and not (0 <= self.beta < 1):
            raise ValueError("beta must be in [0, 1) for beta-burn-1559")
        if self.delta < 0 or self.mu < 0:
            raise ValueError("delta and mu must be non-negative")


def fpa(target_size: int, mu: Money = 0) -> Mechanism:
    return Mechanism(FPA, target_size, mu=mu)


def spa(target_size: int, mu: Money = 0) -> Mechanism:
    return Mechanism(SPA, target_size, mu=mu)


def beta_burn_fpa(target_size: int, beta: Fraction, mu: Money = 0) -> Mechanism:
    return Mechanism(BETA_BURN_FPA, target_size, beta=Fraction(beta), mu=mu)


def m1559(target_size: int, mu: Money = 0) -> Mechanism:
    return Mechanism(M1559, target_size, mu=mu)


def beta_burn_1559(target_size: int, beta: Fraction, mu: Money = 0) -> Mechanism:
    return Mechanism(BETA_BURN_1559, target_size, beta=Fraction(beta), mu=mu)


def tipless(target_size: int, delta: Money, mu: Money = 0) -> Mechanism:
    return Mechanism(TIPLESS, target_size, delta=delta, mu=mu)


@dataclass(frozen=True)
class AllocationResult:
    """Chosen transaction ids plus the maximized objective value."""

    included: tuple[int, ...]
    objective_value: int


def knapsack_max(items: Sequence[tuple[int, int, int]], capacity: int) -> AllocationResult:
    """Exact 0/1 knapsack over (id, size, weight) items.

    Maximizes total weight subject to total size <= capacity.  Items with
    weight <= 0 are never included (dropping them never decreases the
    objective); ties between optimal subsets are broken by preferring the
    lexicographically smallest id set, realized by a greedy include-earliest
    reconstruction over a suffix value table.
    """
    if capacity < 0:
        raise ValueError("capacity must be >= 0")
    for i, s, _ in items:
        if s < 1:
            raise ValueError(f"item {i}: size must be >= 1")
    pos = sorted((it for it in items if it[2] > 0 and it[1] <= capacity), key=lambda it: it[0])
    n = len(pos)
    # best[j][c]: max weight achievable with items pos[j:] and capacity c
    best = [[0] * (capacity + 1) for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        _, s, w = pos[j]
        nxt = best[j + 1]
        row = best[j]
        for c in range(capacity + 1):
            v = nxt[c]
            if s <= c:
                v2 = w + nxt[c - s]
                if v2 > v:
                    v = v2
            row[c] = v
    opt = best[0][capacity]
    chosen: list[int] = []
    acc = 0
    c = capacity
    for j in range(n):
        i, s, w = pos[j]
        if s <= c and acc + w + best[j + 1][c - s] == opt:
            chosen.append(i)
            acc += w
            c -= s
    return AllocationResult(included=tuple(chosen), objective_value=opt)


def effective_bid(mech: Mechanism, base_fee: Money, tx: Transaction) -> Money:
    """Per-size bid a transaction's (fee cap, tip) induces under a mechanism.

    FPA-family mechanisms have no reserve price: the bid is min(tip, fee_cap).
    The 1559 family resolves min(base_fee + tip, fee_cap); tipless ignores the
    user tip and uses the hard-coded one.
    """
    if mech.kind in (FPA, SPA, BETA_BURN_FPA):
        return induced_bid(tx.fee_cap, tx.tip, 0)
    if mech.kind == TIPLESS:
        return min(base_fee + mech.delta, tx.fee_cap)
    return induced_bid(tx.fee_cap, tx.tip, base_fee)


def effective_bid_value(mech: Mechanism, base_fee: Money, bid: Money) -> Money:
    """Resolution of a direct per-size bid (fee_cap = tip = bid convention).

    Only tipless reshapes direct bids: anything above r + delta is read as
    r + delta by the protocol.
    """
    if mech.kind == TIPLESS:
        return min(base_fee + mech.delta, bid)
    return bid


def is_entry_eligible(mech: Mechanism, base_fee: Money, eff_bid: Money) -> bool:
    """Protocol eligibility of an (already resolved) bid for block inclusion."""
    if mech.kind in (M1559, BETA_BURN_1559):
        return eff_bid >= base_fee
    if mech.kind == TIPLESS:
        return eff_bid == base_fee + mech.delta
    return True


def payment_and_burn(mech: Mechanism, base_fee: Money, eff_bid: Money) -> tuple[Money, Money]:
    """Per-size (payment, burn) of an included transaction for the separable rules.

    Fractional beta shares round the burn down so payment + burn equals the
    bid exactly in integers.  SPA's payment depends on the rest of the block
    and is handled in settle.
    """
    if mech.kind == FPA:
        return eff_bid, 0
    if mech.kind == BETA_BURN_FPA:
        q = math.floor(mech.beta * eff_bid)
        return eff_bid - q, q
    if mech.kind == M1559:
        return eff_bid - base_fee, base_fee
    if mech.kind == BETA_BURN_1559:
        q = math.floor(mech.beta * base_fee)
        return eff_bid - q, q
    if mech.kind == TIPLESS:
        return mech.delta, base_fee
    raise ValueError(f"{mech.kind} has no separable payment rule")


def allocate_bids(
    mech: Mechanism, base_fee: Money, items: Sequence[tuple[int, int, Money]]
) -> AllocationResult:
    """Intended allocation over direct-bid entries (id, size, bid).

    The knapsack mechanisms maximize the size-weighted net miner revenue
    (payment - mu per unit) over eligible entries, then fill zero-weight
    eligible entries in id order while room remains.  Tipless includes a
    largest-possible eligible subset when delta >= mu and nothing otherwise.
    SPA includes the largest feasible prefix in bid-descending order.
    """
    cap = mech.max_size
    resolved = [
        (i, s, eff)
        for i, s, b in items
        for eff in (effective_bid_value(mech, base_fee, b),)
        if is_entry_eligible(mech, base_fee, eff)
    ]
    if mech.kind == SPA:
        resolved.sort(key=lambda e: (-e[2], e[0]))
        included: list[int] = []
        total = 0
        value = 0
        for i, s, eff in resolved:
            if total + s > cap:
                break
            included.append(i)
            total += s
        if included:
            lowest = min(eff for i, s, eff in resolved[: len(included)])
            value = sum((lowest - mech.mu) * s for _, s, _ in resolved[: len(included)])
        return AllocationResult(included=tuple(sorted(included)), objective_value=value)

    if mech.kind == TIPLESS:
        if mech.delta < mech.mu:
            return AllocationResult(included=(), objective_value=0)
        sized = [(i, s, s) for i, s, _ in resolved]
        best = knapsack_max(sized, cap)
        value = (mech.delta - mech.mu) * best.objective_value
        return AllocationResult(included=best.included, objective_value=value)

    weighted = []
    zero_weight = []
    for i, s, eff in resolved:
        p, _ = payment_and_burn(mech, base_fee, eff)
        w = (p - mech.mu) * s
        if w > 0:
            weighted.append((i, s, w))
        elif w == 0:
            zero_weight.append((i, s))
    core = knapsack_max(weighted, cap)
    included = list(core.included)
    core_ids = set(core.included)
    room = cap - sum(s for i, s, _ in weighted if i in core_ids)
    for i, s in sorted(zero_weight):
        if s <= room:
            included.append(i)
            room -= s
    return AllocationResult(included=tuple(sorted(included)), objective_value=core.objective_value)


def settle_bids(
    mech: Mechanism, base_fee: Money, items: Sequence[tuple[int, int, Money]]
) -> tuple[dict[int, Money], dict[int, Money]]:
    """Per-size payments and burns for an included set of direct-bid entries.

    Rejects entries the protocol would consider invalid: a tipless entry whose
    resolved bid is not exactly r + delta, or a 1559-family entry bidding
    below the base fee.
    """
    payments: dict[int, Money] = {}
    burns: dict[int, Money] = {}
    resolved = [(i, s, effective_bid_value(mech, base_fee, b)) for i, s, b in items]
    for i, _, eff in resolved:
        if not is_entry_eligible(mech, base_fee, eff):
            raise ValueError(f"transaction {i} is not eligible under {mech.kind} at base fee {base_fee}")
    if mech.kind == SPA:
        if resolved:
            lowest = min(eff for _, _, eff in resolved)
            for i, _, _ in resolved:
                payments[i] = lowest
                burns[i] = 0
        return payments, burns
    for i, _, eff in resolved:
        p, q = payment_and_burn(mech, base_fee, eff)
        payments[i] = p
        burns[i] = q
    return payments, burns


def allocate(mech: Mechanism, chain: ChainState, mempool: Mempool) -> AllocationResult:
    """Intended allocation rule applied to a mempool of transactions."""
    items = [(t.id, t.size, effective_bid(mech, chain.base_fee, t)) for t in mempool]
    return allocate_bids(mech, chain.base_fee, items)


def settle(mech: Mechanism, chain: ChainState, included: Iterable[Transaction]) -> BlockOutcome:
    """Protocol payments and burns for a chosen block.

    The miner controls only the allocation; given the included set, payments
    and burns are completely specified here.  Raises if the block is
    infeasible or contains protocol-invalid transactions.
    """
    txs = sorted(included, key=lambda t: t.id)
    total = sum(t.size for t in txs)
    if total > mech.max_size:
        raise ValueError(f"block size {total} exceeds maximum {mech.max_size}")
    ids = [t.id for t in txs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate transaction ids in block")
    items = [(t.id, t.size, effective_bid(mech, chain.base_fee, t)) for t in txs]
    payments, burns = settle_bids(mech, chain.base_fee, items)
    sizes = {t.id: t.size for t in txs}
    return BlockOutcome(
        included=tuple(ids),
        per_tx_payment=payments,
        per_tx_burn=burns,
        per_tx_size=sizes,
        total_size=total,
    )


def greedy_allocate(mech: Mechanism, chain: ChainState, mempool: Mempool) -> AllocationResult:
    """Greedy heuristic some miners use instead of the exact knapsack.

    Orders eligible transactions by bid (descending, id ascending) and takes
    the largest feasible prefix, skipping entries whose net revenue would be
    negative.  Opt-in miner behavior for the simulator; never used by audits.
    """
    r = chain.base_fee
    entries = []
    for t in mempool:
        eff = effective_bid(mech, r, t)
        if not is_entry_eligible(mech, r, eff):
            continue
        if mech.kind != SPA:
            p, _ = payment_and_burn(mech, r, eff)
            if p - mech.mu < 0:
                continue
        entries.append((t.id, t.size, eff))
    entries.sort(key=lambda e: (-e[2], e[0]))
    included = []
    total = 0
    for i, s, _ in entries:
        if total + s > mech.max_size:
            break
        included.append(i)
        total += s
    value = 0
    if included and mech.kind == SPA:
        lowest = min(eff for _, _, eff in entries[: len(included)])
        value = sum((lowest - mech.mu) * s for _, s, _ in entries[: len(included)])
    elif included:
        for i, s, eff in entries[: len(included)]:
            p, _ = payment_and_burn(mech, r, eff)
            value += (p - mech.mu) * s
    return AllocationResult(included=tuple(sorted(included)), objective_value=value)
