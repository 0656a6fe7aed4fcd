"""Single-block fee-market primitives.

Transactions, mempools, chain state, block outcomes, and the utility
accounting that every mechanism and audit is measured in.  All monetary
quantities are plain Python integers denominated *per unit of transaction
size* (a price); totals are price x size and stay integers everywhere, so
every equality test in the audit layer is exact.  No settlement path ever
touches floating point.

All values are immutable after construction and every function here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

Money = int  # per-size amount in atomic currency units; never negative


def induced_bid(fee_cap: Money, tip: Money, base_fee: Money) -> Money:
    """Effective per-size bid of a (fee cap, tip) transaction at a base fee.

    A transaction willing to tip ``tip`` above the base fee, but never paying
    more than ``fee_cap`` per unit of size, bids ``min(base_fee + tip,
    fee_cap)``.  Total function; eligibility (fee cap covering the base fee)
    is a separate check owned by each mechanism.
    """
    return min(base_fee + tip, fee_cap)


@dataclass(frozen=True)
class Transaction:
    """One pending transaction.

    ``valuation`` is private to the creator: allocation, payment, and burning
    rules never read it, only utility computations and the audit/simulation
    layers do.  ``is_fake`` marks miner-created transactions; they carry
    valuation 0 and are indistinguishable from real ones to allocation rules.
    ``id`` is assigned in arrival order and doubles as the canonical
    tie-breaking key everywhere.
    """

    id: int
    size: int
    valuation: Money
    fee_cap: Money
    tip: Money = 0
    is_fake: bool = False

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"transaction {self.id}: size must be >= 1, got {self.size}")
        for name in ("valuation", "fee_cap", "tip"):
            if getattr(self, name) < 0:
                raise ValueError(f"transaction {self.id}: {name} must be non-negative")


def fake_transaction(id: int, size: int, bid: Money) -> Transaction:
    """A miner-created transaction bidding ``bid`` under every mechanism.

    Setting fee_cap = tip = bid makes the induced bid equal ``bid`` at any
    base fee, so a single candidate covers all six mechanisms.
    """
    return Transaction(id=id, size=size, valuation=0, fee_cap=bid, tip=bid, is_fake=True)


@dataclass(frozen=True)
class Mempool:
    """Ordered collection of pending transactions, sorted by id, no duplicates."""

    transactions: tuple[Transaction, ...] = ()

    def __post_init__(self) -> None:
        ids = [t.id for t in self.transactions]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate transaction ids in mempool")
        if ids != sorted(ids):
            object.__setattr__(
                self, "transactions", tuple(sorted(self.transactions, key=lambda t: t.id))
            )

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)

    def __len__(self) -> int:
        return len(self.transactions)

    def ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.transactions)

    def get(self, tx_id: int) -> Transaction:
        for t in self.transactions:
            if t.id == tx_id:
                return t
        raise KeyError(tx_id)

    def without(self, ids: Iterable[int]) -> "Mempool":
        drop = set(ids)
        return Mempool(tuple(t for t in self.transactions if t.id not in drop))


@dataclass(frozen=True)
class ChainState:
    """Current base fee plus the block-size history that determines it.

    The base fee is a pure function of the history: replaying
    ``block_size_history`` from the genesis fee through the update rule
    reproduces ``base_fee`` exactly (see basefee.replay / basefee.verify_chain).
    """

    base_fee: Money
    block_size_history: tuple[int, ...] = ()
    height: int = 0

    def __post_init__(self) -> None:
        if self.base_fee < 0:
            raise ValueError("base_fee must be non-negative")
        if self.height < 0:
            raise ValueError("height must be non-negative")


def chain_at(base_fee: Money) -> ChainState:
    """Ad-hoc chain state for audits: genesis fee pinned to ``base_fee``."""
    return ChainState(base_fee=base_fee)


@dataclass(frozen=True)
class BlockOutcome:
    """Included transaction ids with per-transaction payment, burn, and size.

    ``per_tx_payment`` and ``per_tx_burn`` are per-size prices (Money);
    ``per_tx_size`` carries the sizes so utilities are computable from the
    outcome alone.  All three maps cover exactly the included ids.
    """

    included: tuple[int, ...]
    per_tx_payment: Mapping[int, Money]
    per_tx_burn: Mapping[int, Money]
    per_tx_size: Mapping[int, int]
    total_size: int

    def __post_init__(self) -> None:
        inc = set(self.included)
        for name, m in (
            ("per_tx_payment", self.per_tx_payment),
            ("per_tx_burn", self.per_tx_burn),
            ("per_tx_size", self.per_tx_size),
        ):
            if set(m) != inc:
                raise ValueError(f"{name} must cover exactly the included ids")
        if any(p < 0 for p in self.per_tx_payment.values()):
            raise ValueError("negative payment")
        if any(q < 0 for q in self.per_tx_burn.values()):
            raise ValueError("negative burn")
        if self.total_size != sum(self.per_tx_size.values()):
            raise ValueError("total_size inconsistent with per-transaction sizes")


EMPTY_OUTCOME = BlockOutcome(included=(), per_tx_payment={}, per_tx_burn={}, per_tx_size={}, total_size=0)


def user_utility(tx: Transaction, outcome: BlockOutcome) -> int:
    """(valuation - payment - burn) x size if included, else 0.  May be negative."""
    if tx.id not in outcome.per_tx_payment:
        return 0
    p = outcome.per_tx_payment[tx.id]
    q = outcome.per_tx_burn[tx.id]
    return (tx.valuation - p - q) * tx.size


def miner_utility(outcome: BlockOutcome, real_ids: Iterable[int], mu: Money) -> int:
    """Net revenue of a myopic miner for one block.

    Payments from real included transactions count as revenue; burns on the
    miner's own fake transactions are a loss; every included unit of size
    costs the marginal cost ``mu`` (taken from the mechanism descriptor).
    Fake payments are miner-to-self and cancel; real burns are paid by the
    creators, not the miner.
    """
    real = set(real_ids)
    missing = [i for i in outcome.included if i not in outcome.per_tx_payment]
    if missing:
        raise ValueError(f"outcome does not settle included ids {missing}")
    revenue = sum(
        outcome.per_tx_payment[i] * outcome.per_tx_size[i] for i in outcome.included if i in real
    )
    fake_burn = sum(
        outcome.per_tx_burn[i] * outcome.per_tx_size[i] for i in outcome.included if i not in real
    )
    return revenue - fake_burn - mu * outcome.total_size


def joint_utility(outcome: BlockOutcome, valuations: Mapping[int, Money], mu: Money) -> int:
    """Coalition surplus of the miner and all creators: sum of (v - burn - mu) x size.

    Payments stay inside a miner-user coalition and cancel; only burned money
    and marginal costs leave it.
    """
    total = 0
    for i in outcome.included:
        if i not in valuations:
            raise ValueError(f"missing valuation for included transaction {i}")
        total += (valuations[i] - outcome.per_tx_burn[i] - mu) * outcome.per_tx_size[i]
    return total


def is_feasible(txs: Iterable[Transaction], capacity: int) -> bool:
    """True iff the transactions pack into one block of the given capacity."""
    return sum(t.size for t in txs) <= capacity
