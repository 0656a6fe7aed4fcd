"""Multi-block simulation of a fee mechanism under stochastic demand.

A scenario couples one mechanism with a base-fee schedule, an arrival
process, a bidding strategy, and a miner behavior, then folds block
production over a horizon.  Randomness comes from numpy's Philox generator
(counter-based and splittable), keyed by the scenario seed: identical
(scenario, seed) pairs produce bit-identical traces.

Demand is an artifact choice, not a modeling claim: the process here exists
to drive the base fee through interesting regimes (spikes included) and to
collect the economic time series.  Pending transactions persist across
blocks by default; an eviction policy keeps brute-force miner behaviors
tractable.  Fee caps and tips are fixed at creation time against the
then-current base fee and are not re-submitted as the fee moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audit import DeviationSpace, best_myopic_response
from .basefee import BaseFeeSchedule, advance
from .mechanisms import Mechanism, allocate, greedy_allocate, settle
from .model import (
    BlockOutcome,
    ChainState,
    Mempool,
    Money,
    Transaction,
    fake_transaction,
    user_utility,
)
from .strategies import BiddingStrategy, bid_parameters

INTENDED = "intended"
MYOPIC_OPTIMAL = "myopic-optimal"
GREEDY = "greedy"
MINER_BEHAVIORS = (INTENDED, MYOPIC_OPTIMAL, GREEDY)

PERSIST = "persist"
EVICT_AFTER = "evict-after"


@dataclass(frozen=True)
class ValuationDistribution:
    """Per-size valuation draw: uniform, log-uniform, or a point mass (lo=hi)."""

    kind: str
    lo: Money
    hi: Money

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "log-uniform", "point"):
            raise ValueError(f"unknown valuation distribution {self.kind!r}")
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError("need 0 <= lo <= hi")
        if self.kind == "log-uniform" and self.lo < 1:
            raise ValueError("log-uniform needs lo >= 1")

    def draw(self, rng: np.random.Generator) -> Money:
        if self.kind == "point" or self.lo == self.hi:
            return self.lo
        if self.kind == "uniform":
            return int(rng.integers(self.lo, self.hi + 1))
        u = rng.uniform(math.log(self.lo), math.log(self.hi + 1))
        return min(max(int(math.exp(u)), self.lo), self.hi)


@dataclass(frozen=True)
class SizeDistribution:
    kind: str
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "point"):
            raise ValueError(f"unknown size distribution {self.kind!r}")
        if self.lo < 1 or self.lo > self.hi:
            raise ValueError("need 1 <= lo <= hi")

    def draw(self, rng: np.random.Generator) -> int:
        if self.kind == "point" or self.lo == self.hi:
            return self.lo
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class DemandSpike:
    """From ``height`` onward (until superseded), scale arrivals and shift valuations."""

    height: int
    rate_multiplier: float = 1.0
    valuation_shift: Money = 0

    def __post_init__(self) -> None:
        if self.rate_multiplier <= 0:
            raise ValueError("rate_multiplier must be > 0")


@dataclass(frozen=True)
class DemandProcess:
    arrival_rate: float
    valuations: ValuationDistribution
    sizes: SizeDistribution
    spikes: tuple[DemandSpike, ...] = ()

    def __post_init__(self) -> None:
        if self.arrival_rate < 0:
            raise ValueError("arrival_rate must be >= 0")
        heights = [s.height for s in self.spikes]
        if heights != sorted(heights):
            raise ValueError("spikes must be sorted by height")

    def at(self, height: int) -> tuple[float, Money]:
        rate = self.arrival_rate
        shift = 0
        for s in self.spikes:
            if s.height <= height:
                rate = self.arrival_rate * s.rate_multiplier
                shift = s.valuation_shift
        return rate, shift


@dataclass(frozen=True)
class MempoolPolicy:
    kind: str = PERSIST
    blocks: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (PERSIST, EVICT_AFTER):
            raise ValueError(f"unknown mempool policy {self.kind!r}")
        if self.kind == EVICT_AFTER and (self.blocks is None or self.blocks < 1):
            raise ValueError("evict-after needs blocks >= 1")


@dataclass(frozen=True)
class Scenario:
    mechanism: Mechanism
    schedule: BaseFeeSchedule
    demand: DemandProcess
    strategy: BiddingStrategy
    miner_behavior: str = INTENDED
    horizon: int = 1
    seed: int = 0
    mempool_policy: MempoolPolicy = MempoolPolicy()

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.miner_behavior not in MINER_BEHAVIORS:
            raise ValueError(f"unknown miner behavior {self.miner_behavior!r}")
        if self.schedule.target_size != self.mechanism.target_size:
            raise ValueError("schedule and mechanism must agree on the target size")


@dataclass(frozen=True)
class TraceRow:
    height: int
    base_fee: Money
    block_size: int
    burn_total: int
    tip_revenue: int
    user_utility_total: int
    mempool_depth: int
    included_count: int
    evicted_count: int


@dataclass(frozen=True)
class Trace:
    rows: tuple[TraceRow, ...]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class SimState:
    chain: ChainState
    pending: tuple[tuple[Transaction, int], ...] = ()  # (tx, arrival height)
    next_id: int = 1


def initial_state(scenario: Scenario) -> SimState:
    return SimState(chain=ChainState(base_fee=scenario.schedule.genesis_fee))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _choose_block(scenario: Scenario, chain: ChainState, mempool: Mempool):
    """Included transactions for one block, per the scenario's miner behavior."""
    mech = scenario.mechanism
    by_id = {t.id: t for t in mempool}
    if scenario.miner_behavior == INTENDED:
        included = allocate(mech, chain, mempool).included
        return [by_id[i] for i in included]
    if scenario.miner_behavior == GREEDY:
        included = greedy_allocate(mech, chain, mempool).included
        return [by_id[i] for i in included]
    dev = DeviationSpace.for_instance(
        mech, chain.base_fee, list(mempool), dense=False, max_fake_count=1
    )
    res = best_myopic_response(mech, chain, mempool, dev)
    next_fake = max((t.id for t in mempool), default=0) + 1
    fakes = [fake_transaction(next_fake + j, s, b) for j, (s, b) in enumerate(res.best_fakes)]
    fake_ids = {f.id for f in fakes}
    return [by_id[i] for i in res.best_block if i not in fake_ids] + fakes


def step(
    scenario: Scenario, state: SimState, rng: np.random.Generator
) -> tuple[BlockOutcome, SimState, TraceRow]:
    """Produce one block: arrivals, eviction, allocation, settlement, fee update."""
    mech = scenario.mechanism
    chain = state.chain
    height = chain.height
    r = chain.base_fee

    rate, shift = scenario.demand.at(height)
    arrivals = int(rng.poisson(rate)) if rate > 0 else 0
    pending = list(state.pending)
    next_id = state.next_id
    for _ in range(arrivals):
        v = max(scenario.demand.valuations.draw(rng) + shift, 0)
        s = scenario.demand.sizes.draw(rng)
        cap, tip = bid_parameters(scenario.strategy, v, r, mech.mu, mech.delta)
        pending.append((Transaction(id=next_id, size=s, valuation=v, fee_cap=cap, tip=tip), height))
        next_id += 1

    evicted = 0
    if scenario.mempool_policy.kind == EVICT_AFTER:
        keep = []
        for tx, born in pending:
            if height - born >= scenario.mempool_policy.blocks:
                evicted += 1
            else:
                keep.append((tx, born))
        pending = keep

    mempool = Mempool(tuple(tx for tx, _ in pending))
    depth = len(mempool)
    block = _choose_block(scenario, chain, mempool)
    outcome = settle(mech, chain, block)

    real_included = [tx for tx, _ in pending if tx.id in outcome.per_tx_payment]
    burn_total = sum(
        outcome.per_tx_burn[i] * outcome.per_tx_size[i] for i in outcome.included
    )
    tip_revenue = sum(
        outcome.per_tx_payment[t.id] * t.size for t in real_included
    )
    user_total = sum(user_utility(t, outcome) for t in real_included)

    included_ids = {t.id for t in real_included}
    new_pending = tuple((tx, born) for tx, born in pending if tx.id not in included_ids)
    new_chain = advance(scenario.schedule, chain, outcome.total_size)
    row = TraceRow(
        height=height,
        base_fee=r,
        block_size=outcome.total_size,
        burn_total=burn_total,
        tip_revenue=tip_revenue,
        user_utility_total=user_total,
        mempool_depth=depth,
        included_count=len(real_included),
        evicted_count=evicted,
    )
    return outcome, SimState(chain=new_chain, pending=new_pending, next_id=next_id), row


def run(scenario: Scenario) -> Trace:
    """Fold step over the horizon from genesis; deterministic given the seed."""
    rng = make_rng(scenario.seed)
    state = initial_state(scenario)
    rows = []
    for _ in range(scenario.horizon):
        _, state, row = step(scenario, state, rng)
        rows.append(row)
    return Trace(rows=tuple(rows))


def summarize(trace: Trace) -> dict:
    """Arithmetic aggregates of a trace; block sizes reported relative to target.

    The size ratio needs the target, which lives in the scenario; pass the
    result through ``attach_target`` or read ``mean_block_size`` directly.
    """
    if not trace.rows:
        raise ValueError("empty trace")
    n = len(trace.rows)
    fees = [r.base_fee for r in trace.rows]
    sizes = [r.block_size for r in trace.rows]
    return {
        "blocks": n,
        "mean_base_fee": sum(fees) / n,
        "max_base_fee": max(fees),
        "final_base_fee": fees[-1],
        "total_burn": sum(r.burn_total for r in trace.rows),
        "total_tip_revenue": sum(r.tip_revenue for r in trace.rows),
        "total_user_utility": sum(r.user_utility_total for r in trace.rows),
        "total_included": sum(r.included_count for r in trace.rows),
        "total_evicted": sum(r.evicted_count for r in trace.rows),
        "mean_block_size": sum(sizes) / n,
        "mean_mempool_depth": sum(r.mempool_depth for r in trace.rows) / n,
    }


def summarize_for(scenario: Scenario, trace: Trace) -> dict:
    """summarize plus scenario-dependent ratios (mean size vs target, welfare)."""
    out = summarize(trace)
    out["mean_size_ratio"] = out["mean_block_size"] / scenario.mechanism.target_size
    total_size = sum(r.block_size for r in trace.rows)
    out["welfare"] = (
        out["total_user_utility"] + out["total_tip_revenue"] - scenario.mechanism.mu * total_size
    )
    return out
