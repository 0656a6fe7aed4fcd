"""Seeded instance generators and audit batteries.

Instances are desk-scale by design: a handful of transactions, small sizes,
small money values.  Each battery fixes a base seed and derives one
`random.Random` per instance, so reruns are bit-identical.  Alongside the
random instances, each battery prepends the constructed counterexample
instances whose violations the analysis pins down, so expected-violated
cells of the report card cannot be missed by sampling luck.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import mechanisms as mech_mod
from .audit import (
    DSIC,
    MMIC,
    OCA_PROOF,
    AuditVerdict,
    DeviationSpace,
    StrategyNotIndividuallyRational,
    check_dsic,
    check_mmic,
    check_oca_proof,
)
from .basefee import is_excessively_low
from .mechanisms import (
    BASE_FEE_KINDS,
    BETA_BURN_1559,
    BETA_BURN_FPA,
    FPA,
    M1559,
    SPA,
    TIPLESS,
    Mechanism,
)
from .model import ChainState, Mempool, Money, Transaction, chain_at
from .strategies import (
    SCALED_1559,
    SCALED_FPA,
    STRAIGHTFORWARD_1559,
    TIPLESS_CAP,
    TRUTHFUL,
    BiddingStrategy,
)

NOT_LOW = "not-low"
LOW = "low"
ANY_REGIME = "any"


def default_strategy(kind: str, prop: str) -> BiddingStrategy:
    """The canonical strategy each mechanism's guarantees are stated for."""
    if prop == DSIC:
        table = {
            FPA: TRUTHFUL,
            SPA: TRUTHFUL,
            BETA_BURN_FPA: TRUTHFUL,
            M1559: STRAIGHTFORWARD_1559,
            BETA_BURN_1559: STRAIGHTFORWARD_1559,
            TIPLESS: TIPLESS_CAP,
        }
    else:
        table = {
            FPA: SCALED_FPA,
            SPA: TRUTHFUL,
            BETA_BURN_FPA: SCALED_FPA,
            M1559: SCALED_1559,
            BETA_BURN_1559: SCALED_1559,
            TIPLESS: TIPLESS_CAP,
        }
    return BiddingStrategy(table[kind])


def _mechanism(
    rng: random.Random,
    kind: str,
    *,
    beta: Fraction | None,
    mu: Money | None,
    delta: Money | None,
    target_range: tuple[int, int],
) -> Mechanism:
    target = rng.randint(*target_range)
    if mu is None:
        mu = rng.choice((0, 1))
    kwargs = {"mu": mu}
    if kind == BETA_BURN_FPA:
        kwargs["beta"] = beta if beta is not None else Fraction(1, 2)
    if kind == BETA_BURN_1559:
        kwargs["beta"] = beta if beta is not None else Fraction(1, 2)
    if kind == TIPLESS:
        kwargs["delta"] = delta if delta is not None else rng.randint(0, 2)
    return Mechanism(kind, target, **kwargs)


def random_mmic_instance(
    seed: int,
    kind: str,
    *,
    beta: Fraction | None = None,
    max_txs: int = 6,
    size_max: int = 3,
    bid_max: Money = 20,
    max_fakes: int = 2,
) -> tuple[Mechanism, ChainState, Mempool, DeviationSpace]:
    """Random mempool of directly-bid transactions for a miner-deviation audit."""
    rng = random.Random(seed)
    mech = _mechanism(rng, kind, beta=beta, mu=None, delta=None, target_range=(2, 4))
    r = rng.randint(0, 12) if kind in BASE_FEE_KINDS else 0
    n = rng.randint(1, max_txs)
    txs = []
    for i in range(1, n + 1):
        bid = rng.randint(1, bid_max)
        txs.append(
            Transaction(
                id=i,
                size=rng.randint(1, size_max),
                valuation=rng.randint(1, bid_max),
                fee_cap=bid,
                tip=bid,
            )
        )
    mempool = Mempool(tuple(txs))
    dev = DeviationSpace.for_instance(
        mech, r, txs, dense=False, max_fake_count=max_fakes
    )
    return mech, chain_at(r), mempool, dev


def random_valuation_instance(
    seed: int,
    kind: str,
    *,
    beta: Fraction | None = None,
    mu: Money | None = None,
    delta_eq_mu: bool = False,
    max_txs: int = 3,
    size_max: int = 3,
    val_max: Money = 12,
    r_max: Money = 8,
    target_range: tuple[int, int] = (2, 4),
    regime: str = ANY_REGIME,
    max_resamples: int = 400,
) -> tuple[Mechanism, ChainState, tuple[Transaction, ...]]:
    """Random valuation-only instance for DSIC / OCA audits.

    ``regime`` filters on the excessively-low-base-fee predicate against the
    mechanism's maximum block size, resampling until it matches.  Bids are
    left to the audit (fee_cap/tip are placeholders the checks never read).
    """
    rng = random.Random(seed)
    for _ in range(max_resamples):
        mu_i = mu
        delta = None
        if delta_eq_mu:
            mu_i = rng.randint(0, 2) if mu is None else mu
            delta = mu_i
        mech = _mechanism(rng, kind, beta=beta, mu=mu_i, delta=delta, target_range=target_range)
        r = rng.randint(0, r_max) if kind in BASE_FEE_KINDS else 0
        n = rng.randint(1, max_txs)
        txs = tuple(
            Transaction(
                id=i,
                size=rng.randint(1, size_max),
                valuation=rng.randint(1, val_max),
                fee_cap=0,
                tip=0,
            )
            for i in range(1, n + 1)
        )
        if regime == ANY_REGIME:
            return mech, chain_at(r), txs
        low = is_excessively_low(r, mech.mu, txs, mech.max_size)
        if (regime == LOW) == low:
            return mech, chain_at(r), txs
    raise RuntimeError(f"could not sample a {regime} instance in {max_resamples} tries (seed {seed})")


@dataclass(frozen=True)
class BatterySummary:
    """Aggregate of one audit battery over many instances."""

    kind: str
    property: str
    instances: int
    violations: int
    ir_errors: int = 0
    first_witness: AuditVerdict | None = None
    note: str = ""

    @property
    def all_pass(self) -> bool:
        return self.violations == 0


def _summarize(kind: str, prop: str, verdicts: Sequence[AuditVerdict], ir_errors: int = 0, note: str = "") -> BatterySummary:
    violated = [v for v in verdicts if v.violated]
    return BatterySummary(
        kind=kind,
        property=prop,
        instances=len(verdicts),
        violations=len(violated),
        ir_errors=ir_errors,
        first_witness=violated[0] if violated else None,
        note=note,
    )


def mmic_battery(
    kind: str,
    count: int,
    seed: int,
    *,
    beta: Fraction | None = None,
    max_txs: int = 6,
    size_max: int = 3,
    bid_max: Money = 20,
    max_fakes: int = 2,
    extra_instances: Sequence[tuple[Mechanism, ChainState, Mempool, DeviationSpace]] = (),
) -> BatterySummary:
    verdicts = []
    for mech, chain, pool, dev in extra_instances:
        verdicts.append(check_mmic(mech, chain, pool, dev))
    for i in range(count):
        mech, chain, pool, dev = random_mmic_instance(
            seed + i, kind, beta=beta, max_txs=max_txs, size_max=size_max,
            bid_max=bid_max, max_fakes=max_fakes,
        )
        verdicts.append(check_mmic(mech, chain, pool, dev))
    return _summarize(kind, MMIC, verdicts)


def dsic_battery(
    kind: str,
    count: int,
    seed: int,
    *,
    strategy: BiddingStrategy | None = None,
    beta: Fraction | None = None,
    mu: Money | None = None,
    delta_eq_mu: bool = True,
    forbid_overbidding: bool = False,
    regime: str = ANY_REGIME,
    max_txs: int = 3,
    val_max: Money = 12,
    grid_step: int = 1,
    extra_instances: Sequence[tuple[Mechanism, ChainState, tuple[Transaction, ...]]] = (),
) -> BatterySummary:
    strategy = strategy or default_strategy(kind, DSIC)
    verdicts = []

    def run(mech, chain, txs):
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs, step=grid_step, dense=True)
        verdicts.append(check_dsic(mech, chain, txs, strategy, dev, forbid_overbidding))

    for mech, chain, txs in extra_instances:
        run(mech, chain, txs)
    for i in range(count):
        mech, chain, txs = random_valuation_instance(
            seed + i, kind, beta=beta, mu=mu, delta_eq_mu=delta_eq_mu,
            max_txs=max_txs, val_max=val_max, regime=regime,
        )
        run(mech, chain, txs)
    return _summarize(kind, DSIC, verdicts, note=f"regime={regime}")


def oca_battery(
    kind: str,
    count: int,
    seed: int,
    *,
    strategy: BiddingStrategy | None = None,
    beta: Fraction | None = None,
    mu: Money | None = None,
    delta_eq_mu: bool = True,
    regime: str = ANY_REGIME,
    max_txs: int = 4,
    val_max: Money = 8,
    grid_step: int = 1,
    extra_instances: Sequence[tuple[Mechanism, ChainState, tuple[Transaction, ...]]] = (),
) -> BatterySummary:
    strategy = strategy or default_strategy(kind, OCA_PROOF)
    verdicts = []
    ir_errors = 0

    def run(mech, chain, txs):
        nonlocal ir_errors
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs, step=grid_step, dense=True)
        try:
            verdicts.append(check_oca_proof(mech, chain, txs, strategy, dev))
        except StrategyNotIndividuallyRational:
            ir_errors += 1

    for mech, chain, txs in extra_instances:
        run(mech, chain, txs)
    for i in range(count):
        mech, chain, txs = random_valuation_instance(
            seed + i, kind, beta=beta, mu=mu, delta_eq_mu=delta_eq_mu,
            max_txs=max_txs, val_max=val_max, regime=regime,
        )
        run(mech, chain, txs)
    return _summarize(kind, OCA_PROOF, verdicts, ir_errors=ir_errors, note=f"regime={regime}")


# ---------------------------------------------------------------------------
# Constructed counterexample instances.  Each builder returns everything the
# corresponding check needs; ids are assigned in arrival order.
# ---------------------------------------------------------------------------


def spa_fake_bid_instance() -> tuple[Mechanism, ChainState, Mempool, DeviationSpace]:
    """Unit-size bids 10, 8, 3 in a three-slot block: one fake bid of 8 lifts
    the uniform price from 3 to 8, moving miner revenue from 9 to 16."""
    mech = mech_mod.spa(target_size=3)
    txs = tuple(
        Transaction(id=i, size=1, valuation=b, fee_cap=b, tip=b)
        for i, b in ((1, 10), (2, 8), (3, 3))
    )
    dev = DeviationSpace.for_instance(mech, 0, txs, dense=False, max_fake_count=2)
    return mech, chain_at(0), Mempool(txs), dev


def fpa_underbid_instance() -> tuple[Mechanism, ChainState, tuple[Transaction, ...]]:
    """Two unit transactions competing for one slot: shading below value wins
    cheaper, so truthful bidding is not dominant in a pay-your-bid auction."""
    mech = mech_mod.fpa(target_size=1)
    txs = (
        Transaction(id=1, size=1, valuation=10, fee_cap=0, tip=0),
        Transaction(id=2, size=1, valuation=8, fee_cap=0, tip=0),
    )
    return mech, chain_at(0), txs


def beta_burn_fpa_dsic_instance(beta: Fraction = Fraction(1, 2)):
    mech = mech_mod.beta_burn_fpa(target_size=1, beta=beta)
    txs = (
        Transaction(id=1, size=1, valuation=10, fee_cap=0, tip=0),
        Transaction(id=2, size=1, valuation=8, fee_cap=0, tip=0),
    )
    return mech, chain_at(0), txs


def spa_underbid_dsic_instance():
    """The lowest included bidder sets everyone's uniform price, so shading
    its own bid is a strict improvement: truthful bidding is not dominant."""
    mech = mech_mod.spa(target_size=3)
    txs = (
        Transaction(id=1, size=1, valuation=10, fee_cap=0, tip=0),
        Transaction(id=2, size=1, valuation=8, fee_cap=0, tip=0),
        Transaction(id=3, size=1, valuation=3, fee_cap=0, tip=0),
    )
    return mech, chain_at(0), txs


def m1559_low_dsic_instance(kind: str = M1559, beta: Fraction | None = None):
    """Zero base fee with one effective slot: the 1559 mechanism degenerates to
    a first-price auction, so straightforward bidding loses dominance.

    Realized with two size-2 transactions over max size 2 (target 1), which
    is the integral equivalent of one unit slot.
    """
    if kind == BETA_BURN_1559:
        mech = mech_mod.beta_burn_1559(target_size=1, beta=beta if beta is not None else Fraction(0))
    else:
        mech = mech_mod.m1559(target_size=1)
    txs = (
        Transaction(id=1, size=2, valuation=10, fee_cap=0, tip=0),
        Transaction(id=2, size=2, valuation=8, fee_cap=0, tip=0),
    )
    return mech, chain_at(0), txs


def beta_burn_fpa_oca_instance(beta: Fraction = Fraction(1, 2)):
    """A single transaction: any burned fraction of its fee is coalition loss,
    so colluding on a lower on-chain bid beats every candidate strategy."""
    mech = mech_mod.beta_burn_fpa(target_size=2, beta=beta)
    txs = (Transaction(id=1, size=1, valuation=10, fee_cap=0, tip=0),)
    return mech, chain_at(0), txs


def beta_burn_1559_oca_instance(beta: Fraction = Fraction(1, 2), r: Money = 10):
    """One transaction valued strictly between beta*r and r: priced out
    on-chain, yet including it at bid r yields positive joint utility."""
    mech = mech_mod.beta_burn_1559(target_size=2, beta=beta)
    v = int(beta * r) + 1
    if not v < r:
        raise ValueError("need beta*r + 1 < r; pick a larger base fee")
    txs = (Transaction(id=1, size=1, valuation=v, fee_cap=0, tip=0),)
    return mech, chain_at(r), txs


def tipless_low_oca_instance():
    """Excessively low base fee with heterogeneous sizes: the size-maximizing
    rule ties toward a low-value block that a coalition can improve on."""
    mech = mech_mod.tipless(target_size=1, delta=1, mu=1)  # max size 2
    txs = (
        Transaction(id=1, size=2, valuation=7, fee_cap=0, tip=0),
        Transaction(id=2, size=1, valuation=8, fee_cap=0, tip=0),
        Transaction(id=3, size=1, valuation=8, fee_cap=0, tip=0),
    )
    return mech, chain_at(5), txs


def spa_greedy_gap_instance():
    """Bid-order greedy packs a small high-rate transaction and strands a big
    one; welfare-better blocks exist, leaving room for an off-chain deal."""
    mech = mech_mod.spa(target_size=3)
    txs = (
        Transaction(id=1, size=1, valuation=10, fee_cap=0, tip=0),
        Transaction(id=2, size=3, valuation=9, fee_cap=0, tip=0),
    )
    return mech, chain_at(0), txs
