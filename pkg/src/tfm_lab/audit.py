"""Brute-force verification or refutation of incentive properties.

Three checks over desk-scale instances:

* ``check_mmic``       is following the intended allocation with no fake
                       transactions optimal for a myopic miner?
* ``check_dsic``       is a candidate strategy a dominant strategy for every
                       creator, against every competitor bid profile on a
                       finite grid?
* ``check_oca_proof``  does the candidate strategy's outcome maximize the
                       joint miner+creators utility over every grid bid
                       profile?  (Equivalent to off-chain-agreement proofness.)

Violated verdicts come with self-certifying witnesses: re-evaluating the
witness through the mechanism's own allocate/settle path reproduces a strict
utility improvement for every claimed beneficiary.  Pass verdicts are sound
only relative to the bid grid; the grid's closure rule guarantees that every
counterexample a finite instance admits at the canonical price points is
findable.  Enumeration order is fixed, so witnesses are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterable, Mapping, Sequence

from .mechanisms import (
    SPA,
    Mechanism,
    allocate,
    allocate_bids,
    effective_bid,
    effective_bid_value,
    is_entry_eligible,
    payment_and_burn,
    settle,
    settle_bids,
)
from .model import (
    ChainState,
    Mempool,
    Money,
    Transaction,
    fake_transaction,
    joint_utility,
    miner_utility,
    user_utility,
)
from .strategies import BiddingStrategy, eval_strategy

MMIC = "mmic"
DSIC = "dsic"
OCA_PROOF = "oca"
PROPERTIES = (MMIC, DSIC, OCA_PROOF)

PASS = "pass"
VIOLATED = "violated"


class AuditError(Exception):
    pass


class SearchSpaceError(AuditError):
    """Instance too large for exhaustive search."""


class StrategyNotIndividuallyRational(AuditError):
    """The candidate strategy charged some included creator more than its valuation.

    OCA-proofness quantifies only over individually rational strategies, so
    this is reported as a distinct error rather than a verdict.
    """


_MAX_REAL_TXS = 8
_MAX_FAKES = 3
_MAX_PROFILE_TXS = 4
_MAX_PROFILES = 600_000


@dataclass(frozen=True)
class DeviationSpace:
    """Finite search space for deviating bids and fake transactions.

    The grid always contains the closure points: 0, the base fee r and one
    step either side, r + mu, r + delta, every real transaction's bid and
    valuation, and one step above each.  Every counterexample the analysis in
    scope constructs prices at exactly these points.  ``dense=True`` adds the
    full step lattice up to the largest closure point.
    """

    bid_grid: tuple[Money, ...]
    max_fake_count: int = 2
    fake_sizes: tuple[int, ...] = (1,)

    def __post_init__(self) -> None:
        if not self.bid_grid:
            raise ValueError("bid_grid must be non-empty")
        if any(b < 0 for b in self.bid_grid):
            raise ValueError("bids must be non-negative")
        if list(self.bid_grid) != sorted(set(self.bid_grid)):
            object.__setattr__(self, "bid_grid", tuple(sorted(set(self.bid_grid))))
        if self.max_fake_count < 0:
            raise ValueError("max_fake_count must be >= 0")
        if any(s < 1 for s in self.fake_sizes):
            raise ValueError("fake sizes must be >= 1")

    @classmethod
    def for_instance(
        cls,
        mech: Mechanism,
        base_fee: Money,
        txs: Sequence[Transaction],
        *,
        step: int = 1,
        dense: bool = True,
        max_fake_count: int = 2,
        fake_sizes: tuple[int, ...] | None = None,
    ) -> "DeviationSpace":
        if step < 1:
            raise ValueError("step must be >= 1")
        pts = {
            0,
            max(base_fee - step, 0),
            base_fee,
            base_fee + step,
            base_fee + mech.mu,
            base_fee + mech.mu + step,
            base_fee + mech.delta,
            base_fee + mech.delta + step,
        }
        for t in txs:
            b = effective_bid(mech, base_fee, t)
            pts.update((b, b + step, t.valuation, t.valuation + step))
        if dense:
            pts.update(range(0, max(pts) + 1, step))
        if fake_sizes is None:
            sizes = {1}
            if txs:
                sizes.add(min(t.size for t in txs))
            fake_sizes = tuple(sorted(sizes))
        return cls(bid_grid=tuple(sorted(pts)), max_fake_count=max_fake_count, fake_sizes=fake_sizes)


@dataclass(frozen=True)
class MmicWitness:
    """A profitable miner deviation: fake transactions plus a chosen block."""

    fake_txs: tuple[tuple[int, Money], ...]  # (size, bid) pairs
    block_ids: tuple[int, ...]  # includes fake ids, numbered above the real ids
    honest_utility: int
    deviant_utility: int

    @property
    def utility_delta(self) -> int:
        return self.deviant_utility - self.honest_utility


@dataclass(frozen=True)
class DsicWitness:
    """A profitable unilateral bid deviation for one creator."""

    tx_id: int
    competitor_bids: Mapping[int, Money]
    honest_bid: Money
    deviating_bid: Money
    honest_utility: int
    deviant_utility: int

    @property
    def utility_delta(self) -> int:
        return self.deviant_utility - self.honest_utility


@dataclass(frozen=True)
class OcaWitness:
    """An off-chain agreement Pareto-improving on the strategy's outcome.

    ``transfers`` are per-size side payments to the miner (negative values are
    refunds), chosen so the extra joint utility is split equally among the
    n creators and the miner; they are exact rationals because an equal split
    of an integer surplus need not be integral.
    """

    sigma_bids: Mapping[int, Money]
    sigma_joint_utility: int
    best_bids: Mapping[int, Money]
    best_joint_utility: int
    transfers: Mapping[int, Fraction]
    per_agent_gain: Fraction

    @property
    def utility_delta(self) -> int:
        return self.best_joint_utility - self.sigma_joint_utility


@dataclass(frozen=True)
class AuditVerdict:
    property: str
    mechanism: Mechanism
    result: str
    witness: MmicWitness | DsicWitness | OcaWitness | None = None
    detail: str = ""

    @property
    def violated(self) -> bool:
        return self.result == VIOLATED


@dataclass(frozen=True)
class MyopicSearchResult:
    honest_utility: int
    honest_block: tuple[int, ...]
    best_utility: int
    best_fakes: tuple[tuple[int, Money], ...]
    best_block: tuple[int, ...]


def _eligible_entries(mech: Mechanism, base_fee: Money, txs: Iterable[Transaction]):
    entries = []
    for t in txs:
        eff = effective_bid(mech, base_fee, t)
        if is_entry_eligible(mech, base_fee, eff):
            entries.append((t.id, t.size, eff))
    return entries


def best_myopic_response(
    mech: Mechanism, chain: ChainState, mempool: Mempool, dev: DeviationSpace
) -> MyopicSearchResult:
    """Exhaustive myopic-miner best response over fake sets and blocks.

    Enumerates every fake multiset (sizes x grid bids, up to the fake cap)
    and, for each, every feasible protocol-valid block drawn from the real
    mempool plus those fakes (a fake is never created and then excluded).
    Per-class aggregates make each (fake set, block) pair O(1) to score; the
    returned optimum is re-evaluated through settle before being reported.
    """
    real = list(mempool)
    if len(real) > _MAX_REAL_TXS:
        raise SearchSpaceError(f"{len(real)} real transactions exceeds the cap of {_MAX_REAL_TXS}")
    if dev.max_fake_count > _MAX_FAKES:
        raise SearchSpaceError(f"max_fake_count {dev.max_fake_count} exceeds the cap of {_MAX_FAKES}")
    r = chain.base_fee
    cap = mech.max_size
    mu = mech.mu
    real_ids = frozenset(t.id for t in real)

    honest_alloc = allocate(mech, chain, mempool)
    honest_set = set(honest_alloc.included)
    honest_outcome = settle(mech, chain, [t for t in real if t.id in honest_set])
    u_honest = miner_utility(honest_outcome, real_ids, mu)

    fake_cands: list[tuple[int, Money]] = []
    for s in sorted(set(dev.fake_sizes)):
        if s > cap:
            continue
        for b in dev.bid_grid:
            eff = effective_bid_value(mech, r, b)
            if is_entry_eligible(mech, r, eff):
                fake_cands.append((s, b))
    fake_cands.sort(key=lambda sb: (sb[1], sb[0]))

    entries = _eligible_entries(mech, r, real)
    k = len(entries)
    sizes = [e[1] for e in entries]

    best_u = u_honest
    best_fakes: tuple[tuple[int, Money], ...] = ()
    best_mask = 0
    found_better = False

    if mech.kind == SPA:
        # Per-subset aggregates; every SPA block price is the minimum included
        # bid and fakes burn nothing, so a fake multiset acts only through its
        # (minimum bid, total size) class.  Utility ties between deviations
        # prefer the larger block (the canonical full-block form of the
        # price-propping attack), then earlier enumeration order.
        subs = []
        sub_size = [0] * (1 << k)
        sub_min = [None] * (1 << k)
        for mask in range(1 << k):
            if mask:
                low = (mask & -mask).bit_length() - 1
                rest = mask ^ (1 << low)
                sub_size[mask] = sub_size[rest] + sizes[low]
                m = sub_min[rest]
                e = entries[low][2]
                sub_min[mask] = e if m is None else min(m, e)
            if sub_size[mask] <= cap:
                subs.append(mask)
        classes: dict[tuple[Money, int], tuple[tuple[int, Money], ...]] = {}
        for m_count in range(dev.max_fake_count + 1):
            for combo in combinations_with_replacement(fake_cands, m_count):
                if not combo:
                    continue
                key = (min(b for _, b in combo), sum(s for s, _ in combo))
                classes.setdefault(key, combo)
        ordered = [((None, 0), ())] + [
            (key, classes[key]) for key in sorted(classes)
        ]
        best_block_size = -1
        for (fb, fs), combo in ordered:
            budget = cap - fs
            if budget < 0:
                continue
            for mask in subs:
                sz = sub_size[mask]
                if sz > budget:
                    continue
                mb = sub_min[mask]
                if mb is None:
                    u = -mu * fs if fb is not None else 0
                else:
                    price = mb if fb is None else min(mb, fb)
                    u = price * sz - mu * (sz + fs)
                better = u > best_u
                same_but_fuller = found_better and u == best_u and sz + fs > best_block_size
                if better or same_but_fuller:
                    best_u = u
                    best_fakes = combo
                    best_mask = mask
                    best_block_size = sz + fs
                    found_better = True
    else:
        weights = []
        for i, s, eff in entries:
            p, _ = payment_and_burn(mech, r, eff)
            weights.append((p - mu) * s)
        # best achievable real-only revenue at every size budget, with argmax masks
        by_budget_val = [0] * (cap + 1)
        by_budget_mask = [0] * (cap + 1)
        sub_size = [0] * (1 << k)
        sub_val = [0] * (1 << k)
        for mask in range(1 << k):
            if mask:
                low = (mask & -mask).bit_length() - 1
                rest = mask ^ (1 << low)
                sub_size[mask] = sub_size[rest] + sizes[low]
                sub_val[mask] = sub_val[rest] + weights[low]
            sz = sub_size[mask]
            if sz <= cap and sub_val[mask] > by_budget_val[sz]:
                by_budget_val[sz] = sub_val[mask]
                by_budget_mask[sz] = mask
        for c in range(1, cap + 1):
            if by_budget_val[c - 1] > by_budget_val[c]:
                by_budget_val[c] = by_budget_val[c - 1]
                by_budget_mask[c] = by_budget_mask[c - 1]
        for m_count in range(dev.max_fake_count + 1):
            for combo in combinations_with_replacement(fake_cands, m_count):
                fs = sum(s for s, _ in combo)
                if fs > cap:
                    continue
                cost = 0
                for s, b in combo:
                    _, q = payment_and_burn(mech, r, effective_bid_value(mech, r, b))
                    cost += (q + mu) * s
                u = by_budget_val[cap - fs] - cost
                if u > best_u:
                    best_u = u
                    best_fakes = combo
                    best_mask = by_budget_mask[cap - fs]
                    found_better = True

    if not found_better:
        return MyopicSearchResult(
            honest_utility=u_honest,
            honest_block=honest_alloc.included,
            best_utility=u_honest,
            best_fakes=(),
            best_block=honest_alloc.included,
        )

    # Reconstruct and re-evaluate the optimum through the settle path.
    next_id = max(real_ids, default=0) + 1
    fakes = [fake_transaction(next_id + j, s, b) for j, (s, b) in enumerate(best_fakes)]
    chosen_real_ids = [entries[j][0] for j in range(k) if best_mask >> j & 1]
    by_id = {t.id: t for t in real}
    block = [by_id[i] for i in chosen_real_ids] + fakes
    outcome = settle(mech, chain, block)
    recomputed = miner_utility(outcome, real_ids, mu)
    if recomputed != best_u:
        raise AssertionError(
            f"fast myopic search disagreed with settle: {best_u} vs {recomputed}"
        )
    return MyopicSearchResult(
        honest_utility=u_honest,
        honest_block=honest_alloc.included,
        best_utility=best_u,
        best_fakes=best_fakes,
        best_block=tuple(sorted(t.id for t in block)),
    )


def check_mmic(
    mech: Mechanism, chain: ChainState, mempool: Mempool, dev: DeviationSpace
) -> AuditVerdict:
    """Pass iff no fake set plus block choice beats the intended allocation."""
    res = best_myopic_response(mech, chain, mempool, dev)
    if res.best_utility > res.honest_utility:
        witness = MmicWitness(
            fake_txs=res.best_fakes,
            block_ids=res.best_block,
            honest_utility=res.honest_utility,
            deviant_utility=res.best_utility,
        )
        return AuditVerdict(MMIC, mech, VIOLATED, witness)
    return AuditVerdict(MMIC, mech, PASS, detail=f"honest utility {res.honest_utility}")


def _bid_options(
    mech: Mechanism,
    base_fee: Money,
    tx: Transaction,
    grid: Sequence[Money],
    honest_bid: Money,
    forbid_overbidding: bool,
) -> tuple[Money, ...]:
    cands = set(grid) | {honest_bid}
    if forbid_overbidding:
        cands = {b for b in cands if b <= tx.valuation}
        cands.add(honest_bid)
    # Bids the protocol maps to the same effective bid yield identical
    # outcomes; keep one representative per class, with the honest bid
    # representing its own class.
    classes: dict[Money, Money] = {}
    for b in sorted(cands):
        classes.setdefault(effective_bid_value(mech, base_fee, b), b)
    classes[effective_bid_value(mech, base_fee, honest_bid)] = honest_bid
    return tuple(sorted(classes.values()))


def check_dsic(
    mech: Mechanism,
    chain: ChainState,
    txs: Sequence[Transaction],
    strategy: BiddingStrategy,
    dev: DeviationSpace,
    forbid_overbidding: bool = False,
) -> AuditVerdict:
    """Is the candidate strategy dominant for every creator on the grid?

    For every transaction, every grid profile of competitor bids, and every
    grid deviation, compares the creator's utility under the strategy bid
    against the deviation, assuming the miner follows the intended allocation
    rule.  ``forbid_overbidding`` restricts every creator (competitors and
    deviator alike) to bids at most their valuation.
    """
    txs = sorted(txs, key=lambda t: t.id)
    n = len(txs)
    if n > _MAX_PROFILE_TXS:
        raise SearchSpaceError(f"{n} transactions exceeds the cap of {_MAX_PROFILE_TXS}")
    r = chain.base_fee
    mu = mech.mu
    honest = {
        t.id: eval_strategy(strategy, t.valuation, r, mu, mech.delta) for t in txs
    }
    opts = [
        _bid_options(mech, r, t, dev.bid_grid, honest[t.id], forbid_overbidding) for t in txs
    ]
    total = 1
    for o in opts:
        total *= len(o)
    if total > _MAX_PROFILES:
        raise SearchSpaceError(f"{total} bid profiles exceeds the cap of {_MAX_PROFILES}")

    ids = [t.id for t in txs]
    sizes = [t.size for t in txs]
    vals = [t.valuation for t in txs]
    memo: dict[tuple[Money, ...], tuple[int, ...]] = {}

    def utilities(profile: tuple[Money, ...]) -> tuple[int, ...]:
        got = memo.get(profile)
        if got is not None:
            return got
        items = [(ids[j], sizes[j], profile[j]) for j in range(n)]
        inc = set(allocate_bids(mech, r, items).included)
        pays, burns = settle_bids(mech, r, [it for it in items if it[0] in inc])
        out = tuple(
            (vals[j] - pays[ids[j]] - burns[ids[j]]) * sizes[j] if ids[j] in inc else 0
            for j in range(n)
        )
        memo[profile] = out
        return out

    for j in range(n):
        hb = honest[ids[j]]
        other_opts = [opts[m] for m in range(n) if m != j]
        for comp in product(*other_opts):
            base = comp[:j] + (hb,) + comp[j:]
            u0 = utilities(base)[j]
            for d in opts[j]:
                if d == hb:
                    continue
                u1 = utilities(comp[:j] + (d,) + comp[j:])[j]
                if u1 > u0:
                    witness = DsicWitness(
                        tx_id=ids[j],
                        competitor_bids={ids[m]: base[m] for m in range(n) if m != j},
                        honest_bid=hb,
                        deviating_bid=d,
                        honest_utility=u0,
                        deviant_utility=u1,
                    )
                    return AuditVerdict(DSIC, mech, VIOLATED, witness)
    return AuditVerdict(DSIC, mech, PASS, detail=f"{total} profiles checked")


def _joint_of_profile(
    mech: Mechanism,
    base_fee: Money,
    ids: Sequence[int],
    sizes: Sequence[int],
    vals: Sequence[Money],
    profile: Sequence[Money],
) -> int:
    items = [(ids[j], sizes[j], profile[j]) for j in range(len(ids))]
    inc = set(allocate_bids(mech, base_fee, items).included)
    if not inc:
        return 0
    _, burns = settle_bids(mech, base_fee, [it for it in items if it[0] in inc])
    return sum(
        (vals[j] - burns[ids[j]] - mech.mu) * sizes[j] for j in range(len(ids)) if ids[j] in inc
    )


def brute_force_joint_opt(
    mech: Mechanism, chain: ChainState, txs: Sequence[Transaction], dev: DeviationSpace
) -> tuple[int, tuple[Money, ...]]:
    """Maximum joint utility over every grid bid profile, with an achieving profile.

    Enumerates bid_grid^n in lexicographic order, runs allocate + settle, and
    keeps the first profile attaining the maximum.
    """
    txs = sorted(txs, key=lambda t: t.id)
    n = len(txs)
    if n > _MAX_PROFILE_TXS:
        raise SearchSpaceError(f"{n} transactions exceeds the cap of {_MAX_PROFILE_TXS}")
    if n == 0:
        return 0, ()
    if len(dev.bid_grid) ** n > _MAX_PROFILES:
        raise SearchSpaceError("bid grid too large for exhaustive joint optimization")
    ids = [t.id for t in txs]
    sizes = [t.size for t in txs]
    vals = [t.valuation for t in txs]
    best_j: int | None = None
    best_profile: tuple[Money, ...] = ()
    for profile in product(dev.bid_grid, repeat=n):
        j = _joint_of_profile(mech, chain.base_fee, ids, sizes, vals, profile)
        if best_j is None or j > best_j:
            best_j = j
            best_profile = profile
    return best_j, best_profile


def _outcome_for_profile(mech, chain, txs, bids):
    items = [(t.id, t.size, bids[t.id]) for t in txs]
    inc = set(allocate_bids(mech, chain.base_fee, items).included)
    chosen = [
        replace(t, fee_cap=bids[t.id], tip=bids[t.id]) for t in txs if t.id in inc
    ]
    return settle(mech, chain, chosen)


def individual_rationality_failures(outcome, valuations: Mapping[int, Money]) -> list[int]:
    """Included ids whose total price (payment + burn) exceeds their valuation."""
    return [
        i
        for i in outcome.included
        if outcome.per_tx_payment[i] + outcome.per_tx_burn[i] > valuations[i]
    ]


def check_oca_proof(
    mech: Mechanism,
    chain: ChainState,
    txs: Sequence[Transaction],
    strategy: BiddingStrategy,
    dev: DeviationSpace,
) -> AuditVerdict:
    """Pass iff the strategy's outcome already maximizes joint utility on the grid.

    A Violated verdict carries the better bid profile plus per-size transfers
    splitting the extra joint utility equally among the n creators and the
    miner, so every agent strictly gains; the witness is re-verified here
    before being returned.  Raises StrategyNotIndividuallyRational if the
    strategy charges an included creator more than its valuation on this
    instance.
    """
    txs = sorted(txs, key=lambda t: t.id)
    n = len(txs)
    r = chain.base_fee
    mu = mech.mu
    sigma = {t.id: eval_strategy(strategy, t.valuation, r, mu, mech.delta) for t in txs}
    dev = replace(dev, bid_grid=tuple(sorted(set(dev.bid_grid) | set(sigma.values()))))

    sigma_outcome = _outcome_for_profile(mech, chain, txs, sigma)
    vals = {t.id: t.valuation for t in txs}
    bad = individual_rationality_failures(sigma_outcome, vals)
    if bad:
        i = bad[0]
        price = sigma_outcome.per_tx_payment[i] + sigma_outcome.per_tx_burn[i]
        raise StrategyNotIndividuallyRational(
            f"strategy charges transaction {i} total price {price} above valuation {vals[i]}"
        )
    j_sigma = joint_utility(sigma_outcome, vals, mu)
    j_star, best_profile = brute_force_joint_opt(mech, chain, txs, dev)
    if j_star < j_sigma:
        raise AssertionError("grid optimum below the strategy outcome; grid must contain sigma bids")
    if j_star == j_sigma:
        return AuditVerdict(OCA_PROOF, mech, PASS, detail=f"joint utility {j_sigma}")

    best_bids = {txs[j].id: best_profile[j] for j in range(n)}
    best_outcome = _outcome_for_profile(mech, chain, txs, best_bids)
    real_ids = frozenset(t.id for t in txs)
    base_user = {t.id: user_utility(t, sigma_outcome) for t in txs}
    base_miner = miner_utility(sigma_outcome, real_ids, mu)
    new_user = {t.id: user_utility(t, best_outcome) for t in txs}
    new_miner = miner_utility(best_outcome, real_ids, mu)
    surplus = j_star - j_sigma
    share = Fraction(surplus, n + 1)
    transfers = {
        t.id: Fraction(new_user[t.id] - base_user[t.id] - share, t.size) for t in txs
    }
    miner_gain = new_miner + sum(transfers[t.id] * t.size for t in txs) - base_miner
    if miner_gain != share or share <= 0:
        raise AssertionError("transfer construction failed to split the surplus equally")
    witness = OcaWitness(
        sigma_bids=sigma,
        sigma_joint_utility=j_sigma,
        best_bids=best_bids,
        best_joint_utility=j_star,
        transfers=transfers,
        per_agent_gain=share,
    )
    return AuditVerdict(OCA_PROOF, mech, VIOLATED, witness)


def recertify(
    verdict: AuditVerdict, chain: ChainState, txs: Sequence[Transaction]
) -> bool:
    """Re-evaluate a Violated verdict's witness from scratch.

    Returns True iff the witness still certifies a strict improvement through
    the mechanism's own allocate/settle path.  Used after import round-trips.
    """
    if not verdict.violated or verdict.witness is None:
        return not verdict.violated
    mech = verdict.mechanism
    txs = sorted(txs, key=lambda t: t.id)
    w = verdict.witness
    if isinstance(w, MmicWitness):
        real_ids = frozenset(t.id for t in txs)
        next_id = max(real_ids, default=0) + 1
        fakes = {
            next_id + j: fake_transaction(next_id + j, s, b) for j, (s, b) in enumerate(w.fake_txs)
        }
        pool = {t.id: t for t in txs} | fakes
        block = [pool[i] for i in w.block_ids]
        outcome = settle(mech, chain, block)
        dev_u = miner_utility(outcome, real_ids, mech.mu)
        honest = allocate(mech, chain, Mempool(tuple(txs)))
        honest_outcome = settle(mech, chain, [t for t in txs if t.id in set(honest.included)])
        honest_u = miner_utility(honest_outcome, real_ids, mech.mu)
        return dev_u == w.deviant_utility and honest_u == w.honest_utility and dev_u > honest_u
    if isinstance(w, DsicWitness):
        by_id = {t.id: t for t in txs}
        tx = by_id[w.tx_id]
        base_bids = dict(w.competitor_bids)
        base_bids[w.tx_id] = w.honest_bid
        dev_bids = dict(w.competitor_bids)
        dev_bids[w.tx_id] = w.deviating_bid
        u0 = user_utility(tx, _outcome_for_profile(mech, chain, txs, base_bids))
        u1 = user_utility(tx, _outcome_for_profile(mech, chain, txs, dev_bids))
        return u0 == w.honest_utility and u1 == w.deviant_utility and u1 > u0
    if isinstance(w, OcaWitness):
        vals = {t.id: t.valuation for t in txs}
        real_ids = frozenset(vals)
        sigma_outcome = _outcome_for_profile(mech, chain, txs, dict(w.sigma_bids))
        best_outcome = _outcome_for_profile(mech, chain, txs, dict(w.best_bids))
        if joint_utility(sigma_outcome, vals, mech.mu) != w.sigma_joint_utility:
            return False
        if joint_utility(best_outcome, vals, mech.mu) != w.best_joint_utility:
            return False
        gains = []
        for t in txs:
            gain = (
                user_utility(t, best_outcome)
                - w.transfers[t.id] * t.size
                - user_utility(t, sigma_outcome)
            )
            gains.append(gain)
        miner_gain = (
            miner_utility(best_outcome, real_ids, mech.mu)
            + sum(w.transfers[t.id] * t.size for t in txs)
            - miner_utility(sigma_outcome, real_ids, mech.mu)
        )
        gains.append(miner_gain)
        return all(g > 0 for g in gains)
    return False
