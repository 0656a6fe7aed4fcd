import random
from fractions import Fraction
from itertools import combinations

import pytest

from conftest import tx
from tfm_lab.audit import (
    AuditVerdict,
    DeviationSpace,
    SearchSpaceError,
    brute_force_joint_opt,
    check_dsic,
    check_mmic,
    check_oca_proof,
    individual_rationality_failures,
    recertify,
)
from tfm_lab.battery import (
    beta_burn_1559_oca_instance,
    m1559_low_dsic_instance,
    random_mmic_instance,
    random_valuation_instance,
    spa_fake_bid_instance,
    tipless_low_oca_instance,
)
from tfm_lab.mechanisms import beta_burn_fpa, fpa, m1559, settle, spa, tipless
from tfm_lab.model import Mempool, chain_at
from tfm_lab.strategies import (
    SCALED_1559,
    SCALED_FPA,
    STRAIGHTFORWARD_1559,
    TIPLESS_CAP,
    TRUTHFUL,
    BiddingStrategy,
    bid_parameters,
    eval_strategy,
)
from tfm_lab.model import induced_bid


class TestStrategies:
    def test_eval_examples(self):
        assert eval_strategy(BiddingStrategy(STRAIGHTFORWARD_1559), 20, 10, 2, 0) == 12
        assert eval_strategy(BiddingStrategy(TIPLESS_CAP), 4, 5, 0, 1) == 4
        assert eval_strategy(BiddingStrategy(SCALED_1559, Fraction(1, 2)), 20, 10, 0, 0) == 15
        assert eval_strategy(BiddingStrategy(TRUTHFUL), 7, 3, 1, 1) == 7

    def test_scaled_fpa_floors(self):
        s = BiddingStrategy(SCALED_FPA, Fraction(1, 2))
        assert eval_strategy(s, 7, 0, 0, 0) == 3  # floor(3.5)
        assert eval_strategy(s, 7, 0, 2, 0) == 4  # 2 + floor(2.5)

    def test_scaled_never_overbids(self):
        rng = random.Random(12)
        for _ in range(200):
            gamma = Fraction(rng.randint(1, 4), 4)
            for kind in (SCALED_FPA, SCALED_1559):
                s = BiddingStrategy(kind, gamma)
                v, r, mu = rng.randint(0, 20), rng.randint(0, 10), rng.randint(0, 2)
                assert 0 <= eval_strategy(s, v, r, mu, 0) <= v

    def test_gamma_validation(self):
        with pytest.raises(ValueError, match="gamma"):
            BiddingStrategy(SCALED_FPA, Fraction(0))

    def test_bid_parameters_reproduce_strategy_bid(self):
        rng = random.Random(13)
        for _ in range(200):
            kind = rng.choice((TRUTHFUL, STRAIGHTFORWARD_1559, SCALED_FPA, SCALED_1559))
            s = BiddingStrategy(kind, Fraction(1, 2))
            v, r, mu = rng.randint(0, 20), rng.randint(0, 10), rng.randint(0, 2)
            cap, tip = bid_parameters(s, v, r, mu, 0)
            assert induced_bid(cap, tip, r) == eval_strategy(s, v, r, mu, 0)

    def test_straightforward_cap_tracks_base_fee(self):
        # cap=v, tip=mu keeps the induced bid at min(r'+mu, v) as r moves
        cap, tip = bid_parameters(BiddingStrategy(STRAIGHTFORWARD_1559), 20, 5, 2, 0)
        assert (cap, tip) == (20, 2)
        assert induced_bid(cap, tip, 11) == 13


class TestDeviationSpace:
    def test_closure_points(self):
        mech = m1559(2, mu=2)
        txs = (tx(1, 1, 9, bid=6),)
        dev = DeviationSpace.for_instance(mech, 4, txs, dense=False)
        for point in (0, 3, 4, 5, 6, 7, 9, 10):  # r-1, r, r+1, r+mu(+1), bid(+1), v(+1), 0
            assert point in dev.bid_grid
        dense = DeviationSpace.for_instance(mech, 4, txs, dense=True)
        assert set(range(0, 11)) <= set(dense.bid_grid)

    def test_grid_sorted_dedup(self):
        dev = DeviationSpace(bid_grid=(3, 1, 3, 0))
        assert dev.bid_grid == (0, 1, 3)


class TestMmic:
    def test_spa_fake_bid_attack(self):
        mech, chain, pool, dev = spa_fake_bid_instance()
        v = check_mmic(mech, chain, pool, dev)
        assert v.violated
        assert v.witness.honest_utility == 9
        assert v.witness.deviant_utility == 16
        assert v.witness.fake_txs == ((1, 8),)
        assert recertify(v, chain, pool.transactions)

    def test_spa_witness_deterministic(self):
        mech, chain, pool, dev = spa_fake_bid_instance()
        assert check_mmic(mech, chain, pool, dev) == check_mmic(mech, chain, pool, dev)

    def test_fpa_random_instances_pass(self):
        for i in range(60):
            mech, chain, pool, dev = random_mmic_instance(3000 + i, "fpa")
            assert not check_mmic(mech, chain, pool, dev).violated

    def test_1559_priced_out_mempool_passes(self):
        # every fee cap below the base fee: honest block is empty, fakes only burn
        mech = m1559(2, mu=0)
        pool = Mempool((tx(1, 1, 4, bid=4), tx(2, 1, 3, bid=3)))
        dev = DeviationSpace.for_instance(mech, 9, pool.transactions, dense=False)
        v = check_mmic(mech, chain_at(9), pool, dev)
        assert not v.violated

    def test_spa_underfull_price_propping_found_without_fakes(self):
        # dropping the low bid props the uniform price even with zero fakes
        mech = spa(2)
        pool = Mempool((tx(1, 1, 10, bid=10), tx(2, 1, 2, bid=2)))
        dev = DeviationSpace.for_instance(mech, 0, pool.transactions, dense=False, max_fake_count=0)
        v = check_mmic(mech, chain_at(0), pool, dev)
        assert v.violated and v.witness.deviant_utility == 10

    def test_search_space_guard(self):
        mech = fpa(3)
        pool = Mempool(tuple(tx(i + 1, 1, 5, bid=5) for i in range(9)))
        dev = DeviationSpace.for_instance(mech, 0, pool.transactions)
        with pytest.raises(SearchSpaceError):
            check_mmic(mech, chain_at(0), pool, dev)


class TestDsic:
    def test_tipless_two_transaction_example(self):
        mech = tipless(2, delta=1, mu=1)
        txs = (tx(1, 1, 7), tx(2, 1, 3))
        dev = DeviationSpace.for_instance(mech, 5, txs)
        v = check_dsic(mech, chain_at(5), txs, BiddingStrategy(TIPLESS_CAP), dev)
        assert not v.violated

    def test_1559_low_base_fee_violated(self):
        mech, chain, txs = m1559_low_dsic_instance()
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        v = check_dsic(mech, chain, txs, BiddingStrategy(STRAIGHTFORWARD_1559), dev,
                       forbid_overbidding=True)
        assert v.violated
        assert v.witness.utility_delta > 0
        assert recertify(v, chain, txs)

    def test_1559_not_low_passes(self):
        for i in range(40):
            mech, chain, txs = random_valuation_instance(5200 + i, "1559", regime="not-low")
            dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
            v = check_dsic(mech, chain, txs, BiddingStrategy(STRAIGHTFORWARD_1559), dev,
                           forbid_overbidding=True)
            assert not v.violated, (i, v.witness)

    def test_fpa_truthful_not_dominant(self):
        mech = fpa(1)
        txs = (tx(1, 1, 10), tx(2, 1, 8))
        dev = DeviationSpace.for_instance(mech, 0, txs)
        v = check_dsic(mech, chain_at(0), txs, BiddingStrategy(TRUTHFUL), dev)
        assert v.violated
        assert recertify(v, chain_at(0), txs)

    def test_witness_deterministic(self):
        mech = fpa(1)
        txs = (tx(1, 1, 10), tx(2, 1, 8))
        dev = DeviationSpace.for_instance(mech, 0, txs)
        s = BiddingStrategy(TRUTHFUL)
        assert check_dsic(mech, chain_at(0), txs, s, dev) == check_dsic(mech, chain_at(0), txs, s, dev)

    def test_beta_burn_1559_matches_1559_verdicts_at_zero_cost(self):
        # identical total price per included transaction; same posted-price
        # behavior at mu = 0, so the DSIC verdicts coincide
        for i in range(25):
            m_plain, chain, txs = random_valuation_instance(6100 + i, "1559", mu=0)
            from tfm_lab.mechanisms import beta_burn_1559

            m_beta = beta_burn_1559(m_plain.target_size, Fraction(1, 2), mu=0)
            s = BiddingStrategy(STRAIGHTFORWARD_1559)
            dev_a = DeviationSpace.for_instance(m_plain, chain.base_fee, txs)
            dev_b = DeviationSpace.for_instance(m_beta, chain.base_fee, txs)
            va = check_dsic(m_plain, chain, txs, s, dev_a, forbid_overbidding=True)
            vb = check_dsic(m_beta, chain, txs, s, dev_b, forbid_overbidding=True)
            assert va.violated == vb.violated

    def test_search_space_guard(self):
        mech = fpa(3)
        txs = tuple(tx(i + 1, 1, 5) for i in range(5))
        dev = DeviationSpace.for_instance(mech, 0, txs)
        with pytest.raises(SearchSpaceError):
            check_dsic(mech, chain_at(0), txs, BiddingStrategy(TRUTHFUL), dev)


def _joint_opt_oracle_constant_burn(mech, r, txs, burn):
    # independent route: enumerate allocations, not bid profiles; valid for
    # mechanisms whose included-transaction burn is a constant
    best = 0
    for k in range(len(txs) + 1):
        for combo in combinations(txs, k):
            if sum(t.size for t in combo) > mech.max_size:
                continue
            best = max(best, sum((t.valuation - burn - mech.mu) * t.size for t in combo))
    return best


class TestJointOpt:
    def test_fpa_single_transaction(self):
        mech = fpa(2)
        txs = (tx(1, 1, 10),)
        dev = DeviationSpace.for_instance(mech, 0, txs)
        j, profile = brute_force_joint_opt(mech, chain_at(0), txs, dev)
        assert j == 10 and len(profile) == 1

    def test_empty_mempool(self):
        mech = fpa(2)
        dev = DeviationSpace.for_instance(mech, 0, ())
        assert brute_force_joint_opt(mech, chain_at(0), (), dev) == (0, ())

    def test_beta_burn_fpa_single_transaction_values(self):
        # derived by direct reasoning over the grid: at mu=0 a zero bid is
        # included at zero weight and burns nothing, so the optimum is v;
        # at mu=1 a bid of 1 is included at zero weight with burn floor(1/2)=0,
        # so the optimum is v - mu
        txs = (tx(1, 1, 10),)
        mech0 = beta_burn_fpa(2, Fraction(1, 2), mu=0)
        dev = DeviationSpace.for_instance(mech0, 0, txs)
        assert brute_force_joint_opt(mech0, chain_at(0), txs, dev)[0] == 10
        mech1 = beta_burn_fpa(2, Fraction(1, 2), mu=1)
        dev = DeviationSpace.for_instance(mech1, 0, txs)
        assert brute_force_joint_opt(mech1, chain_at(0), txs, dev)[0] == 9

    def test_matches_allocation_oracle_fpa_and_1559(self):
        rng = random.Random(41)
        for i in range(40):
            kind = "fpa" if i % 2 == 0 else "1559"
            mech, chain, txs = random_valuation_instance(7000 + i, kind, max_txs=3)
            dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
            j, _ = brute_force_joint_opt(mech, chain, txs, dev)
            burn = 0 if kind == "fpa" else chain.base_fee
            assert j == _joint_opt_oracle_constant_burn(mech, chain.base_fee, txs, burn)

    def test_matches_allocation_oracle_beta_burn_1559(self):
        import math

        for i in range(20):
            mech, chain, txs = random_valuation_instance(
                7500 + i, "beta-burn-1559", beta=Fraction(1, 2), max_txs=3
            )
            dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
            j, _ = brute_force_joint_opt(mech, chain, txs, dev)
            burn = math.floor(mech.beta * chain.base_fee)
            assert j == _joint_opt_oracle_constant_burn(mech, chain.base_fee, txs, burn)


class TestOcaProof:
    def test_fpa_scaled_passes(self):
        for i in range(30):
            mech, chain, txs = random_valuation_instance(8000 + i, "fpa", max_txs=3)
            dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
            v = check_oca_proof(mech, chain, txs, BiddingStrategy(SCALED_FPA), dev)
            assert not v.violated, (i, v.witness)

    def test_beta_burn_1559_constructed_violation(self):
        mech, chain, txs = beta_burn_1559_oca_instance(Fraction(1, 2), r=10)
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        v = check_oca_proof(mech, chain, txs, BiddingStrategy(SCALED_1559), dev)
        assert v.violated
        assert v.witness.sigma_joint_utility == 0
        assert v.witness.best_joint_utility == 1
        assert recertify(v, chain, txs)

    def test_tipless_low_constructed_violation(self):
        mech, chain, txs = tipless_low_oca_instance()
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        v = check_oca_proof(mech, chain, txs, BiddingStrategy(TIPLESS_CAP), dev)
        assert v.violated
        assert (v.witness.sigma_joint_utility, v.witness.best_joint_utility) == (2, 4)

    def test_witness_splits_surplus_strictly(self):
        mech, chain, txs = tipless_low_oca_instance()
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        w = check_oca_proof(mech, chain, txs, BiddingStrategy(TIPLESS_CAP), dev).witness
        n = len(txs)
        assert w.per_agent_gain == Fraction(w.best_joint_utility - w.sigma_joint_utility, n + 1)
        assert w.per_agent_gain > 0

    def test_gamma_invariance_on_representable_instances(self):
        # valuations chosen so gamma*(v - mu) is integral for every gamma tested
        mech = fpa(4, mu=0)
        txs = (tx(1, 2, 8), tx(2, 3, 12), tx(3, 2, 4))
        dev = DeviationSpace.for_instance(mech, 0, txs)
        results = []
        for gamma in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            v = check_oca_proof(mech, chain_at(0), txs, BiddingStrategy(SCALED_FPA, gamma), dev)
            assert not v.violated
            results.append(v.detail)
        assert len(set(results)) == 1  # same joint utility attained

    def test_gamma_invariance_scaled_1559(self):
        # v - mu - r multiples of 4 keep every scaled bid integral
        mech = m1559(3, mu=1)
        r = 2
        txs = (tx(1, 2, r + 1 + 8), tx(2, 3, r + 1 + 12), tx(3, 2, r + 1 + 4))
        dev = DeviationSpace.for_instance(mech, r, txs)
        results = []
        for gamma in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            v = check_oca_proof(mech, chain_at(r), txs, BiddingStrategy(SCALED_1559, gamma), dev)
            assert not v.violated
            results.append(v.detail)
        assert len(set(results)) == 1

    def test_individual_rationality_helper(self):
        mech = fpa(2)
        overbidder = tx(1, 1, 3, bid=5)
        out = settle(mech, chain_at(0), [overbidder])
        assert individual_rationality_failures(out, {1: 3}) == [1]
        assert individual_rationality_failures(out, {1: 5}) == []


def _naive_best_response(mech, chain, pool, dev):
    """Literal (fake set, block) enumeration through settle; no pruning at all."""
    from itertools import combinations_with_replacement

    from tfm_lab.model import fake_transaction, miner_utility

    real = list(pool)
    real_ids = {t.id for t in real}
    next_id = max(real_ids, default=0) + 1
    cands = [(s, b) for s in sorted(set(dev.fake_sizes)) for b in dev.bid_grid]
    combos = [()]
    for m in range(1, dev.max_fake_count + 1):
        combos.extend(combinations_with_replacement(cands, m))
    best = 0  # the empty block is always available
    for combo in combos:
        fakes = [fake_transaction(next_id + j, s, b) for j, (s, b) in enumerate(combo)]
        pool2 = real + fakes
        for mask in range(1 << len(pool2)):
            block = [pool2[i] for i in range(len(pool2)) if mask >> i & 1]
            if sum(t.size for t in block) > mech.max_size:
                continue
            try:
                out = settle(mech, chain, block)
            except ValueError:
                continue  # protocol-invalid block
            best = max(best, miner_utility(out, real_ids, mech.mu))
    return best


class TestMmicAgainstNaiveEnumeration:
    def test_fast_search_matches_literal_enumeration(self):
        from tfm_lab.audit import best_myopic_response
        from tfm_lab.mechanisms import KINDS

        rng = random.Random(314159)
        for trial in range(120):
            kind = KINDS[trial % len(KINDS)]
            mech, chain, pool, dev = random_mmic_instance(
                40_000 + trial, kind, max_txs=4, size_max=3, bid_max=8, max_fakes=1
            )
            res = best_myopic_response(mech, chain, pool, dev)
            assert res.best_utility == _naive_best_response(mech, chain, pool, dev), (
                trial,
                kind,
            )
            assert res.best_utility >= res.honest_utility

    def test_two_fakes_spot_check(self):
        from tfm_lab.audit import best_myopic_response

        for trial in range(20):
            mech, chain, pool, dev = random_mmic_instance(
                50_000 + trial, "spa", max_txs=3, size_max=2, bid_max=6, max_fakes=2
            )
            res = best_myopic_response(mech, chain, pool, dev)
            assert res.best_utility == _naive_best_response(mech, chain, pool, dev), trial


class TestVerdictShape:
    def test_pass_has_no_witness(self):
        mech, chain, pool, dev = random_mmic_instance(9100, "fpa")
        v = check_mmic(mech, chain, pool, dev)
        assert isinstance(v, AuditVerdict) and v.witness is None

    def test_every_violation_recertifies(self):
        batch = []
        mech, chain, pool, dev = spa_fake_bid_instance()
        batch.append((check_mmic(mech, chain, pool, dev), chain, pool.transactions))
        mech, chain, txs = m1559_low_dsic_instance()
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        batch.append(
            (check_dsic(mech, chain, txs, BiddingStrategy(STRAIGHTFORWARD_1559), dev, True), chain, txs)
        )
        mech, chain, txs = tipless_low_oca_instance()
        dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
        batch.append((check_oca_proof(mech, chain, txs, BiddingStrategy(TIPLESS_CAP), dev), chain, txs))
        for verdict, chain, txs in batch:
            assert verdict.violated and recertify(verdict, chain, txs)
