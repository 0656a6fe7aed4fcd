"""Fee-mechanism lab: executable TFMs, incentive audits, and block simulation."""

from .audit import (
    DSIC,
    MMIC,
    OCA_PROOF,
    AuditVerdict,
    DeviationSpace,
    DsicWitness,
    MmicWitness,
    OcaWitness,
    SearchSpaceError,
    StrategyNotIndividuallyRational,
    brute_force_joint_opt,
    check_dsic,
    check_mmic,
    check_oca_proof,
    recertify,
)
from .basefee import BaseFeeSchedule, advance, is_excessively_low, next_base_fee, replay
from .mechanisms import (
    BETA_BURN_1559,
    BETA_BURN_FPA,
    FPA,
    KINDS,
    M1559,
    SPA,
    TIPLESS,
    AllocationResult,
    Mechanism,
    allocate,
    beta_burn_1559,
    beta_burn_fpa,
    fpa,
    greedy_allocate,
    knapsack_max,
    m1559,
    settle,
    spa,
    tipless,
)
from .model import (
    BlockOutcome,
    ChainState,
    Mempool,
    Money,
    Transaction,
    chain_at,
    fake_transaction,
    induced_bid,
    is_feasible,
    joint_utility,
    miner_utility,
    user_utility,
)
from .report import ReportCardConfig, ReportRow, replay_counterexample, run_report_card
from .sim import (
    DemandProcess,
    DemandSpike,
    MempoolPolicy,
    Scenario,
    SizeDistribution,
    Trace,
    TraceRow,
    ValuationDistribution,
    run,
    step,
    summarize,
    summarize_for,
)
from .strategies import BiddingStrategy, bid_parameters, eval_strategy

__version__ = "0.1.0"
