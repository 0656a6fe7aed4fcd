"""The 6 x 3 incentive report card and the named counterexample replays.

Every (mechanism, property) cell runs an audit battery: the constructed
counterexample instances first, then seeded random instances.  Cells whose
guarantee is regime-conditional (1559-family DSIC, tipless OCA-proofness)
run one battery per regime of the excessively-low-base-fee predicate and
report ``conditional``.  Each cell is compared against the expected verdict
pattern; mismatches flip the process exit code so CI can gate on the card.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .audit import DSIC, MMIC, OCA_PROOF, AuditVerdict, DeviationSpace, check_dsic, check_mmic, check_oca_proof
from .battery import (
    LOW,
    NOT_LOW,
    BatterySummary,
    beta_burn_1559_oca_instance,
    beta_burn_fpa_dsic_instance,
    beta_burn_fpa_oca_instance,
    default_strategy,
    dsic_battery,
    fpa_underbid_instance,
    m1559_low_dsic_instance,
    mmic_battery,
    oca_battery,
    spa_fake_bid_instance,
    spa_greedy_gap_instance,
    spa_underbid_dsic_instance,
    tipless_low_oca_instance,
)
from .mechanisms import BETA_BURN_1559, BETA_BURN_FPA, FPA, KINDS, M1559, SPA, TIPLESS

ALL_PASS = "all-pass"
VIOLATED_VERDICT = "violated"
CONDITIONAL = "conditional"

YES = "yes"
NO = "no"
USUALLY = "usually"
ALMOST = "almost"

EXPECTED_CARD: dict[tuple[str, str], str] = {
    (FPA, MMIC): YES,
    (FPA, DSIC): NO,
    (FPA, OCA_PROOF): YES,
    (SPA, MMIC): NO,
    (SPA, DSIC): ALMOST,
    (SPA, OCA_PROOF): ALMOST,
    (BETA_BURN_FPA, MMIC): YES,
    (BETA_BURN_FPA, DSIC): NO,
    (BETA_BURN_FPA, OCA_PROOF): NO,
    (M1559, MMIC): YES,
    (M1559, DSIC): USUALLY,
    (M1559, OCA_PROOF): YES,
    (BETA_BURN_1559, MMIC): YES,
    (BETA_BURN_1559, DSIC): USUALLY,
    (BETA_BURN_1559, OCA_PROOF): NO,
    (TIPLESS, MMIC): YES,
    (TIPLESS, DSIC): YES,
    (TIPLESS, OCA_PROOF): USUALLY,
}


@dataclass(frozen=True)
class ReportCardConfig:
    instances_per_cell: int = 60
    seed: int = 20260101
    grid_step: int = 1
    beta: Fraction = Fraction(1, 2)


@dataclass(frozen=True)
class ReportRow:
    mechanism: str
    property: str
    verdict: str  # all-pass | violated | conditional
    expected: str  # yes | no | usually | almost
    matches: bool
    detail: str


def _classify_single(summary: BatterySummary) -> tuple[str, str]:
    if summary.all_pass:
        return ALL_PASS, f"0/{summary.instances} violations"
    return VIOLATED_VERDICT, f"{summary.violations}/{summary.instances} violations"


def _classify_split(not_low: BatterySummary, low: BatterySummary) -> tuple[str, str]:
    detail = (
        f"not-low {not_low.violations}/{not_low.instances} violations; "
        f"low {low.violations}/{low.instances} violations"
    )
    return CONDITIONAL, detail


def _matches(expected: str, verdict: str, detail_summaries: Sequence[BatterySummary]) -> bool:
    if expected == YES:
        return verdict == ALL_PASS
    if expected in (NO, ALMOST):
        return verdict == VIOLATED_VERDICT
    # usually: pass away from the excessively-low regime, violated inside it
    if verdict != CONDITIONAL or len(detail_summaries) != 2:
        return False
    not_low, low = detail_summaries
    return not_low.all_pass and low.violations >= 1


def _mmic_cell(kind: str, cfg: ReportCardConfig) -> tuple[str, str, list[BatterySummary]]:
    extra = [spa_fake_bid_instance()] if kind == SPA else []
    summary = mmic_battery(
        kind, cfg.instances_per_cell, cfg.seed, beta=cfg.beta, extra_instances=extra
    )
    verdict, detail = _classify_single(summary)
    return verdict, detail, [summary]


def _dsic_cell(kind: str, cfg: ReportCardConfig) -> tuple[str, str, list[BatterySummary]]:
    seed = cfg.seed + 1000
    n = cfg.instances_per_cell
    if kind in (FPA, SPA):
        extra = [fpa_underbid_instance()] if kind == FPA else [spa_underbid_dsic_instance()]
        s = dsic_battery(kind, n, seed, extra_instances=extra, grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == BETA_BURN_FPA:
        s = dsic_battery(kind, n, seed, beta=cfg.beta,
                         extra_instances=[beta_burn_fpa_dsic_instance(cfg.beta)],
                         grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == TIPLESS:
        s = dsic_battery(kind, n, seed, delta_eq_mu=True, grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    # 1559 family: regime split, no overbidding, beta-burn runs at mu = 0
    mu = 0 if kind == BETA_BURN_1559 else None
    beta = cfg.beta if kind == BETA_BURN_1559 else None
    not_low = dsic_battery(
        kind, n, seed, beta=beta, mu=mu, forbid_overbidding=True,
        regime=NOT_LOW, grid_step=cfg.grid_step,
    )
    low = dsic_battery(
        kind, n, seed + 5000, beta=beta, mu=mu, forbid_overbidding=True,
        regime=LOW, grid_step=cfg.grid_step,
        extra_instances=[m1559_low_dsic_instance(kind, beta)],
    )
    v, d = _classify_split(not_low, low)
    return v, d, [not_low, low]


def _oca_cell(kind: str, cfg: ReportCardConfig) -> tuple[str, str, list[BatterySummary]]:
    seed = cfg.seed + 2000
    n = cfg.instances_per_cell
    if kind == FPA:
        s = oca_battery(kind, n, seed, grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == M1559:
        s = oca_battery(kind, n, seed, grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == SPA:
        s = oca_battery(kind, n, seed, extra_instances=[spa_greedy_gap_instance()],
                        grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == BETA_BURN_FPA:
        s = oca_battery(kind, n, seed, beta=cfg.beta,
                        extra_instances=[beta_burn_fpa_oca_instance(cfg.beta)],
                        grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    if kind == BETA_BURN_1559:
        s = oca_battery(kind, n, seed, beta=cfg.beta,
                        extra_instances=[beta_burn_1559_oca_instance(cfg.beta)],
                        grid_step=cfg.grid_step)
        v, d = _classify_single(s)
        return v, d, [s]
    # tipless: regime split with delta = mu
    not_low = oca_battery(kind, n, seed, delta_eq_mu=True, regime=NOT_LOW, grid_step=cfg.grid_step)
    low = oca_battery(kind, n, seed + 5000, delta_eq_mu=True, regime=LOW,
                      grid_step=cfg.grid_step, extra_instances=[tipless_low_oca_instance()])
    v, d = _classify_split(not_low, low)
    return v, d, [not_low, low]


def run_report_card(cfg: ReportCardConfig | None = None, kinds: Sequence[str] = KINDS) -> list[ReportRow]:
    """Audit all requested mechanisms against all three properties.

    Returns one row per (mechanism, property) pair, 18 for the full battery,
    ordered mechanism-major in the canonical kind order.
    """
    cfg = cfg or ReportCardConfig()
    rows = []
    cells = {MMIC: _mmic_cell, DSIC: _dsic_cell, OCA_PROOF: _oca_cell}
    for kind in kinds:
        for prop in (MMIC, DSIC, OCA_PROOF):
            verdict, detail, summaries = cells[prop](kind, cfg)
            expected = EXPECTED_CARD[(kind, prop)]
            rows.append(
                ReportRow(
                    mechanism=kind,
                    property=prop,
                    verdict=verdict,
                    expected=expected,
                    matches=_matches(expected, verdict, summaries),
                    detail=detail,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Named counterexample replays, one command each.
# ---------------------------------------------------------------------------


def _replay_spa_fake_bid():
    mech, chain, pool, dev = spa_fake_bid_instance()
    verdict = check_mmic(mech, chain, pool, dev)
    return verdict, chain, pool.transactions


def _replay_beta_burn_fpa_oca():
    mech, chain, txs = beta_burn_fpa_oca_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    verdict = check_oca_proof(mech, chain, txs, default_strategy(mech.kind, OCA_PROOF), dev)
    return verdict, chain, txs


def _replay_beta_burn_1559_oca():
    mech, chain, txs = beta_burn_1559_oca_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    verdict = check_oca_proof(mech, chain, txs, default_strategy(mech.kind, OCA_PROOF), dev)
    return verdict, chain, txs


def _replay_tipless_low_oca():
    mech, chain, txs = tipless_low_oca_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    verdict = check_oca_proof(mech, chain, txs, default_strategy(mech.kind, OCA_PROOF), dev)
    return verdict, chain, txs


def _replay_1559_low_dsic():
    mech, chain, txs = m1559_low_dsic_instance()
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs)
    verdict = check_dsic(mech, chain, txs, default_strategy(mech.kind, DSIC), dev,
                         forbid_overbidding=True)
    return verdict, chain, txs


COUNTEREXAMPLES: dict[str, Callable[[], tuple[AuditVerdict, object, tuple]]] = {
    "spa-fake-bid": _replay_spa_fake_bid,
    "beta-burn-fpa-oca": _replay_beta_burn_fpa_oca,
    "beta-burn-1559-oca": _replay_beta_burn_1559_oca,
    "tipless-low-basefee-oca": _replay_tipless_low_oca,
    "1559-low-basefee-dsic": _replay_1559_low_dsic,
}


def replay_counterexample(name: str):
    if name not in COUNTEREXAMPLES:
        raise KeyError(
            f"unknown counterexample {name!r}; available: {', '.join(sorted(COUNTEREXAMPLES))}"
        )
    return COUNTEREXAMPLES[name]()
